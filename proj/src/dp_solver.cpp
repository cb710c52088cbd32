#include "lotcycle/dp_solver.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace lotcycle {

namespace {

using Wide = __int128;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kMaxDenominator = 1'000'000;
constexpr std::int64_t kMaxChainEntries = 20'000'000;
constexpr std::int64_t kMaxReplayNodes = 2'000'000;

std::int64_t checked_pow(std::int64_t base, std::int64_t exp, std::int64_t limit) {
    std::int64_t out = 1;
    for (std::int64_t i = 0; i < exp; ++i) {
        if (out > limit / base) return limit + 1;
        out *= base;
    }
    return out;
}

std::int64_t floor_wide(const BigInt& num, const BigInt& den) {
    return clamp_to_int64(floor_of(Rational(num, den)));
}

}  // namespace

void SolverConfig::validate() const {
    if (epsilon <= 0 || epsilon >= Rational(1, 3)) {
        throw std::invalid_argument("epsilon must lie in (0, 1/3)");
    }
    if (base && *base < 2) throw std::invalid_argument("base must be at least 2");
    if (cycle_grid_ratio && *cycle_grid_ratio <= 1) {
        throw std::invalid_argument("cycle grid ratio must exceed 1");
    }
    if (lambda && (*lambda <= 0 || *lambda > 1)) {
        throw std::invalid_argument("lambda must lie in (0, 1]");
    }
    if (acceptability_slack && *acceptability_slack < 0) {
        throw std::invalid_argument("acceptability slack must be nonnegative");
    }
    if (cycle_override && *cycle_override <= 0) {
        throw std::invalid_argument("cycle length must be positive");
    }
    if (state_cap <= 0 || action_cap <= 0) throw std::invalid_argument("caps must be positive");
    if (!(time_limit > 0)) throw std::invalid_argument("time limit must be positive");
    if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
    shape.validate();
    const int spread = shape.plus_offset - shape.minus_offset;
    if (spread < shape.class_exponent || spread > 2 * shape.class_exponent) {
        throw std::invalid_argument(
            "grid shape needs class_exponent <= plus_offset - minus_offset <= 2*class_exponent");
    }
}

ResolvedConfig resolve_config(const Instance& instance, const SolverConfig& config) {
    config.validate();
    const Rational n(static_cast<long>(instance.size()));
    ResolvedConfig out;
    out.epsilon = config.epsilon;
    if (config.base) {
        out.base = *config.base;
    } else {
        out.base = std::max<int>(2, static_cast<int>(clamp_to_int64(ceil_of(n / config.epsilon))));
    }
    out.cycle_grid_ratio = config.cycle_grid_ratio.value_or(1 + config.epsilon);
    out.lambda = config.lambda.value_or(config.epsilon / n);
    if (out.lambda > 1) out.lambda = 1;
    out.slack = config.acceptability_slack.value_or(config.epsilon);
    out.shape = config.shape;
    return out;
}

std::vector<Rational> enumerate_cycle_guesses(const DerivedConstants& constants,
                                              const Rational& ratio) {
    if (ratio <= 1) throw std::invalid_argument("cycle grid ratio must exceed 1");
    if (!(constants.cycle_lo > 0) || constants.cycle_lo > constants.cycle_hi) {
        throw std::invalid_argument("cycle range is empty");
    }
    Rational lo = approximate(constants.cycle_lo, kMaxDenominator);
    if (lo <= 0) lo = from_double(constants.cycle_lo);
    const Rational top = ratio * from_double(constants.cycle_hi);
    std::vector<Rational> out;
    for (Rational t = lo; t <= top; t *= ratio) out.push_back(t);
    if (out.empty()) out.push_back(lo);
    return out;
}

PartitionEnumeration enumerate_partitions(const Instance& instance, int class_limit,
                                          const SolverConfig& config) {
    PartitionEnumeration out;
    if (config.partition_override) {
        out.partitions.push_back(*config.partition_override);
        return out;
    }
    if (class_limit < 1) throw std::invalid_argument("class limit must be at least 1");
    const auto rc = resolve_config(instance, config);
    const std::size_t n = instance.size();
    const std::int64_t total =
        checked_pow(class_limit, static_cast<std::int64_t>(n), config.action_cap);
    if (total > config.action_cap) {
        out.cap_hit = true;
        return out;
    }
    std::vector<int> digits(n, 1);
    for (std::int64_t c = 0; c < total; ++c) {
        FrequencyPartition p;
        p.base = rc.base;
        p.shape = rc.shape;
        for (std::size_t i = 0; i < n; ++i) p.class_of[instance.commodities[i].id] = digits[i];
        out.partitions.push_back(std::move(p));
        for (std::size_t i = n; i-- > 0;) {
            if (++digits[i] <= class_limit) break;
            digits[i] = 1;
        }
    }
    return out;
}

std::string DpState::key() const {
    std::string out = std::to_string(q) + ':' + std::to_string(space_index);
    for (const auto& p : prev) {
        out += '|';
        out += std::to_string(p.mask);
        out += ',';
        out += std::to_string(p.next_order);
    }
    return out;
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::solved: return "solved";
        case SolveStatus::infeasible_enumeration: return "infeasible_enumeration";
        case SolveStatus::resource_cap_hit: return "resource_cap_hit";
    }
    return "unknown";
}

struct DpContext::Layout {
    enum class Next { none, adjacent, skip };

    int q = 0;
    std::vector<int> ids;
    std::int64_t length = 0;
    std::int64_t ystep = 0;
    std::int64_t S = 0;
    std::int64_t M = 0;
    std::int64_t P = 0;
    Next next = Next::none;
    int q_next = 0;
    std::int64_t copies = 1;
    std::vector<std::int64_t> g;
    std::vector<double> K;
    std::vector<double> H;
    std::vector<std::int64_t> prev_units;       // previous class space at each y-point
    std::vector<std::int64_t> prev_exit_units;  // ... just before each sub-interval exit
    std::vector<std::int64_t> prev_exit_steps;
};

DpContext::DpContext(const Instance& instance, const FrequencyPartition& partition,
                     const Rational& cycle_length, const ResolvedConfig& config,
                     ActionSearch search, bool record_trace, std::shared_ptr<SolveBudget> budget)
    : instance_(instance),
      partition_(partition),
      grid_(partition, BreakpointGrid::required_grid_size(partition), cycle_length),
      cycle_length_(cycle_length),
      config_(config),
      search_(search),
      record_trace_(record_trace),
      budget_(std::move(budget)) {
    if (partition_.base != config_.base || !(partition_.shape == config_.shape)) {
        throw std::invalid_argument("partition base or grid shape differs from the solver config");
    }
    if (partition_.class_of.size() != instance_.size()) {
        throw std::invalid_argument("partition must classify every commodity");
    }
    for (const auto& c : instance_.commodities) {
        if (!partition_.class_of.count(c.id)) {
            throw std::invalid_argument("partition has no class for commodity " + std::to_string(c.id));
        }
    }
    classes_ = partition_.nonempty_classes();
    for (int q : classes_) members_[q] = partition_.members(q);

    BigInt denominator = 1;
    for (const auto& c : instance_.commodities) {
        denominator = lcm_of(denominator, boost::multiprecision::denominator(c.space_per_unit));
    }
    std::int64_t max_units = 0;
    for (const auto& c : instance_.commodities) {
        BigInt g = boost::multiprecision::numerator(c.space_per_unit * Rational(denominator));
        if (!fits_int64(g)) throw std::overflow_error("space coefficients too large");
        units_[c.id] = g.convert_to<std::int64_t>();
        max_units = std::max(max_units, units_[c.id]);
        order_cost_[c.id] = to_double(c.order_cost);
        holding_rate_[c.id] = to_double(c.holding_rate);
    }
    const Wide worst = static_cast<Wide>(max_units) * 2 * grid_.grid_size() *
                       static_cast<Wide>(instance_.size() + 1);
    if (worst > static_cast<Wide>(std::numeric_limits<std::int64_t>::max() / 4)) {
        throw std::overflow_error("space units overflow int64 on this grid");
    }
    const Rational tick = cycle_length_ / grid_.grid_size();
    tick_ = to_double(tick);
    units_to_space_ = tick / Rational(denominator);
    units_per_step_ = config_.lambda * instance_.capacity / units_to_space_;
    k_max_ = clamp_to_int64(ceil_of((1 + config_.slack) / config_.lambda));
    thresholds_.resize(static_cast<std::size_t>(k_max_ + 2));
    for (std::int64_t k = 0; k <= k_max_ + 1; ++k) {
        Rational room = (1 + config_.slack - config_.lambda * k) * instance_.capacity;
        thresholds_[k] = room < 0 ? -1 : clamp_to_int64(floor_of(room / units_to_space_));
    }
}

const std::vector<int>& DpContext::members(int q) const {
    static const std::vector<int> empty;
    auto it = members_.find(q);
    return it == members_.end() ? empty : it->second;
}

std::int64_t DpContext::lambda_steps(std::int64_t units) const {
    const BigInt& num = boost::multiprecision::numerator(units_per_step_);
    const BigInt& den = boost::multiprecision::denominator(units_per_step_);
    if (fits_int64(num) && fits_int64(den)) {
        Wide top = static_cast<Wide>(units) * den.convert_to<std::int64_t>();
        Wide bottom = num.convert_to<std::int64_t>();
        Wide q = top / bottom;
        if (top % bottom != 0 && top < 0) --q;
        return q > std::numeric_limits<std::int64_t>::max() ? std::numeric_limits<std::int64_t>::max()
                                                             : static_cast<std::int64_t>(q);
    }
    return floor_wide(BigInt(units) * den, num);
}

std::int64_t DpContext::threshold(std::int64_t k) const {
    if (k < 0) throw std::out_of_range("negative space index");
    if (k > k_max_ + 1) return -1;
    return thresholds_[k];
}

DpState DpContext::top_state() const {
    return DpState{classes_.front(), {}, 0};
}

std::int64_t DpContext::top_copies() const {
    return grid_.minus_count(classes_.front());
}

DpContext::Layout DpContext::layout_for(const DpState& state) const {
    Layout out;
    out.q = state.q;
    out.ids = members(state.q);
    if (out.ids.empty()) throw std::invalid_argument("state class has no commodities");
    out.length = grid_.minus_step(state.q);
    out.ystep = grid_.plus_step(state.q);
    out.S = out.length / out.ystep;

    auto it = std::upper_bound(classes_.begin(), classes_.end(), state.q);
    if (it == classes_.end()) {
        out.next = Layout::Next::none;
        out.M = out.S;
        out.P = 1;
    } else {
        out.q_next = *it;
        out.next = out.q_next == state.q + 1 ? Layout::Next::adjacent : Layout::Next::skip;
        out.M = grid_.minus_count(state.q + 1) / grid_.minus_count(state.q);
        out.P = out.S / out.M;
        if (out.next == Layout::Next::skip) {
            out.copies = grid_.minus_count(out.q_next) / grid_.minus_count(state.q + 1);
        }
    }
    for (int id : out.ids) {
        out.g.push_back(units_.at(id));
        out.K.push_back(order_cost_.at(id));
        out.H.push_back(holding_rate_.at(id));
    }

    out.prev_units.assign(out.S, 0);
    out.prev_exit_units.assign(out.M, 0);
    out.prev_exit_steps.assign(out.M, 0);
    if (!state.prev.empty()) {
        const auto& prev_ids = members(state.q - 1);
        if (prev_ids.size() != state.prev.size()) {
            throw std::invalid_argument("previous-class orders do not match class q-1");
        }
        const std::int64_t xstep = grid_.plus_step(state.q - 1);
        const std::int64_t R = out.length / xstep;
        if (R > 64) throw std::overflow_error("previous-class breakpoints exceed 64 per interval");
        const std::int64_t prev_span = grid_.plus_count(state.q - 1) / grid_.minus_count(state.q - 1);
        for (std::size_t i = 0; i < prev_ids.size(); ++i) {
            const auto& po = state.prev[i];
            if ((R < 64 && (po.mask >> R) != 0) || po.next_order < 0 || po.next_order >= prev_span) {
                throw std::invalid_argument("previous-class orders out of range");
            }
            const std::int64_t g = units_.at(prev_ids[i]);
            // First order strictly after tick t (or at/after when inclusive).
            auto next_order = [&](std::int64_t t, bool inclusive) {
                for (std::int64_t j = 0; j < R; ++j) {
                    if (!(po.mask >> j & 1U)) continue;
                    const std::int64_t x = j * xstep;
                    if (x > t || (inclusive && x == t)) return x;
                }
                return out.length + po.next_order * xstep;
            };
            for (std::int64_t s = 0; s < out.S; ++s) {
                const std::int64_t t = s * out.ystep;
                out.prev_units[s] += g * (next_order(t, false) - t);
            }
            for (std::int64_t m = 0; m < out.M; ++m) {
                const std::int64_t e = (m + 1) * out.P * out.ystep;
                out.prev_exit_units[m] += g * (next_order(e, true) - e);
            }
        }
        for (std::int64_t m = 0; m < out.M; ++m) {
            out.prev_exit_steps[m] = lambda_steps(out.prev_exit_units[m]);
        }
    }
    return out;
}

void DpContext::charge_actions(std::int64_t count) {
    actions_tested_ += count;
    const std::int64_t total = budget_->actions.fetch_add(count) + count;
    if (total > budget_->action_cap) {
        budget_->exhausted = true;
        throw ResourceCapHit("action cap reached");
    }
    if (budget_->exhausted) throw ResourceCapHit("another run exhausted the budget");
    if (std::chrono::steady_clock::now() > budget_->deadline) {
        budget_->exhausted = true;
        throw ResourceCapHit("time limit reached");
    }
}

std::shared_ptr<const StateValue> DpContext::lookup(const DpState& state) const {
    auto it = memo_.find(state.key());
    return it == memo_.end() ? nullptr : it->second;
}

std::shared_ptr<const StateValue> DpContext::solve_state(const DpState& state) {
    const std::string key = state.key();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (budget_->exhausted) throw ResourceCapHit("another run exhausted the budget");
    if (budget_->states.fetch_add(1) + 1 > budget_->state_cap) {
        budget_->exhausted = true;
        throw ResourceCapHit("state cap reached");
    }
    if (std::chrono::steady_clock::now() > budget_->deadline) {
        budget_->exhausted = true;
        throw ResourceCapHit("time limit reached");
    }
    ++states_expanded_;
    auto value = std::make_shared<const StateValue>(compute(state));
    memo_.emplace(key, value);
    if (record_trace_) emit_trace(state, *value);
    return value;
}

StateValue DpContext::compute(const DpState& state) {
    if (state.space_index < 0) throw std::invalid_argument("negative space index");
    if (state.space_index > k_max_) return StateValue{};
    const Layout layout = layout_for(state);
    return search_ == ActionSearch::enumerate ? compute_enumerate(state, layout)
                                              : compute_chain(state, layout);
}

StateValue DpContext::compute_chain(const DpState& state, const Layout& L) {
    const std::int64_t f = static_cast<std::int64_t>(L.ids.size());
    const std::int64_t S = L.S, M = L.M, P = L.P;
    if (P * f > 30) throw ResourceCapHit("joint action space of one sub-interval is too large");
    const std::uint64_t joint = std::uint64_t{1} << (P * f);
    const std::uint64_t pmask = (std::uint64_t{1} << P) - 1;
    const std::int64_t thr = threshold(state.space_index);

    struct Entry {
        double cost = kInf;
        std::uint64_t action = 0;
        std::int64_t from = -1;
    };
    // best[m][r]: cheapest choice for sub-intervals m..M-1 given, per commodity,
    // the index of its first order at or after sub-interval m (S = the exit).
    auto domain = [&](std::int64_t m) { return S - m * P + 1; };
    auto table_size = [&](std::int64_t m) {
        const std::int64_t size = checked_pow(domain(m), f, kMaxChainEntries);
        if (size > kMaxChainEntries) throw ResourceCapHit("chain table too large");
        return size;
    };
    auto decode = [&](std::int64_t index, std::int64_t m, std::vector<std::int64_t>& r) {
        const std::int64_t d = domain(m), lo = m * P;
        for (std::int64_t i = 0; i < f; ++i) {
            r[i] = lo + index % d;
            index /= d;
        }
    };
    auto encode = [&](const std::vector<std::int64_t>& r, std::int64_t m) {
        const std::int64_t d = domain(m), lo = m * P;
        std::int64_t index = 0;
        for (std::int64_t i = f; i-- > 0;) index = index * d + (r[i] - lo);
        return index;
    };
    auto adjacent_child = [&](std::uint64_t action, const std::vector<std::int64_t>& r,
                              std::int64_t m) {
        DpState child{state.q + 1, {}, std::min(state.space_index + L.prev_exit_steps[m], k_max_ + 1)};
        for (std::int64_t i = 0; i < f; ++i) {
            child.prev.push_back({(action >> (i * P)) & pmask, r[i] - (m + 1) * P});
        }
        return child;
    };
    auto skip_child = [&](const std::vector<std::int64_t>& r, std::int64_t m) {
        std::int64_t units = L.prev_exit_units[m];
        for (std::int64_t i = 0; i < f; ++i) units += L.g[i] * (r[i] - (m + 1) * P) * L.ystep;
        const std::int64_t k = std::min(state.space_index + lambda_steps(units), k_max_ + 1);
        return DpState{L.q_next, {}, k};
    };

    std::vector<std::vector<Entry>> best(static_cast<std::size_t>(M + 1));
    best[M].assign(1, Entry{0.0, 0, -1});
    std::vector<std::int64_t> r(f), rout(f), occ(P);
    std::uint64_t forced = 0;
    for (std::int64_t i = 0; i < f; ++i) forced |= std::uint64_t{1} << (i * P);

    for (std::int64_t m = M; m-- > 0;) {
        best[m].assign(static_cast<std::size_t>(table_size(m)), Entry{});
        const std::int64_t lo = m * P;
        for (std::int64_t rin = 0; rin < static_cast<std::int64_t>(best[m + 1].size()); ++rin) {
            const double tail = best[m + 1][rin].cost;
            if (tail == kInf) continue;
            decode(rin, m + 1, r);
            charge_actions(static_cast<std::int64_t>(joint));
            std::shared_ptr<const StateValue> skipped;
            if (L.next == Layout::Next::skip) {
                skipped = solve_state(skip_child(r, m));
                if (!skipped->feasible) continue;
            }
            for (std::uint64_t a = 0; a < joint; ++a) {
                if (m == 0 && (a & forced) != forced) continue;
                double cost = 0.0;
                for (std::int64_t p = 0; p < P; ++p) occ[p] = L.prev_units[lo + p];
                for (std::int64_t i = 0; i < f; ++i) {
                    const std::uint64_t bits = (a >> (i * P)) & pmask;
                    std::int64_t nxt = r[i];
                    for (std::int64_t p = P; p-- > 0;) {
                        const std::int64_t s = lo + p;
                        occ[p] += L.g[i] * (nxt - s) * L.ystep;
                        if (bits >> p & 1U) {
                            const double gap = static_cast<double>((nxt - s) * L.ystep) * tick_;
                            cost += L.K[i] + L.H[i] * gap * gap;
                            nxt = s;
                        }
                    }
                    rout[i] = nxt;
                }
                bool acceptable = true;
                for (std::int64_t p = 0; p < P; ++p) {
                    if (occ[p] > thr) {
                        acceptable = false;
                        break;
                    }
                }
                if (!acceptable) continue;
                double child_cost = 0.0;
                if (L.next == Layout::Next::adjacent) {
                    auto child = solve_state(adjacent_child(a, r, m));
                    if (!child->feasible) continue;
                    child_cost = child->cost;
                } else if (L.next == Layout::Next::skip) {
                    child_cost = skipped->cost * static_cast<double>(L.copies);
                }
                const double total = cost + child_cost + tail;
                Entry& slot = best[m][encode(rout, m)];
                if (total < slot.cost) slot = Entry{total, a, rin};
            }
        }
    }

    StateValue out;
    // Every commodity orders at y_1, so the chain starts with r = 0 everywhere.
    if (best[0].empty() || best[0][0].cost == kInf) return out;
    out.feasible = true;
    out.cost = best[0][0].cost;
    out.orders.assign(f, {});
    std::int64_t cur = 0;
    for (std::int64_t m = 0; m < M; ++m) {
        const Entry e = best[m][cur];
        decode(e.from, m + 1, r);
        for (std::int64_t i = 0; i < f; ++i) {
            const std::uint64_t bits = (e.action >> (i * P)) & pmask;
            for (std::int64_t p = 0; p < P; ++p) {
                if (bits >> p & 1U) out.orders[i].push_back(m * P + p);
            }
        }
        if (L.next == Layout::Next::adjacent) {
            out.children.push_back({adjacent_child(e.action, r, m), 1});
        } else if (L.next == Layout::Next::skip) {
            out.children.push_back({skip_child(r, m), L.copies});
        }
        cur = e.from;
    }
    return out;
}

StateValue DpContext::compute_enumerate(const DpState& state, const Layout& L) {
    const std::int64_t f = static_cast<std::int64_t>(L.ids.size());
    const std::int64_t S = L.S, M = L.M, P = L.P;
    const std::int64_t free_bits = f * (S - 1);
    if (free_bits > 40 || (std::int64_t{1} << free_bits) > budget_->action_cap) {
        throw ResourceCapHit("literal action enumeration exceeds the action cap");
    }
    const std::uint64_t total = std::uint64_t{1} << free_bits;
    const std::uint64_t free_mask = (std::uint64_t{1} << (S - 1)) - 1;
    const std::int64_t thr = threshold(state.space_index);

    StateValue out;
    std::vector<std::uint64_t> masks(f);
    std::vector<std::int64_t> occ(S);
    std::vector<std::vector<std::int64_t>> next(f, std::vector<std::int64_t>(S + 1));
    std::vector<ChildCall> children;
    constexpr std::uint64_t kBatch = 4096;
    for (std::uint64_t a = 0; a < total; ++a) {
        if (a % kBatch == 0) charge_actions(static_cast<std::int64_t>(std::min<std::uint64_t>(kBatch, total - a)));
        for (std::int64_t i = 0; i < f; ++i) {
            masks[i] = 1U | (((a >> (i * (S - 1))) & free_mask) << 1);
        }
        double cost = 0.0;
        for (std::int64_t s = 0; s < S; ++s) occ[s] = L.prev_units[s];
        for (std::int64_t i = 0; i < f; ++i) {
            // next[i][s]: first order at or after index s (S = exit)
            next[i][S] = S;
            for (std::int64_t s = S; s-- > 0;) next[i][s] = (masks[i] >> s & 1U) ? s : next[i][s + 1];
            for (std::int64_t s = 0; s < S; ++s) {
                const std::int64_t after = next[i][s + 1];
                occ[s] += L.g[i] * (after - s) * L.ystep;
                if (masks[i] >> s & 1U) {
                    const double gap = static_cast<double>((after - s) * L.ystep) * tick_;
                    cost += L.K[i] + L.H[i] * gap * gap;
                }
            }
        }
        if (std::any_of(occ.begin(), occ.end(), [&](std::int64_t u) { return u > thr; })) continue;
        bool extendable = true;
        children.clear();
        for (std::int64_t m = 0; m < M && L.next != Layout::Next::none; ++m) {
            const std::int64_t exit = (m + 1) * P;
            if (L.next == Layout::Next::adjacent) {
                DpState child{state.q + 1, {},
                              std::min(state.space_index + L.prev_exit_steps[m], k_max_ + 1)};
                for (std::int64_t i = 0; i < f; ++i) {
                    child.prev.push_back({(masks[i] >> (m * P)) & ((std::uint64_t{1} << P) - 1),
                                          next[i][exit] - exit});
                }
                auto value = solve_state(child);
                if (!value->feasible) {
                    extendable = false;
                    break;
                }
                cost += value->cost;
                children.push_back({child, 1});
            } else {
                std::int64_t units = L.prev_exit_units[m];
                for (std::int64_t i = 0; i < f; ++i) units += L.g[i] * (next[i][exit] - exit) * L.ystep;
                DpState child{L.q_next, {},
                              std::min(state.space_index + lambda_steps(units), k_max_ + 1)};
                auto value = solve_state(child);
                if (!value->feasible) {
                    extendable = false;
                    break;
                }
                cost += value->cost * static_cast<double>(L.copies);
                children.push_back({child, L.copies});
            }
        }
        if (!extendable) continue;
        if (!out.feasible || cost < out.cost) {
            out.feasible = true;
            out.cost = cost;
            out.children = children;
            out.orders.assign(f, {});
            for (std::int64_t i = 0; i < f; ++i) {
                for (std::int64_t s = 0; s < S; ++s) {
                    if (masks[i] >> s & 1U) out.orders[i].push_back(s);
                }
            }
        }
    }
    return out;
}

void DpContext::emit_trace(const DpState& state, const StateValue& value) {
    nlohmann::json line;
    line["q"] = state.q;
    line["prev_orders"] = nlohmann::json::array();
    for (const auto& p : state.prev) {
        line["prev_orders"].push_back({{"mask", p.mask}, {"next", p.next_order}});
    }
    line["L_index"] = state.space_index;
    if (value.feasible) {
        line["best_cost"] = value.cost;
        line["action"] = value.orders;
    } else {
        line["best_cost"] = nullptr;
        line["action"] = nullptr;
    }
    trace_lines_.push_back(line.dump());
}

ZioCyclicPolicy DpContext::assemble() const {
    ZioCyclicPolicy policy;
    policy.grid_size = grid_.grid_size();
    policy.cycle_length = cycle_length_;
    for (const auto& c : instance_.commodities) policy.orders[c.id];

    auto expand = [&](auto&& self, const DpState& state, std::int64_t origin) -> void {
        auto value = lookup(state);
        if (!value || !value->feasible) throw std::logic_error("decision tree has an unsolved state");
        const auto& ids = members(state.q);
        const std::int64_t ystep = grid_.plus_step(state.q);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto& ticks = policy.orders[ids[i]];
            for (auto s : value->orders[i]) ticks.push_back(origin + s * ystep);
        }
        if (value->children.empty()) return;
        const std::int64_t span = grid_.minus_step(state.q) / static_cast<std::int64_t>(value->children.size());
        for (std::size_t m = 0; m < value->children.size(); ++m) {
            const auto& call = value->children[m];
            const std::int64_t stride = grid_.minus_step(call.state.q);
            for (std::int64_t j = 0; j < call.copies; ++j) {
                self(self, call.state, origin + static_cast<std::int64_t>(m) * span + j * stride);
            }
        }
    };
    const DpState top = top_state();
    const std::int64_t stride = grid_.minus_step(top.q);
    for (std::int64_t c = 0; c < top_copies(); ++c) expand(expand, top, c * stride);
    for (auto& [id, ticks] : policy.orders) {
        (void)id;
        std::sort(ticks.begin(), ticks.end());
    }
    return policy;
}

namespace {

struct RunOutcome {
    bool attempted = false;
    SolveStatus status = SolveStatus::infeasible_enumeration;
    std::string message;
    Rational cycle;
    FrequencyPartition partition;
    std::shared_ptr<DpContext> context;
    double dp_value = 0.0;
    ZioCyclicPolicy pre;
    ZioCyclicPolicy post;
    CostBreakdown pre_cost;
    CostBreakdown post_cost;
    Rational pre_peak;
    Rational post_peak;
    Rational alpha = 1;
    std::int64_t states = 0;
    std::int64_t actions = 0;
};

Rational rescale_factor(const SolverConfig& config, const ResolvedConfig& rc,
                        const Instance& instance, const CostBreakdown& cost, const Rational& peak) {
    std::optional<Rational> fit;
    if (peak > 0) fit = instance.capacity / peak;
    Rational alpha;
    if (config.rescale == RescaleMode::fixed) {
        alpha = 1 / (1 + 2 * rc.slack);
    } else if (cost.holding_per_cycle > 0) {
        const double best = std::sqrt(to_double(cost.ordering_per_cycle / cost.holding_per_cycle));
        alpha = approximate(best, kMaxDenominator);
        if (alpha <= 0) alpha = from_double(best);
    } else {
        alpha = 1;
    }
    if (fit && *fit < alpha) alpha = *fit;
    return alpha;
}

RunOutcome run_one(const Instance& instance, const SolverConfig& config, const ResolvedConfig& rc,
                   const Rational& cycle, const FrequencyPartition& partition,
                   const std::shared_ptr<SolveBudget>& budget) {
    RunOutcome out;
    out.attempted = true;
    out.cycle = cycle;
    out.partition = partition;
    try {
        out.context = std::make_shared<DpContext>(instance, partition, cycle, rc, config.action_search,
                                                  config.trace != nullptr, budget);
        auto top = out.context->solve_state(out.context->top_state());
        out.states = out.context->states_expanded();
        out.actions = out.context->actions_tested();
        if (!top->feasible) {
            out.status = SolveStatus::infeasible_enumeration;
            return out;
        }
        out.dp_value = top->cost * static_cast<double>(out.context->top_copies());
        out.pre = out.context->assemble();
        out.pre_cost = evaluate_cycle(out.pre, instance);
        out.pre_peak = peak_space(out.pre, instance);
        out.alpha = rescale_factor(config, rc, instance, out.pre_cost, out.pre_peak);
        out.post = scale_time(out.pre, out.alpha);
        out.post_cost = evaluate_cycle(out.post, instance);
        out.post_peak = peak_space(out.post, instance);
        out.status = SolveStatus::solved;
    } catch (const ResourceCapHit& e) {
        out.status = SolveStatus::resource_cap_hit;
        out.message = e.what();
    } catch (const std::overflow_error& e) {
        out.status = SolveStatus::resource_cap_hit;
        out.message = e.what();
    }
    if (out.context) {
        out.states = out.context->states_expanded();
        out.actions = out.context->actions_tested();
    }
    return out;
}

struct RunSpec {
    Rational cycle;
    const FrequencyPartition* partition;
};

SolveResult run_all(const Instance& instance, const SolverConfig& config, const ResolvedConfig& rc,
                    const std::vector<RunSpec>& specs, SolveCounters counters) {
    auto budget = std::make_shared<SolveBudget>();
    budget->state_cap = config.state_cap;
    budget->action_cap = config.action_cap;
    budget->deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(config.time_limit));

    std::vector<RunOutcome> outcomes(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) {
            if (budget->exhausted) {
                outcomes[i].status = SolveStatus::resource_cap_hit;
                continue;
            }
            outcomes[i] = run_one(instance, config, rc, specs[i].cycle, *specs[i].partition, budget);
        }
    };
    const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(specs.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SolveResult result;
    result.counters = counters;
    const RunOutcome* best = nullptr;
    bool cap_hit = false;
    std::string cap_message;
    for (const auto& o : outcomes) {
        if (o.attempted) ++result.counters.runs;
        result.counters.states_expanded += o.states;
        result.counters.actions_tested += o.actions;
        if (o.status == SolveStatus::resource_cap_hit) {
            cap_hit = true;
            if (cap_message.empty() && !o.message.empty()) cap_message = o.message;
        }
        if (o.status == SolveStatus::solved &&
            (!best || o.post_cost.average_value() < best->post_cost.average_value())) {
            best = &o;
        }
    }
    if (config.trace) {
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (!outcomes[i].context) continue;
            for (const auto& line : outcomes[i].context->trace_lines()) {
                *config.trace << "{\"run\":" << i << ',' << line.substr(1) << '\n';
            }
        }
    }
    if (best) {
        result.policy = best->post;
        result.cost = best->post_cost;
        result.peak = best->post_peak;
        result.lb_ratio = best->post_cost.average_value() / lower_bound(instance);
        result.pre_rescale_policy = best->pre;
        result.pre_rescale_cost = best->pre_cost;
        result.pre_rescale_peak = best->pre_peak;
        result.dp_value = best->dp_value;
        result.scale_factor = best->alpha;
        result.cycle_guess = best->cycle;
        result.partition = best->partition;
        result.trace = DecisionTrace{best->partition, best->context->grid().grid_size(), best->cycle,
                                     rc.lambda, rc.slack, best->context};
    }
    if (cap_hit) {
        result.status = SolveStatus::resource_cap_hit;
        result.message = cap_message.empty() ? "resource cap hit" : cap_message;
    } else if (best) {
        result.status = SolveStatus::solved;
    } else {
        result.status = SolveStatus::infeasible_enumeration;
        result.message = "no guess produced an extendable policy";
    }
    return result;
}

}  // namespace

SolveResult solve(const Instance& instance, const SolverConfig& config) {
    require_valid(instance);
    const ResolvedConfig rc = resolve_config(instance, config);
    const DerivedConstants constants = derive_constants(instance, rc.epsilon, rc.base);
    const int class_limit = class_count(constants.u_const, rc.base, rc.shape.class_exponent);

    std::vector<Rational> guesses;
    if (config.cycle_override) {
        guesses.push_back(*config.cycle_override);
    } else {
        guesses = enumerate_cycle_guesses(constants, rc.cycle_grid_ratio);
    }
    PartitionEnumeration partitions = enumerate_partitions(instance, class_limit, config);
    SolveCounters counters;
    counters.guesses_explored = static_cast<std::int64_t>(guesses.size());
    if (partitions.cap_hit) {
        SolveResult result;
        result.status = SolveStatus::resource_cap_hit;
        result.message = "class assignments exceed action_cap; supply a partition override";
        result.counters = counters;
        return result;
    }
    counters.partitions_explored = static_cast<std::int64_t>(partitions.partitions.size());
    std::vector<RunSpec> specs;
    for (const auto& t : guesses) {
        for (const auto& p : partitions.partitions) specs.push_back({t, &p});
    }
    return run_all(instance, config, rc, specs, counters);
}

SolveResult solve_single(const Instance& instance, const SolverConfig& config,
                         const Rational& cycle_length, const FrequencyPartition& partition) {
    require_valid(instance);
    const ResolvedConfig rc = resolve_config(instance, config);
    if (cycle_length <= 0) throw std::invalid_argument("cycle length must be positive");
    SolveCounters counters;
    counters.guesses_explored = 1;
    counters.partitions_explored = 1;
    return run_all(instance, config, rc, {RunSpec{cycle_length, &partition}}, counters);
}

SpaceSlackReport compute_space_slack_report(const SolveResult& result, const Instance& instance) {
    if (!result.trace || !result.trace->context) {
        throw std::invalid_argument("result carries no decision trace");
    }
    const DecisionTrace& trace = *result.trace;
    const DpContext& ctx = *trace.context;
    const BreakpointGrid& grid = ctx.grid();
    const ZioCyclicPolicy& policy = result.pre_rescale_policy;
    if (policy.grid_size != grid.grid_size()) {
        throw std::invalid_argument("pre-rescaling policy does not match the trace grid");
    }
    const std::int64_t G = policy.grid_size;
    const Rational step_space = trace.lambda * instance.capacity;

    // Units of space of the given commodities at time t (right limit).
    auto units_at = [&](const std::vector<int>& ids, std::int64_t t) {
        Wide total = 0;
        for (int id : ids) {
            const auto& ticks = policy.orders.at(id);
            auto it = std::upper_bound(ticks.begin(), ticks.end(), t);
            const std::int64_t next = it == ticks.end() ? ticks.front() + G : *it;
            total += static_cast<Wide>(ctx.space_units(id)) * (next - t);
        }
        return total;
    };
    auto to_space = [&](Wide units) {
        BigInt big = 0;
        const bool negative = units < 0;
        auto mag = static_cast<unsigned __int128>(negative ? -units : units);
        big = BigInt(static_cast<std::uint64_t>(mag >> 64));
        big <<= 64;
        big += BigInt(static_cast<std::uint64_t>(mag));
        if (negative) big = -big;
        return Rational(big) * ctx.units_to_space();
    };

    std::map<int, ClassSlack> per_class;
    for (int q : ctx.classes()) per_class[q].q = q;
    std::int64_t nodes = 0;

    auto visit = [&](auto&& self, const DpState& state, std::int64_t origin,
                     const Rational& upper) -> void {
        if (++nodes > kMaxReplayNodes) throw std::length_error("decision tree too large to replay");
        auto value = ctx.lookup(state);
        if (!value || !value->feasible) throw std::logic_error("decision tree has an unsolved state");
        const std::int64_t length = grid.minus_step(state.q);
        std::vector<int> older;
        for (int c : ctx.classes()) {
            if (c <= state.q - 2) {
                const auto& ids = ctx.members(c);
                older.insert(older.end(), ids.begin(), ids.end());
            }
        }
        ClassSlack& slot = per_class[state.q];
        ++slot.intervals;
        if (!older.empty()) {
            Wide best = units_at(older, origin);
            for (int id : older) {
                for (auto t : policy.orders.at(id)) {
                    if (t > origin && t < origin + length) best = std::max(best, units_at(older, t));
                }
            }
            const Rational lower = step_space * state.space_index;
            slot.max_gap_actual = std::max(slot.max_gap_actual, to_space(best) - lower);
            slot.max_gap_statistic = std::max(slot.max_gap_statistic, upper - lower);
        }
        if (value->children.empty()) return;
        const auto& own = ctx.members(state.q);
        const auto& prev = state.prev.empty() ? std::vector<int>{} : ctx.members(state.q - 1);
        const std::int64_t span = length / static_cast<std::int64_t>(value->children.size());
        for (std::size_t m = 0; m < value->children.size(); ++m) {
            const auto& call = value->children[m];
            const std::int64_t entry = origin + static_cast<std::int64_t>(m) * span;
            Rational child_upper = upper + to_space(units_at(prev, entry));
            if (call.state.q != state.q + 1) child_upper += to_space(units_at(own, entry));
            const std::int64_t stride = grid.minus_step(call.state.q);
            for (std::int64_t j = 0; j < call.copies; ++j) {
                self(self, call.state, entry + j * stride, child_upper);
            }
        }
    };
    const DpState top = ctx.top_state();
    for (std::int64_t c = 0; c < ctx.top_copies(); ++c) {
        visit(visit, top, c * grid.minus_step(top.q), Rational(0));
    }

    SpaceSlackReport report;
    for (auto& [q, slack] : per_class) {
        (void)q;
        report.classes.push_back(slack);
    }
    report.peak_pre = result.pre_rescale_peak;
    report.limit = (1 + trace.slack) * instance.capacity;
    report.overshoot = report.peak_pre > report.limit ? report.peak_pre - report.limit : Rational(0);
    const Rational n(static_cast<long>(instance.size()));
    const auto& shape = grid.shape();
    const int exponent = 2 * shape.class_exponent + shape.minus_offset;
    Rational beta_power = 1;
    for (int i = 0; i < std::abs(exponent); ++i) beta_power *= grid.base();
    if (exponent < 0) beta_power = 1 / beta_power;
    report.bound = n * n * instance.capacity / beta_power + n * trace.lambda * instance.capacity;
    report.within_bound = report.overshoot <= report.bound;
    return report;
}

}  // namespace lotcycle
