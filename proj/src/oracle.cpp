#include "lotcycle/oracle.hpp"

#include <algorithm>
#include <limits>

namespace lotcycle {

namespace {

using Wide = __int128;

struct Candidate {
    std::vector<std::int64_t> ticks;
    std::vector<std::int64_t> levels;  // right-limit inventory in ticks at every tick
    Rational cost;
};

struct Scaled {
    BigInt denominator = 1;
    std::vector<BigInt> units;
};

Scaled scaled_space(const Instance& instance) {
    Scaled out;
    for (const auto& c : instance.commodities) {
        out.denominator = lcm_of(out.denominator, boost::multiprecision::denominator(c.space_per_unit));
    }
    for (const auto& c : instance.commodities) {
        out.units.push_back(boost::multiprecision::numerator(c.space_per_unit * Rational(out.denominator)));
    }
    return out;
}

Candidate make_candidate(const Commodity& c, std::vector<std::int64_t> ticks, std::int64_t grid_size,
                         const Rational& tick) {
    Candidate out;
    out.levels.assign(grid_size, 0);
    BigInt squares = 0;
    for (std::size_t k = 0; k < ticks.size(); ++k) {
        const std::int64_t start = ticks[k];
        const std::int64_t end = k + 1 < ticks.size() ? ticks[k + 1] : ticks.front() + grid_size;
        squares += BigInt(end - start) * (end - start);
        for (std::int64_t t = start; t < end; ++t) out.levels[t % grid_size] = end - t;
    }
    out.cost = c.order_cost * static_cast<long>(ticks.size()) +
               c.holding_rate * Rational(squares) * tick * tick;
    out.ticks = std::move(ticks);
    return out;
}

std::optional<OracleResult> search(const Instance& instance,
                                   const std::vector<std::vector<Candidate>>& options,
                                   std::int64_t grid_size, const Rational& cycle_length,
                                   const Rational& limit) {
    const std::size_t n = instance.size();
    const Scaled space = scaled_space(instance);
    const Rational tick = cycle_length / grid_size;
    // Occupied space in units of tick/denominator must stay within this bound.
    const BigInt bound_big = floor_of(limit * Rational(space.denominator) / tick);
    bool narrow = fits_int64(bound_big);
    std::vector<std::int64_t> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        narrow = narrow && fits_int64(space.units[i]);
        if (narrow) g[i] = space.units[i].convert_to<std::int64_t>();
    }
    if (!narrow) throw OracleGuardExceeded("space coefficients too large for the oracle");
    const std::int64_t bound = bound_big.convert_to<std::int64_t>();

    OracleResult best;
    bool found = false;
    std::vector<std::size_t> pick(n, 0);
    std::vector<Wide> occ(grid_size);
    while (true) {
        ++best.examined;
        std::fill(occ.begin(), occ.end(), 0);
        bool fits = true;
        for (std::size_t i = 0; i < n && fits; ++i) {
            const auto& levels = options[i][pick[i]].levels;
            for (std::int64_t t = 0; t < grid_size; ++t) {
                occ[t] += static_cast<Wide>(g[i]) * levels[t];
            }
        }
        for (std::int64_t t = 0; t < grid_size; ++t) {
            if (occ[t] > bound) {
                fits = false;
                break;
            }
        }
        if (fits) {
            ++best.feasible;
            Rational total = 0;
            for (std::size_t i = 0; i < n; ++i) total += options[i][pick[i]].cost;
            if (!found || total < best.cost.total_per_cycle) {
                found = true;
                best.cost.total_per_cycle = total;
                best.policy.orders.clear();
                for (std::size_t i = 0; i < n; ++i) {
                    best.policy.orders[instance.commodities[i].id] = options[i][pick[i]].ticks;
                }
            }
        }
        std::size_t i = n;
        while (i-- > 0) {
            if (++pick[i] < options[i].size()) break;
            pick[i] = 0;
        }
        if (i == static_cast<std::size_t>(-1)) break;
    }
    if (!found) return std::nullopt;
    best.policy.grid_size = grid_size;
    best.policy.cycle_length = cycle_length;
    const auto examined = best.examined;
    const auto feasible = best.feasible;
    best.cost = evaluate_cycle(best.policy, instance);
    best.examined = examined;
    best.feasible = feasible;
    return best;
}

std::int64_t product_or_cap(const std::vector<std::int64_t>& sizes, std::int64_t cap) {
    std::int64_t total = 1;
    for (auto s : sizes) {
        if (s == 0) return 0;
        if (total > cap / s) return cap + 1;
        total *= s;
    }
    return total;
}

}  // namespace

std::optional<OracleResult> grid_brute_force_optimal(const Instance& instance,
                                                     std::int64_t grid_size,
                                                     const Rational& cycle_length,
                                                     std::int64_t guard) {
    require_valid(instance);
    if (grid_size < 1) throw std::invalid_argument("grid size must be positive");
    if (cycle_length <= 0) throw std::invalid_argument("cycle length must be positive");
    if (grid_size > 30) throw OracleGuardExceeded("grid too fine for brute force");
    const std::int64_t per = (std::int64_t{1} << grid_size) - 1;
    std::vector<std::int64_t> sizes(instance.size(), per);
    if (product_or_cap(sizes, guard) > guard) {
        throw OracleGuardExceeded("brute-force combination count exceeds the guard");
    }
    const Rational tick = cycle_length / grid_size;
    std::vector<std::vector<Candidate>> options(instance.size());
    for (std::size_t i = 0; i < instance.size(); ++i) {
        for (std::int64_t mask = 1; mask <= per; ++mask) {
            std::vector<std::int64_t> ticks;
            for (std::int64_t t = 0; t < grid_size; ++t) {
                if (mask >> t & 1) ticks.push_back(t);
            }
            options[i].push_back(make_candidate(instance.commodities[i], std::move(ticks), grid_size, tick));
        }
    }
    return search(instance, options, grid_size, cycle_length, instance.capacity);
}

std::optional<OracleResult> exhaustive_b_aligned_search(const Instance& instance,
                                                        const FrequencyPartition& partition,
                                                        const BreakpointGrid& grid,
                                                        const Rational& slack,
                                                        std::int64_t guard) {
    require_valid(instance);
    if (slack < 0) throw std::invalid_argument("slack must be nonnegative");
    const std::int64_t G = grid.grid_size();
    std::vector<std::int64_t> sizes;
    std::vector<std::vector<std::int64_t>> optional_points(instance.size());
    std::vector<std::vector<std::int64_t>> required_points(instance.size());
    for (std::size_t i = 0; i < instance.size(); ++i) {
        auto it = partition.class_of.find(instance.commodities[i].id);
        if (it == partition.class_of.end()) throw std::invalid_argument("partition misses a commodity");
        const int q = it->second;
        for (std::int64_t t = 0; t < G; t += grid.plus_step(q)) {
            (grid.is_minus_point(q, t) ? required_points[i] : optional_points[i]).push_back(t);
        }
        if (optional_points[i].size() > 40) throw OracleGuardExceeded("too many optional breakpoints");
        sizes.push_back(std::int64_t{1} << optional_points[i].size());
    }
    if (product_or_cap(sizes, guard) > guard) {
        throw OracleGuardExceeded("B-aligned policy count exceeds the guard");
    }
    const Rational tick = grid.cycle_length() / G;
    std::vector<std::vector<Candidate>> options(instance.size());
    for (std::size_t i = 0; i < instance.size(); ++i) {
        for (std::int64_t mask = 0; mask < sizes[i]; ++mask) {
            std::vector<std::int64_t> ticks = required_points[i];
            for (std::size_t j = 0; j < optional_points[i].size(); ++j) {
                if (mask >> j & 1) ticks.push_back(optional_points[i][j]);
            }
            std::sort(ticks.begin(), ticks.end());
            options[i].push_back(make_candidate(instance.commodities[i], std::move(ticks), G, tick));
        }
    }
    return search(instance, options, G, grid.cycle_length(), (1 + slack) * instance.capacity);
}

Rational sampled_peak(const ZioCyclicPolicy& policy, const Instance& instance,
                      std::int64_t samples) {
    validate_policy(policy);
    require_matching_ids(policy, instance);
    if (samples < 1) throw std::invalid_argument("samples must be positive");
    const Scaled space = scaled_space(instance);
    const std::int64_t G = policy.grid_size;
    // Sample j sits at j*G/samples ticks; levels are kept scaled by `samples`.
    BigInt best = 0;
    for (std::int64_t j = 0; j < samples; ++j) {
        const BigInt at = BigInt(j) * G;
        BigInt total = 0;
        for (std::size_t i = 0; i < instance.size(); ++i) {
            const auto& ticks = policy.orders.at(instance.commodities[i].id);
            const std::int64_t floor_tick = static_cast<std::int64_t>(at / samples);
            auto it = std::upper_bound(ticks.begin(), ticks.end(), floor_tick);
            const std::int64_t next = it == ticks.end() ? ticks.front() + G : *it;
            total += space.units[i] * (BigInt(next) * samples - at);
        }
        best = std::max(best, total);
    }
    return Rational(best) * policy.tick_duration() / (Rational(space.denominator) * samples);
}

}  // namespace lotcycle
