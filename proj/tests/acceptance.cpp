// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "lotcycle/alignment.hpp"
#include "lotcycle/dp_solver.hpp"
#include "lotcycle/oracle.hpp"
#include "lotcycle/sosi.hpp"
#include "support.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

using namespace lotcycle;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

Rational log_uniform_rational(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
    Rational r = approximate(std::exp(d(rng)), 1000);
    return r > 0 ? r : Rational(1, 1000);
}

Instance random_instance(std::mt19937_64& rng, int n) {
    Instance inst;
    double footprint = 0.0;
    for (int i = 1; i <= n; ++i) {
        Commodity c{i, log_uniform_rational(rng, 0.1, 100), log_uniform_rational(rng, 0.1, 10),
                    log_uniform_rational(rng, 0.1, 10)};
        footprint += to_double(c.space_per_unit) *
                     eoq_optimal_interval(to_double(c.order_cost), to_double(c.holding_rate));
        inst.commodities.push_back(c);
    }
    std::uniform_real_distribution<double> rho(std::log(0.1), std::log(10.0));
    inst.capacity = approximate(footprint * std::exp(rho(rng)), 1000);
    if (inst.capacity <= 0) inst.capacity = Rational(1, 1000);
    return inst;
}

Outcome eoq_analytics() {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> logu(std::log(1e-3), std::log(1e3));
    double worst_rel = 0.0;
    int beaten = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double k = std::exp(logu(rng)), h = std::exp(logu(rng));
        const double t = eoq_optimal_interval(k, h);
        const double best = eoq_cost(k, h, t);
        worst_rel = std::max(worst_rel, fixtures::rel_diff(best, 2.0 * std::sqrt(k * h)));
        const int points = 10'000;
        for (int j = 0; j < points; ++j) {
            const double x = t * std::exp(std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * j / (points - 1));
            if (eoq_cost(k, h, x) < best * (1 - 1e-15)) ++beaten;
        }
    }
    std::ostringstream d;
    d << "worst relative error " << worst_rel << ", grid points beating the optimum " << beaten;
    return {worst_rel <= 1e-9 && beaten == 0, d.str()};
}

Outcome holding_bound() {
    std::mt19937_64 rng(1002);
    int violations = 0, equality_mismatch = 0, equal_cases = 0;
    for (int trial = 0; trial < 10'000; ++trial) {
        std::uniform_int_distribution<int> pick_n(1, 20);
        const int n = pick_n(rng);
        std::vector<std::int64_t> gaps(n);
        if (trial % 10 == 0) {
            std::uniform_int_distribution<std::int64_t> pick_g(1, 50);
            std::fill(gaps.begin(), gaps.end(), pick_g(rng));
        } else {
            std::uniform_int_distribution<std::int64_t> pick_g(1, 100);
            for (auto& g : gaps) g = pick_g(rng);
        }
        std::int64_t tau = 0;
        BigInt squares = 0;
        for (auto g : gaps) {
            tau += g;
            squares += BigInt(g) * g;
        }
        const Rational h(3, 2);
        const Rational actual = h * Rational(squares);
        const Rational bound = holding_lower_bound(h, Rational(tau), n);
        const bool all_equal = std::all_of(gaps.begin(), gaps.end(), [&](auto g) { return g == gaps[0]; });
        equal_cases += all_equal;
        if (actual < bound) ++violations;
        if ((actual == bound) != all_equal) ++equality_mismatch;
        if (all_equal && fixtures::rel_diff(to_double(actual), holding_lower_bound(1.5, double(tau), n)) > 1e-12) {
            ++equality_mismatch;
        }
    }
    std::ostringstream d;
    d << "violations " << violations << ", equality mismatches " << equality_mismatch << ", equal-gap cases "
      << equal_cases;
    return {violations == 0 && equality_mismatch == 0, d.str()};
}

Outcome baseline() {
    std::mt19937_64 rng(1003);
    int infeasible = 0, over = 0, single_off = 0;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 5;
        const Instance inst = random_instance(rng, n);
        const Baseline b = build_baseline_policy(inst);
        if (!check_capacity(b.policy, inst).feasible) ++infeasible;
        const double m = lower_bound(inst);
        const double avg = evaluate_cycle(b.policy, inst).average_value();
        worst_ratio = std::max(worst_ratio, avg / (n * m));
        if (avg > std::sqrt(2.0) * n * m) ++over;
        if (n == 1 && fixtures::rel_diff(avg, m) > 1e-9) ++single_off;
    }
    std::ostringstream d;
    d << "infeasible " << infeasible << ", above sqrt2*n*M " << over << ", n=1 off M " << single_off
      << ", worst avg/(nM) " << worst_ratio;
    return {infeasible == 0 && over == 0 && single_off == 0, d.str()};
}

Outcome alignment() {
    std::mt19937_64 rng(1004);
    int unaligned = 0, peak_over = 0, ordering_over = 0, holding_over = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int base = 2 + trial % 3;
        const int n = 1 + (trial / 3) % 3;
        const auto c = fixtures::random_alignment_case(rng, base, n, 2);
        const auto grid = build_grids(c.partition, BreakpointGrid::required_grid_size(c.partition),
                                      c.policy.cycle_length);
        const auto out = align_policy(c.policy, c.partition, grid);
        if (!check_b_aligned(out, c.partition, grid).aligned) ++unaligned;
        if (peak_space(out, c.instance) >
            peak_space(c.policy, c.instance) + Rational(n, base) * c.instance.capacity) {
            ++peak_over;
        }
        const auto before = evaluate_cycle(c.policy, c.instance);
        const auto after = evaluate_cycle(out, c.instance);
        if (after.ordering_per_cycle > (1 + Rational(1, base)) * before.ordering_per_cycle) ++ordering_over;
        if (to_double(after.holding_per_cycle) >
            (1 + 2.0 / base) * to_double(before.holding_per_cycle) * (1 + 1e-9)) {
            ++holding_over;
        }
    }
    std::ostringstream d;
    d << "unaligned " << unaligned << ", peak bound " << peak_over << ", ordering bound " << ordering_over
      << ", holding bound " << holding_over;
    return {unaligned + peak_over + ordering_over + holding_over == 0, d.str()};
}

Outcome dp_vs_exhaustive() {
    std::mt19937_64 rng(1005);
    const GridShape compact{1, 1, -1};
    const std::vector<std::map<int, int>> single_class = {
        {{1, 1}}, {{1, 2}}, {{1, 3}}, {{1, 1}, {2, 1}}, {{1, 2}, {2, 2}}};
    const std::vector<std::map<int, int>> two_class = {
        {{1, 1}, {2, 2}}, {{1, 2}, {2, 1}}, {{1, 1}, {2, 3}}, {{1, 2}, {2, 3}}};
    int single_checked = 0, single_mismatch = 0, two_checked = 0, two_worse = 0;
    std::ostringstream notes;
    for (int trial = 0; trial < 50; ++trial) {
        const bool one = trial % 2 == 0;
        const auto& classes = one ? single_class[(trial / 2) % single_class.size()]
                                  : two_class[(trial / 2) % two_class.size()];
        const int n = static_cast<int>(classes.size());
        Instance inst;
        double footprint = 0.0, longest = 0.0;
        for (int i = 1; i <= n; ++i) {
            Commodity c{i, log_uniform_rational(rng, 0.25, 4), log_uniform_rational(rng, 0.25, 4),
                        log_uniform_rational(rng, 0.5, 2)};
            const double t = eoq_optimal_interval(to_double(c.order_cost), to_double(c.holding_rate));
            footprint += to_double(c.space_per_unit) * t;
            longest = std::max(longest, t);
            inst.commodities.push_back(c);
        }
        std::uniform_real_distribution<double> tight(0.3, 1.5), span(1.0, 4.0);
        inst.capacity = approximate(footprint * tight(rng), 100);
        const Rational cycle = approximate(longest * span(rng), 100);

        FrequencyPartition part;
        part.base = 2;
        part.shape = compact;
        part.class_of = classes;
        SolverConfig config;
        config.base = 2;
        config.shape = compact;
        config.partition_override = part;
        config.cycle_override = cycle;
        const SolveResult r = solve(inst, config);
        const Rational slack = resolve_config(inst, config).slack;
        const auto grid = build_grids(part, BreakpointGrid::required_grid_size(part), cycle);

        if (one) {
            ++single_checked;
            const auto best = exhaustive_b_aligned_search(inst, part, grid, slack);
            const bool agree = best.has_value() == r.solved() &&
                               (!best || fixtures::rel_diff(r.pre_rescale_cost.total_value(),
                                                           best->cost.total_value()) <= 1e-9);
            if (!agree) {
                ++single_mismatch;
                notes << " [single trial " << trial << " dp "
                      << (r.solved() ? r.pre_rescale_cost.total_value() : -1.0) << " exhaustive "
                      << (best ? best->cost.total_value() : -1.0) << "]";
            }
        } else {
            const auto best = exhaustive_b_aligned_search(inst, part, grid, 0);
            if (!best) continue;
            ++two_checked;
            if (!r.solved() || r.pre_rescale_cost.total_value() > best->cost.total_value() * (1 + 1e-9)) {
                ++two_worse;
                notes << " [two-class trial " << trial << " classes " << classes.at(1) << "," << classes.at(2)
                      << " dp " << (r.solved() ? r.pre_rescale_cost.total_value() : -1.0) << " exhaustive "
                      << best->cost.total_value() << "]";
            }
        }
    }
    std::ostringstream d;
    d << "single-class " << single_checked << " checked, " << single_mismatch << " mismatches; two-class "
      << two_checked << " with a feasible optimum, " << two_worse << " where DP is worse" << notes.str();
    return {single_mismatch == 0 && two_worse == 0 && two_checked > 0, d.str()};
}

Outcome sandwich() {
    std::mt19937_64 rng(1006);
    int solved = 0, infeasible = 0, below_m = 0, above_baseline = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 12; ++trial) {
        const Instance inst = random_instance(rng, 1);
        SolverConfig config;
        config.epsilon = Rational(1, 4);
        config.base = 2;
        const SolveResult r = solve(inst, config);
        if (!r.solved()) continue;
        ++solved;
        if (!check_capacity(r.policy, inst, 0).feasible) ++infeasible;
        const double m = lower_bound(inst);
        const double avg = r.cost.average_value();
        const double base = evaluate_cycle(build_baseline_policy(inst).policy, inst).average_value();
        if (avg < m * (1 - 1e-9)) ++below_m;
        if (avg > base * (1 + 1e-9)) ++above_baseline;
        worst = std::max(worst, avg / base);
    }
    std::ostringstream d;
    d << solved << "/12 solved, infeasible " << infeasible << ", below M " << below_m << ", above baseline "
      << above_baseline << ", worst DP/baseline " << worst;
    return {solved == 12 && infeasible == 0 && below_m == 0 && above_baseline == 0, d.str()};
}

Outcome slack_accounting() {
    Instance inst{{fixtures::commodity(1, 64, 1, 1), fixtures::commodity(2, 1, 1, 1),
                   fixtures::commodity(3, Rational(1, 64), 1, 1)},
                  4};
    FrequencyPartition part;
    part.base = 2;
    part.class_of = {{1, 1}, {2, 2}, {3, 3}};
    SolverConfig config;
    config.base = 2;
    config.time_limit = 60;
    const SolveResult r = solve_single(inst, config, 16, part);
    if (!r.solved()) return {false, "run not solved: " + to_string(r.status) + " " + r.message};
    const auto report = compute_space_slack_report(r, inst);
    const Rational n(3), beta(2);
    const Rational bound = n * n * inst.capacity / (beta * beta) + n * resolve_config(inst, config).lambda * inst.capacity;
    const bool overshoot_ok = report.overshoot <= bound;
    const bool peak_ok = r.pre_rescale_peak <= (1 + resolve_config(inst, config).epsilon) * inst.capacity + report.overshoot;
    std::ostringstream d;
    d << "classes " << report.classes.size() << ", pre-rescale peak " << to_double(r.pre_rescale_peak)
      << ", overshoot " << to_double(report.overshoot) << " <= " << to_double(bound) << ", final feasible "
      << check_capacity(r.policy, inst).feasible;
    return {overshoot_ok && peak_ok && report.bound == bound && check_capacity(r.policy, inst).feasible, d.str()};
}

Outcome optimality_gap() {
    const Instance inst = fixtures::single(1, 1, 1, 10);
    SolverConfig config;
    config.epsilon = Rational(1, 4);
    config.base = 2;
    const SolveResult r = solve(inst, config);
    if (!r.solved()) return {false, to_string(r.status)};
    const double target = 1.5 * eoq_cost(1, 1, capacity_constrained_sosi(inst)[0].value);
    std::ostringstream d;
    d << "final average " << r.cost.average_value() << " <= " << target;
    return {r.cost.average_value() <= target && check_capacity(r.policy, inst).feasible, d.str()};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "EOQ analytics", 1, eoq_analytics},
        {2, "holding lower bound over gap compositions", 1, holding_bound},
        {3, "SOSI baseline feasibility and cost", 5, baseline},
        {4, "alignment transform bounds", 30, alignment},
        {5, "DP against exhaustive aligned search", 120, dp_vs_exhaustive},
        {6, "n=1 feasibility and sandwich", 120, sandwich},
        {7, "three-class space slack", 60, slack_accounting},
        {8, "scaled-down optimality gap", 60, optimality_gap},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        const bool in_time = secs < c.seconds;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << o.detail
                  << "; " << secs << " s of " << c.seconds << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
