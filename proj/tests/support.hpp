#ifndef LOTCYCLE_TESTS_SUPPORT_HPP
#define LOTCYCLE_TESTS_SUPPORT_HPP

#include "lotcycle/alignment.hpp"
#include "lotcycle/instance.hpp"
#include "lotcycle/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace lotcycle::fixtures {

inline Commodity commodity(int id, Rational k, Rational h, Rational gamma) {
    return Commodity{id, std::move(k), std::move(h), std::move(gamma)};
}

inline Instance single(Rational k, Rational h, Rational gamma, Rational v) {
    return Instance{{commodity(1, std::move(k), std::move(h), std::move(gamma))}, std::move(v)};
}

inline Instance identical(int n, Rational k, Rational h, Rational gamma, Rational v) {
    Instance out;
    for (int i = 1; i <= n; ++i) out.commodities.push_back(commodity(i, k, h, gamma));
    out.capacity = std::move(v);
    return out;
}

inline ZioCyclicPolicy policy_of(std::int64_t grid, Rational cycle,
                                 std::map<int, std::vector<std::int64_t>> orders) {
    ZioCyclicPolicy p;
    p.grid_size = grid;
    p.cycle_length = std::move(cycle);
    p.orders = std::move(orders);
    return p;
}

// Inventory of one commodity at time t, straight from the order list in doubles.
inline double level_at(const std::vector<std::int64_t>& ticks, std::int64_t grid, double cycle, double t) {
    const double tick = cycle / static_cast<double>(grid);
    for (auto k : ticks) {
        const double at = static_cast<double>(k) * tick;
        if (at > t) return at - t;
    }
    return static_cast<double>(ticks.front()) * tick + cycle - t;
}

// Midpoint-rule average cost: (sum K*N + integral of 2H*I) / cycle.
inline double riemann_average(const ZioCyclicPolicy& p, const Instance& inst, int samples) {
    const double cycle = to_double(p.cycle_length);
    const double dt = cycle / samples;
    double total = 0.0;
    for (const auto& c : inst.commodities) {
        const auto& ticks = p.orders.at(c.id);
        double area = 0.0;
        for (int s = 0; s < samples; ++s) area += level_at(ticks, p.grid_size, cycle, (s + 0.5) * dt);
        total += to_double(c.order_cost) * static_cast<double>(ticks.size()) +
                 2.0 * to_double(c.holding_rate) * area * dt;
    }
    return total / cycle;
}

inline double sampled_space(const ZioCyclicPolicy& p, const Instance& inst, double t) {
    const double cycle = to_double(p.cycle_length);
    double total = 0.0;
    for (const auto& c : inst.commodities) {
        total += to_double(c.space_per_unit) * level_at(p.orders.at(c.id), p.grid_size, cycle, t);
    }
    return total;
}

inline std::vector<std::int64_t> random_ticks(std::mt19937_64& rng, std::int64_t grid, std::int64_t count) {
    std::vector<std::int64_t> all(grid);
    for (std::int64_t t = 0; t < grid; ++t) all[t] = t;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
}

struct AlignmentCase {
    Instance instance;
    ZioCyclicPolicy policy;
    FrequencyPartition partition;
};

// A capacity-feasible ZIO policy whose order counts sit inside their class
// ranges, with N >= base^(a(q-1)) and, for class 1, N >= base. Capacity is the
// policy's peak times a factor in [1, 3/2].
inline AlignmentCase random_alignment_case(std::mt19937_64& rng, int base, int n, int max_class) {
    const GridShape shape;
    AlignmentCase out;
    out.partition.base = base;
    std::uniform_int_distribution<int> pick_class(1, max_class);
    std::uniform_int_distribution<int> pick_den(1, 6);
    std::uniform_int_distribution<int> pick_num(1, 12);
    for (int i = 1; i <= n; ++i) out.partition.class_of[i] = pick_class(rng);
    const std::int64_t required = BreakpointGrid::required_grid_size(out.partition);
    std::uniform_int_distribution<int> pick_mult(1, 3);
    out.policy.grid_size = required * pick_mult(rng);
    out.policy.cycle_length = Rational(pick_num(rng), pick_den(rng));
    for (int i = 1; i <= n; ++i) {
        const int q = out.partition.class_of[i];
        const std::int64_t lo = q == 1 ? base : int_pow(base, shape.class_exponent * (q - 1)) + 1;
        const std::int64_t hi = int_pow(base, shape.class_exponent * q);
        std::uniform_int_distribution<std::int64_t> pick_count(lo, hi);
        out.policy.orders[i] = random_ticks(rng, out.policy.grid_size, pick_count(rng));
        out.instance.commodities.push_back(
            Commodity{i, Rational(pick_num(rng), pick_den(rng)), Rational(pick_num(rng), pick_den(rng)),
                      Rational(pick_num(rng), pick_den(rng))});
    }
    out.instance.capacity = 1;
    const Rational peak = peak_space(out.policy, out.instance);
    std::uniform_int_distribution<int> pick_slack(0, 50);
    out.instance.capacity = peak * Rational(100 + pick_slack(rng), 100);
    return out;
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace lotcycle::fixtures

#endif  // LOTCYCLE_TESTS_SUPPORT_HPP
