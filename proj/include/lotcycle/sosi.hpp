#ifndef LOTCYCLE_SOSI_HPP
#define LOTCYCLE_SOSI_HPP

#include "lotcycle/instance.hpp"
#include "lotcycle/policy.hpp"

#include <vector>

namespace lotcycle {

// K/T + H*T. Throws std::invalid_argument on nonpositive arguments.
double eoq_cost(double order_cost, double holding_rate, double interval);

// sqrt(K/H), the unique minimizer of eoq_cost.
double eoq_optimal_interval(double order_cost, double holding_rate);

// T_i^V = min{sqrt(K_i/H_i), V/gamma_i} for every commodity, in instance order.
std::vector<CappedInterval> capacity_constrained_sosi(const Instance& instance);

struct BaselineReport {
    // sum_i C_EOQ,i(T_i^V / n); never exceeds n * M.
    double analytic_cost = 0.0;
    double n_times_m = 0.0;
    // Largest ratio between a realized interval and its target, in either
    // direction (<= sqrt(2) when no interval had to be halved).
    double rounding_factor = 1.0;
    std::vector<int> halved_ids;
    std::vector<Rational> intervals;  // realized SOSI interval per commodity
};

struct Baseline {
    ZioCyclicPolicy policy;
    BaselineReport report;
};

// Capacity-feasible SOSI baseline: every commodity runs its capacity-constrained
// optimal interval shrunk by n, rounded to the nearest power-of-two multiple of
// the smallest such target so the periods share a common cycle. All offsets are
// zero. If rounding up breaks feasibility, some rounded-up intervals are halved
// (the cheapest feasible choice of which ones), which always restores it.
Baseline build_baseline_policy(const Instance& instance);

}  // namespace lotcycle

#endif  // LOTCYCLE_SOSI_HPP
