#ifndef LOTCYCLE_INSTANCE_HPP
#define LOTCYCLE_INSTANCE_HPP

#include "lotcycle/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lotcycle {

// One commodity with unit demand rate. Holding accrues at 2 * holding_rate
// per unit per time, so a SOSI policy with interval T costs K/T + H*T.
struct Commodity {
    int id = 0;
    Rational order_cost;      // K
    Rational holding_rate;    // H
    Rational space_per_unit;  // gamma
};

struct Instance {
    std::vector<Commodity> commodities;
    Rational capacity;

    std::size_t size() const { return commodities.size(); }
    // Position of the commodity with this id; throws std::out_of_range.
    std::size_t index_of(int id) const;
};

struct Violation {
    std::optional<int> commodity_id;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

ValidationReport validate_instance(const Instance& instance);

// Throws std::invalid_argument carrying the report summary if invalid.
void require_valid(const Instance& instance);

struct DerivedConstants {
    Rational epsilon;
    int base = 2;
    // Per commodity T_i^V = min{sqrt(K/H), V/gamma}; the double is for cost
    // reporting, t_cap_exact holds the exact value whenever capacity binds.
    std::vector<double> t_cap;
    std::vector<bool> capacity_binding;
    std::vector<std::optional<Rational>> t_cap_exact;
    double m_const = 0.0;
    double u_const = 0.0;
    int q_count = 1;
    double cycle_lo = 0.0;
    double cycle_hi = 0.0;
};

// Capacity-constrained optimal SOSI interval for one commodity. The branch is
// decided exactly by comparing K/H with (V/gamma)^2.
struct CappedInterval {
    double value = 0.0;
    bool capacity_binding = false;
    std::optional<Rational> exact;  // set when capacity binds (value = V/gamma)
};
CappedInterval capped_interval(const Commodity& c, const Rational& capacity);

// Smallest q >= 1 with base^(class_exponent*q) >= bound.
int class_count(double bound, int base, int class_exponent = 3);

DerivedConstants derive_constants(const Instance& instance, const Rational& epsilon,
                                  std::optional<int> base_override = std::nullopt);

// M = sum_i C_EOQ,i(T_i^V), a lower bound on every capacity-feasible policy.
double lower_bound(const Instance& instance);

}  // namespace lotcycle

#endif  // LOTCYCLE_INSTANCE_HPP
