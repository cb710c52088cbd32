#ifndef LOTCYCLE_POLICY_HPP
#define LOTCYCLE_POLICY_HPP

#include "lotcycle/instance.hpp"
#include "lotcycle/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace lotcycle {

// A cyclic zero-inventory-ordering policy. Each cycle of length cycle_length is
// split into grid_size ticks; every commodity orders at its listed ticks, and the
// quantity ordered at tick t is the time until that commodity's next order
// (wrapping into the next cycle), so inventory hits zero right before each order.
struct ZioCyclicPolicy {
    std::int64_t grid_size = 1;
    Rational cycle_length = 1;
    std::map<int, std::vector<std::int64_t>> orders;

    Rational tick_duration() const { return cycle_length / grid_size; }
    std::size_t order_count(int id) const { return orders.at(id).size(); }
};

// Throws std::invalid_argument when the structural invariants fail.
void validate_policy(const ZioCyclicPolicy& policy);

// Throws std::invalid_argument unless the policy covers exactly the instance ids.
void require_matching_ids(const ZioCyclicPolicy& policy, const Instance& instance);

// Inter-order gaps in ticks for one commodity, first gap starting at its first order.
std::vector<std::int64_t> gaps_in_ticks(const ZioCyclicPolicy& policy, int id);

// Inventory at time t in [0, cycle_length), right-continuous: an order placed at t
// is already in stock.
Rational inventory_level(const ZioCyclicPolicy& policy, int id, const Rational& t);

struct CostBreakdown {
    Rational ordering_per_cycle;
    Rational holding_per_cycle;
    Rational total_per_cycle;
    Rational average;

    double average_value() const { return to_double(average); }
    double total_value() const { return to_double(total_per_cycle); }
};

CostBreakdown evaluate_cycle(const ZioCyclicPolicy& policy, const Instance& instance);

// Aggregate occupied space at time t (right limit).
Rational occupied_space(const ZioCyclicPolicy& policy, const Instance& instance,
                        const Rational& t);

struct PeakEvent {
    Rational space;
    Rational time;  // first event time attaining the peak
};

// Exact maximum of sum_i gamma_i * I_i(t). Between events the aggregate only
// decreases, so it suffices to evaluate right limits at order events.
PeakEvent peak_event(const ZioCyclicPolicy& policy, const Instance& instance);
Rational peak_space(const ZioCyclicPolicy& policy, const Instance& instance);

struct CapacityCheck {
    bool feasible = true;
    Rational peak;
    Rational limit;
    std::optional<Rational> witness_time;  // set when infeasible
};

CapacityCheck check_capacity(const ZioCyclicPolicy& policy, const Instance& instance,
                             const Rational& slack = 0);

ZioCyclicPolicy scale_time(const ZioCyclicPolicy& policy, const Rational& alpha);

// The same schedule written out over `copies` consecutive cycles.
ZioCyclicPolicy repeat_cycles(const ZioCyclicPolicy& policy, std::int64_t copies);

// Rewrites ticks onto a finer grid (new_grid_size must be a multiple).
ZioCyclicPolicy refine_grid(const ZioCyclicPolicy& policy, std::int64_t new_grid_size);

}  // namespace lotcycle

#endif  // LOTCYCLE_POLICY_HPP
