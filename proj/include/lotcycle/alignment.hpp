#ifndef LOTCYCLE_ALIGNMENT_HPP
#define LOTCYCLE_ALIGNMENT_HPP

#include "lotcycle/policy.hpp"
#include "lotcycle/rational.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lotcycle {

// Exponents of the nested breakpoint hierarchy at granularity base b:
//   class q holds commodities with order count in (b^(a(q-1)), b^(aq)],
//   |B_q^+| = b^(aq + plus_offset), |B_q^-| = b^max(0, aq + minus_offset).
// The defaults (3, +1, -4) are the standard hierarchy; smaller shapes keep the
// same nesting structure and are used to make exhaustive cross-checks tractable.
struct GridShape {
    int class_exponent = 3;
    int plus_offset = 1;
    int minus_offset = -4;

    void validate() const;
    bool operator==(const GridShape&) const = default;
};

// base^exp, throwing std::overflow_error beyond int64.
std::int64_t int_pow(std::int64_t base, int exp);

int frequency_class(std::int64_t order_count, int base, const GridShape& shape = {});

struct FrequencyPartition {
    int base = 2;
    GridShape shape;
    std::map<int, int> class_of;  // commodity id -> class index q >= 1

    std::vector<int> nonempty_classes() const;
    std::vector<int> members(int q) const;
    int max_class() const;
    bool operator==(const FrequencyPartition&) const = default;
};

FrequencyPartition classify_frequencies(const ZioCyclicPolicy& policy, int base,
                                        const GridShape& shape = {});

class BreakpointGrid {
public:
    // Throws std::invalid_argument unless every nonempty class's plus count
    // divides grid_size.
    BreakpointGrid(FrequencyPartition partition, std::int64_t grid_size, Rational cycle_length);

    const FrequencyPartition& partition() const { return partition_; }
    std::int64_t grid_size() const { return grid_size_; }
    const Rational& cycle_length() const { return cycle_length_; }
    int base() const { return partition_.base; }
    const GridShape& shape() const { return partition_.shape; }

    std::int64_t minus_count(int q) const;
    std::int64_t plus_count(int q) const;
    std::int64_t minus_step(int q) const { return grid_size_ / minus_count(q); }
    std::int64_t plus_step(int q) const { return grid_size_ / plus_count(q); }

    bool is_minus_point(int q, std::int64_t tick) const { return tick % minus_step(q) == 0; }
    bool is_plus_point(int q, std::int64_t tick) const { return tick % plus_step(q) == 0; }

    // Smallest grid size that accommodates the given classes.
    static std::int64_t required_grid_size(const FrequencyPartition& partition);

private:
    FrequencyPartition partition_;
    std::int64_t grid_size_;
    Rational cycle_length_;
};

BreakpointGrid build_grids(const FrequencyPartition& partition, std::int64_t grid_size,
                           const Rational& cycle_length);

struct AlignmentViolation {
    enum class Kind { missing_zero_inventory, order_off_grid };
    int commodity_id = 0;
    std::int64_t tick = 0;  // in breakpoint-grid ticks when on-grid, policy ticks otherwise
    Kind kind = Kind::order_off_grid;
    std::string describe() const;
};

struct AlignmentCheck {
    bool aligned = true;
    std::vector<AlignmentViolation> violations;
};

// The policy grid must be a multiple of the breakpoint grid.
AlignmentCheck check_b_aligned(const ZioCyclicPolicy& policy, const FrequencyPartition& partition,
                               const BreakpointGrid& grid);

// First transform step: every commodity of class q also orders at each B_q^- point.
// Works on the common refinement of the policy and breakpoint grids.
ZioCyclicPolicy insert_zero_inventory_orders(const ZioCyclicPolicy& policy,
                                             const FrequencyPartition& partition,
                                             const BreakpointGrid& grid);

// Second step: every order covering [t, t+d) becomes [ceil(t), ceil(t+d)) with
// ceilings taken on B_q^+; orders collapsing to a point are dropped. Returns a
// policy on the breakpoint grid.
ZioCyclicPolicy round_orders_to_plus_points(const ZioCyclicPolicy& policy,
                                            const FrequencyPartition& partition,
                                            const BreakpointGrid& grid);

// Both steps. The partition must match classify_frequencies(policy, base, shape);
// throws std::invalid_argument otherwise.
ZioCyclicPolicy align_policy(const ZioCyclicPolicy& policy, const FrequencyPartition& partition,
                             const BreakpointGrid& grid);

// Minimum holding cost H * sum(gap^2) of a zero-inventory schedule with exactly
// `order_count` orders in a cycle of length `cycle_length`: H * cycle^2 / N,
// attained by equal gaps (Cauchy-Schwarz).
Rational holding_lower_bound(const Rational& holding_rate, const Rational& cycle_length,
                             std::int64_t order_count);
double holding_lower_bound(double holding_rate, double cycle_length, std::int64_t order_count);

}  // namespace lotcycle

#endif  // LOTCYCLE_ALIGNMENT_HPP
