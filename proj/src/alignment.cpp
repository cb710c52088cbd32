#include "lotcycle/alignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace lotcycle {

void GridShape::validate() const {
    if (class_exponent < 1) throw std::invalid_argument("class exponent must be at least 1");
    if (minus_offset > plus_offset) {
        throw std::invalid_argument("minus offset must not exceed plus offset");
    }
}

std::int64_t int_pow(std::int64_t base, int exp) {
    if (exp < 0) throw std::invalid_argument("negative exponent");
    std::int64_t out = 1;
    for (int i = 0; i < exp; ++i) {
        if (out > std::numeric_limits<std::int64_t>::max() / base) {
            throw std::overflow_error("breakpoint count overflows int64");
        }
        out *= base;
    }
    return out;
}

int frequency_class(std::int64_t order_count, int base, const GridShape& shape) {
    if (order_count < 1) throw std::invalid_argument("order count must be positive");
    if (base < 2) throw std::invalid_argument("base must be at least 2");
    const std::int64_t step = int_pow(base, shape.class_exponent);
    int q = 1;
    std::int64_t upper = step;
    while (order_count > upper) {
        ++q;
        if (upper > std::numeric_limits<std::int64_t>::max() / step) break;
        upper *= step;
    }
    return q;
}

std::vector<int> FrequencyPartition::nonempty_classes() const {
    std::set<int> classes;
    for (const auto& [id, q] : class_of) {
        (void)id;
        classes.insert(q);
    }
    return {classes.begin(), classes.end()};
}

std::vector<int> FrequencyPartition::members(int q) const {
    std::vector<int> out;
    for (const auto& [id, cls] : class_of) {
        if (cls == q) out.push_back(id);
    }
    return out;
}

int FrequencyPartition::max_class() const {
    int q = 0;
    for (const auto& [id, cls] : class_of) {
        (void)id;
        q = std::max(q, cls);
    }
    return q;
}

FrequencyPartition classify_frequencies(const ZioCyclicPolicy& policy, int base,
                                        const GridShape& shape) {
    shape.validate();
    FrequencyPartition out;
    out.base = base;
    out.shape = shape;
    for (const auto& [id, ticks] : policy.orders) {
        out.class_of[id] = frequency_class(static_cast<std::int64_t>(ticks.size()), base, shape);
    }
    return out;
}

BreakpointGrid::BreakpointGrid(FrequencyPartition partition, std::int64_t grid_size,
                               Rational cycle_length)
    : partition_(std::move(partition)), grid_size_(grid_size), cycle_length_(std::move(cycle_length)) {
    partition_.shape.validate();
    if (partition_.base < 2) throw std::invalid_argument("base must be at least 2");
    if (grid_size_ <= 0) throw std::invalid_argument("grid size must be positive");
    if (cycle_length_ <= 0) throw std::invalid_argument("cycle length must be positive");
    for (int q : partition_.nonempty_classes()) {
        if (q < 1) throw std::invalid_argument("class indices start at 1");
        if (grid_size_ % plus_count(q) != 0) {
            throw std::invalid_argument("grid size " + std::to_string(grid_size_) +
                                        " is not divisible by |B_" + std::to_string(q) +
                                        "^+| = " + std::to_string(plus_count(q)));
        }
    }
}

std::int64_t BreakpointGrid::minus_count(int q) const {
    const auto& s = partition_.shape;
    return int_pow(partition_.base, std::max(0, s.class_exponent * q + s.minus_offset));
}

std::int64_t BreakpointGrid::plus_count(int q) const {
    const auto& s = partition_.shape;
    return int_pow(partition_.base, std::max(0, s.class_exponent * q + s.plus_offset));
}

std::int64_t BreakpointGrid::required_grid_size(const FrequencyPartition& partition) {
    const auto& s = partition.shape;
    return int_pow(partition.base, std::max(0, s.class_exponent * partition.max_class() + s.plus_offset));
}

BreakpointGrid build_grids(const FrequencyPartition& partition, std::int64_t grid_size,
                           const Rational& cycle_length) {
    return BreakpointGrid(partition, grid_size, cycle_length);
}

std::string AlignmentViolation::describe() const {
    std::string what = kind == Kind::missing_zero_inventory
                           ? "no order (zero inventory) at coarse breakpoint tick "
                           : "order off the fine breakpoints at tick ";
    return "commodity " + std::to_string(commodity_id) + ": " + what + std::to_string(tick);
}

namespace {

int class_for(const FrequencyPartition& partition, int id) {
    auto it = partition.class_of.find(id);
    if (it == partition.class_of.end()) {
        throw std::invalid_argument("partition has no class for commodity " + std::to_string(id));
    }
    return it->second;
}

}  // namespace

AlignmentCheck check_b_aligned(const ZioCyclicPolicy& policy, const FrequencyPartition& partition,
                               const BreakpointGrid& grid) {
    validate_policy(policy);
    if (policy.grid_size % grid.grid_size() != 0) {
        throw std::invalid_argument("policy grid is not a multiple of the breakpoint grid");
    }
    if (policy.cycle_length != grid.cycle_length()) {
        throw std::invalid_argument("policy and breakpoint grid have different cycle lengths");
    }
    const std::int64_t factor = policy.grid_size / grid.grid_size();
    AlignmentCheck out;
    for (const auto& [id, ticks] : policy.orders) {
        const int q = class_for(partition, id);
        const std::int64_t minus = grid.minus_step(q) * factor;
        const std::int64_t plus = grid.plus_step(q) * factor;
        for (std::int64_t b = 0; b < policy.grid_size; b += minus) {
            if (!std::binary_search(ticks.begin(), ticks.end(), b)) {
                out.violations.push_back({id, b, AlignmentViolation::Kind::missing_zero_inventory});
            }
        }
        for (auto t : ticks) {
            if (t % plus != 0) {
                out.violations.push_back({id, t, AlignmentViolation::Kind::order_off_grid});
            }
        }
    }
    out.aligned = out.violations.empty();
    return out;
}

ZioCyclicPolicy insert_zero_inventory_orders(const ZioCyclicPolicy& policy,
                                             const FrequencyPartition& partition,
                                             const BreakpointGrid& grid) {
    validate_policy(policy);
    const std::int64_t common = std::lcm(policy.grid_size, grid.grid_size());
    ZioCyclicPolicy out = refine_grid(policy, common);
    const std::int64_t factor = common / grid.grid_size();
    for (auto& [id, ticks] : out.orders) {
        const int q = class_for(partition, id);
        const std::int64_t minus = grid.minus_step(q) * factor;
        std::vector<std::int64_t> merged;
        std::vector<std::int64_t> coarse;
        for (std::int64_t b = 0; b < common; b += minus) coarse.push_back(b);
        std::set_union(ticks.begin(), ticks.end(), coarse.begin(), coarse.end(),
                       std::back_inserter(merged));
        ticks = std::move(merged);
    }
    return out;
}

ZioCyclicPolicy round_orders_to_plus_points(const ZioCyclicPolicy& policy,
                                            const FrequencyPartition& partition,
                                            const BreakpointGrid& grid) {
    validate_policy(policy);
    const std::int64_t common = std::lcm(policy.grid_size, grid.grid_size());
    const std::int64_t to_common = common / policy.grid_size;
    const std::int64_t to_grid = common / grid.grid_size();
    ZioCyclicPolicy out;
    out.grid_size = grid.grid_size();
    out.cycle_length = policy.cycle_length;
    for (const auto& [id, ticks] : policy.orders) {
        const int q = class_for(partition, id);
        const std::int64_t step = grid.plus_step(q) * to_grid;
        std::set<std::int64_t> rounded;
        for (auto t : ticks) {
            std::int64_t c = (t * to_common + step - 1) / step * step;
            if (c == common) c = 0;  // the next cycle's first breakpoint
            rounded.insert(c / to_grid);
        }
        out.orders[id] = {rounded.begin(), rounded.end()};
    }
    return out;
}

ZioCyclicPolicy align_policy(const ZioCyclicPolicy& policy, const FrequencyPartition& partition,
                             const BreakpointGrid& grid) {
    validate_policy(policy);
    if (policy.cycle_length != grid.cycle_length()) {
        throw std::invalid_argument("policy and breakpoint grid have different cycle lengths");
    }
    auto observed = classify_frequencies(policy, partition.base, partition.shape);
    if (observed.class_of != partition.class_of) {
        throw std::invalid_argument("partition does not match the policy's order counts");
    }
    return round_orders_to_plus_points(insert_zero_inventory_orders(policy, partition, grid),
                                       partition, grid);
}

Rational holding_lower_bound(const Rational& holding_rate, const Rational& cycle_length,
                             std::int64_t order_count) {
    if (order_count < 1) throw std::invalid_argument("order count must be positive");
    if (holding_rate <= 0 || cycle_length <= 0) {
        throw std::invalid_argument("holding rate and cycle length must be positive");
    }
    return holding_rate * cycle_length * cycle_length / order_count;
}

double holding_lower_bound(double holding_rate, double cycle_length, std::int64_t order_count) {
    if (order_count < 1) throw std::invalid_argument("order count must be positive");
    if (holding_rate <= 0 || cycle_length <= 0) {
        throw std::invalid_argument("holding rate and cycle length must be positive");
    }
    return holding_rate * cycle_length * cycle_length / static_cast<double>(order_count);
}

}  // namespace lotcycle
