#ifndef LOTCYCLE_ORACLE_HPP
#define LOTCYCLE_ORACLE_HPP

#include "lotcycle/alignment.hpp"
#include "lotcycle/instance.hpp"
#include "lotcycle/policy.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace lotcycle {

struct OracleGuardExceeded : std::length_error {
    using std::length_error::length_error;
};

struct OracleResult {
    ZioCyclicPolicy policy;
    CostBreakdown cost;
    std::int64_t examined = 0;
    std::int64_t feasible = 0;
};

// Best capacity-feasible policy whose orders sit on a grid of grid_size ticks,
// over every nonempty order set per commodity. Ties keep the first combination
// in lexicographic order. Returns nullopt when nothing fits.
std::optional<OracleResult> grid_brute_force_optimal(const Instance& instance,
                                                     std::int64_t grid_size,
                                                     const Rational& cycle_length,
                                                     std::int64_t guard = 5'000'000);

// Cheapest B-aligned policy on the grid with peak <= (1+slack) V.
std::optional<OracleResult> exhaustive_b_aligned_search(const Instance& instance,
                                                        const FrequencyPartition& partition,
                                                        const BreakpointGrid& grid,
                                                        const Rational& slack,
                                                        std::int64_t guard = 5'000'000);

// Largest occupied space over `samples` evenly spaced times in [0, cycle).
// Never exceeds the true peak.
Rational sampled_peak(const ZioCyclicPolicy& policy, const Instance& instance,
                      std::int64_t samples);

}  // namespace lotcycle

#endif  // LOTCYCLE_ORACLE_HPP
