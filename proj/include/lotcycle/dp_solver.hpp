#ifndef LOTCYCLE_DP_SOLVER_HPP
#define LOTCYCLE_DP_SOLVER_HPP

#include "lotcycle/alignment.hpp"
#include "lotcycle/instance.hpp"
#include "lotcycle/policy.hpp"
#include "lotcycle/rational.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lotcycle {

enum class ActionSearch {
    chain,      // exact segment-by-segment minimization over the action space
    enumerate,  // literal enumeration of every joint action (small states only)
};

enum class RescaleMode {
    optimal,  // cost-minimizing time scale, capped so the peak fits V
    fixed,    // 1/(1+2*slack), capped so the peak fits V
};

struct SolverConfig {
    Rational epsilon{1, 4};
    std::optional<int> base;                  // default ceil(n/epsilon)
    std::optional<Rational> cycle_grid_ratio;  // default 1+epsilon
    std::optional<Rational> lambda;            // default epsilon/n
    std::optional<Rational> acceptability_slack;  // default epsilon
    GridShape shape;
    std::optional<FrequencyPartition> partition_override;
    std::optional<Rational> cycle_override;

    std::int64_t state_cap = 2'000'000;
    std::int64_t action_cap = 50'000'000;
    double time_limit = 60.0;  // seconds, whole solve
    int jobs = 1;

    ActionSearch action_search = ActionSearch::chain;
    RescaleMode rescale = RescaleMode::optimal;
    std::ostream* trace = nullptr;  // JSON lines, one per expanded state

    void validate() const;
};

// Config with every optional resolved against the instance.
struct ResolvedConfig {
    Rational epsilon;
    int base = 2;
    Rational cycle_grid_ratio;
    Rational lambda;
    Rational slack;
    GridShape shape;
};
ResolvedConfig resolve_config(const Instance& instance, const SolverConfig& config);

// Geometric grid lo*ratio^j intersected with [lo, ratio*hi], ascending.
std::vector<Rational> enumerate_cycle_guesses(const DerivedConstants& constants,
                                              const Rational& ratio);

struct PartitionEnumeration {
    std::vector<FrequencyPartition> partitions;
    bool cap_hit = false;
};
PartitionEnumeration enumerate_partitions(const Instance& instance, int class_limit,
                                          const SolverConfig& config);

// Orders of one previous-class commodity inside the current interval: bit j of
// mask is an order at the j-th previous-class breakpoint, next_order is the
// offset (in the same spacing) of the first order at or after the exit.
struct PrevOrders {
    std::uint64_t mask = 0;
    std::int64_t next_order = 0;
    bool operator==(const PrevOrders&) const = default;
};

struct DpState {
    int q = 1;
    std::vector<PrevOrders> prev;  // empty when class q-1 has no commodities
    std::int64_t space_index = 0;  // L = space_index * lambda * V

    std::string key() const;
    bool operator==(const DpState&) const = default;
};

struct ChildCall {
    DpState state;
    std::int64_t copies = 1;
};

struct StateValue {
    bool feasible = false;
    double cost = 0.0;
    // Chosen y-indices per class-q commodity (partition order).
    std::vector<std::vector<std::int64_t>> orders;
    // One entry per sub-interval; empty for the last nonempty class.
    std::vector<ChildCall> children;
};

enum class SolveStatus { solved, infeasible_enumeration, resource_cap_hit };
std::string to_string(SolveStatus status);

struct SolveCounters {
    std::int64_t guesses_explored = 0;
    std::int64_t partitions_explored = 0;
    std::int64_t runs = 0;
    std::int64_t states_expanded = 0;
    std::int64_t actions_tested = 0;
};

class DpContext;

struct ResourceCapHit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resource guards shared by every run of one solve.
struct SolveBudget {
    std::int64_t state_cap = 0;
    std::int64_t action_cap = 0;
    std::chrono::steady_clock::time_point deadline;
    std::atomic<std::int64_t> states{0};
    std::atomic<std::int64_t> actions{0};
    std::atomic<bool> exhausted{false};
};

// Everything needed to replay a finished run.
struct DecisionTrace {
    FrequencyPartition partition;
    std::int64_t grid_size = 0;
    Rational cycle_length;
    Rational lambda;
    Rational slack;
    std::shared_ptr<const DpContext> context;
};

struct SolveResult {
    SolveStatus status = SolveStatus::infeasible_enumeration;
    std::string message;
    ZioCyclicPolicy policy;
    CostBreakdown cost;
    Rational peak;
    double lb_ratio = 0.0;

    ZioCyclicPolicy pre_rescale_policy;
    CostBreakdown pre_rescale_cost;
    Rational pre_rescale_peak;
    double dp_value = 0.0;  // recursion's cost for the whole cycle
    Rational scale_factor = 1;
    Rational cycle_guess;
    FrequencyPartition partition;

    SolveCounters counters;
    std::optional<DecisionTrace> trace;

    bool solved() const { return status == SolveStatus::solved; }
};

// Memo table and recursion for one (cycle length, partition) guess.
class DpContext {
public:
    DpContext(const Instance& instance, const FrequencyPartition& partition,
              const Rational& cycle_length, const ResolvedConfig& config,
              ActionSearch search, bool record_trace, std::shared_ptr<SolveBudget> budget);

    // Memoized; nullptr-free. Throws ResourceCapHit when a guard trips.
    std::shared_ptr<const StateValue> solve_state(const DpState& state);
    std::shared_ptr<const StateValue> lookup(const DpState& state) const;

    const BreakpointGrid& grid() const { return grid_; }
    const std::vector<int>& classes() const { return classes_; }
    const std::vector<int>& members(int q) const;
    std::int64_t max_space_index() const { return k_max_; }
    std::int64_t states_expanded() const { return states_expanded_; }
    std::int64_t actions_tested() const { return actions_tested_; }
    std::size_t memo_size() const { return memo_.size(); }
    const std::vector<std::string>& trace_lines() const { return trace_lines_; }
    const Instance& instance() const { return instance_; }
    const ResolvedConfig& config() const { return config_; }

    // Top state and the number of copies tiling the cycle.
    DpState top_state() const;
    std::int64_t top_copies() const;

    // Absolute orders of the assembled policy (breakpoint grid ticks).
    ZioCyclicPolicy assemble() const;

    // Floor of occupied space measured in grid units, as multiples of lambda*V.
    std::int64_t lambda_steps(std::int64_t units) const;
    // Largest admissible units for space index k under the acceptability bound.
    std::int64_t threshold(std::int64_t k) const;
    std::int64_t space_units(int id) const { return units_.at(id); }
    const Rational& units_to_space() const { return units_to_space_; }

private:
    struct Layout;
    StateValue compute(const DpState& state);
    StateValue compute_chain(const DpState& state, const Layout& layout);
    StateValue compute_enumerate(const DpState& state, const Layout& layout);
    Layout layout_for(const DpState& state) const;
    void charge_actions(std::int64_t count);
    void emit_trace(const DpState& state, const StateValue& value);

    Instance instance_;
    FrequencyPartition partition_;
    BreakpointGrid grid_;
    Rational cycle_length_;
    ResolvedConfig config_;
    ActionSearch search_;
    bool record_trace_;
    std::shared_ptr<SolveBudget> budget_;
    std::vector<int> classes_;
    std::unordered_map<int, std::vector<int>> members_;
    std::unordered_map<int, std::int64_t> units_;  // g_i: gamma_i * common denominator
    std::unordered_map<int, double> order_cost_;
    std::unordered_map<int, double> holding_rate_;
    double tick_ = 0.0;
    Rational units_to_space_;  // space = units * tick / denominator
    Rational units_per_step_;  // lambda * V in units
    std::int64_t k_max_ = 0;
    std::vector<std::int64_t> thresholds_;
    std::unordered_map<std::string, std::shared_ptr<const StateValue>> memo_;
    std::int64_t states_expanded_ = 0;
    std::int64_t actions_tested_ = 0;
    std::vector<std::string> trace_lines_;
};

SolveResult solve(const Instance& instance, const SolverConfig& config);

// One guess: fixed cycle length and partition.
SolveResult solve_single(const Instance& instance, const SolverConfig& config,
                         const Rational& cycle_length, const FrequencyPartition& partition);

struct ClassSlack {
    int q = 0;
    Rational max_gap_actual;  // max over intervals of (exact older-class max space) - L
    Rational max_gap_statistic;  // same with the entry-level upper statistic U
    std::int64_t intervals = 0;
};

struct SpaceSlackReport {
    std::vector<ClassSlack> classes;
    Rational peak_pre;
    Rational limit;      // (1+slack) V
    Rational overshoot;  // max(0, peak_pre - limit)
    Rational bound;      // n^2 V / base^(2a + minus_offset) + n lambda V
    bool within_bound = false;
};

// Throws std::invalid_argument when the result carries no trace.
SpaceSlackReport compute_space_slack_report(const SolveResult& result, const Instance& instance);

}  // namespace lotcycle

#endif  // LOTCYCLE_DP_SOLVER_HPP
