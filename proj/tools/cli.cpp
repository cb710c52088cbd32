#include "cli.hpp"

#include "lotcycle/alignment.hpp"
#include "lotcycle/dp_solver.hpp"
#include "lotcycle/instance.hpp"
#include "lotcycle/json_io.hpp"
#include "lotcycle/oracle.hpp"
#include "lotcycle/policy.hpp"
#include "lotcycle/sosi.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace lotcycle::cli {

namespace {

constexpr const char* time_limit_env = "LOTCYCLE_TIME_LIMIT_SECS";

struct GenArgs {
    std::uint64_t seed = 0;
    int n = 2;
    std::vector<double> order_cost{1.0, 100.0};
    std::vector<double> holding{0.1, 10.0};
    std::vector<double> space{0.1, 10.0};
    double rho = 1.0;
    std::int64_t denominator = 1000;
    std::string output;
};

struct SolverArgs {
    std::string epsilon = "1/4";
    int base = 0;
    std::string lambda;
    std::string ratio;
    std::string slack;
    std::string shape;
    std::string partition;
    std::string cycle;
    std::int64_t state_cap = SolverConfig{}.state_cap;
    std::int64_t action_cap = SolverConfig{}.action_cap;
    double time_limit = SolverConfig{}.time_limit;
    int jobs = 1;
    std::string search = "chain";
    std::string rescale = "optimal";
    std::string trace;
    CLI::Option* base_option = nullptr;
};

struct OracleArgs {
    std::string instance;
    std::string mode = "grid";
    std::int64_t grid_size = 0;
    std::string cycle;
    std::string partition;
    std::string slack = "0";
    std::int64_t guard = 5'000'000;
};

struct AlignArgs {
    std::string instance;
    std::string policy;
    int base = 2;
    std::string shape;
    std::int64_t grid_size = 0;
};

Instance load_instance(const std::string& path) {
    Instance instance = instance_from_json(parse_json_text(read_text_file(path)));
    require_valid(instance);
    return instance;
}

ZioCyclicPolicy load_policy(const std::string& path) {
    return policy_from_json(parse_json_text(read_text_file(path)));
}

GridShape parse_shape(const std::string& text) {
    std::vector<int> parts;
    std::stringstream in(text);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(piece, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != piece.size()) throw std::invalid_argument("bad shape \"" + text + "\"");
        parts.push_back(value);
    }
    if (parts.size() != 3) throw std::invalid_argument("shape needs three integers a,plus,minus");
    GridShape shape{parts[0], parts[1], parts[2]};
    shape.validate();
    return shape;
}

void check_range(const std::vector<double>& range, const char* name) {
    if (range.size() != 2 || !(range[0] > 0) || !(range[0] <= range[1]) || !std::isfinite(range[1])) {
        throw std::invalid_argument(std::string("invalid range for ") + name);
    }
}

double log_uniform(std::mt19937_64& rng, const std::vector<double>& range) {
    std::uniform_real_distribution<double> dist(std::log(range[0]), std::log(range[1]));
    return std::exp(dist(rng));
}

void emit(std::ostream& out, const Json& doc) {
    out << doc.dump(2) << '\n';
}

int cmd_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
    if (a.n < 1) throw std::invalid_argument("n must be positive");
    if (!(a.rho > 0) || !std::isfinite(a.rho)) throw std::invalid_argument("rho must be positive");
    if (a.denominator < 1) throw std::invalid_argument("denominator must be positive");
    check_range(a.order_cost, "order cost");
    check_range(a.holding, "holding rate");
    check_range(a.space, "space per unit");

    std::mt19937_64 rng(a.seed);
    Instance instance;
    double footprint = 0.0;
    for (int i = 0; i < a.n; ++i) {
        Commodity c;
        c.id = i + 1;
        c.order_cost = approximate(log_uniform(rng, a.order_cost), a.denominator);
        c.holding_rate = approximate(log_uniform(rng, a.holding), a.denominator);
        c.space_per_unit = approximate(log_uniform(rng, a.space), a.denominator);
        for (Rational* r : {&c.order_cost, &c.holding_rate, &c.space_per_unit}) {
            if (*r <= 0) *r = Rational(1, a.denominator);
        }
        footprint += to_double(c.space_per_unit) *
                     eoq_optimal_interval(to_double(c.order_cost), to_double(c.holding_rate));
        instance.commodities.push_back(c);
    }
    instance.capacity = approximate(a.rho * footprint, a.denominator);
    if (instance.capacity <= 0) instance.capacity = Rational(1, a.denominator);
    require_valid(instance);

    const Json doc = instance_to_json(instance);
    if (a.output.empty()) {
        emit(out, doc);
    } else {
        std::ofstream file(a.output);
        if (!file) throw std::invalid_argument("cannot write " + a.output);
        emit(file, doc);
        err << "wrote " << a.n << " commodities to " << a.output << '\n';
    }
    return exit_ok;
}

SolverConfig make_config(const SolverArgs& a) {
    SolverConfig config;
    config.epsilon = parse_rational(a.epsilon);
    if (!a.partition.empty()) {
        FrequencyPartition p = partition_from_json(parse_json_text(read_text_file(a.partition)));
        config.base = p.base;
        config.shape = p.shape;
        config.partition_override = std::move(p);
    }
    if (a.base_option->count() > 0) config.base = a.base;
    if (!a.shape.empty()) config.shape = parse_shape(a.shape);
    if (!a.lambda.empty()) config.lambda = parse_rational(a.lambda);
    if (!a.ratio.empty()) config.cycle_grid_ratio = parse_rational(a.ratio);
    if (!a.slack.empty()) config.acceptability_slack = parse_rational(a.slack);
    if (!a.cycle.empty()) config.cycle_override = parse_rational(a.cycle);
    config.state_cap = a.state_cap;
    config.action_cap = a.action_cap;
    config.time_limit = a.time_limit;
    if (const char* env = std::getenv(time_limit_env); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const double secs = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(secs > 0)) {
            throw std::invalid_argument(std::string(time_limit_env) + " must be a positive number");
        }
        config.time_limit = secs;
    }
    config.jobs = a.jobs;
    if (a.search == "chain") {
        config.action_search = ActionSearch::chain;
    } else if (a.search == "enumerate") {
        config.action_search = ActionSearch::enumerate;
    } else {
        throw std::invalid_argument("search must be chain or enumerate");
    }
    if (a.rescale == "optimal") {
        config.rescale = RescaleMode::optimal;
    } else if (a.rescale == "fixed") {
        config.rescale = RescaleMode::fixed;
    } else {
        throw std::invalid_argument("rescale must be optimal or fixed");
    }
    config.validate();
    return config;
}

void add_solver_options(CLI::App* cmd, SolverArgs& a) {
    cmd->add_option("--epsilon", a.epsilon, "accuracy parameter (rational)")->capture_default_str();
    a.base_option = cmd->add_option("--base", a.base, "breakpoint base (default ceil(n/epsilon))");
    cmd->add_option("--lambda", a.lambda, "space discretization step as a fraction of V");
    cmd->add_option("--ratio", a.ratio, "cycle guess ratio (default 1+epsilon)");
    cmd->add_option("--slack", a.slack, "acceptability slack (default epsilon)");
    cmd->add_option("--shape", a.shape, "grid shape a,plus,minus");
    cmd->add_option("--partition", a.partition, "fixed frequency partition JSON");
    cmd->add_option("--cycle", a.cycle, "fixed cycle length");
    cmd->add_option("--state-cap", a.state_cap, "maximum expanded states")->capture_default_str();
    cmd->add_option("--action-cap", a.action_cap, "maximum tested actions")->capture_default_str();
    cmd->add_option("--time-limit", a.time_limit, "seconds for the whole solve")->capture_default_str();
    cmd->add_option("--jobs", a.jobs, "parallel runs")->capture_default_str();
    cmd->add_option("--search", a.search, "chain or enumerate")->capture_default_str();
    cmd->add_option("--rescale", a.rescale, "optimal or fixed")->capture_default_str();
    cmd->add_option("--trace", a.trace, "JSON lines file of expanded states");
}

Json counters_to_json(const SolveCounters& c) {
    return {{"guesses_explored", c.guesses_explored},
            {"partitions_explored", c.partitions_explored},
            {"runs", c.runs},
            {"states_expanded", c.states_expanded},
            {"actions_tested", c.actions_tested}};
}

int status_exit(SolveStatus status) {
    switch (status) {
        case SolveStatus::solved: return exit_ok;
        case SolveStatus::infeasible_enumeration: return exit_infeasible;
        case SolveStatus::resource_cap_hit: return exit_resource_cap;
    }
    return exit_usage;
}

SolveResult run_solver(const Instance& instance, const SolverArgs& a) {
    SolverConfig config = make_config(a);
    std::ofstream trace;
    if (!a.trace.empty()) {
        trace.open(a.trace);
        if (!trace) throw std::invalid_argument("cannot write " + a.trace);
        config.trace = &trace;
    }
    return solve(instance, config);
}

Json result_to_json(const SolveResult& r, const Instance& instance) {
    Json doc;
    doc["status"] = to_string(r.status);
    if (!r.message.empty()) doc["message"] = r.message;
    doc["lower_bound"] = lower_bound(instance);
    doc["counters"] = counters_to_json(r.counters);
    if (!r.solved()) return doc;
    doc["average_cost"] = r.cost.average_value();
    doc["lb_ratio"] = r.lb_ratio;
    doc["cost"] = cost_to_json(r.cost);
    doc["peak"] = rational_to_json(r.peak);
    doc["capacity"] = rational_to_json(instance.capacity);
    doc["policy"] = policy_to_json(r.policy);
    doc["pre_rescale"] = {{"average_cost", r.pre_rescale_cost.average_value()},
                          {"peak", rational_to_json(r.pre_rescale_peak)},
                          {"dp_value", r.dp_value},
                          {"policy", policy_to_json(r.pre_rescale_policy)}};
    doc["scale_factor"] = rational_to_json(r.scale_factor);
    doc["cycle_guess"] = rational_to_json(r.cycle_guess);
    doc["partition"] = partition_to_json(r.partition);
    return doc;
}

int cmd_solve(const std::string& path, const SolverArgs& a, std::ostream& out, std::ostream& err) {
    const Instance instance = load_instance(path);
    const SolveResult r = run_solver(instance, a);
    emit(out, result_to_json(r, instance));
    err << "status " << to_string(r.status);
    if (r.solved()) err << ", average " << r.cost.average_value() << ", lb ratio " << r.lb_ratio;
    if (!r.message.empty()) err << " (" << r.message << ")";
    err << '\n';
    return status_exit(r.status);
}

int cmd_evaluate(const std::string& instance_path, const std::string& policy_path,
                 std::ostream& out, std::ostream& err) {
    const Instance instance = load_instance(instance_path);
    const ZioCyclicPolicy policy = load_policy(policy_path);
    require_matching_ids(policy, instance);
    const CostBreakdown cost = evaluate_cycle(policy, instance);
    const CapacityCheck check = check_capacity(policy, instance);
    Json doc{{"cost", cost_to_json(cost)},
             {"average_cost", cost.average_value()},
             {"peak", rational_to_json(check.peak)},
             {"capacity", rational_to_json(instance.capacity)},
             {"feasible", check.feasible}};
    if (check.witness_time) doc["witness_time"] = rational_to_json(*check.witness_time);
    emit(out, doc);
    err << "average " << cost.average_value() << (check.feasible ? ", feasible" : ", infeasible") << '\n';
    return exit_ok;
}

int cmd_baseline(const std::string& path, std::ostream& out, std::ostream& err) {
    const Instance instance = load_instance(path);
    const Baseline b = build_baseline_policy(instance);
    const CostBreakdown cost = evaluate_cycle(b.policy, instance);
    Json intervals = Json::array();
    for (const auto& t : b.report.intervals) intervals.push_back(rational_to_json(t));
    Json doc{{"policy", policy_to_json(b.policy)},
             {"cost", cost_to_json(cost)},
             {"average_cost", cost.average_value()},
             {"peak", rational_to_json(peak_space(b.policy, instance))},
             {"lower_bound", lower_bound(instance)},
             {"analytic_cost", b.report.analytic_cost},
             {"n_times_m", b.report.n_times_m},
             {"rounding_factor", b.report.rounding_factor},
             {"halved_ids", b.report.halved_ids},
             {"intervals", intervals}};
    emit(out, doc);
    err << "baseline average " << cost.average_value() << '\n';
    return exit_ok;
}

int cmd_align(const AlignArgs& a, std::ostream& out, std::ostream& err) {
    const Instance instance = load_instance(a.instance);
    const ZioCyclicPolicy policy = load_policy(a.policy);
    require_matching_ids(policy, instance);
    const GridShape shape = a.shape.empty() ? GridShape{} : parse_shape(a.shape);
    const FrequencyPartition partition = classify_frequencies(policy, a.base, shape);
    const std::int64_t grid_size =
        a.grid_size > 0 ? a.grid_size : BreakpointGrid::required_grid_size(partition);
    const BreakpointGrid grid = build_grids(partition, grid_size, policy.cycle_length);
    const ZioCyclicPolicy aligned = align_policy(policy, partition, grid);
    const AlignmentCheck check = check_b_aligned(aligned, partition, grid);
    const CostBreakdown before = evaluate_cycle(policy, instance);
    const CostBreakdown after = evaluate_cycle(aligned, instance);
    Json doc{{"policy", policy_to_json(aligned)},
             {"partition", partition_to_json(partition)},
             {"aligned", check.aligned},
             {"input", {{"cost", cost_to_json(before)}, {"peak", rational_to_json(peak_space(policy, instance))}}},
             {"output", {{"cost", cost_to_json(after)}, {"peak", rational_to_json(peak_space(aligned, instance))}}}};
    emit(out, doc);
    err << "average " << before.average_value() << " -> " << after.average_value() << '\n';
    return exit_ok;
}

Json oracle_to_json(const OracleResult& r) {
    return {{"policy", policy_to_json(r.policy)},
            {"cost", cost_to_json(r.cost)},
            {"average_cost", r.cost.average_value()},
            {"examined", r.examined},
            {"feasible_count", r.feasible}};
}

int cmd_oracle(const OracleArgs& a, std::ostream& out, std::ostream& err) {
    const Instance instance = load_instance(a.instance);
    if (a.cycle.empty()) throw std::invalid_argument("--cycle is required");
    const Rational cycle = parse_rational(a.cycle);
    std::optional<OracleResult> r;
    if (a.mode == "grid") {
        if (a.grid_size < 1) throw std::invalid_argument("--grid-size is required in grid mode");
        r = grid_brute_force_optimal(instance, a.grid_size, cycle, a.guard);
    } else if (a.mode == "aligned") {
        if (a.partition.empty()) throw std::invalid_argument("--partition is required in aligned mode");
        const FrequencyPartition partition =
            partition_from_json(parse_json_text(read_text_file(a.partition)));
        const std::int64_t grid_size =
            a.grid_size > 0 ? a.grid_size : BreakpointGrid::required_grid_size(partition);
        const BreakpointGrid grid = build_grids(partition, grid_size, cycle);
        r = exhaustive_b_aligned_search(instance, partition, grid, parse_rational(a.slack), a.guard);
    } else {
        throw std::invalid_argument("mode must be grid or aligned");
    }
    if (!r) {
        emit(out, Json{{"status", "infeasible"}});
        err << "no feasible policy\n";
        return exit_infeasible;
    }
    Json doc = oracle_to_json(*r);
    doc["status"] = "solved";
    emit(out, doc);
    err << "oracle average " << r->cost.average_value() << " over " << r->examined << " combinations\n";
    return exit_ok;
}

// Coarsest grid that still holds every order of the policy, refined by doubling
// while the brute force stays under the guard.
std::optional<OracleResult> oracle_on_policy_grid(const Instance& instance,
                                                  const ZioCyclicPolicy& policy,
                                                  std::int64_t guard) {
    std::int64_t g = policy.grid_size;
    for (const auto& [id, ticks] : policy.orders) {
        for (auto t : ticks) g = std::gcd(g, t);
    }
    std::int64_t grid = policy.grid_size / g;
    auto fits = [&](std::int64_t size) {
        if (size > 30) return false;
        const double per = std::ldexp(1.0, static_cast<int>(size)) - 1;
        return std::pow(per, static_cast<double>(instance.size())) <= static_cast<double>(guard);
    };
    if (!fits(grid)) return std::nullopt;
    while (fits(grid * 2)) grid *= 2;
    return grid_brute_force_optimal(instance, grid, policy.cycle_length, guard);
}

int cmd_compare(const std::string& path, const SolverArgs& a, std::int64_t guard,
                std::ostream& out, std::ostream& err) {
    const Instance instance = load_instance(path);
    const double m = lower_bound(instance);
    const Baseline b = build_baseline_policy(instance);
    const double baseline = evaluate_cycle(b.policy, instance).average_value();
    const SolveResult r = run_solver(instance, a);

    Json rows = Json::array();
    auto add = [&](const std::string& name, std::optional<double> value) {
        Json row{{"method", name}};
        if (value) {
            row["average_cost"] = *value;
            row["ratio_to_lower_bound"] = *value / m;
        } else {
            row["average_cost"] = nullptr;
            row["ratio_to_lower_bound"] = nullptr;
        }
        rows.push_back(row);
    };
    add("lower_bound", m);
    std::optional<double> oracle;
    if (r.solved()) {
        try {
            if (auto o = oracle_on_policy_grid(instance, r.policy, guard)) oracle = o->cost.average_value();
        } catch (const OracleGuardExceeded&) {
        }
    }
    add("oracle", oracle);
    add("dp", r.solved() ? std::optional<double>(r.cost.average_value()) : std::nullopt);
    add("baseline", baseline);

    emit(out, Json{{"status", to_string(r.status)}, {"rows", rows}});
    err << std::left << std::setw(12) << "method" << std::setw(16) << "average" << "ratio\n";
    for (const auto& row : rows) {
        err << std::setw(12) << row["method"].get<std::string>();
        if (row["average_cost"].is_null()) {
            err << std::setw(16) << "-" << "-\n";
        } else {
            err << std::setw(16) << row["average_cost"].get<double>()
                << row["ratio_to_lower_bound"].get<double>() << '\n';
        }
    }
    return status_exit(r.status);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cyclic warehouse lot scheduling: solve, evaluate and compare policies"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate a random instance");
    gen->add_option("--seed", gen_args.seed, "random seed")->required();
    gen->add_option("--n", gen_args.n, "number of commodities")->capture_default_str();
    gen->add_option("--order-cost", gen_args.order_cost, "log-uniform range lo hi")->expected(2);
    gen->add_option("--holding", gen_args.holding, "log-uniform range lo hi")->expected(2);
    gen->add_option("--space", gen_args.space, "log-uniform range lo hi")->expected(2);
    gen->add_option("--rho", gen_args.rho, "capacity tightness")->capture_default_str();
    gen->add_option("--denominator", gen_args.denominator, "largest denominator of drawn values")
        ->capture_default_str();
    gen->add_option("-o,--output", gen_args.output, "output file (default stdout)");

    std::string solve_path;
    SolverArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "run the dynamic program");
    solve_cmd->add_option("instance", solve_path, "instance JSON")->required();
    add_solver_options(solve_cmd, solve_args);

    std::string eval_instance, eval_policy;
    auto* evaluate = app.add_subcommand("evaluate", "cost and peak of a policy");
    evaluate->add_option("instance", eval_instance, "instance JSON")->required();
    evaluate->add_option("policy", eval_policy, "policy JSON")->required();

    std::string baseline_path;
    auto* baseline = app.add_subcommand("baseline", "capacity-feasible SOSI baseline");
    baseline->add_option("instance", baseline_path, "instance JSON")->required();

    AlignArgs align_args;
    auto* align = app.add_subcommand("align", "B-align a policy");
    align->add_option("instance", align_args.instance, "instance JSON")->required();
    align->add_option("policy", align_args.policy, "policy JSON")->required();
    align->add_option("--base", align_args.base, "breakpoint base")->capture_default_str();
    align->add_option("--shape", align_args.shape, "grid shape a,plus,minus");
    align->add_option("--grid-size", align_args.grid_size, "breakpoint grid ticks");

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle", "brute-force reference optimum");
    oracle->add_option("instance", oracle_args.instance, "instance JSON")->required();
    oracle->add_option("--mode", oracle_args.mode, "grid or aligned")->capture_default_str();
    oracle->add_option("--grid-size", oracle_args.grid_size, "ticks per cycle");
    oracle->add_option("--cycle", oracle_args.cycle, "cycle length");
    oracle->add_option("--partition", oracle_args.partition, "partition JSON (aligned mode)");
    oracle->add_option("--slack", oracle_args.slack, "space slack (aligned mode)")->capture_default_str();
    oracle->add_option("--guard", oracle_args.guard, "maximum combinations")->capture_default_str();

    std::string compare_path;
    SolverArgs compare_args;
    std::int64_t compare_guard = 2'000'000;
    auto* compare = app.add_subcommand("compare", "lower bound, oracle, DP and baseline side by side");
    compare->add_option("instance", compare_path, "instance JSON")->required();
    compare->add_option("--guard", compare_guard, "oracle combination limit")->capture_default_str();
    add_solver_options(compare, compare_args);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, err, err) == 0 ? exit_ok : exit_usage;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_args, out, err);
        if (solve_cmd->parsed()) return cmd_solve(solve_path, solve_args, out, err);
        if (evaluate->parsed()) return cmd_evaluate(eval_instance, eval_policy, out, err);
        if (baseline->parsed()) return cmd_baseline(baseline_path, out, err);
        if (align->parsed()) return cmd_align(align_args, out, err);
        if (oracle->parsed()) return cmd_oracle(oracle_args, out, err);
        if (compare->parsed()) return cmd_compare(compare_path, compare_args, compare_guard, out, err);
    } catch (const OracleGuardExceeded& e) {
        err << "error: " << e.what() << '\n';
        return exit_resource_cap;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace lotcycle::cli
