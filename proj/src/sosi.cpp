#include "lotcycle/sosi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lotcycle {

double eoq_cost(double order_cost, double holding_rate, double interval) {
    if (order_cost <= 0 || holding_rate <= 0 || interval <= 0) {
        throw std::invalid_argument("eoq_cost requires positive K, H and T");
    }
    return order_cost / interval + holding_rate * interval;
}

double eoq_optimal_interval(double order_cost, double holding_rate) {
    if (order_cost <= 0 || holding_rate <= 0) {
        throw std::invalid_argument("eoq_optimal_interval requires positive K and H");
    }
    return std::sqrt(order_cost / holding_rate);
}

std::vector<CappedInterval> capacity_constrained_sosi(const Instance& instance) {
    require_valid(instance);
    std::vector<CappedInterval> out;
    out.reserve(instance.size());
    for (const auto& c : instance.commodities) {
        out.push_back(capped_interval(c, instance.capacity));
    }
    return out;
}

namespace {

constexpr int kMaxExponent = 30;
constexpr std::size_t kMaxHalvingCandidates = 16;

Rational power_of_two(int k) {
    return Rational(BigInt(1) << k);
}

}  // namespace

Baseline build_baseline_policy(const Instance& instance) {
    const auto caps = capacity_constrained_sosi(instance);
    const std::size_t n = instance.size();
    const Rational n_rat(static_cast<long>(n));

    std::vector<Rational> targets;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = instance.commodities[i];
        Rational t = caps[i].exact ? *caps[i].exact : from_double(caps[i].value);
        if (c.space_per_unit > 0) {
            t = std::min(t, instance.capacity / c.space_per_unit);
        }
        targets.push_back(t / n_rat);
    }
    const Rational base = *std::min_element(targets.begin(), targets.end());

    std::vector<int> exponent(n);
    std::vector<std::size_t> rounded_up;
    for (std::size_t i = 0; i < n; ++i) {
        double ratio = to_double(targets[i] / base);
        exponent[i] = std::max(0, static_cast<int>(std::floor(std::log2(ratio) + 0.5)));
        if (exponent[i] > kMaxExponent) {
            throw std::runtime_error("baseline intervals span more than 2^30 base periods");
        }
        if (power_of_two(exponent[i]) * base > targets[i]) rounded_up.push_back(i);
    }

    auto peak_of = [&](const std::vector<int>& k) {
        Rational peak = 0;
        for (std::size_t i = 0; i < n; ++i) {
            peak += instance.commodities[i].space_per_unit * power_of_two(k[i]) * base;
        }
        return peak;
    };
    auto cost_of = [&](const std::vector<int>& k) {
        double cost = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& c = instance.commodities[i];
            cost += eoq_cost(to_double(c.order_cost), to_double(c.holding_rate),
                             to_double(power_of_two(k[i]) * base));
        }
        return cost;
    };

    std::vector<std::size_t> halved;
    if (peak_of(exponent) > instance.capacity) {
        // Cheapest feasible subset of rounded-up intervals to halve.
        if (rounded_up.size() <= kMaxHalvingCandidates) {
            double best_cost = std::numeric_limits<double>::infinity();
            std::uint32_t best_mask = 0;
            const std::uint32_t limit = std::uint32_t{1} << rounded_up.size();
            for (std::uint32_t mask = 1; mask < limit; ++mask) {
                auto k = exponent;
                for (std::size_t j = 0; j < rounded_up.size(); ++j) {
                    if (mask >> j & 1U) --k[rounded_up[j]];
                }
                if (peak_of(k) > instance.capacity) continue;
                double cost = cost_of(k);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_mask = mask;
                }
            }
            for (std::size_t j = 0; j < rounded_up.size(); ++j) {
                if (best_mask >> j & 1U) halved.push_back(rounded_up[j]);
            }
        } else {
            // Greedy: halve the largest space contributors first.
            std::vector<std::size_t> order = rounded_up;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return instance.commodities[a].space_per_unit * power_of_two(exponent[a]) >
                       instance.commodities[b].space_per_unit * power_of_two(exponent[b]);
            });
            auto k = exponent;
            for (std::size_t i : order) {
                if (peak_of(k) <= instance.capacity) break;
                --k[i];
                halved.push_back(i);
            }
        }
        for (std::size_t i : halved) --exponent[i];
    }

    const int top = *std::max_element(exponent.begin(), exponent.end());
    Baseline out;
    out.policy.grid_size = std::int64_t{1} << top;
    out.policy.cycle_length = base * power_of_two(top);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t step = std::int64_t{1} << exponent[i];
        auto& ticks = out.policy.orders[instance.commodities[i].id];
        for (std::int64_t t = 0; t < out.policy.grid_size; t += step) ticks.push_back(t);
    }

    const double m = lower_bound(instance);
    out.report.n_times_m = static_cast<double>(n) * m;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = instance.commodities[i];
        double target = to_double(targets[i]);
        out.report.analytic_cost +=
            eoq_cost(to_double(c.order_cost), to_double(c.holding_rate), target);
        Rational realized = power_of_two(exponent[i]) * base;
        out.report.intervals.push_back(realized);
        double r = to_double(realized) / target;
        out.report.rounding_factor = std::max({out.report.rounding_factor, r, 1.0 / r});
    }
    for (std::size_t i : halved) out.report.halved_ids.push_back(instance.commodities[i].id);
    std::sort(out.report.halved_ids.begin(), out.report.halved_ids.end());
    return out;
}

}  // namespace lotcycle
