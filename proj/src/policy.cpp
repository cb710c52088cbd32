#include "lotcycle/policy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lotcycle {

namespace {

using Wide = __int128;

// gamma_i = scaled[i] / denominator with integer scaled values.
struct IntegerSpace {
    BigInt denominator = 1;
    std::vector<BigInt> scaled;
};

IntegerSpace integer_space(const ZioCyclicPolicy& policy, const Instance& instance) {
    IntegerSpace out;
    for (const auto& [id, ticks] : policy.orders) {
        (void)ticks;
        const auto& gamma = instance.commodities[instance.index_of(id)].space_per_unit;
        out.denominator = lcm_of(out.denominator, boost::multiprecision::denominator(gamma));
    }
    for (const auto& [id, ticks] : policy.orders) {
        (void)ticks;
        Rational g = instance.commodities[instance.index_of(id)].space_per_unit *
                     Rational(out.denominator);
        out.scaled.push_back(boost::multiprecision::numerator(g));
    }
    return out;
}

// Index of the first tick strictly greater than `tick`, or ticks.size().
std::size_t first_after(const std::vector<std::int64_t>& ticks, std::int64_t tick) {
    return static_cast<std::size_t>(std::upper_bound(ticks.begin(), ticks.end(), tick) - ticks.begin());
}

}  // namespace

void validate_policy(const ZioCyclicPolicy& policy) {
    if (policy.grid_size <= 0) throw std::invalid_argument("grid_size must be positive");
    if (policy.cycle_length <= 0) throw std::invalid_argument("cycle_length must be positive");
    if (policy.orders.empty()) throw std::invalid_argument("policy has no commodities");
    for (const auto& [id, ticks] : policy.orders) {
        if (ticks.empty()) {
            throw std::invalid_argument("commodity " + std::to_string(id) + " has no orders");
        }
        for (std::size_t k = 0; k < ticks.size(); ++k) {
            if (ticks[k] < 0 || ticks[k] >= policy.grid_size) {
                throw std::invalid_argument("commodity " + std::to_string(id) +
                                            ": order tick out of range");
            }
            if (k > 0 && ticks[k] <= ticks[k - 1]) {
                throw std::invalid_argument("commodity " + std::to_string(id) +
                                            ": order ticks must be strictly increasing");
            }
        }
    }
}

void require_matching_ids(const ZioCyclicPolicy& policy, const Instance& instance) {
    if (policy.orders.size() != instance.size()) {
        throw std::invalid_argument("policy and instance commodity ids differ");
    }
    for (const auto& c : instance.commodities) {
        if (!policy.orders.count(c.id)) {
            throw std::invalid_argument("policy has no schedule for commodity " + std::to_string(c.id));
        }
    }
}

std::vector<std::int64_t> gaps_in_ticks(const ZioCyclicPolicy& policy, int id) {
    const auto& ticks = policy.orders.at(id);
    std::vector<std::int64_t> gaps;
    gaps.reserve(ticks.size());
    for (std::size_t k = 0; k < ticks.size(); ++k) {
        std::int64_t next = k + 1 < ticks.size() ? ticks[k + 1] : ticks.front() + policy.grid_size;
        gaps.push_back(next - ticks[k]);
    }
    return gaps;
}

Rational inventory_level(const ZioCyclicPolicy& policy, int id, const Rational& t) {
    auto it = policy.orders.find(id);
    if (it == policy.orders.end()) {
        throw std::out_of_range("unknown commodity id " + std::to_string(id));
    }
    if (t < 0 || t >= policy.cycle_length) {
        throw std::out_of_range("time outside [0, cycle_length)");
    }
    const auto& ticks = it->second;
    Rational delta = policy.tick_duration();
    // Largest tick index with tick * delta <= t.
    std::int64_t tick_floor = floor_of(t / delta).convert_to<std::int64_t>();
    std::size_t k = first_after(ticks, tick_floor);
    Rational next = k < ticks.size() ? Rational(ticks[k]) * delta
                                     : Rational(ticks.front() + policy.grid_size) * delta;
    return next - t;
}

CostBreakdown evaluate_cycle(const ZioCyclicPolicy& policy, const Instance& instance) {
    validate_policy(policy);
    require_matching_ids(policy, instance);
    CostBreakdown out;
    Rational delta = policy.tick_duration();
    for (const auto& [id, ticks] : policy.orders) {
        const auto& c = instance.commodities[instance.index_of(id)];
        out.ordering_per_cycle += c.order_cost * static_cast<long>(ticks.size());
        BigInt squares = 0;
        for (auto g : gaps_in_ticks(policy, id)) {
            squares += BigInt(g) * g;
        }
        out.holding_per_cycle += c.holding_rate * Rational(squares) * delta * delta;
    }
    out.total_per_cycle = out.ordering_per_cycle + out.holding_per_cycle;
    out.average = out.total_per_cycle / policy.cycle_length;
    return out;
}

Rational occupied_space(const ZioCyclicPolicy& policy, const Instance& instance,
                        const Rational& t) {
    Rational total = 0;
    for (const auto& [id, ticks] : policy.orders) {
        (void)ticks;
        total += instance.commodities[instance.index_of(id)].space_per_unit *
                 inventory_level(policy, id, t);
    }
    return total;
}

PeakEvent peak_event(const ZioCyclicPolicy& policy, const Instance& instance) {
    validate_policy(policy);
    require_matching_ids(policy, instance);
    IntegerSpace space = integer_space(policy, instance);

    std::vector<const std::vector<std::int64_t>*> schedules;
    std::vector<std::int64_t> events;
    for (const auto& [id, ticks] : policy.orders) {
        (void)id;
        schedules.push_back(&ticks);
        events.insert(events.end(), ticks.begin(), ticks.end());
    }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    bool narrow = true;
    std::vector<std::int64_t> small(space.scaled.size());
    for (std::size_t i = 0; i < space.scaled.size(); ++i) {
        if (!fits_int64(space.scaled[i])) narrow = false;
        else small[i] = space.scaled[i].convert_to<std::int64_t>();
    }

    std::vector<std::size_t> cursor(schedules.size(), 0);
    auto next_after = [&](std::size_t i, std::int64_t e) {
        const auto& ticks = *schedules[i];
        while (cursor[i] < ticks.size() && ticks[cursor[i]] <= e) ++cursor[i];
        return cursor[i] < ticks.size() ? ticks[cursor[i]] : ticks.front() + policy.grid_size;
    };
    BigInt best = -1;
    std::int64_t best_tick = 0;
    if (narrow) {
        Wide best_wide = -1;
        for (std::int64_t e : events) {
            Wide units = 0;
            for (std::size_t i = 0; i < schedules.size(); ++i) {
                units += static_cast<Wide>(small[i]) * (next_after(i, e) - e);
            }
            if (units > best_wide) {
                best_wide = units;
                best_tick = e;
            }
        }
        auto mag = static_cast<unsigned __int128>(best_wide);
        best = BigInt(static_cast<std::uint64_t>(mag >> 64));
        best <<= 64;
        best += BigInt(static_cast<std::uint64_t>(mag));
    } else {
        for (std::int64_t e : events) {
            BigInt units = 0;
            for (std::size_t i = 0; i < schedules.size(); ++i) {
                units += space.scaled[i] * (next_after(i, e) - e);
            }
            if (units > best) {
                best = units;
                best_tick = e;
            }
        }
    }
    Rational delta = policy.tick_duration();
    return {Rational(best) * delta / Rational(space.denominator), Rational(best_tick) * delta};
}

Rational peak_space(const ZioCyclicPolicy& policy, const Instance& instance) {
    return peak_event(policy, instance).space;
}

CapacityCheck check_capacity(const ZioCyclicPolicy& policy, const Instance& instance,
                             const Rational& slack) {
    if (slack < 0) throw std::invalid_argument("slack must be nonnegative");
    auto peak = peak_event(policy, instance);
    CapacityCheck out;
    out.peak = peak.space;
    out.limit = (1 + slack) * instance.capacity;
    out.feasible = peak.space <= out.limit;
    if (!out.feasible) out.witness_time = peak.time;
    return out;
}

ZioCyclicPolicy scale_time(const ZioCyclicPolicy& policy, const Rational& alpha) {
    if (alpha <= 0) throw std::invalid_argument("scale factor must be positive");
    ZioCyclicPolicy out = policy;
    out.cycle_length = policy.cycle_length * alpha;
    return out;
}

ZioCyclicPolicy repeat_cycles(const ZioCyclicPolicy& policy, std::int64_t copies) {
    if (copies < 1) throw std::invalid_argument("copies must be positive");
    ZioCyclicPolicy out;
    out.grid_size = policy.grid_size * copies;
    out.cycle_length = policy.cycle_length * copies;
    for (const auto& [id, ticks] : policy.orders) {
        auto& dst = out.orders[id];
        dst.reserve(ticks.size() * static_cast<std::size_t>(copies));
        for (std::int64_t c = 0; c < copies; ++c) {
            for (auto t : ticks) dst.push_back(t + c * policy.grid_size);
        }
    }
    return out;
}

ZioCyclicPolicy refine_grid(const ZioCyclicPolicy& policy, std::int64_t new_grid_size) {
    if (new_grid_size <= 0 || new_grid_size % policy.grid_size != 0) {
        throw std::invalid_argument("new grid size must be a positive multiple of the current one");
    }
    const std::int64_t factor = new_grid_size / policy.grid_size;
    ZioCyclicPolicy out = policy;
    out.grid_size = new_grid_size;
    for (auto& [id, ticks] : out.orders) {
        (void)id;
        for (auto& t : ticks) t *= factor;
    }
    return out;
}

}  // namespace lotcycle
