#include "lotcycle/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lotcycle {

std::size_t Instance::index_of(int id) const {
    for (std::size_t i = 0; i < commodities.size(); ++i) {
        if (commodities[i].id == id) return i;
    }
    throw std::out_of_range("unknown commodity id " + std::to_string(id));
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) out << "; ";
        if (violations[i].commodity_id) out << "commodity " << *violations[i].commodity_id << ": ";
        out << violations[i].message;
    }
    return out.str();
}

ValidationReport validate_instance(const Instance& instance) {
    ValidationReport report;
    if (instance.commodities.empty()) {
        report.violations.push_back({std::nullopt, "at least one commodity is required"});
    }
    if (instance.capacity <= 0) {
        report.violations.push_back({std::nullopt, "capacity must be positive"});
    }
    std::set<int> seen;
    bool duplicates = false;
    for (const auto& c : instance.commodities) {
        if (!seen.insert(c.id).second) {
            duplicates = true;
            report.violations.push_back({c.id, "ids unique"});
        }
        if (c.order_cost <= 0) report.violations.push_back({c.id, "order_cost must be positive"});
        if (c.holding_rate <= 0) report.violations.push_back({c.id, "holding_rate must be positive"});
        if (c.space_per_unit < 0) {
            report.violations.push_back({c.id, "space_per_unit must be nonnegative"});
        }
    }
    if (!duplicates && !seen.empty()) {
        int expected = 1;
        for (int id : seen) {
            if (id != expected++) {
                report.violations.push_back({std::nullopt, "ids must be contiguous from 1"});
                break;
            }
        }
    }
    return report;
}

void require_valid(const Instance& instance) {
    auto report = validate_instance(instance);
    if (!report.ok()) {
        throw std::invalid_argument("invalid instance: " + report.summary());
    }
}

CappedInterval capped_interval(const Commodity& c, const Rational& capacity) {
    CappedInterval out;
    Rational ratio = c.order_cost / c.holding_rate;
    double eoq = std::sqrt(to_double(ratio));
    if (c.space_per_unit > 0) {
        Rational cap = capacity / c.space_per_unit;
        if (ratio >= cap * cap) {
            out.value = to_double(cap);
            out.capacity_binding = true;
            out.exact = cap;
            return out;
        }
    }
    out.value = eoq;
    return out;
}

int class_count(double bound, int base, int class_exponent) {
    if (base < 2) throw std::invalid_argument("base must be at least 2");
    int q = 1;
    double step = std::pow(static_cast<double>(base), class_exponent);
    double reach = step;
    while (reach < bound) {
        reach *= step;
        ++q;
    }
    return q;
}

DerivedConstants derive_constants(const Instance& instance, const Rational& epsilon,
                                  std::optional<int> base_override) {
    require_valid(instance);
    if (epsilon <= 0 || epsilon >= Rational(1, 3)) {
        throw std::invalid_argument("epsilon must lie in (0, 1/3)");
    }
    if (base_override && *base_override < 2) {
        throw std::invalid_argument("base must be at least 2");
    }
    const auto n = static_cast<double>(instance.size());
    DerivedConstants out;
    out.epsilon = epsilon;
    if (base_override) {
        out.base = *base_override;
    } else {
        Rational ratio = Rational(static_cast<long>(instance.size())) / epsilon;
        out.base = std::max(2, static_cast<int>(ceil_of(ratio).convert_to<long>()));
    }

    double k_min = INFINITY, k_max = 0.0, h_min = INFINITY;
    for (const auto& c : instance.commodities) {
        auto t = capped_interval(c, instance.capacity);
        out.t_cap.push_back(t.value);
        out.capacity_binding.push_back(t.capacity_binding);
        out.t_cap_exact.push_back(t.exact);
        double k = to_double(c.order_cost), h = to_double(c.holding_rate);
        out.m_const += k / t.value + h * t.value;
        k_min = std::min(k_min, k);
        k_max = std::max(k_max, k);
        h_min = std::min(h_min, h);
    }
    double eps = to_double(epsilon);
    out.u_const = 4.0 * n * n * out.m_const * out.m_const / (eps * eps * k_min * h_min);
    out.q_count = class_count(out.u_const, out.base, 3);
    out.cycle_lo = k_max / (2.0 * eps * n * out.m_const);
    out.cycle_hi = 2.0 * n * out.m_const / (eps * eps * h_min);
    return out;
}

double lower_bound(const Instance& instance) {
    require_valid(instance);
    double m = 0.0;
    for (const auto& c : instance.commodities) {
        double t = capped_interval(c, instance.capacity).value;
        m += to_double(c.order_cost) / t + to_double(c.holding_rate) * t;
    }
    return m;
}

}  // namespace lotcycle
