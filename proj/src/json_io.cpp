#include "lotcycle/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lotcycle {

namespace {

const Json& field(const Json& doc, const char* name) {
    if (!doc.is_object() || !doc.contains(name)) {
        throw std::invalid_argument(std::string("missing field \"") + name + "\"");
    }
    return doc.at(name);
}

std::int64_t integer_field(const Json& value, const char* what) {
    if (!value.is_number_integer()) throw std::invalid_argument(std::string(what) + " must be an integer");
    return value.get<std::int64_t>();
}

int parse_id(const std::string& key) {
    std::size_t used = 0;
    int id = 0;
    try {
        id = std::stoi(key, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != key.size() || key.empty()) throw std::invalid_argument("bad commodity id \"" + key + "\"");
    return id;
}

}  // namespace

Json rational_to_json(const Rational& value) {
    return format_rational(value);
}

Rational rational_from_json(const Json& value) {
    if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
    if (value.is_string()) return parse_rational(value.get<std::string>());
    throw std::invalid_argument("expected a rational as \"p/q\" or an integer");
}

Json instance_to_json(const Instance& instance) {
    Json doc;
    doc["capacity"] = rational_to_json(instance.capacity);
    doc["commodities"] = Json::array();
    for (const auto& c : instance.commodities) {
        doc["commodities"].push_back({{"id", c.id},
                                      {"order_cost", rational_to_json(c.order_cost)},
                                      {"holding_rate", rational_to_json(c.holding_rate)},
                                      {"space_per_unit", rational_to_json(c.space_per_unit)}});
    }
    return doc;
}

Instance instance_from_json(const Json& doc) {
    Instance out;
    out.capacity = rational_from_json(field(doc, "capacity"));
    const Json& list = field(doc, "commodities");
    if (!list.is_array()) throw std::invalid_argument("commodities must be an array");
    for (const auto& item : list) {
        Commodity c;
        c.id = static_cast<int>(integer_field(field(item, "id"), "id"));
        c.order_cost = rational_from_json(field(item, "order_cost"));
        c.holding_rate = rational_from_json(field(item, "holding_rate"));
        c.space_per_unit = rational_from_json(field(item, "space_per_unit"));
        out.commodities.push_back(std::move(c));
    }
    return out;
}

Json policy_to_json(const ZioCyclicPolicy& policy) {
    Json doc;
    doc["grid_size"] = policy.grid_size;
    doc["cycle_length"] = rational_to_json(policy.cycle_length);
    doc["orders"] = Json::object();
    for (const auto& [id, ticks] : policy.orders) doc["orders"][std::to_string(id)] = ticks;
    return doc;
}

ZioCyclicPolicy policy_from_json(const Json& doc) {
    ZioCyclicPolicy out;
    out.grid_size = integer_field(field(doc, "grid_size"), "grid_size");
    out.cycle_length = rational_from_json(field(doc, "cycle_length"));
    const Json& orders = field(doc, "orders");
    if (!orders.is_object()) throw std::invalid_argument("orders must be an object");
    for (const auto& [key, ticks] : orders.items()) {
        if (!ticks.is_array()) throw std::invalid_argument("order ticks must be an array");
        auto& dst = out.orders[parse_id(key)];
        for (const auto& t : ticks) dst.push_back(integer_field(t, "order tick"));
    }
    validate_policy(out);
    return out;
}

Json partition_to_json(const FrequencyPartition& partition) {
    Json doc;
    doc["base"] = partition.base;
    doc["shape"] = {partition.shape.class_exponent, partition.shape.plus_offset,
                    partition.shape.minus_offset};
    doc["classes"] = Json::object();
    for (const auto& [id, q] : partition.class_of) doc["classes"][std::to_string(id)] = q;
    return doc;
}

FrequencyPartition partition_from_json(const Json& doc) {
    FrequencyPartition out;
    out.base = static_cast<int>(integer_field(field(doc, "base"), "base"));
    if (doc.contains("shape")) {
        const Json& s = doc.at("shape");
        if (!s.is_array() || s.size() != 3) throw std::invalid_argument("shape must be [a, plus, minus]");
        out.shape.class_exponent = static_cast<int>(integer_field(s[0], "shape"));
        out.shape.plus_offset = static_cast<int>(integer_field(s[1], "shape"));
        out.shape.minus_offset = static_cast<int>(integer_field(s[2], "shape"));
    }
    const Json& classes = field(doc, "classes");
    if (!classes.is_object()) throw std::invalid_argument("classes must be an object");
    for (const auto& [key, q] : classes.items()) {
        const auto value = integer_field(q, "class");
        if (value < 1) throw std::invalid_argument("class indices start at 1");
        out.class_of[parse_id(key)] = static_cast<int>(value);
    }
    return out;
}

Json cost_to_json(const CostBreakdown& cost) {
    return {{"ordering_per_cycle", rational_to_json(cost.ordering_per_cycle)},
            {"holding_per_cycle", rational_to_json(cost.holding_per_cycle)},
            {"total_per_cycle", rational_to_json(cost.total_per_cycle)},
            {"average", rational_to_json(cost.average)},
            {"average_value", cost.average_value()}};
}

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace lotcycle
