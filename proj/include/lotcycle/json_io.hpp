#ifndef LOTCYCLE_JSON_IO_HPP
#define LOTCYCLE_JSON_IO_HPP

#include "lotcycle/alignment.hpp"
#include "lotcycle/instance.hpp"
#include "lotcycle/policy.hpp"

#include "json.hpp"

#include <string>

namespace lotcycle {

using Json = nlohmann::json;

// Rationals are written as "p/q" strings; integers and "p/q" or decimal strings
// are accepted on input. Malformed documents throw std::invalid_argument.
Json rational_to_json(const Rational& value);
Rational rational_from_json(const Json& value);

Json instance_to_json(const Instance& instance);
Instance instance_from_json(const Json& doc);

Json policy_to_json(const ZioCyclicPolicy& policy);
ZioCyclicPolicy policy_from_json(const Json& doc);

// {"base": 2, "shape": [3, 1, -4], "classes": {"1": 1, "2": 3}}
Json partition_to_json(const FrequencyPartition& partition);
FrequencyPartition partition_from_json(const Json& doc);

Json cost_to_json(const CostBreakdown& cost);

Json parse_json_text(const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace lotcycle

#endif  // LOTCYCLE_JSON_IO_HPP
