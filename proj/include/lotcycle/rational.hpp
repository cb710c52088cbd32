#ifndef LOTCYCLE_RATIONAL_HPP
#define LOTCYCLE_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace lotcycle {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

// Parses "p/q", "p", or a finite decimal such as "0.25".
// Throws std::invalid_argument on malformed text or a zero denominator.
Rational parse_rational(std::string_view text);

// Canonical "p/q" form (always with a denominator, e.g. "10/1").
std::string format_rational(const Rational& value);

double to_double(const Rational& value);

// Exact value of a finite double.
Rational from_double(double value);

// Closest continued-fraction convergent with denominator <= max_denominator.
Rational approximate(double value, std::int64_t max_denominator);

BigInt floor_of(const Rational& value);
BigInt ceil_of(const Rational& value);

// Saturating conversion of a big integer into the int64 range.
std::int64_t clamp_to_int64(const BigInt& value);

bool fits_int64(const BigInt& value);

BigInt lcm_of(const BigInt& a, const BigInt& b);

}  // namespace lotcycle

#endif  // LOTCYCLE_RATIONAL_HPP
