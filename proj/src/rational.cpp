#include "lotcycle/rational.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lotcycle {

namespace {

BigInt parse_integer(std::string_view text, std::string_view whole) {
    if (text.empty()) {
        throw std::invalid_argument("malformed rational: \"" + std::string(whole) + "\"");
    }
    std::size_t pos = 0;
    bool negative = false;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        pos = 1;
    }
    if (pos == text.size()) {
        throw std::invalid_argument("malformed rational: \"" + std::string(whole) + "\"");
    }
    BigInt out = 0;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c < '0' || c > '9') {
            throw std::invalid_argument("malformed rational: \"" + std::string(whole) + "\"");
        }
        out = out * 10 + (c - '0');
    }
    return negative ? BigInt(-out) : out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = trim(text);
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        BigInt num = parse_integer(trim(s.substr(0, slash)), text);
        BigInt den = parse_integer(trim(s.substr(slash + 1)), text);
        if (den == 0) {
            throw std::invalid_argument("zero denominator in \"" + std::string(text) + "\"");
        }
        return Rational(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = s.substr(0, dot);
        std::string_view frac_part = s.substr(dot + 1);
        bool negative = !int_part.empty() && int_part[0] == '-';
        if (int_part.empty() || int_part == "-" || int_part == "+") {
            int_part = "0";
        }
        if (frac_part.empty()) {
            return Rational(parse_integer(int_part, text));
        }
        BigInt whole = parse_integer(int_part, text);
        BigInt frac = parse_integer(frac_part, text);
        if (frac < 0) {
            throw std::invalid_argument("malformed rational: \"" + std::string(text) + "\"");
        }
        BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac_part.size()));
        Rational magnitude = Rational(boost::multiprecision::abs(whole)) + Rational(frac, scale);
        return negative ? Rational(-magnitude) : magnitude;
    }
    return Rational(parse_integer(s, text));
}

std::string format_rational(const Rational& value) {
    return boost::multiprecision::numerator(value).str() + "/" +
           boost::multiprecision::denominator(value).str();
}

double to_double(const Rational& value) {
    return value.convert_to<double>();
}

Rational from_double(double value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("cannot convert a non-finite double to a rational");
    }
    int exponent = 0;
    double mantissa = std::frexp(value, &exponent);
    // 53 bits of mantissa become an exact integer.
    auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
    exponent -= 53;
    Rational out(scaled);
    if (exponent > 0) {
        out *= Rational(boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(exponent)));
    } else if (exponent < 0) {
        out /= Rational(boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(-exponent)));
    }
    return out;
}

Rational approximate(double value, std::int64_t max_denominator) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("cannot convert a non-finite double to a rational");
    }
    if (max_denominator < 1) throw std::invalid_argument("max_denominator must be positive");
    // Continued-fraction convergents of the exact value.
    Rational x = from_double(value);
    BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    Rational rest = x;
    for (int step = 0; step < 64; ++step) {
        BigInt a = floor_of(rest);
        BigInt p2 = a * p1 + p0;
        BigInt q2 = a * q1 + q0;
        if (q2 > max_denominator) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        Rational frac = rest - Rational(a);
        if (frac == 0) break;
        rest = 1 / frac;
    }
    if (q1 == 0) return Rational(floor_of(x));
    return Rational(p1, q1);
}

BigInt floor_of(const Rational& value) {
    BigInt num = boost::multiprecision::numerator(value);
    BigInt den = boost::multiprecision::denominator(value);
    BigInt q = num / den;
    if (num % den != 0 && num < 0) {
        q -= 1;
    }
    return q;
}

BigInt ceil_of(const Rational& value) {
    return -floor_of(-value);
}

bool fits_int64(const BigInt& value) {
    return value >= std::numeric_limits<std::int64_t>::min() &&
           value <= std::numeric_limits<std::int64_t>::max();
}

std::int64_t clamp_to_int64(const BigInt& value) {
    if (value > std::numeric_limits<std::int64_t>::max()) {
        return std::numeric_limits<std::int64_t>::max();
    }
    if (value < std::numeric_limits<std::int64_t>::min()) {
        return std::numeric_limits<std::int64_t>::min();
    }
    return value.convert_to<std::int64_t>();
}

BigInt lcm_of(const BigInt& a, const BigInt& b) {
    return boost::multiprecision::lcm(a, b);
}

}  // namespace lotcycle
