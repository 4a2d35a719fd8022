#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rrproc {

// Exact rational arithmetic for lattice locations and discrete-law moments.
// The lattice/nonlattice dichotomy is decided by exact gcd computations, so
// locations are never allowed to degrade to floating point.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Every finite double is a dyadic rational; the conversion is exact.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite value");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [1/2, 1)
    auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    Rational r(scaled);
    int shift = exp - 53;
    if (shift >= 0) {
        r *= Rational(BigInt(1) << shift);
    } else {
        r /= Rational(BigInt(1) << -shift);
    }
    return r;
}

// "n" or "n/d" with d > 0, canonical form.
inline std::string rational_to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) s += "/" + denominator(q).str();
    return s;
}

// Accepts "3/2", "3", "1.5", "-0.25e1". Decimal forms are parsed exactly.
inline Rational parse_rational(std::string_view text) {
    auto fail = [&] { throw std::invalid_argument("malformed rational: '" + std::string(text) + "'"); };
    if (text.empty()) fail();
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        std::string num(text.substr(0, slash)), den(text.substr(slash + 1));
        if (num.empty() || den.empty()) fail();
        try {
            BigInt n(num), d(den);
            if (d == 0) fail();
            if (d < 0) {
                n = -n;
                d = -d;
            }
            return Rational(n, d);
        } catch (const std::exception&) {
            fail();
        }
    }
    // decimal / scientific form, parsed digit by digit so exactness is preserved
    size_t i = 0;
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') neg = text[i++] == '-';
    BigInt digits = 0;
    long long frac_digits = 0, exponent = 0;
    bool any_digit = false, seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            digits = digits * 10 + (c - '0');
            if (seen_dot) ++frac_digits;
            any_digit = true;
        } else if (c == '.') {
            if (seen_dot) fail();
            seen_dot = true;
        } else if (c == 'e' || c == 'E') {
            ++i;
            bool eneg = false;
            if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
            if (i >= text.size()) fail();
            long long e = 0;
            for (; i < text.size(); ++i) {
                if (text[i] < '0' || text[i] > '9') fail();
                e = e * 10 + (text[i] - '0');
                if (e > 1000000) fail();
            }
            exponent = eneg ? -e : e;
            break;
        } else {
            fail();
        }
    }
    if (!any_digit) fail();
    Rational r(digits);
    long long pow10 = exponent - frac_digits;
    if (pow10 > 0) {
        r *= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(pow10)));
    } else if (pow10 < 0) {
        r /= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-pow10)));
    }
    return neg ? Rational(-r) : r;
}

// gcd(a/b, c/d) = gcd(a,c)/lcm(b,d): the largest rational dividing both.
inline Rational rational_gcd(const Rational& a, const Rational& b) {
    using boost::multiprecision::gcd;
    using boost::multiprecision::lcm;
    if (a == 0) return b < 0 ? Rational(-b) : b;
    if (b == 0) return a < 0 ? Rational(-a) : a;
    BigInt num = gcd(numerator(a), numerator(b));
    BigInt den = lcm(denominator(a), denominator(b));
    return Rational(num, den);
}

// Floor/ceil of a/b as exact integers.
inline BigInt rational_floor(const Rational& q) {
    BigInt n = numerator(q), d = denominator(q);
    BigInt quo = n / d;
    if (n < 0 && quo * d != n) --quo;
    return quo;
}

inline BigInt rational_ceil(const Rational& q) {
    BigInt n = numerator(q), d = denominator(q);
    BigInt quo = n / d;
    if (n > 0 && quo * d != n) ++quo;
    return quo;
}

// q / delta when the quotient is an exact nonnegative integer; throws otherwise.
inline long long exact_lattice_index(const Rational& q, const Rational& delta) {
    Rational idx = q / delta;
    if (denominator(idx) != 1 || idx < 0)
        throw std::invalid_argument("location " + rational_to_string(q) +
                                    " is not on the lattice of span " + rational_to_string(delta));
    return numerator(idx).convert_to<long long>();
}

}  // namespace rrproc
