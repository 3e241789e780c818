#pragma once
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bifluidlab {

// Exact rational arithmetic for exponent bookkeeping.  The growth-exponent
// inequalities we check are rational functions of the declared exponents, so
// once the inputs are fractions the verdict carries no rounding at all.
// Intermediate numerators/denominators stay far below the __int128 range for
// inputs with denominators up to ~1e6.
struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        __int128 a = num < 0 ? -num : num, b = den;
        while (b) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { num /= a; den /= a; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator+(Rational a, Rational b) { return make(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rational operator-(Rational a, Rational b) { return make(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend Rational operator*(Rational a, Rational b) { return make(a.num * b.num, a.den * b.den); }
    friend Rational operator/(Rational a, Rational b) {
        if (b.num == 0) throw std::domain_error("Rational: division by zero");
        return make(a.num * b.den, a.den * b.num);
    }
    friend bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }
    friend bool operator>(Rational a, Rational b) { return b < a; }
    friend bool operator<=(Rational a, Rational b) { return !(b < a); }
    friend bool operator>=(Rational a, Rational b) { return !(a < b); }
    friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }

    static Rational make(__int128 n, __int128 d) {
        Rational r;
        r.num = n;
        r.den = d;
        r.normalize();
        return r;
    }

    std::string str() const {
        auto s = [](__int128 v) {
            if (v == 0) return std::string("0");
            bool neg = v < 0;
            if (neg) v = -v;
            std::string out;
            while (v) { out.insert(out.begin(), char('0' + int(v % 10))); v /= 10; }
            return neg ? "-" + out : out;
        };
        return den == 1 ? s(num) : s(num) + "/" + s(den);
    }
};

inline Rational rmin(Rational a, Rational b) { return a < b ? a : b; }
inline Rational rmax(Rational a, Rational b) { return a < b ? b : a; }

// Best rational approximation with denominator <= max_den (continued
// fractions).  Exponents arriving as JSON doubles (1.8, 1.2, ...) recover
// their intended fractions this way; "p/q" strings skip it entirely.
inline Rational rationalize(double x, long long max_den = 1000000) {
    if (!std::isfinite(x)) throw std::domain_error("rationalize: non-finite input");
    bool neg = x < 0;
    double v = neg ? -x : x;
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = v;
    for (int it = 0; it < 64; ++it) {
        long long a = static_cast<long long>(std::floor(frac));
        long long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        double rem = frac - static_cast<double>(a);
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
    }
    Rational r(neg ? -p1 : p1, q1);
    return r;
}

// min{2x/3 - 1, x/2}: the integrability gain a Bogovskii-type test function
// buys for a growth exponent x.
inline Rational bog_gain(Rational x) {
    return rmin(Rational(2, 3) * x - Rational(1), x / Rational(2));
}

}  // namespace bifluidlab
