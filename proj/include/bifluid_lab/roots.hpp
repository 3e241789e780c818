#pragma once
#include <cmath>
#include <functional>
#include <limits>

#include "bifluid_lab/errors.hpp"

namespace bifluidlab::roots {

struct Result {
    double x = 0.0;
    double fx = 0.0;
    int iters = 0;
    bool converged = false;
};

// Brent's method on a sign-changing bracket [a,b].  rel_tol is relative in x;
// with rel_tol ~ machine epsilon this converges to the last representable
// bisection.
inline Result brent(const std::function<double(double)>& f, double a, double b,
                    double rel_tol = 4.0 * std::numeric_limits<double>::epsilon(),
                    int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return {a, 0.0, 0, true};
    if (fb == 0.0) return {b, 0.0, 0, true};
    if (fa * fb > 0.0) throw DomainError("brent: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 1; iter <= max_iter; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 0.5 * rel_tol * std::abs(b) +
                            0.5 * std::numeric_limits<double>::min();
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return {b, fb, iter, true};
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic / secant step
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    return {b, fb, max_iter, false};
}

// Grows [lo, hi] by doubling the width until f changes sign.  Returns the
// bracket; throws if none is found within max_grow doublings.
inline std::pair<double, double> expand_bracket(const std::function<double(double)>& f,
                                                double lo, double hi,
                                                int max_grow = 200) {
    double flo = f(lo), fhi = f(hi);
    for (int i = 0; i < max_grow; ++i) {
        if (flo == 0.0) return {lo, lo};
        if (fhi == 0.0) return {hi, hi};
        if (flo * fhi < 0.0) return {lo, hi};
        const double w = hi - lo;
        hi += std::max(w, 1e-300);
        fhi = f(hi);
    }
    throw DomainError("expand_bracket: no sign change found");
}

}  // namespace bifluidlab::roots
