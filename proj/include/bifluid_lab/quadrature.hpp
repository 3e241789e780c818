#pragma once
#include <functional>
#include <vector>

namespace bifluidlab::quad {

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = false;
};

// Adaptive Gauss-Kronrod 7-15 on [a,b].  Panels are bisected worst-first
// until |error| <= max(abs_tol, rel_tol*|value|) or the panel budget runs
// out.  Panel refinement order is deterministic, so results are
// bit-reproducible for a given integrand.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-10,
                 int max_panels = 4000);

// Same, but with caller-supplied initial breakpoints (a < p1 < ... < b).
// Used to pre-split integrands with a known steep region (e.g. a power
// singularity at one endpoint).
Result integrate_split(const std::function<double(double)>& f,
                       const std::vector<double>& breakpoints,
                       double abs_tol = 1e-12, double rel_tol = 1e-10,
                       int max_panels = 4000);

// Breakpoints for integrating over [lo, hi], 0 < lo < hi, when the
// integrand behaves like a power of s near zero: geometric refinement
// toward lo.
std::vector<double> geometric_breakpoints(double lo, double hi, int per_decade = 2);

}  // namespace bifluidlab::quad
