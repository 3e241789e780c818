#pragma once
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bifluid_lab/errors.hpp"
#include "bifluid_lab/quadrature.hpp"

namespace bifluidlab::constitutive {

// The cone  rho >= 0,  a_lower[i]*rho <= Z_i <= a_upper[i]*rho  that the
// dynamics preserve.
struct AdmissibleRegion {
    std::vector<double> a_lower;
    std::vector<double> a_upper;

    int species() const { return static_cast<int>(a_lower.size()); }
    void validate() const;
    bool contains(double rho, std::span<const double> Z, double slack = 0.0) const;
};

// Optional splitting P(rho, rho*s) = monotone(rho,s) - remainder(rho,s) with
// remainder >= 0, compactly supported in rho.
struct Decomposition {
    std::function<double(double, std::span<const double>)> monotone;
    std::function<double(double, std::span<const double>)> remainder;
    double support_radius = 0.0;
};

// A multi-species constitutive pressure (rho, Z_1..Z_K) -> P together with
// its partials and declared growth exponents.
struct PressureLaw {
    std::string name;
    AdmissibleRegion region;
    double gamma = 2.0;                // growth in rho
    std::vector<double> beta;          // growth in each Z_i
    double alpha_near_zero = 1.0;      // P(rho, rho*s) <= c*rho^alpha near 0
    std::function<double(double, std::span<const double>)> value;
    std::function<double(double, std::span<const double>)> d_rho;
    std::function<double(int, double, std::span<const double>)> d_Z;
    std::optional<Decomposition> decomposition;
    // optional exact Helmholtz formula (catalog laws); quadrature otherwise
    std::function<double(double, std::span<const double>)> helmholtz_closed;

    int species() const { return static_cast<int>(beta.size()); }
};

// delta-regularization knobs: the eta_delta cut-off radius and the high
// exponent B of the convex penalty.
struct RegularizedPressureParams {
    double delta = 1e-3;
    double B = 6.0;
    double cutoff_width = 0.0;  // 0 means: reuse delta

    double width() const { return cutoff_width > 0.0 ? cutoff_width : delta; }
    void validate(const PressureLaw& law) const;
};

// Smooth cut-off profile: 1 on [0,1/2], 0 on [1,inf), C^2 quintic blend
// between.
double eta_profile(double z);
double eta_cutoff(double width, double r);

struct QuadTol {
    double abs = 1e-12;
    double rel = 1e-10;
};

double eval_pressure(const PressureLaw& law, double rho, std::span<const double> Z);

// Helmholtz free energy H_P(rho, Z) = rho * Int_1^rho P(s, s*Z/rho)/s^2 ds,
// H_P(0,0)=0, computed by adaptive quadrature.  Solves
// rho*dH/drho + sum_i Z_i*dH/dZ_i - H = P.
double helmholtz(const PressureLaw& law, double rho, std::span<const double> Z,
                 QuadTol tol = {});

// Pi_delta = (1 - eta_delta(|(rho,Z)|)) P + delta * (rho^B + sum_i (Z_i^B
// + rho^2 Z_i^{B-2}/2 + Z_i^2 rho^{B-2}/2)).
double regularized_pressure(const RegularizedPressureParams& p, const PressureLaw& law,
                            double rho, std::span<const double> Z);

// The cut-off part alone: (1 - eta_delta) * P.
double cutoff_pressure(const RegularizedPressureParams& p, const PressureLaw& law,
                       double rho, std::span<const double> Z);

// Closed-form Helmholtz companion of the delta-penalty:
// h_delta = delta/(B-1) * (rho^B + sum_i (...)).
double h_delta(const RegularizedPressureParams& p, double rho, std::span<const double> Z);

// H_{P_delta} + h_delta: Helmholtz energy of the regularized pressure.
double regularized_helmholtz(const RegularizedPressureParams& p, const PressureLaw& law,
                             double rho, std::span<const double> Z, QuadTol tol = {});

// Concave C^2 truncation profile: T(z)=z on [0,1], T(z)=2 on [3,inf),
// quartic blend on [1,3].  T_k(z) = k T(z/k), L_k(z) = z Int_1^z T_k/s^2 ds.
struct TruncationKit {
    double k = 2.0;

    explicit TruncationKit(double level);
    static double profile(double z);
    static double profile_derivative(double z);
    double truncate(double z) const;          // T_k
    double truncate_derivative(double z) const;
    double log_companion(double z) const;     // L_k, by quadrature
};

// Evaluate a declared decomposition at (rho, s).  Missing decomposition is a
// capability error: callers (the audits) fall back to direct monotonicity
// sampling.
struct DecompositionParts {
    double monotone;
    double remainder;
};
DecompositionParts decompose_pressure(const PressureLaw& law, double rho,
                                      std::span<const double> s);

// --- law catalog ------------------------------------------------------

struct CrossTerm {
    double coef = 0.0;
    double r = 0.0;                 // rho exponent
    std::vector<double> s;          // Z_i exponents
};

// P = rho^gamma + sum_i Z_i^beta_i + sum_j coef_j rho^{r_j} prod_i Z_i^{s_ji}
PressureLaw make_e1_law(double gamma, std::vector<double> beta,
                        std::vector<CrossTerm> terms, AdmissibleRegion region);

// P = (rho + sum_i Z_i)^gamma + cross terms
PressureLaw make_e2_law(double gamma, int species, std::vector<CrossTerm> terms,
                        AdmissibleRegion region);

// P = coef * rho^gamma (Z enters only through the admissible region)
PressureLaw make_pure_power_law(double gamma, double coef, AdmissibleRegion region);

// one-species conveniences
double eval_pressure(const PressureLaw& law, double rho, double Z);
double helmholtz(const PressureLaw& law, double rho, double Z, QuadTol tol = {});

}  // namespace bifluidlab::constitutive
