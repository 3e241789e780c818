#pragma once
#include <functional>
#include <string>
#include <vector>

#include "bifluid_lab/audit.hpp"
#include "bifluid_lab/constitutive.hpp"
#include "bifluid_lab/rational.hpp"

namespace bifluidlab::bifluid {

// One strictly increasing barotropic phase pressure s -> P(s), P(0)=0.
struct PhaseLaw {
    std::string name;
    double gamma = 2.0;   // growth exponent at infinity
    double alpha = 2.0;   // near-zero exponent
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::function<double(double)> second_derivative;

    // set for catalog power laws; lets q-solves start from a closed form
    std::function<double(double)> closed_form_hint;          // exact root of value(x)=y is hint(y)
    bool is_pure_power = false;
    double power_coef = 1.0;
    double linear_coef = 0.0;
};

// P(s) = coef * s^gamma + linear * s   (linear >= 0 keeps monotonicity)
PhaseLaw make_phase_power_law(double gamma, double coef = 1.0, double linear = 0.0);

struct PhaseDecomposition {
    double a_frac = 1.0;      // volume fraction of the plus phase
    double rho_plus = 0.0;
    double rho_minus = 0.0;
};

// The pair of phase laws plus the derived transfer map q = Pminus^{-1} o Pplus
// with cached monotone tables used as initial guesses for the safeguarded
// solves.  Immutable after construction.
class BiFluidSystem {
  public:
    BiFluidSystem(PhaseLaw plus, PhaseLaw minus, constitutive::AdmissibleRegion region,
                  double root_tolerance = 1e-13);

    const PhaseLaw& plus() const { return plus_; }
    const PhaseLaw& minus() const { return minus_; }
    const constitutive::AdmissibleRegion& region() const { return region_; }
    double root_tolerance() const { return root_tol_; }

    // q(s): the unique y with Pminus(y) = Pplus(s); strictly increasing, q(0)=0.
    double q(double s) const;
    double q_prime(double s) const;
    double q_inverse(double z) const;

    // infimum of q / (s q' + q), fitted over a log grid at construction
    double q_fraction_inf() const { return q_frac_inf_; }

  private:
    double solve_phase_inverse(const PhaseLaw& target_law, double target,
                               double guess_lo, double guess_hi) const;

    PhaseLaw plus_, minus_;
    constitutive::AdmissibleRegion region_;
    double root_tol_;
    std::vector<double> table_s_, table_q_;  // monotone guess tables
    bool tables_ready_ = false;
    double q_frac_inf_ = 0.0;
};

// Solves  x q(x) - q(x) rho - Z x = 0  for x = rho_plus(rho, Z) in [rho, inf).
// Boundary identities are exact: rho_plus(rho,0)=rho, rho_plus(0,Z)=q^{-1}(Z),
// rho_plus(0,0)=0.
double solve_rho_plus(const BiFluidSystem& sys, double rho, double Z);

// Analytic partial derivatives of rho_plus via the implicit function theorem.
double d_rho_rho_plus(const BiFluidSystem& sys, double rho, double Z);
double d_Z_rho_plus(const BiFluidSystem& sys, double rho, double Z);

// The effective two-density pressure P(rho,Z) = Pplus(rho_plus(rho,Z)) as a
// constitutive::PressureLaw (K=1) with analytic partials and, when the plus
// law carries a linear perturbation, the compactly supported remainder
// decomposition.
constitutive::PressureLaw effective_pressure(const BiFluidSystem& sys);

// Inverts rho = a*rho_plus, Z = (1-a)*rho_minus with the pressure-equality
// closure.  Vacuum convention: (0,0) -> a=1, rho_pm=0.
PhaseDecomposition recover_phases(const BiFluidSystem& sys, double rho, double Z);

// The borderline-exponent splitting of the effective pressure for declared
// derivative bounds  a_plus s^{gamma-1} - b_plus <= Pplus'(s): a compactly
// supported remainder q_inf * b_plus * zeta(rho) * min{r_under, rho}
// (smoothed) and the monotone complement.
constitutive::Decomposition borderline_decomposition(const BiFluidSystem& sys,
                                                     double a_plus, double b_plus);

struct BiExponents {
    Rational gamma_plus;
    Rational gamma_minus;
    bool a_lower_positive = false;
};

// Exact-rational check of the exponent inequality Gamma_bar < G.
struct GammaCheck {
    Rational gamma_bar;
    Rational G;
    bool holds = false;
};
GammaCheck check_gamma_inequality(const BiExponents& e);

struct BiSamplingSpec {
    double s_min = 1e-8;
    double s_max = 1e6;
    int points_per_decade = 8;
    int grid_points = 40;  // per axis for the (rho, Z) sandwich scan
    unsigned long long seed = 0;
};

// Samples the Theorem-2 hypotheses: the exact exponent arithmetic, the
// near-zero supremum, the uniform-fraction infimum, and the sandwich bounds.
audit::HypothesisReport audit_bifluid(const BiFluidSystem& sys, const BiExponents& e,
                                      const BiSamplingSpec& spec);

}  // namespace bifluidlab::bifluid
