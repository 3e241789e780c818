#pragma once
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bifluid_lab/constitutive.hpp"

namespace bifluidlab::audit {

enum class Verdict { Pass, Fail, Indeterminate };

const char* verdict_name(Verdict v);

struct Witness {
    double rho = 0.0;
    std::vector<double> Z;
    double observed = 0.0;
    double bound = 0.0;
    std::string note;
};

struct CheckResult {
    std::string id;
    Verdict verdict = Verdict::Indeterminate;
    std::map<std::string, double> constants;   // fitted envelope constants
    std::optional<Witness> witness;            // mandatory for Fail
    std::string note;
};

// Sampling metadata: a log-spaced rho ladder covering a near-zero band and a
// large band, crossed with evenly spaced ratios inside the admissible band.
struct SamplingSpec {
    double rho_min = 1e-4;
    double rho_max = 1e3;
    int rho_points = 121;
    int s_points = 7;
    unsigned long long seed = 0;
    bool weak_lower_bound = false;  // alternate lower growth profile C(rho^gamma - 1)

    std::vector<double> rho_grid() const;
};

struct HypothesisReport {
    std::string subject;
    SamplingSpec sampling;
    std::vector<CheckResult> checks;

    bool all_pass() const;      // no Fail verdicts
    bool any_fail() const;
    nlohmann::ordered_json to_json() const;  // stable field order
};

// Samples Hypotheses (H3)-(H5) numerically: growth envelopes, partial
// derivative bounds, Helmholtz bounds, decomposition / monotonicity,
// near-zero behaviour and Lipschitz growth.  Deterministic for a given spec.
HypothesisReport audit_hypotheses(const constitutive::PressureLaw& law,
                                  const SamplingSpec& spec);

// 4th order central difference with Richardson-combined stencil.
double deriv4(const std::function<double(double)>& f, double x, double h);

// Least-squares slope of log(y) against log(x); pairs with y <= 0 are
// skipped.  Returns nullopt with fewer than two usable points.
std::optional<double> loglog_slope(const std::vector<double>& x,
                                   const std::vector<double>& y);

}  // namespace bifluidlab::audit
