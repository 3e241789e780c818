#include "bifluid_lab/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bifluidlab::constitutive {
namespace {

void check_inputs(const char* op, double rho, std::span<const double> Z) {
    if (rho < 0.0 || !std::isfinite(rho))
        throw DomainError(std::string(op) + ": rho must be finite and >= 0");
    for (double z : Z)
        if (z < 0.0 || !std::isfinite(z))
            throw DomainError(std::string(op) + ": Z components must be finite and >= 0");
}

std::string point_str(double rho, std::span<const double> Z) {
    std::ostringstream os;
    os << "(rho=" << rho;
    for (double z : Z) os << ", Z=" << z;
    os << ")";
    return os.str();
}

// quintic smoothstep: 0 -> 1 on [0,1], C^2 at both ends
double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace

void AdmissibleRegion::validate() const {
    if (a_lower.empty() || a_lower.size() != a_upper.size())
        throw ConfigError("AdmissibleRegion: need matching a_lower/a_upper per species");
    for (size_t i = 0; i < a_lower.size(); ++i) {
        if (!(a_lower[i] >= 0.0) || !(a_lower[i] < a_upper[i]) || !std::isfinite(a_upper[i]))
            throw ConfigError("AdmissibleRegion: require 0 <= a_lower < a_upper < inf");
    }
}

bool AdmissibleRegion::contains(double rho, std::span<const double> Z, double slack) const {
    if (rho < -slack) return false;
    if (Z.size() != a_lower.size()) return false;
    for (size_t i = 0; i < Z.size(); ++i) {
        if (Z[i] < a_lower[i] * rho - slack) return false;
        if (Z[i] > a_upper[i] * rho + slack) return false;
    }
    return true;
}

void RegularizedPressureParams::validate(const PressureLaw& law) const {
    if (!(delta > 0.0)) throw ConfigError("RegularizedPressureParams: delta must be > 0");
    double need = std::max(4.5, law.gamma);
    for (double b : law.beta) need = std::max(need, b);
    if (!(B > need))
        throw ConfigError("RegularizedPressureParams: B must exceed max{9/2, gamma, beta_i}");
}

double eta_profile(double z) {
    if (z <= 0.5) return 1.0;
    if (z >= 1.0) return 0.0;
    return 1.0 - smoothstep(2.0 * z - 1.0);
}

double eta_cutoff(double width, double r) { return eta_profile(r / width); }

double eval_pressure(const PressureLaw& law, double rho, std::span<const double> Z) {
    check_inputs("eval_pressure", rho, Z);
    const double p = law.value(rho, Z);
    if (!std::isfinite(p))
        throw NumericError("eval_pressure: non-finite value at " + point_str(rho, Z));
    return p;
}

double helmholtz(const PressureLaw& law, double rho, std::span<const double> Z,
                 QuadTol tol) {
    check_inputs("helmholtz", rho, Z);
    if (rho == 0.0) return 0.0;
    // ratios are frozen along the integration ray; s := Z/rho (0 at vacuum)
    std::vector<double> ratio(Z.size());
    for (size_t i = 0; i < Z.size(); ++i) ratio[i] = Z[i] / rho;

    std::vector<double> zbuf(Z.size());
    auto integrand = [&](double s) {
        for (size_t i = 0; i < ratio.size(); ++i) zbuf[i] = s * ratio[i];
        return law.value(s, zbuf) / (s * s);
    };

    quad::Result r;
    if (rho < 0.1) {
        // near vacuum the integrand behaves like s^{alpha-2}; refine
        // geometrically toward the small endpoint
        auto pts = quad::geometric_breakpoints(rho, 1.0, 4);
        r = quad::integrate_split(integrand, pts, tol.abs, tol.rel);
        r.value = -r.value;  // oriented as Int_1^rho
    } else {
        r = quad::integrate(integrand, 1.0, rho, tol.abs, tol.rel);
    }
    if (!r.converged) {
        std::ostringstream os;
        os << "helmholtz: quadrature did not reach tolerance at " << point_str(rho, Z)
           << " (error estimate " << r.error_estimate << ", " << r.panels << " panels)";
        throw NumericError(os.str());
    }
    return rho * r.value;
}

double h_delta(const RegularizedPressureParams& p, double rho, std::span<const double> Z) {
    const double B = p.B;
    double poly = std::pow(rho, B);
    for (double z : Z) {
        poly += std::pow(z, B);
        poly += 0.5 * rho * rho * std::pow(z, B - 2.0);
        poly += 0.5 * z * z * std::pow(rho, B - 2.0);
    }
    return p.delta / (B - 1.0) * poly;
}

double cutoff_pressure(const RegularizedPressureParams& p, const PressureLaw& law,
                       double rho, std::span<const double> Z) {
    double r2 = rho * rho;
    for (double z : Z) r2 += z * z;
    const double w = p.width();
    if (r2 <= 0.25 * w * w) return 0.0;  // fully cut off, skip the law
    const double factor = 1.0 - eta_cutoff(w, std::sqrt(r2));
    if (factor == 0.0) return 0.0;
    return factor * law.value(rho, Z);
}

double regularized_pressure(const RegularizedPressureParams& p, const PressureLaw& law,
                            double rho, std::span<const double> Z) {
    check_inputs("regularized_pressure", rho, Z);
    const double B = p.B;
    double poly = std::pow(rho, B);
    for (double z : Z) {
        poly += std::pow(z, B);
        poly += 0.5 * rho * rho * std::pow(z, B - 2.0);
        poly += 0.5 * z * z * std::pow(rho, B - 2.0);
    }
    const double v = cutoff_pressure(p, law, rho, Z) + p.delta * poly;
    if (!std::isfinite(v))
        throw NumericError("regularized_pressure: non-finite value at " + point_str(rho, Z));
    return v;
}

double regularized_helmholtz(const RegularizedPressureParams& p, const PressureLaw& law,
                             double rho, std::span<const double> Z, QuadTol tol) {
    check_inputs("regularized_helmholtz", rho, Z);
    if (rho == 0.0) return 0.0;
    // The integration ray stays outside the cut-off ball whenever
    // min(1, rho) >= width, so H_{P_delta} = H_P there and an exact closed
    // form (when the law has one) can stand in for the quadrature.
    if (law.helmholtz_closed && std::min(1.0, rho) >= p.width())
        return law.helmholtz_closed(rho, Z) + h_delta(p, rho, Z);
    std::vector<double> ratio(Z.size());
    for (size_t i = 0; i < Z.size(); ++i) ratio[i] = Z[i] / rho;
    std::vector<double> zbuf(Z.size());
    auto integrand = [&](double s) {
        for (size_t i = 0; i < ratio.size(); ++i) zbuf[i] = s * ratio[i];
        return cutoff_pressure(p, law, s, zbuf) / (s * s);
    };
    quad::Result r;
    if (rho < 0.1) {
        auto pts = quad::geometric_breakpoints(rho, 1.0, 4);
        // make the cut-off edges explicit breakpoints so adaptivity
        // does not chase the C^2 kink
        const double w = p.width();
        for (double edge : {0.5 * w, w})
            if (edge > rho && edge < 1.0) pts.push_back(edge);
        std::sort(pts.begin(), pts.end());
        r = quad::integrate_split(integrand, pts, tol.abs, tol.rel);
        r.value = -r.value;
    } else {
        r = quad::integrate(integrand, 1.0, rho, tol.abs, tol.rel);
    }
    if (!r.converged) {
        std::ostringstream os;
        os << "regularized_helmholtz: quadrature did not reach tolerance at "
           << point_str(rho, Z) << " (error estimate " << r.error_estimate << ")";
        throw NumericError(os.str());
    }
    return rho * r.value + h_delta(p, rho, Z);
}

TruncationKit::TruncationKit(double level) : k(level) {
    if (!(k > 1.0)) throw DomainError("TruncationKit: truncation level must be > 1");
}

double TruncationKit::profile(double z) {
    if (z < 0.0) throw DomainError("TruncationKit: negative argument");
    if (z <= 1.0) return z;
    if (z >= 3.0) return 2.0;
    // monotone concave quartic blend: value/slope/curvature match both ends
    const double t = 0.5 * (z - 1.0);
    return 1.0 + t * (2.0 + t * t * (-2.0 + t));
}

double TruncationKit::profile_derivative(double z) {
    if (z < 0.0) throw DomainError("TruncationKit: negative argument");
    if (z <= 1.0) return 1.0;
    if (z >= 3.0) return 0.0;
    const double t = 0.5 * (z - 1.0);
    return 0.5 * (2.0 - 6.0 * t * t + 4.0 * t * t * t);
}

double TruncationKit::truncate(double z) const { return k * profile(z / k); }

double TruncationKit::truncate_derivative(double z) const { return profile_derivative(z / k); }

double TruncationKit::log_companion(double z) const {
    if (z < 0.0) throw DomainError("TruncationKit: negative argument");
    if (z == 0.0) return 0.0;
    auto integrand = [&](double s) { return truncate(s) / (s * s); };
    quad::Result r;
    if (z < 0.1) {
        auto pts = quad::geometric_breakpoints(z, 1.0, 4);
        r = quad::integrate_split(integrand, pts);
        r.value = -r.value;
    } else {
        r = quad::integrate(integrand, 1.0, z);
    }
    return z * r.value;
}

DecompositionParts decompose_pressure(const PressureLaw& law, double rho,
                                      std::span<const double> s) {
    if (!law.decomposition)
        throw CapabilityError("decompose_pressure: law '" + law.name +
                              "' declares no decomposition");
    return {law.decomposition->monotone(rho, s), law.decomposition->remainder(rho, s)};
}

// --- catalog ------------------------------------------------------------

namespace {

double cross_terms_value(const std::vector<CrossTerm>& terms, double rho,
                         std::span<const double> Z) {
    double acc = 0.0;
    for (const auto& t : terms) {
        double v = t.coef * std::pow(rho, t.r);
        for (size_t i = 0; i < t.s.size(); ++i)
            if (t.s[i] != 0.0) v *= std::pow(Z[i], t.s[i]);
        acc += v;
    }
    return acc;
}

double near_zero_exponent(double gamma, std::span<const double> beta,
                          const std::vector<CrossTerm>& terms) {
    double alpha = gamma;
    for (double b : beta) alpha = std::min(alpha, b);
    for (const auto& t : terms) {
        double total = t.r;
        for (double e : t.s) total += e;
        alpha = std::min(alpha, total);
    }
    return alpha;
}

// Int_1^rho c*u^t / u^2 du, premultiplied by rho: the Helmholtz share of one
// power term c*u^t evaluated along a ray.
double power_helmholtz(double coef, double t, double rho) {
    if (rho == 0.0) return 0.0;
    if (std::abs(t - 1.0) < 1e-14) return coef * rho * std::log(rho);
    return coef * (std::pow(rho, t) - rho) / (t - 1.0);
}

double cross_terms_helmholtz(const std::vector<CrossTerm>& terms, double rho,
                             std::span<const double> Z) {
    double acc = 0.0;
    for (const auto& t : terms) {
        double coef = t.coef, total = t.r;
        for (size_t i = 0; i < t.s.size(); ++i) {
            total += t.s[i];
            if (t.s[i] != 0.0) coef *= std::pow(Z[i] / rho, t.s[i]);
        }
        acc += power_helmholtz(coef, total, rho);
    }
    return acc;
}

}  // namespace

PressureLaw make_e1_law(double gamma, std::vector<double> beta,
                        std::vector<CrossTerm> terms, AdmissibleRegion region) {
    region.validate();
    const int K = static_cast<int>(beta.size());
    if (region.species() != K)
        throw ConfigError("make_e1_law: region species count mismatch");
    PressureLaw law;
    law.name = "e1";
    law.region = std::move(region);
    law.gamma = gamma;
    law.beta = beta;
    law.alpha_near_zero = near_zero_exponent(gamma, beta, terms);
    law.value = [gamma, beta, terms](double rho, std::span<const double> Z) {
        double p = std::pow(rho, gamma);
        for (size_t i = 0; i < beta.size(); ++i) p += std::pow(Z[i], beta[i]);
        return p + cross_terms_value(terms, rho, Z);
    };
    law.d_rho = [gamma, terms](double rho, std::span<const double> Z) {
        double p = gamma * std::pow(rho, gamma - 1.0);
        for (const auto& t : terms) {
            if (t.r == 0.0) continue;
            double v = t.coef * t.r * std::pow(rho, t.r - 1.0);
            for (size_t i = 0; i < t.s.size(); ++i)
                if (t.s[i] != 0.0) v *= std::pow(Z[i], t.s[i]);
            p += v;
        }
        return p;
    };
    law.d_Z = [beta, terms](int i, double rho, std::span<const double> Z) {
        double p = beta[i] * std::pow(Z[i], beta[i] - 1.0);
        for (const auto& t : terms) {
            if (t.s[i] == 0.0) continue;
            double v = t.coef * std::pow(rho, t.r) * t.s[i] * std::pow(Z[i], t.s[i] - 1.0);
            for (size_t j = 0; j < t.s.size(); ++j)
                if (static_cast<int>(j) != i && t.s[j] != 0.0) v *= std::pow(Z[j], t.s[j]);
            p += v;
        }
        return p;
    };
    law.helmholtz_closed = [gamma, beta, terms](double rho, std::span<const double> Z) {
        if (rho == 0.0) return 0.0;
        double h = power_helmholtz(1.0, gamma, rho);
        for (size_t i = 0; i < beta.size(); ++i)
            h += power_helmholtz(std::pow(Z[i] / rho, beta[i]), beta[i], rho);
        return h + cross_terms_helmholtz(terms, rho, Z);
    };
    // every term of P(rho, rho*s) is a nonnegative power of rho: already
    // monotone, no remainder needed
    Decomposition dec;
    auto value = law.value;
    dec.monotone = [value](double rho, std::span<const double> s) {
        std::vector<double> Z(s.size());
        for (size_t i = 0; i < s.size(); ++i) Z[i] = rho * s[i];
        return value(rho, Z);
    };
    dec.remainder = [](double, std::span<const double>) { return 0.0; };
    dec.support_radius = 0.0;
    law.decomposition = std::move(dec);
    return law;
}

PressureLaw make_e2_law(double gamma, int species, std::vector<CrossTerm> terms,
                        AdmissibleRegion region) {
    region.validate();
    if (region.species() != species)
        throw ConfigError("make_e2_law: region species count mismatch");
    PressureLaw law;
    law.name = "e2";
    law.region = std::move(region);
    law.gamma = gamma;
    law.beta.assign(species, gamma);
    law.alpha_near_zero = near_zero_exponent(gamma, law.beta, terms);
    law.value = [gamma, terms](double rho, std::span<const double> Z) {
        double tot = rho;
        for (double z : Z) tot += z;
        return std::pow(tot, gamma) + cross_terms_value(terms, rho, Z);
    };
    law.d_rho = [gamma, terms](double rho, std::span<const double> Z) {
        double tot = rho;
        for (double z : Z) tot += z;
        double p = gamma * std::pow(tot, gamma - 1.0);
        for (const auto& t : terms) {
            if (t.r == 0.0) continue;
            double v = t.coef * t.r * std::pow(rho, t.r - 1.0);
            for (size_t i = 0; i < t.s.size(); ++i)
                if (t.s[i] != 0.0) v *= std::pow(Z[i], t.s[i]);
            p += v;
        }
        return p;
    };
    law.d_Z = [gamma, terms](int i, double rho, std::span<const double> Z) {
        double tot = rho;
        for (double z : Z) tot += z;
        double p = gamma * std::pow(tot, gamma - 1.0);
        for (const auto& t : terms) {
            if (t.s[i] == 0.0) continue;
            double v = t.coef * std::pow(rho, t.r) * t.s[i] * std::pow(Z[i], t.s[i] - 1.0);
            for (size_t j = 0; j < t.s.size(); ++j)
                if (static_cast<int>(j) != i && t.s[j] != 0.0) v *= std::pow(Z[j], t.s[j]);
            p += v;
        }
        return p;
    };
    law.helmholtz_closed = [gamma, terms](double rho, std::span<const double> Z) {
        if (rho == 0.0) return 0.0;
        double tot = 1.0;
        for (double z : Z) tot += z / rho;
        return power_helmholtz(std::pow(tot, gamma), gamma, rho) +
               cross_terms_helmholtz(terms, rho, Z);
    };
    Decomposition dec;
    auto value = law.value;
    dec.monotone = [value](double rho, std::span<const double> s) {
        std::vector<double> Z(s.size());
        for (size_t i = 0; i < s.size(); ++i) Z[i] = rho * s[i];
        return value(rho, Z);
    };
    dec.remainder = [](double, std::span<const double>) { return 0.0; };
    dec.support_radius = 0.0;
    law.decomposition = std::move(dec);
    return law;
}

PressureLaw make_pure_power_law(double gamma, double coef, AdmissibleRegion region) {
    region.validate();
    PressureLaw law;
    law.name = "pure";
    law.region = std::move(region);
    law.gamma = gamma;
    law.beta.assign(law.region.species(), gamma);
    law.alpha_near_zero = gamma;
    law.value = [gamma, coef](double rho, std::span<const double>) {
        return coef * std::pow(rho, gamma);
    };
    law.d_rho = [gamma, coef](double rho, std::span<const double>) {
        return coef * gamma * std::pow(rho, gamma - 1.0);
    };
    law.d_Z = [](int, double, std::span<const double>) { return 0.0; };
    law.helmholtz_closed = [gamma, coef](double rho, std::span<const double>) {
        return power_helmholtz(coef, gamma, rho);
    };
    Decomposition dec;
    dec.monotone = [gamma, coef](double rho, std::span<const double>) {
        return coef * std::pow(rho, gamma);
    };
    dec.remainder = [](double, std::span<const double>) { return 0.0; };
    dec.support_radius = 0.0;
    law.decomposition = std::move(dec);
    return law;
}

double eval_pressure(const PressureLaw& law, double rho, double Z) {
    return eval_pressure(law, rho, std::span<const double>(&Z, 1));
}

double helmholtz(const PressureLaw& law, double rho, double Z, QuadTol tol) {
    return helmholtz(law, rho, std::span<const double>(&Z, 1), tol);
}

}  // namespace bifluidlab::constitutive
