#include "bifluid_lab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bifluid_lab/rational.hpp"

namespace bifluidlab::audit {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "indeterminate";
    }
}

double deriv4(const std::function<double(double)>& f, double x, double h) {
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
}

std::optional<double> loglog_slope(const std::vector<double>& x,
                                   const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    if (m < 2) return std::nullopt;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return (m * sxy - sx * sy) / denom;
}

std::vector<double> SamplingSpec::rho_grid() const {
    std::vector<double> g(rho_points);
    const double l0 = std::log(rho_min), l1 = std::log(rho_max);
    for (int i = 0; i < rho_points; ++i)
        g[i] = std::exp(l0 + (l1 - l0) * i / double(rho_points - 1));
    return g;
}

bool HypothesisReport::all_pass() const { return !any_fail(); }

bool HypothesisReport::any_fail() const {
    for (const auto& c : checks)
        if (c.verdict == Verdict::Fail) return true;
    return false;
}

nlohmann::ordered_json HypothesisReport::to_json() const {
    nlohmann::ordered_json j;
    j["subject"] = subject;
    j["sampling"] = {{"rho_min", sampling.rho_min},   {"rho_max", sampling.rho_max},
                     {"rho_points", sampling.rho_points}, {"s_points", sampling.s_points},
                     {"seed", sampling.seed},
                     {"weak_lower_bound", sampling.weak_lower_bound}};
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    int npass = 0, nfail = 0, nind = 0;
    for (const auto& c : checks) {
        nlohmann::ordered_json cj;
        cj["id"] = c.id;
        cj["verdict"] = verdict_name(c.verdict);
        cj["constants"] = c.constants;  // std::map: already sorted
        if (c.witness) {
            cj["witness"] = {{"rho", c.witness->rho},
                             {"Z", c.witness->Z},
                             {"observed", c.witness->observed},
                             {"bound", c.witness->bound},
                             {"note", c.witness->note}};
        }
        if (!c.note.empty()) cj["note"] = c.note;
        arr.push_back(cj);
        if (c.verdict == Verdict::Pass) ++npass;
        else if (c.verdict == Verdict::Fail) ++nfail;
        else ++nind;
    }
    j["checks"] = arr;
    j["summary"] = {{"pass", npass}, {"fail", nfail}, {"indeterminate", nind}};
    return j;
}

namespace {

using constitutive::PressureLaw;

// One-sided exponent verdict: `fitted` must not drop below `required`.
// The 5% band below the requirement is indeterminate.
Verdict exponent_at_least(double fitted, double required) {
    const double slack = 0.05 * std::max(1.0, std::abs(required));
    if (fitted >= required - 1e-6) return Verdict::Pass;
    if (fitted >= required - slack) return Verdict::Indeterminate;
    return Verdict::Fail;
}

// `fitted` must stay strictly below `limit`; within 5% of the limit is
// indeterminate.
Verdict exponent_below(double fitted, double limit) {
    const double slack = 0.05 * std::max(1.0, std::abs(limit));
    if (fitted <= limit - slack) return Verdict::Pass;
    if (fitted <= limit + 1e-9) return Verdict::Indeterminate;
    return Verdict::Fail;
}

struct Sampler {
    const PressureLaw& law;
    std::vector<double> rho;        // log grid
    std::vector<std::vector<double>> fractions;  // per s-ray: fraction of band

    std::vector<double> zvec(double r, const std::vector<double>& frac) const {
        std::vector<double> Z(law.species());
        for (int i = 0; i < law.species(); ++i) {
            const double lo = law.region.a_lower[i], hi = law.region.a_upper[i];
            Z[i] = (lo + frac[i] * (hi - lo)) * r;
        }
        return Z;
    }
    std::vector<double> svec(const std::vector<double>& frac) const {
        std::vector<double> s(law.species());
        for (int i = 0; i < law.species(); ++i) {
            const double lo = law.region.a_lower[i], hi = law.region.a_upper[i];
            s[i] = lo + frac[i] * (hi - lo);
        }
        return s;
    }
};

Sampler make_sampler(const PressureLaw& law, const SamplingSpec& spec) {
    Sampler s{law, spec.rho_grid(), {}};
    for (int j = 0; j < spec.s_points; ++j) {
        // all species share the fraction: diagonal scan through the band box
        double f = spec.s_points == 1 ? 0.5 : j / double(spec.s_points - 1);
        s.fractions.push_back(std::vector<double>(law.species(), f));
    }
    return s;
}

// Slice out the top `decades` of the rho ladder.
std::vector<size_t> top_band(const std::vector<double>& rho, double decades = 1.0) {
    std::vector<size_t> idx;
    const double cut = rho.back() / std::pow(10.0, decades);
    for (size_t i = 0; i < rho.size(); ++i)
        if (rho[i] >= cut) idx.push_back(i);
    return idx;
}

std::vector<size_t> bottom_band(const std::vector<double>& rho, double decades = 2.0) {
    std::vector<size_t> idx;
    const double cut = rho.front() * std::pow(10.0, decades);
    for (size_t i = 0; i < rho.size(); ++i)
        if (rho[i] <= cut && rho[i] < 1.0) idx.push_back(i);
    return idx;
}

CheckResult check_boundary(const Sampler& S) {
    CheckResult c{"H3.boundary", Verdict::Pass, {}, std::nullopt, ""};
    std::vector<double> zero(S.law.species(), 0.0);
    const double p00 = S.law.value(0.0, zero);
    c.constants["P_at_origin"] = p00;
    if (std::abs(p00) > 1e-12) {
        c.verdict = Verdict::Fail;
        c.witness = Witness{0.0, zero, p00, 0.0, "P(0,0) != 0"};
        return c;
    }
    for (double r : S.rho)
        for (const auto& f : S.fractions) {
            auto Z = S.zvec(r, f);
            const double p = S.law.value(r, Z);
            if (!std::isfinite(p) || p < -1e-12 * (1.0 + std::abs(p))) {
                c.verdict = Verdict::Fail;
                c.witness = Witness{r, Z, p, 0.0, "P must be finite and nonnegative"};
                return c;
            }
        }
    return c;
}

// Fit C_low, C_up in  C_low (rho^g + Z^b - 1) <= V <= C_up (rho^g + Z^b + 1)
// for a field V sampled on the grid; verdict from envelope slopes on the top
// decade (a bounded ratio has slope ~0 there).
CheckResult growth_envelope(const Sampler& S, const std::string& id,
                            const std::function<double(double, std::span<const double>)>& V,
                            bool weak_lower) {
    CheckResult c{id, Verdict::Pass, {}, std::nullopt, ""};
    const auto& law = S.law;
    double c_up = 0.0, c_lo = std::numeric_limits<double>::infinity();
    Witness w_up, w_lo;
    std::vector<double> up_curve(S.rho.size(), 0.0);
    std::vector<double> lo_curve(S.rho.size(), std::numeric_limits<double>::infinity());
    bool lower_violated = false;
    for (size_t i = 0; i < S.rho.size(); ++i) {
        const double r = S.rho[i];
        for (const auto& f : S.fractions) {
            auto Z = S.zvec(r, f);
            double comp = std::pow(r, law.gamma);
            if (!weak_lower)
                for (int k = 0; k < law.species(); ++k) comp += std::pow(Z[k], law.beta[k]);
            double comp_up = std::pow(r, law.gamma);
            for (int k = 0; k < law.species(); ++k) comp_up += std::pow(Z[k], law.beta[k]);
            const double v = V(r, Z);
            const double eu = v / (comp_up + 1.0);
            if (eu > c_up) { c_up = eu; w_up = Witness{r, Z, v, comp_up + 1.0, "upper envelope max"}; }
            up_curve[i] = std::max(up_curve[i], eu);
            // the lower bound is a coercivity statement: fit it where the
            // comparator dominates its additive constant
            if (comp >= 10.0) {
                if (v <= 0.0) {
                    lower_violated = true;
                    w_lo = Witness{r, Z, v, comp - 1.0, "value nonpositive where comparator >= 1"};
                } else {
                    const double el = v / (comp - 1.0);
                    if (el < c_lo) { c_lo = el; }
                    lo_curve[i] = std::min(lo_curve[i], el);
                }
            }
        }
    }
    c.constants["C_upper"] = c_up;
    c.constants["C_lower"] = std::isfinite(c_lo) ? c_lo : 0.0;
    if (lower_violated) {
        c.verdict = Verdict::Fail;
        c.witness = w_lo;
        return c;
    }
    auto band = top_band(S.rho);
    std::vector<double> xb, yu, yl;
    for (size_t i : band) {
        xb.push_back(S.rho[i]);
        yu.push_back(up_curve[i]);
        yl.push_back(std::isfinite(lo_curve[i]) ? lo_curve[i] : 0.0);
    }
    auto su = loglog_slope(xb, yu);
    auto sl = loglog_slope(xb, yl);
    c.constants["upper_envelope_slope"] = su.value_or(0.0);
    c.constants["lower_envelope_slope"] = sl.value_or(0.0);
    // the upper ratio must not keep growing, the lower must not keep decaying
    const double up_slope = su.value_or(0.0), lo_slope = sl.value_or(0.0);
    if (up_slope > 0.1 || lo_slope < -0.1) {
        c.verdict = Verdict::Fail;
        c.witness = up_slope > 0.1 ? w_up
                                   : Witness{xb.back(), S.zvec(xb.back(), S.fractions.back()),
                                             lo_slope, -0.1, "lower envelope decaying"};
    } else if (up_slope > 0.05 || lo_slope < -0.05) {
        c.verdict = Verdict::Indeterminate;
    }
    return c;
}

CheckResult check_partial_Z(const Sampler& S, const SamplingSpec& spec) {
    CheckResult c{"H3.partial_Z_bound", Verdict::Pass, {}, std::nullopt, ""};
    const auto& law = S.law;
    const bool lower_positive =
        *std::min_element(law.region.a_lower.begin(), law.region.a_lower.end()) > 0.0;

    std::vector<double> envelope(S.rho.size(), 0.0);  // max_i max_s |dP/dZ_i|
    for (size_t i = 0; i < S.rho.size(); ++i) {
        const double r = S.rho[i];
        for (const auto& f : S.fractions) {
            auto Z = S.zvec(r, f);
            bool interior = true;
            for (double z : Z) interior = interior && z > 0.0;
            if (!interior) continue;
            for (int k = 0; k < law.species(); ++k)
                envelope[i] = std::max(envelope[i], std::abs(law.d_Z(k, r, Z)));
        }
    }
    auto bot = bottom_band(S.rho);
    auto top = top_band(S.rho);
    std::vector<double> xb, yb, xt, yt;
    for (size_t i : bot) { xb.push_back(S.rho[i]); yb.push_back(envelope[i]); }
    for (size_t i : top) { xt.push_back(S.rho[i]); yt.push_back(envelope[i]); }
    const double g_low = std::max(0.0, -loglog_slope(xb, yb).value_or(0.0));
    const double g_up = loglog_slope(xt, yt).value_or(0.0) + 1.0;
    c.constants["Gamma_lower_fit"] = g_low;
    c.constants["Gamma_upper_fit"] = g_up;

    // Gamma_lower must stay below 1
    Verdict v1 = exponent_below(g_low, 1.0);
    // Gamma_upper must stay below gamma + gamma_BOG (or the beta variant when
    // the band is bounded away from zero)
    Rational rg = rationalize(law.gamma);
    Rational limit = rg + bog_gain(rg);
    std::string which = "gamma+gamma_BOG";
    if (lower_positive) {
        for (double b : law.beta) {
            Rational rb = rationalize(b);
            // beta_BOG taken symmetric to gamma_BOG (see notes): min{2b/3-1, b/2}
            Rational cand = rb + bog_gain(rb);
            if (cand > limit) { limit = cand; which = "max{gamma+gamma_BOG, beta+beta_BOG}"; }
        }
    }
    if (spec.weak_lower_bound && lower_positive) {
        for (double b : law.beta) {
            Rational cand = rg + bog_gain(rationalize(b));
            if (cand > limit) { limit = cand; which = "max{gamma+gamma_BOG, gamma+beta_BOG}"; }
        }
    }
    c.constants["Gamma_upper_limit"] = limit.value();
    c.note = "upper limit profile: " + which;
    Verdict v2 = exponent_below(g_up, limit.value());
    c.verdict = std::max(v1, v2, [](Verdict a, Verdict b) {
        auto rank = [](Verdict v) { return v == Verdict::Pass ? 0 : (v == Verdict::Indeterminate ? 1 : 2); };
        return rank(a) < rank(b);
    });
    if (c.verdict == Verdict::Fail) {
        c.witness = Witness{v2 == Verdict::Fail ? S.rho.back() : S.rho.front(),
                            {}, v2 == Verdict::Fail ? g_up : g_low,
                            v2 == Verdict::Fail ? limit.value() : 1.0,
                            "fitted exponent out of range"};
    }
    // envelope constant for the report
    double cfit = 0.0;
    for (size_t i = 0; i < S.rho.size(); ++i) {
        const double r = S.rho[i];
        const double denom = std::pow(r, -g_low) + std::pow(r, g_up - 1.0);
        if (envelope[i] > 0.0) cfit = std::max(cfit, envelope[i] / denom);
    }
    c.constants["C_partial_Z"] = cfit;
    return c;
}

CheckResult check_decomposition(const Sampler& S) {
    CheckResult c{"H4.decomposition", Verdict::Pass, {}, std::nullopt, ""};
    const auto& law = S.law;
    if (law.decomposition) {
        const auto& dec = *law.decomposition;
        double max_remainder = 0.0;
        for (size_t i = 0; i < S.rho.size(); ++i) {
            const double r = S.rho[i];
            for (const auto& f : S.fractions) {
                auto s = S.svec(f);
                auto Z = S.zvec(r, f);
                const double p = law.value(r, Z);
                const double mono = dec.monotone(r, s);
                const double rem = dec.remainder(r, s);
                max_remainder = std::max(max_remainder, rem);
                if (std::abs((mono - rem) - p) > 1e-12 * (1.0 + std::abs(p))) {
                    c.verdict = Verdict::Fail;
                    c.witness = Witness{r, Z, mono - rem, p, "monotone - remainder != P"};
                    return c;
                }
                if (rem < -1e-15) {
                    c.verdict = Verdict::Fail;
                    c.witness = Witness{r, Z, rem, 0.0, "remainder negative"};
                    return c;
                }
                if (r > dec.support_radius * (1.0 + 1e-9) && rem != 0.0) {
                    c.verdict = Verdict::Fail;
                    c.witness = Witness{r, Z, rem, 0.0, "remainder outside declared support"};
                    return c;
                }
            }
        }
        // monotonicity of the declared monotone part along each ray
        for (const auto& f : S.fractions) {
            auto s = S.svec(f);
            double prev = dec.monotone(S.rho.front(), s);
            for (size_t i = 1; i < S.rho.size(); ++i) {
                const double cur = dec.monotone(S.rho[i], s);
                if (cur < prev - 1e-10 * (1.0 + std::abs(prev))) {
                    c.verdict = Verdict::Fail;
                    c.witness = Witness{S.rho[i], S.zvec(S.rho[i], f), cur, prev,
                                        "declared monotone part decreases"};
                    return c;
                }
                prev = cur;
            }
        }
        c.constants["sup_remainder"] = max_remainder;
        c.constants["support_radius"] = dec.support_radius;
        c.note = "declared decomposition verified";
        return c;
    }
    // fallback: dense monotonicity scan of rho -> P(rho, rho*s); any dip must
    // be coverable by a compactly supported remainder inside the sampled range
    c.note = "no declared decomposition; direct monotonicity sampling";
    double support_end = 0.0, worst_need = 0.0;
    Witness dip;
    const int fine = 4 * static_cast<int>(S.rho.size());
    std::vector<double> rg(fine);
    const double l0 = std::log(S.rho.front()), l1 = std::log(S.rho.back());
    for (int i = 0; i < fine; ++i) rg[i] = std::exp(l0 + (l1 - l0) * i / double(fine - 1));
    for (const auto& f : S.fractions) {
        double runmax = -std::numeric_limits<double>::infinity();
        for (double r : rg) {
            auto Z = S.zvec(r, f);
            const double p = S.law.value(r, Z);
            runmax = std::max(runmax, p);
            const double need = runmax - p;
            if (need > 1e-10 * (1.0 + std::abs(runmax))) {
                support_end = std::max(support_end, r);
                if (need > worst_need) {
                    worst_need = need;
                    dip = Witness{r, Z, p, runmax, "non-monotone dip"};
                }
            }
        }
    }
    c.constants["fitted_remainder_sup"] = worst_need;
    c.constants["fitted_support_end"] = support_end;
    if (support_end >= 0.9 * S.rho.back()) {
        c.verdict = Verdict::Fail;
        c.witness = dip;
        c.witness->note = "dip persists to the edge of the sampled range; no compact remainder";
    } else if (worst_need > 0.0 && support_end >= 0.5 * S.rho.back()) {
        c.verdict = Verdict::Indeterminate;
    }
    return c;
}

CheckResult check_near_zero(const Sampler& S) {
    CheckResult c{"H4.near_zero", Verdict::Pass, {}, std::nullopt, ""};
    std::vector<double> envelope(S.rho.size(), 0.0);
    for (size_t i = 0; i < S.rho.size(); ++i)
        for (const auto& f : S.fractions)
            envelope[i] = std::max(envelope[i], S.law.value(S.rho[i], S.zvec(S.rho[i], f)));
    auto bot = bottom_band(S.rho);
    std::vector<double> xb, yb;
    for (size_t i : bot) { xb.push_back(S.rho[i]); yb.push_back(envelope[i]); }
    const double alpha_fit = loglog_slope(xb, yb).value_or(0.0);
    c.constants["alpha_fit"] = alpha_fit;
    c.constants["alpha_declared"] = S.law.alpha_near_zero;
    double cfit = 0.0;
    for (size_t i : bot)
        cfit = std::max(cfit, envelope[i] / std::pow(S.rho[i], S.law.alpha_near_zero));
    c.constants["c_envelope"] = cfit;
    c.verdict = exponent_at_least(alpha_fit, S.law.alpha_near_zero);
    if (c.verdict == Verdict::Fail)
        c.witness = Witness{S.rho.front(), S.zvec(S.rho.front(), S.fractions.back()),
                            alpha_fit, S.law.alpha_near_zero,
                            "P decays slower near zero than declared alpha"};
    return c;
}

CheckResult check_gamma95(const Sampler& S) {
    CheckResult c{"H4.gamma_borderline", Verdict::Pass, {}, std::nullopt, ""};
    const auto& law = S.law;
    auto top = top_band(S.rho);
    double f_low = std::numeric_limits<double>::infinity(), f_high = 0.0;
    for (const auto& f : S.fractions) {
        auto s = S.svec(f);
        double fmin = std::numeric_limits<double>::infinity();
        for (size_t i : top) {
            const double r = S.rho[i];
            double mono;
            if (law.decomposition) {
                mono = law.decomposition->monotone(r, s);
            } else {
                mono = law.value(r, S.zvec(r, f));
            }
            fmin = std::min(fmin, mono / std::pow(r, law.gamma));
        }
        f_low = std::min(f_low, fmin);
        f_high = std::max(f_high, fmin);
    }
    c.constants["f_essinf_fit"] = f_low;
    c.constants["f_esssup_fit"] = f_high;
    if (!(f_low > 1e-6 * (1.0 + f_high))) c.verdict = Verdict::Indeterminate;
    c.note = "borderline-exponent coefficient f(s) fitted on the top decade";
    return c;
}

CheckResult check_lipschitz(const Sampler& S) {
    CheckResult c{"H5.lipschitz", Verdict::Pass, {}, std::nullopt, ""};
    const auto& law = S.law;
    std::vector<double> envelope(S.rho.size(), 0.0);
    for (size_t i = 0; i < S.rho.size(); ++i) {
        const double r = S.rho[i];
        if (r < 1e-2) continue;  // away from the vacuum blow-up of C(r)
        for (const auto& f : S.fractions) {
            auto Z = S.zvec(r, f);
            bool interior = true;
            for (double z : Z) interior = interior && z > 1e-2;
            if (!interior) continue;
            const double dp = std::abs(law.d_rho(r, Z));
            double dzz = 0.0;
            for (int k = 0; k < law.species(); ++k) {
                const double h = 1e-6 * std::max(1.0, std::abs(Z[k]));
                auto zp = Z, zm = Z;
                zp[k] += h;
                zm[k] -= h;
                dzz = std::max(dzz, std::abs(law.d_Z(k, r, zp) - law.d_Z(k, r, zm)) / (2.0 * h));
            }
            const double v = std::max(dp, dzz);
            if (!std::isfinite(v)) {
                c.verdict = Verdict::Fail;
                c.witness = Witness{r, Z, v, 0.0, "non-finite derivative bound"};
                return c;
            }
            envelope[i] = std::max(envelope[i], v);
        }
    }
    auto top = top_band(S.rho);
    std::vector<double> xt, yt;
    for (size_t i : top) { xt.push_back(S.rho[i]); yt.push_back(envelope[i]); }
    const double a_fit = std::max(0.0, loglog_slope(xt, yt).value_or(0.0));
    c.constants["A_fit"] = a_fit;
    double cfit = 0.0;
    for (size_t i = 0; i < S.rho.size(); ++i)
        if (envelope[i] > 0.0)
            cfit = std::max(cfit, envelope[i] / (1.0 + std::pow(S.rho[i], a_fit)));
    c.constants["C_lipschitz"] = cfit;
    return c;
}

CheckResult check_partials_fd(const Sampler& S, const SamplingSpec& spec) {
    CheckResult c{"partials.finite_difference", Verdict::Pass, {}, std::nullopt, ""};
    const auto& law = S.law;
    std::mt19937_64 rng(spec.seed + 17);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        // interior points only: the stencil must stay inside the quadrant
        const double r = std::exp(std::log(0.05) + ur(rng) * (std::log(50.0) - std::log(0.05)));
        std::vector<double> frac(law.species());
        for (auto& f : frac) f = 0.05 + 0.9 * ur(rng);
        std::vector<double> Z(law.species());
        for (int i = 0; i < law.species(); ++i) {
            const double lo = law.region.a_lower[i], hi = law.region.a_upper[i];
            Z[i] = (lo + frac[i] * (hi - lo)) * r;
            if (Z[i] <= 0.0) Z[i] = 0.5 * hi * r;  // keep off the Z=0 axis
        }
        const double h = 1e-6 * std::max(1.0, r);
        const double fd_rho = deriv4([&](double x) { return law.value(x, Z); }, r, h);
        const double an_rho = law.d_rho(r, Z);
        double err = std::abs(fd_rho - an_rho) / (1.0 + std::abs(an_rho));
        worst = std::max(worst, err);
        if (err > 1e-6) {
            c.verdict = Verdict::Fail;
            c.witness = Witness{r, Z, an_rho, fd_rho, "analytic d_rho disagrees with stencil"};
            break;
        }
        for (int k = 0; k < law.species(); ++k) {
            const double hz = 1e-6 * std::max(1.0, Z[k]);
            const double fd = deriv4(
                [&](double x) {
                    auto zz = Z;
                    zz[k] = x;
                    return law.value(r, zz);
                },
                Z[k], hz);
            const double an = law.d_Z(k, r, Z);
            err = std::abs(fd - an) / (1.0 + std::abs(an));
            worst = std::max(worst, err);
            if (err > 1e-6) {
                c.verdict = Verdict::Fail;
                c.witness = Witness{r, Z, an, fd, "analytic d_Z disagrees with stencil"};
                break;
            }
        }
        if (c.verdict == Verdict::Fail) break;
    }
    c.constants["worst_relative_error"] = worst;
    return c;
}

}  // namespace

HypothesisReport audit_hypotheses(const PressureLaw& law, const SamplingSpec& spec) {
    HypothesisReport rep;
    rep.subject = law.name;
    rep.sampling = spec;
    Sampler S = make_sampler(law, spec);

    rep.checks.push_back(check_boundary(S));
    rep.checks.push_back(growth_envelope(S, "H3.growth", law.value, spec.weak_lower_bound));
    rep.checks.push_back(check_partial_Z(S, spec));
    {
        auto H = [&law](double r, std::span<const double> Z) {
            return constitutive::helmholtz(law, r, Z);
        };
        rep.checks.push_back(growth_envelope(S, "H3.helmholtz_bounds", H, spec.weak_lower_bound));
    }
    rep.checks.push_back(check_decomposition(S));
    rep.checks.push_back(check_near_zero(S));
    if (std::abs(law.gamma - 1.8) < 1e-12) rep.checks.push_back(check_gamma95(S));
    rep.checks.push_back(check_lipschitz(S));
    rep.checks.push_back(check_partials_fd(S, spec));
    return rep;
}

}  // namespace bifluidlab::audit
