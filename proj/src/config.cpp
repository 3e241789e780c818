#include "bifluid_lab/config.hpp"

#include <cmath>
#include <set>

namespace bifluidlab::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* ctx) {
    if (!j.is_object()) throw ConfigError(std::string(ctx) + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, v] : j.items()) {
        (void)v;
        if (!ok.count(key))
            throw ConfigError(std::string(ctx) + ": unknown key '" + key + "'");
    }
}

double need_number(const json& j, const char* key, const char* ctx) {
    if (!j.contains(key))
        throw ConfigError(std::string(ctx) + ": missing key '" + key + "'");
    if (!j.at(key).is_number())
        throw ConfigError(std::string(ctx) + ": key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

int need_int(const json& j, const char* key, const char* ctx) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw ConfigError(std::string(ctx) + ": missing integer key '" + key + "'");
    return j.at(key).get<int>();
}

constitutive::AdmissibleRegion parse_region(const json& j) {
    check_keys(j, {"a_lower", "a_upper"}, "law.region");
    constitutive::AdmissibleRegion r;
    if (!j.contains("a_lower") || !j.contains("a_upper"))
        throw ConfigError("law.region: need a_lower and a_upper arrays");
    r.a_lower = j.at("a_lower").get<std::vector<double>>();
    r.a_upper = j.at("a_upper").get<std::vector<double>>();
    r.validate();
    return r;
}

std::vector<constitutive::CrossTerm> parse_terms(const json& j, int species) {
    std::vector<constitutive::CrossTerm> terms;
    if (!j.contains("terms")) return terms;
    for (const auto& t : j.at("terms")) {
        check_keys(t, {"coef", "r", "s"}, "law.terms[]");
        constitutive::CrossTerm ct;
        ct.coef = need_number(t, "coef", "law.terms[]");
        ct.r = need_number(t, "r", "law.terms[]");
        ct.s = t.at("s").get<std::vector<double>>();
        if (static_cast<int>(ct.s.size()) != species)
            throw ConfigError("law.terms[]: exponent vector s must have one entry per species");
        terms.push_back(std::move(ct));
    }
    return terms;
}

bifluid::PhaseLaw parse_phase(const json& j, const char* ctx, Exponent* gamma_out) {
    check_keys(j, {"gamma", "coef", "linear"}, ctx);
    Exponent g = parse_exponent(j.at("gamma"), ctx);
    if (gamma_out) *gamma_out = g;
    const double coef = j.contains("coef") ? need_number(j, "coef", ctx) : 1.0;
    const double linear = j.contains("linear") ? need_number(j, "linear", ctx) : 0.0;
    return bifluid::make_phase_power_law(g.value, coef, linear);
}

}  // namespace

Exponent parse_exponent(const json& j, const char* what) {
    Exponent e;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const auto slash = s.find('/');
        try {
            if (slash == std::string::npos) {
                e.exact = rationalize(std::stod(s));
                e.value = std::stod(s);
            } else {
                const long long p = std::stoll(s.substr(0, slash));
                const long long q = std::stoll(s.substr(slash + 1));
                e.exact = Rational(p, q);
                e.value = e.exact.value();
            }
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": cannot parse exponent '" + s + "'");
        }
    } else if (j.is_number()) {
        e.value = j.get<double>();
        e.exact = rationalize(e.value);
    } else {
        throw ConfigError(std::string(what) + ": exponent must be a number or 'p/q' string");
    }
    return e;
}

LoadedLaw parse_law(const json& j) {
    if (!j.is_object() || !j.contains("catalog"))
        throw ConfigError("law: missing 'catalog'");
    const std::string catalog = j.at("catalog").get<std::string>();
    LoadedLaw out;
    if (catalog == "e1") {
        check_keys(j, {"catalog", "gamma", "beta", "terms", "region"}, "law(e1)");
        auto region = parse_region(j.at("region"));
        const int K = region.species();
        std::vector<double> beta;
        for (const auto& b : j.at("beta")) beta.push_back(parse_exponent(b, "law.beta").value);
        if (static_cast<int>(beta.size()) != K)
            throw ConfigError("law(e1): beta needs one entry per species");
        out.law = constitutive::make_e1_law(parse_exponent(j.at("gamma"), "law.gamma").value,
                                            beta, parse_terms(j, K), region);
    } else if (catalog == "e2") {
        check_keys(j, {"catalog", "gamma", "terms", "region"}, "law(e2)");
        auto region = parse_region(j.at("region"));
        out.law = constitutive::make_e2_law(parse_exponent(j.at("gamma"), "law.gamma").value,
                                            region.species(), parse_terms(j, region.species()),
                                            region);
    } else if (catalog == "pure") {
        check_keys(j, {"catalog", "gamma", "coef", "region"}, "law(pure)");
        auto region = parse_region(j.at("region"));
        const double coef = j.contains("coef") ? need_number(j, "coef", "law(pure)") : 1.0;
        out.law = constitutive::make_pure_power_law(
            parse_exponent(j.at("gamma"), "law.gamma").value, coef, region);
    } else if (catalog == "bifluid") {
        check_keys(j, {"catalog", "plus", "minus", "region", "root_tolerance"}, "law(bifluid)");
        auto region = parse_region(j.at("region"));
        Exponent gp, gm;
        bifluid::PhaseLaw plus = parse_phase(j.at("plus"), "law.plus", &gp);
        bifluid::PhaseLaw minus = parse_phase(j.at("minus"), "law.minus", &gm);
        const double tol = j.contains("root_tolerance")
                               ? need_number(j, "root_tolerance", "law(bifluid)")
                               : 1e-12;
        out.system = std::make_shared<bifluid::BiFluidSystem>(std::move(plus), std::move(minus),
                                                              region, tol);
        out.law = bifluid::effective_pressure(*out.system);
        bifluid::BiExponents e;
        e.gamma_plus = gp.exact;
        e.gamma_minus = gm.exact;
        e.a_lower_positive = region.a_lower[0] > 0.0;
        out.exponents = e;
    } else {
        throw ConfigError("law: unknown catalog '" + catalog + "'");
    }
    return out;
}

namespace {

spectral::Field scalar_profile(const json& j, const spectral::TorusGrid& g, const char* ctx) {
    check_keys(j, {"profile", "value", "base", "amplitude", "modes"}, ctx);
    const std::string profile = j.at("profile").get<std::string>();
    spectral::Field f(g);
    if (profile == "uniform") {
        const double v = need_number(j, "value", ctx);
        std::fill(f.data.begin(), f.data.end(), v);
        return f;
    }
    if (profile == "cosine") {
        const double base = need_number(j, "base", ctx);
        const double amp = need_number(j, "amplitude", ctx);
        std::vector<int> modes = j.contains("modes") ? j.at("modes").get<std::vector<int>>()
                                                     : std::vector<int>(g.dim, 1);
        if (static_cast<int>(modes.size()) != g.dim)
            throw ConfigError(std::string(ctx) + ": modes needs one entry per dimension");
        const int n = g.n;
        const double h = spectral::TorusGrid::axis_length / n;
        std::vector<int> idx(g.dim, 0);
        for (size_t flat = 0; flat < f.data.size(); ++flat) {
            size_t rest = flat;
            for (int a = g.dim - 1; a >= 0; --a) {
                idx[a] = static_cast<int>(rest % n);
                rest /= n;
            }
            double v = 1.0;
            for (int a = 0; a < g.dim; ++a) v *= std::cos(modes[a] * idx[a] * h);
            f.data[flat] = base + amp * v;
        }
        return f;
    }
    throw ConfigError(std::string(ctx) + ": unknown profile '" + profile + "'");
}

spectral::VectorField velocity_profile(const json& j, const spectral::TorusGrid& g) {
    check_keys(j, {"profile", "amplitude", "axis", "wave_axis", "component", "modes", "kind"},
               "initial.velocity");
    const std::string profile = j.at("profile").get<std::string>();
    spectral::VectorField u(g);
    const int n = g.n;
    const double h = spectral::TorusGrid::axis_length / n;
    if (profile == "zero") return u;
    if (profile == "shear") {
        // u_axis = amplitude * sin(x_{wave_axis})
        const double amp = need_number(j, "amplitude", "initial.velocity");
        const int axis = j.contains("axis") ? need_int(j, "axis", "initial.velocity") : 0;
        const int wave = j.contains("wave_axis") ? need_int(j, "wave_axis", "initial.velocity")
                                                 : (axis + 1) % g.dim;
        if (axis < 0 || axis >= g.dim || wave < 0 || wave >= g.dim)
            throw ConfigError("initial.velocity: axis out of range");
        std::vector<int> idx(g.dim, 0);
        for (size_t flat = 0; flat < u.comp[axis].data.size(); ++flat) {
            size_t rest = flat;
            for (int a = g.dim - 1; a >= 0; --a) {
                idx[a] = static_cast<int>(rest % n);
                rest /= n;
            }
            u.comp[axis].data[flat] = amp * std::sin(idx[wave] * h);
        }
        return u;
    }
    if (profile == "taylor_green") {
        if (g.dim != 2) throw ConfigError("initial.velocity: taylor_green needs dimension 2");
        const double amp = need_number(j, "amplitude", "initial.velocity");
        for (int i = 0; i < n; ++i)
            for (int jx = 0; jx < n; ++jx) {
                const double x = i * h, y = jx * h;
                u.comp[0].data[size_t(i) * n + jx] = amp * std::sin(x) * std::cos(y);
                u.comp[1].data[size_t(i) * n + jx] = -amp * std::cos(x) * std::sin(y);
            }
        return u;
    }
    throw ConfigError("initial.velocity: unknown profile '" + profile + "'");
}

}  // namespace

solver::MixtureState build_initial(const solver::ApproxConfig& cfg, const json& initial_spec,
                                   int smooth_modes) {
    check_keys(initial_spec, {"rho", "Z", "velocity", "smooth_modes"}, "initial");
    spectral::Field rho = scalar_profile(initial_spec.at("rho"), cfg.grid, "initial.rho");
    std::vector<spectral::Field> Z;
    const auto& zspec = initial_spec.at("Z");
    if (!zspec.is_array() || static_cast<int>(zspec.size()) != cfg.species())
        throw ConfigError("initial.Z: need one profile per species");
    for (const auto& zj : zspec) {
        if (zj.is_object() && zj.contains("profile") &&
            zj.at("profile").get<std::string>() == "proportional") {
            check_keys(zj, {"profile", "ratio"}, "initial.Z[]");
            const double c = need_number(zj, "ratio", "initial.Z[]");
            spectral::Field z(cfg.grid);
            for (size_t x = 0; x < z.data.size(); ++x) z.data[x] = c * rho.data[x];
            Z.push_back(std::move(z));
        } else {
            Z.push_back(scalar_profile(zj, cfg.grid, "initial.Z[]"));
        }
    }
    spectral::VectorField u = initial_spec.contains("velocity")
                                  ? velocity_profile(initial_spec.at("velocity"), cfg.grid)
                                  : spectral::VectorField(cfg.grid);
    return solver::prepare_initial(rho, Z, u, cfg, smooth_modes);
}

RunSetup parse_run_config(const json& j) {
    check_keys(j, {"grid", "law", "approx", "initial", "monitors", "output", "seed"}, "run config");
    RunSetup setup;
    {
        const auto& g = j.at("grid");
        check_keys(g, {"dimension", "points_per_axis"}, "grid");
        setup.config.grid.dim = need_int(g, "dimension", "grid");
        setup.config.grid.n = need_int(g, "points_per_axis", "grid");
        setup.config.grid.validate();
    }
    {
        LoadedLaw loaded = parse_law(j.at("law"));
        setup.config.law = std::move(loaded.law);
        setup.system = loaded.system;
    }
    {
        const auto& a = j.at("approx");
        check_keys(a, {"galerkin_modes", "epsilon", "delta", "B", "mu", "lambda", "dt", "t_end"},
                   "approx");
        setup.config.galerkin_modes = need_int(a, "galerkin_modes", "approx");
        setup.config.epsilon = need_number(a, "epsilon", "approx");
        setup.config.pressure.delta = need_number(a, "delta", "approx");
        setup.config.pressure.B = need_number(a, "B", "approx");
        setup.config.mu = need_number(a, "mu", "approx");
        setup.config.lambda = need_number(a, "lambda", "approx");
        setup.config.dt = need_number(a, "dt", "approx");
        setup.config.t_end = need_number(a, "t_end", "approx");
    }
    if (j.contains("monitors")) {
        const auto& m = j.at("monitors");
        check_keys(m,
                   {"cadence", "checkpoint_cadence", "band_defect_threshold", "positivity_clamp",
                    "cfl_warn"},
                   "monitors");
        if (m.contains("cadence")) setup.config.monitor_cadence = need_int(m, "cadence", "monitors");
        if (m.contains("checkpoint_cadence"))
            setup.config.checkpoint_cadence = need_int(m, "checkpoint_cadence", "monitors");
        if (m.contains("band_defect_threshold"))
            setup.config.band_defect_threshold = need_number(m, "band_defect_threshold", "monitors");
        if (m.contains("positivity_clamp"))
            setup.config.positivity_clamp = m.at("positivity_clamp").get<bool>();
        if (m.contains("cfl_warn")) setup.config.cfl_warn_threshold = need_number(m, "cfl_warn", "monitors");
    }
    if (j.contains("output")) {
        check_keys(j.at("output"), {"directory"}, "output");
        if (j.at("output").contains("directory"))
            setup.config.output_dir = j.at("output").at("directory").get<std::string>();
    }
    if (j.contains("seed")) setup.seed = j.at("seed").get<unsigned long long>();
    setup.initial_spec = j.at("initial");
    if (setup.initial_spec.contains("smooth_modes"))
        setup.smooth_modes = setup.initial_spec.at("smooth_modes").get<int>();
    setup.config.validate();
    return setup;
}

AuditSetup parse_audit_config(const json& j) {
    check_keys(j, {"law", "sampling"}, "audit config");
    AuditSetup setup;
    setup.loaded = parse_law(j.at("law"));
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        if (setup.loaded.system) {
            check_keys(s, {"s_min", "s_max", "points_per_decade", "grid_points", "seed"},
                       "sampling");
            if (s.contains("s_min")) setup.bi_sampling.s_min = need_number(s, "s_min", "sampling");
            if (s.contains("s_max")) setup.bi_sampling.s_max = need_number(s, "s_max", "sampling");
            if (s.contains("points_per_decade"))
                setup.bi_sampling.points_per_decade = need_int(s, "points_per_decade", "sampling");
            if (s.contains("grid_points"))
                setup.bi_sampling.grid_points = need_int(s, "grid_points", "sampling");
            if (s.contains("seed")) setup.bi_sampling.seed = s.at("seed").get<unsigned long long>();
        } else {
            check_keys(s, {"rho_min", "rho_max", "rho_points", "s_points", "seed",
                           "weak_lower_bound"},
                       "sampling");
            if (s.contains("rho_min")) setup.sampling.rho_min = need_number(s, "rho_min", "sampling");
            if (s.contains("rho_max")) setup.sampling.rho_max = need_number(s, "rho_max", "sampling");
            if (s.contains("rho_points")) setup.sampling.rho_points = need_int(s, "rho_points", "sampling");
            if (s.contains("s_points")) setup.sampling.s_points = need_int(s, "s_points", "sampling");
            if (s.contains("seed")) setup.sampling.seed = s.at("seed").get<unsigned long long>();
            if (s.contains("weak_lower_bound"))
                setup.sampling.weak_lower_bound = s.at("weak_lower_bound").get<bool>();
        }
    }
    return setup;
}

TableSetup parse_table_config(const json& j) {
    check_keys(j, {"law", "table"}, "bifluid-table config");
    TableSetup setup;
    setup.loaded = parse_law(j.at("law"));
    if (!setup.loaded.system)
        throw ConfigError("bifluid-table: law catalog must be 'bifluid'");
    if (j.contains("table")) {
        const auto& t = j.at("table");
        check_keys(t, {"rho_min", "rho_max", "rho_points", "Z_min", "Z_max", "Z_points"}, "table");
        if (t.contains("rho_min")) setup.table.rho_min = need_number(t, "rho_min", "table");
        if (t.contains("rho_max")) setup.table.rho_max = need_number(t, "rho_max", "table");
        if (t.contains("rho_points")) setup.table.rho_points = need_int(t, "rho_points", "table");
        if (t.contains("Z_min")) setup.table.Z_min = need_number(t, "Z_min", "table");
        if (t.contains("Z_max")) setup.table.Z_max = need_number(t, "Z_max", "table");
        if (t.contains("Z_points")) setup.table.Z_points = need_int(t, "Z_points", "table");
    }
    return setup;
}

StudySetup parse_study_config(const json& j) {
    check_keys(j, {"study", "run"}, "study config");
    if (!j.contains("study") || !j.contains("run"))
        throw ConfigError("study config: need 'study' and 'run' sections");
    StudySetup setup;
    RunSetup run = parse_run_config(j.at("run"));
    setup.system = run.system;
    setup.study.base = run.config;
    const json initial_spec = run.initial_spec;
    const int smooth = run.smooth_modes;
    setup.study.make_initial = [initial_spec, smooth](const solver::ApproxConfig& cfg) {
        return build_initial(cfg, initial_spec, smooth);
    };

    const auto& s = j.at("study");
    check_keys(s, {"axis", "values", "theta", "flux_k", "reuse_dir"}, "study");
    const std::string axis = s.at("axis").get<std::string>();
    if (axis == "epsilon") setup.study.axis = study::Axis::Epsilon;
    else if (axis == "delta") setup.study.axis = study::Axis::Delta;
    else if (axis == "dt") setup.study.axis = study::Axis::Dt;
    else if (axis == "n") setup.study.axis = study::Axis::GridN;
    else throw ConfigError("study: unknown axis '" + axis + "'");
    setup.study.values = s.at("values").get<std::vector<double>>();
    if (s.contains("theta")) setup.study.theta = need_number(s, "theta", "study");
    if (s.contains("flux_k")) setup.study.flux_k = need_number(s, "flux_k", "study");
    if (s.contains("reuse_dir") && !s.at("reuse_dir").is_null())
        setup.study.reuse_dir = s.at("reuse_dir").get<std::string>();
    setup.study.output_dir = run.config.output_dir;
    return setup;
}

}  // namespace bifluidlab::config
