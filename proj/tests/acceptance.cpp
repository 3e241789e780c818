// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Each criterion pins its tolerances in code.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bifluid_lab/audit.hpp"
#include "bifluid_lab/bifluid.hpp"
#include "bifluid_lab/constitutive.hpp"
#include "bifluid_lab/diagnostics.hpp"
#include "bifluid_lab/solver.hpp"
#include "bifluid_lab/study.hpp"

using namespace bifluidlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

double now_seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, i / double(n - 1));
    return g;
}

constitutive::AdmissibleRegion band01() { return {{0.0}, {1.0}}; }

// ---------------------------------------------------------------- 1 ----
Outcome criterion1_helmholtz() {
    Outcome out;
    for (double gamma : {1.8, 2.0, 3.0}) {
        auto law = constitutive::make_pure_power_law(gamma, 1.0, band01());
        for (double rho : log_grid(1e-3, 1e3, 121)) {
            const double got = constitutive::helmholtz(law, rho, 0.0);
            const double want = (std::pow(rho, gamma) - rho) / (gamma - 1.0);
            out.require(std::abs(got - want) <= 1e-10 * std::abs(want),
                        "quadrature/closed-form mismatch at gamma=" + std::to_string(gamma) +
                            ", rho=" + std::to_string(rho));
        }
    }
    // first-order PDE residual on a 30x30 sample of the admissible cone
    auto law = constitutive::make_e1_law(2.0, {2.0}, {{0.5, 0.5, {1.0}}}, band01());
    constitutive::QuadTol tight{1e-15, 1e-13};
    auto H = [&](double r, double z) { return constitutive::helmholtz(law, r, z, tight); };
    for (double rho : log_grid(5e-2, 2e1, 30))
        for (int j = 1; j <= 30; ++j) {
            const double z = (j / 30.0) * rho;
            const double hr = 1e-3 * rho;
            const double hz = 1e-3 * z;
            const double dr = audit::deriv4([&](double x) { return H(x, z); }, rho, hr);
            const double dz = audit::deriv4([&](double x) { return H(rho, x); }, z, hz);
            const double P = constitutive::eval_pressure(law, rho, z);
            const double res = rho * dr + z * dz - H(rho, z) - P;
            out.require(std::abs(res) <= 1e-8 * (1.0 + std::abs(P)),
                        "PDE residual " + std::to_string(res) + " at rho=" +
                            std::to_string(rho) + ", Z=" + std::to_string(z));
        }
    return out;
}

// ---------------------------------------------------------------- 2 ----
Outcome criterion2_bifluid() {
    Outcome out;
    bifluid::BiFluidSystem sys(bifluid::make_phase_power_law(1.8),
                               bifluid::make_phase_power_law(1.2), band01(), 1e-12);
    auto rhos = log_grid(1e-3, 1e3, 50);
    for (double rho : rhos)
        for (int j = 0; j < 50; ++j) {
            const double Z = (j / 49.0) * rho;
            const double x = bifluid::solve_rho_plus(sys, rho, Z);
            const double res = std::abs((x - rho) * sys.q(x) - Z * x);
            out.require(res <= 1e-12 * (x * sys.q(x) + 1.0),
                        "implicit residual too large at rho=" + std::to_string(rho));
            auto rec = bifluid::recover_phases(sys, rho, Z);
            out.require(std::abs(rec.a_frac * rec.rho_plus - rho) <= 1e-10 * (1.0 + rho),
                        "round trip rho mismatch");
            out.require(std::abs((1.0 - rec.a_frac) * rec.rho_minus - Z) <= 1e-10 * (1.0 + Z),
                        "round trip Z mismatch");
        }
    // boundary identities
    for (double rho : rhos)
        out.require(std::abs(bifluid::solve_rho_plus(sys, rho, 0.0) - rho) <=
                        1e-12 * (1.0 + rho),
                    "rho_plus(rho, 0) != rho");
    for (double Z : log_grid(1e-3, 1e3, 50))
        out.require(std::abs(bifluid::solve_rho_plus(sys, 0.0, Z) - sys.q_inverse(Z)) <=
                        1e-12 * (1.0 + sys.q_inverse(Z)),
                    "rho_plus(0, Z) != q^{-1}(Z)");
    // analytic implicit-function partials against central differences
    for (double rho : log_grid(1e-2, 1e2, 10))
        for (int j = 1; j < 10; ++j) {
            const double Z = (j / 10.0) * rho;
            const double h = 1e-4 * rho;
            const double hz = 1e-4 * Z;
            const double fd_r = (bifluid::solve_rho_plus(sys, rho + h, Z) -
                                 bifluid::solve_rho_plus(sys, rho - h, Z)) /
                                (2.0 * h);
            const double fd_z = (bifluid::solve_rho_plus(sys, rho, Z + hz) -
                                 bifluid::solve_rho_plus(sys, rho, Z - hz)) /
                                (2.0 * hz);
            const double an_r = bifluid::d_rho_rho_plus(sys, rho, Z);
            const double an_z = bifluid::d_Z_rho_plus(sys, rho, Z);
            out.require(std::abs(fd_r - an_r) <= 1e-6 * (1.0 + std::abs(an_r)),
                        "d_rho rho_plus mismatch");
            out.require(std::abs(fd_z - an_z) <= 1e-6 * (1.0 + std::abs(an_z)),
                        "d_Z rho_plus mismatch");
        }
    return out;
}

// ---------------------------------------------------------------- 3 ----
Outcome criterion3_audits() {
    Outcome out;
    audit::SamplingSpec spec;  // default grid: near-zero band through 1e3
    {
        auto law = constitutive::make_e1_law(2.0, {2.0}, {{1.0, 0.5, {1.0}}}, band01());
        auto rep = audit::audit_hypotheses(law, spec);
        out.require(rep.all_pass(), "first example law failed a hypothesis check");
    }
    {
        auto law = constitutive::make_e2_law(2.0, 1, {}, band01());
        auto rep = audit::audit_hypotheses(law, spec);
        out.require(rep.all_pass(), "summed-density example law failed a hypothesis check");
    }
    {
        // isentropic bi-fluid pair at the borderline exponent:
        // gamma+ = 9/5, gamma- = 6/5 > gamma+/sqrt(gamma+ + 1)
        bifluid::BiFluidSystem sys(bifluid::make_phase_power_law(1.8),
                                   bifluid::make_phase_power_law(1.2), band01(), 1e-12);
        bifluid::BiExponents e{Rational(9, 5), Rational(6, 5), false};
        auto rep = bifluid::audit_bifluid(sys, e, {});
        out.require(rep.all_pass(), "isentropic bi-fluid example failed its audit");
    }
    {
        // constructed violation of the exponent inequality
        bifluid::BiFluidSystem sys(bifluid::make_phase_power_law(2.0),
                                   bifluid::make_phase_power_law(10.0), band01(), 1e-12);
        bifluid::BiExponents e{Rational(2), Rational(10), false};
        auto rep = bifluid::audit_bifluid(sys, e, {});
        bool failed_with_witness = false;
        for (const auto& c : rep.checks)
            if (c.id == "Hbi.exponent_arithmetic" && c.verdict == audit::Verdict::Fail &&
                c.witness.has_value())
                failed_with_witness = true;
        out.require(failed_with_witness,
                    "violated exponent inequality was not flagged with a witness");
    }
    return out;
}

// solver helpers shared by criteria 4-6 and 8
solver::ApproxConfig smooth_config(int n, int modes, double epsilon, double delta, double dt,
                                   double t_end) {
    solver::ApproxConfig c;
    c.grid = spectral::TorusGrid{2, n};
    c.law = constitutive::make_e1_law(2.0, {2.0}, {}, band01());
    c.pressure = {delta, 6.0, 0.0};
    c.galerkin_modes = modes;
    c.epsilon = epsilon;
    c.mu = 0.1;
    c.lambda = 0.0;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

solver::MixtureState smooth_initial(const solver::ApproxConfig& c, double ratio, double uamp,
                                    bool taylor_green) {
    spectral::Field rho(c.grid);
    const double h = spectral::TorusGrid::axis_length / c.grid.n;
    for (int i = 0; i < c.grid.n; ++i)
        for (int j = 0; j < c.grid.n; ++j)
            rho.data[size_t(i) * c.grid.n + j] = 1.0 + 0.1 * std::cos(i * h) * std::cos(j * h);
    spectral::Field z = rho;
    for (double& v : z.data) v *= ratio;
    spectral::VectorField u(c.grid);
    for (int i = 0; i < c.grid.n; ++i)
        for (int j = 0; j < c.grid.n; ++j) {
            const double x = i * h, y = j * h;
            if (taylor_green) {
                u.comp[0].data[size_t(i) * c.grid.n + j] = uamp * std::sin(x) * std::cos(y);
                u.comp[1].data[size_t(i) * c.grid.n + j] = -uamp * std::cos(x) * std::sin(y);
            } else {
                u.comp[0].data[size_t(i) * c.grid.n + j] = uamp * std::sin(y);
            }
        }
    return solver::prepare_initial(rho, {z}, u, c);
}

// ---------------------------------------------------------------- 4 ----
Outcome criterion4_conservation() {
    Outcome out;
    auto cfg = smooth_config(64, 21, 1e-4, 1e-3, 1e-3, 0.5);  // 500 steps
    auto res = solver::run(cfg, smooth_initial(cfg, 0.5, 0.1, false));
    out.require(res.status == solver::RunStatus::Completed, "run blew up");
    if (!out.pass) return out;
    const double m0 = res.ledger.front().masses[0];
    const double z0 = res.ledger.front().masses[1];
    for (const auto& row : res.ledger) {
        out.require(std::abs(row.masses[0] - m0) <= 1e-12 * std::abs(m0),
                    "rho mass drifted at step " + std::to_string(row.step));
        out.require(std::abs(row.masses[1] - z0) <= 1e-12 * std::abs(z0),
                    "Z mass drifted at step " + std::to_string(row.step));
    }
    out.require(res.ledger.size() == 501, "expected 500 steps");
    return out;
}

// ---------------------------------------------------------------- 5 ----
Outcome criterion5_invariant_region() {
    Outcome out;
    {
        // proportional data: Z stays c*rho after 100 steps
        auto cfg = smooth_config(32, 13, 1e-4, 1e-3, 1e-3, 0.1);
        const double ratio = 0.5;
        auto res = solver::run(cfg, smooth_initial(cfg, ratio, 0.1, false));
        out.require(res.status == solver::RunStatus::Completed, "proportional run blew up");
        double worst = 0.0;
        for (size_t i = 0; i < res.final_state.rho.data.size(); ++i)
            worst = std::max(worst, std::abs(res.final_state.Z[0].data[i] -
                                             ratio * res.final_state.rho.data[i]));
        out.require(worst <= 1e-10,
                    "sup |Z - c rho| = " + std::to_string(worst) + " after 100 steps");
    }
    {
        // strictly banded data with margins: the default regression run
        auto cfg = smooth_config(32, 13, 1e-4, 1e-3, 1e-3, 0.1);
        spectral::Field rho(cfg.grid);
        spectral::Field z(cfg.grid);
        const double h = spectral::TorusGrid::axis_length / cfg.grid.n;
        for (int i = 0; i < cfg.grid.n; ++i)
            for (int j = 0; j < cfg.grid.n; ++j) {
                const size_t x = size_t(i) * cfg.grid.n + j;
                rho.data[x] = 1.0 + 0.1 * std::cos(i * h) * std::cos(j * h);
                z.data[x] = (0.4 + 0.2 * std::sin(i * h)) * rho.data[x];  // inside [0.2, 0.6]
            }
        spectral::VectorField u(cfg.grid);
        for (int i = 0; i < cfg.grid.n; ++i)
            for (int j = 0; j < cfg.grid.n; ++j)
                u.comp[0].data[size_t(i) * cfg.grid.n + j] = 0.1 * std::sin(j * h);
        auto res = solver::run(cfg, solver::prepare_initial(rho, {z}, u, cfg));
        out.require(res.status == solver::RunStatus::Completed, "banded run blew up");
        for (const auto& row : res.ledger)
            out.require(row.monitor.band_defect_sup <= 1e-8,
                        "band defect " + std::to_string(row.monitor.band_defect_sup) +
                            " at step " + std::to_string(row.step));
    }
    return out;
}

// ---------------------------------------------------------------- 6 ----
Outcome criterion6_energy_order() {
    Outcome out;
    const double h = 5e-4;
    std::vector<double> dts{4.0 * h, 2.0 * h, h};
    std::vector<double> residuals;
    for (double dt : dts) {
        auto cfg = smooth_config(32, 21, 1e-6, 1e-3, dt, 0.1);
        auto res = solver::run(cfg, smooth_initial(cfg, 0.5, 0.2, true));
        out.require(res.status == solver::RunStatus::Completed, "energy-order run blew up");
        if (!out.pass) return out;
        residuals.push_back(res.ledger.back().energy.residual);
    }
    std::vector<double> abs_res;
    for (double r : residuals) abs_res.push_back(std::abs(r));
    auto slope = audit::loglog_slope(dts, abs_res);
    out.require(slope.has_value(), "could not fit a convergence order");
    if (slope) {
        std::ostringstream os;
        os << "fitted order " << *slope << " < 1.0";
        out.require(*slope >= 1.0, os.str());
    }
    // sign: residual at the finest level must be nonpositive within 2*C*dt
    const double C = abs_res.back() / dts.back();
    out.require(residuals.back() <= 2.0 * C * dts.back(),
                "residual sign check failed at the finest level");
    std::ostringstream os;
    os << "order " << (slope ? *slope : 0.0) << ", C " << C;
    if (out.pass) out.detail = os.str();
    return out;
}

// ---------------------------------------------------------------- 7 ----
Outcome criterion7_spectral() {
    Outcome out;
    using namespace spectral;
    TorusGrid g{2, 32};
    const double hh = TorusGrid::axis_length / g.n;
    Field cx(g), sx(g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            cx.data[size_t(i) * g.n + j] = std::cos(i * hh);
            sx.data[size_t(i) * g.n + j] = std::sin(i * hh);
        }
    {
        VectorField iv = inv_div(cx);
        double worst = 0.0;
        for (size_t x = 0; x < sx.data.size(); ++x)
            worst = std::max(worst, std::abs(iv.comp[0].data[x] - sx.data[x]));
        worst = std::max(worst, linf_norm(iv.comp[1]));
        out.require(worst <= 1e-12, "inv_div single-mode identity");

        Field li = laplacian_inverse(cx);
        worst = 0.0;
        for (size_t x = 0; x < cx.data.size(); ++x)
            worst = std::max(worst, std::abs(li.data[x] + cx.data[x]));
        out.require(worst <= 1e-12, "lap_inv single-mode identity");

        VectorField gr = gradient(sx);
        worst = 0.0;
        for (size_t x = 0; x < cx.data.size(); ++x)
            worst = std::max(worst, std::abs(gr.comp[0].data[x] - cx.data[x]));
        out.require(worst <= 1e-12, "gradient single-mode identity");

        Field dv = divergence(gr);
        Field lap = laplacian(sx);
        worst = 0.0;
        for (size_t x = 0; x < dv.data.size(); ++x)
            worst = std::max(worst, std::abs(dv.data[x] - lap.data[x]));
        out.require(worst <= 1e-12, "div(grad) = laplacian");
    }
    // deterministic pseudo-random band-limited field for Parseval/projectors
    Spectrum seed(g);
    const auto& table = mode_table(g);
    unsigned long long lcg = 0x243f6a8885a308d3ull;
    for (size_t m = 0; m < 60; ++m) {
        lcg = lcg * 6364136223846793005ull + 1442695040888963407ull;
        add_mode(seed, table[m], double((lcg >> 11) & 0xffffff) / double(0x1000000) - 0.5);
    }
    Field f = inverse(seed);
    out.require(std::abs(l2_norm(f) - spectral_l2(forward(f))) <= 1e-12 * (1.0 + l2_norm(f)),
                "Parseval identity");
    Field p = project_modes(f, 15);
    Field pp = project_modes(p, 15);
    double worst = 0.0;
    for (size_t x = 0; x < p.data.size(); ++x)
        worst = std::max(worst, std::abs(pp.data[x] - p.data[x]));
    out.require(worst <= 1e-12, "projector idempotence");

    VectorField v(g);
    v.comp[0] = f;
    v.comp[1] = p;
    VectorField r1 = riesz(v);
    VectorField r2 = riesz(r1);
    worst = 0.0;
    for (int a = 0; a < 2; ++a)
        for (size_t x = 0; x < f.data.size(); ++x)
            worst = std::max(worst, std::abs(r1.comp[a].data[x] - r2.comp[a].data[x]));
    out.require(worst <= 1e-12, "riesz idempotence");
    return out;
}

// ---------------------------------------------------------------- 8 ----
Outcome criterion8_studies() {
    Outcome out;
    const fs::path work = fs::temp_directory_path() / "bfl_acceptance_study";
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string config = R"json({
      "study": {"axis": "delta", "values": [1e-2, 1e-3, 1e-4], "theta": 0.25, "flux_k": 2.0},
      "run": {
        "grid": {"dimension": 2, "points_per_axis": 16},
        "law": {"catalog": "e1", "gamma": 2.0, "beta": [2.0],
                "region": {"a_lower": [0.0], "a_upper": [1.0]}},
        "approx": {"galerkin_modes": 13, "epsilon": 1e-4, "delta": 1e-3, "B": 6.0,
                   "mu": 0.1, "lambda": 0.0, "dt": 1e-3, "t_end": 0.02},
        "initial": {"rho": {"profile": "cosine", "base": 1.0, "amplitude": 0.1, "modes": [1, 1]},
                    "Z": [{"profile": "proportional", "ratio": 0.5}],
                    "velocity": {"profile": "shear", "amplitude": 0.1, "axis": 0, "wave_axis": 1}},
        "monitors": {"checkpoint_cadence": 2},
        "output": {"directory": ""}
      }
    })json";
    {
        std::ofstream cfg(work / "study.json");
        cfg << config;
    }
    auto invoke = [&](const std::string& out_dir) {
        const std::string cmd = std::string(BIFLUID_LAB_CLI_PATH) + " study --config " +
                                (work / "study.json").string() + " --out " + out_dir +
                                " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    out.require(invoke((work / "a").string()) == 0, "study invocation 1 failed");
    out.require(invoke((work / "b").string()) == 0, "study invocation 2 failed");
    if (!out.pass) return out;

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    const std::string a = slurp(work / "a" / "study.csv");
    out.require(!a.empty(), "study.csv missing");
    out.require(a == slurp(work / "b" / "study.csv"),
                "study.csv differs between identical invocations");
    out.require(slurp(work / "a" / "rung_000" / "ledger.csv") ==
                    slurp(work / "b" / "rung_000" / "ledger.csv"),
                "per-rung ledgers differ between identical invocations");

    std::istringstream csv(a);
    std::string header;
    std::getline(csv, header);
    std::vector<std::string> cols;
    {
        std::istringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    auto col_of = [&](const std::string& name) {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int c_rho = col_of("int_rho_gamma_theta");
    const int c_high = col_of("delta_int_rho_B_theta");
    const int c_evf = col_of("evf_corr_abs_mean");
    out.require(c_rho >= 0 && c_high >= 0 && c_evf >= 0, "expected study columns missing");
    if (!out.pass) return out;
    std::vector<double> bounded, decreasing, flux;
    std::string line;
    while (std::getline(csv, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        bounded.push_back(std::stod(cells[c_rho]));
        decreasing.push_back(std::stod(cells[c_high]));
        flux.push_back(std::stod(cells[c_evf]));
    }
    out.require(bounded.size() >= 3, "fewer than 3 ladder rows");
    for (double v : bounded) out.require(std::isfinite(v) && v > 0.0, "unbounded rho integral");
    const auto [mn, mx] = std::minmax_element(bounded.begin(), bounded.end());
    out.require(*mx <= 10.0 * *mn, "rho integral not bounded along the ladder");
    for (size_t i = 0; i + 1 < decreasing.size(); ++i)
        out.require(decreasing[i + 1] < decreasing[i],
                    "delta-weighted high integral is not decreasing");
    for (double v : flux) out.require(std::isfinite(v), "flux correlation not finite");
    fs::remove_all(work);
    return out;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
    double time_limit;  // seconds; 0 = unlimited
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Helmholtz quadrature vs closed form; first-order PDE residual",
         criterion1_helmholtz, 1.0},
        {2, "bi-fluid transform: residual, boundary identities, partials, round trip",
         criterion2_bifluid, 5.0},
        {3, "hypothesis audits: catalog laws pass, exponent violation fails",
         criterion3_audits, 10.0},
        {4, "solver conserves total masses over 500 steps on a 64^2 grid",
         criterion4_conservation, 60.0},
        {5, "discrete invariant region: proportional twins and banded margins",
         criterion5_invariant_region, 0.0},
        {6, "energy ledger residual is first order in dt with a bounded sign defect",
         criterion6_energy_order, 300.0},
        {7, "spectral operator identities", criterion7_spectral, 1.0},
        {8, "delta-ladder study: bounded/decreasing columns, byte-reproducible",
         criterion8_studies, 0.0},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double elapsed = now_seconds(t0);
        if (c.time_limit > 0.0 && elapsed > c.time_limit) {
            out.pass = false;
            out.detail = "runtime " + std::to_string(elapsed) + " s exceeds " +
                         std::to_string(c.time_limit) + " s";
        }
        std::printf("%s criterion %d: %s (%.2f s)%s%s\n", out.pass ? "PASS" : "FAIL", c.id,
                    c.name, elapsed, out.detail.empty() ? "" : " -- ", out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
