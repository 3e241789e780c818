#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bifluid_lab/diagnostics.hpp"
#include "bifluid_lab/study.hpp"

using namespace bifluidlab;
using namespace bifluidlab::solver;
using spectral::Field;
using spectral::TorusGrid;
using spectral::VectorField;

namespace {

ApproxConfig diag_config(double epsilon = 1e-4, double dt = 1e-3) {
    ApproxConfig c;
    c.grid = TorusGrid{2, 16};
    c.law = constitutive::make_e1_law(2.0, {2.0}, {}, {{0.0}, {1.0}});
    c.pressure = {1e-3, 6.0, 0.0};
    c.galerkin_modes = 13;
    c.epsilon = epsilon;
    c.mu = 0.1;
    c.lambda = 0.0;
    c.dt = dt;
    c.t_end = 0.02;
    c.checkpoint_cadence = 1;
    return c;
}

MixtureState smooth_state(const ApproxConfig& cfg, double ratio = 0.5, double uamp = 0.1) {
    Field rho(cfg.grid);
    const double h = TorusGrid::axis_length / cfg.grid.n;
    for (int i = 0; i < cfg.grid.n; ++i)
        for (int j = 0; j < cfg.grid.n; ++j)
            rho.data[size_t(i) * cfg.grid.n + j] =
                1.0 + 0.1 * std::cos(i * h) * std::cos(j * h);
    Field z = rho;
    for (double& v : z.data) v *= ratio;
    VectorField u(cfg.grid);
    for (int i = 0; i < cfg.grid.n; ++i)
        for (int j = 0; j < cfg.grid.n; ++j)
            u.comp[0].data[size_t(i) * cfg.grid.n + j] = uamp * std::sin(j * h);
    return prepare_initial(rho, {z}, u, cfg);
}

Trajectory run_traj(const ApproxConfig& cfg, const MixtureState& st) {
    auto res = run(cfg, st);
    REQUIRE(res.status == RunStatus::Completed);
    return std::move(res.trajectory);
}

}  // namespace

TEST_CASE("constant renormalizing maps reduce to discretization noise") {
    auto cfg = diag_config();
    auto traj = run_traj(cfg, smooth_state(cfg));
    auto norms = diag::renorm_residual(traj, diag::constant_map(2.5));
    for (double v : norms) CHECK(v <= 1e-10);
}

TEST_CASE("a generous truncation level reproduces the identity residual") {
    auto cfg = diag_config();
    auto traj = run_traj(cfg, smooth_state(cfg));
    auto rid = diag::renorm_residual(traj, diag::identity_map());
    auto rtk = diag::renorm_residual(traj, diag::truncation_map(50.0));  // T_k = id below 50
    REQUIRE(rid.size() == rtk.size());
    for (size_t i = 0; i < rid.size(); ++i)
        CHECK(rid[i] == doctest::Approx(rtk[i]).epsilon(1e-10));
}

TEST_CASE("identity residual minus the diffusion term is the scheme truncation error") {
    // fitted dt-slope of || R_ren - eps lap rho ||_1 at matched horizon
    auto run_residual = [&](double dt) {
        auto cfg = diag_config(1e-4, dt);
        cfg.t_end = 0.016;
        auto traj = run_traj(cfg, smooth_state(cfg));
        auto norms = diag::renorm_residual(traj, diag::identity_map());
        // subtract the eps-diffusion contribution snapshot by snapshot
        double worst = 0.0;
        for (size_t j = 1; j + 1 < traj.snaps.size(); ++j) {
            Field lap = spectral::laplacian(traj.snaps[j].rho);
            const size_t jm = j - 1, jp = j + 1;
            Field b = traj.snaps[j].rho;
            VectorField flux(traj.grid);
            for (int a = 0; a < traj.grid.dim; ++a)
                flux.comp[a] = spectral::dealiased_product(b, traj.snaps[j].u.comp[a]);
            Field divflux = spectral::divergence(flux);
            double l1 = 0.0;
            for (size_t x = 0; x < b.data.size(); ++x) {
                const double ddt = (traj.snaps[jp].rho.data[x] - traj.snaps[jm].rho.data[x]) /
                                   (traj.snaps[jp].time - traj.snaps[jm].time);
                l1 += std::abs(ddt + divflux.data[x] - cfg.epsilon * lap.data[x]);
            }
            worst = std::max(worst, l1 * traj.grid.cell_volume());
        }
        (void)norms;
        return worst;
    };
    const double coarse = run_residual(2e-3);
    const double fine = run_residual(1e-3);
    CHECK(fine <= 0.6 * coarse);  // slope >= 1 would give 0.5
}

TEST_CASE("s-transport defect vanishes against itself and proportional twins") {
    auto cfg = diag_config();
    auto traj = run_traj(cfg, smooth_state(cfg, 0.5));
    auto self_defect = diag::s_transport_defect(traj, traj, 1);
    for (double v : self_defect) CHECK(v == 0.0);

    // twin runs with the same ratio: s is identically the constant in both
    auto traj2 = run_traj(cfg, smooth_state(cfg, 0.5));
    auto twin = diag::s_transport_defect(traj, traj2, 2);
    for (double v : twin) CHECK(v <= 1e-10);

    CHECK_THROWS_AS(diag::s_transport_defect(traj, traj, 3), DomainError);
}

TEST_CASE("pressure integrability on a homogeneous run has a closed form") {
    auto cfg = diag_config();
    cfg.t_end = 0.01;
    MixtureState st = prepare_initial(Field(cfg.grid, 1.5), {Field(cfg.grid, 0.75)},
                                      VectorField(cfg.grid), cfg);
    auto traj = run_traj(cfg, st);
    const double theta = 0.25;
    auto ints = diag::pressure_integrability(traj, cfg, theta);
    const double vol = cfg.grid.volume();
    const double span = traj.snaps.back().time - traj.snaps.front().time;
    CHECK(ints.rho_power ==
          doctest::Approx(span * vol * std::pow(1.5, cfg.law.gamma + theta)).epsilon(1e-12));
    CHECK(ints.Z_powers[0] ==
          doctest::Approx(span * vol * std::pow(0.75, cfg.law.beta[0] + theta)).epsilon(1e-12));
    CHECK(ints.delta_rho_high ==
          doctest::Approx(cfg.pressure.delta * span * vol *
                          std::pow(1.5, cfg.pressure.B + theta))
              .epsilon(1e-12));

    // Theta beyond the Bogovskii gain is rejected, citing the bound
    CHECK_THROWS_WITH_AS(diag::pressure_integrability(traj, cfg, cfg.law.gamma),
                         doctest::Contains("gamma_BOG"), DomainError);
}

TEST_CASE("effective viscous flux correlation") {
    auto cfg = diag_config();
    // homogeneous state: both factors constant, covariance zero
    MixtureState st = prepare_initial(Field(cfg.grid, 1.0), {Field(cfg.grid, 0.5)},
                                      VectorField(cfg.grid), cfg);
    Snapshot snap{0.0, st.rho, st.Z, velocity(st, cfg)};
    CHECK(diag::effective_viscous_flux(snap, cfg, 2.0) == doctest::Approx(0.0).epsilon(1e-14));

    // adding a spatial constant to the pressure cannot move the covariance:
    // emulate by shifting rho so T_k(rho) changes only through one mode while
    // F gains a constant; compare against the direct covariance computation
    auto traj = run_traj(cfg, smooth_state(cfg, 0.5, 0.2));
    const auto& s2 = traj.snaps.back();
    const double cov = diag::effective_viscous_flux(s2, cfg, 2.0);
    CHECK(std::isfinite(cov));

    // orthogonal single modes: F from a pure divergence mode, T_k from a
    // density varying along the other axis
    MixtureState ortho = st;
    const double h = TorusGrid::axis_length / cfg.grid.n;
    for (int i = 0; i < cfg.grid.n; ++i)
        for (int j = 0; j < cfg.grid.n; ++j)
            ortho.rho.data[size_t(i) * cfg.grid.n + j] = 1.0 + 0.2 * std::cos(i * h);
    for (size_t x = 0; x < ortho.Z[0].data.size(); ++x)
        ortho.Z[0].data[x] = 0.5 * ortho.rho.data[x];
    VectorField uy(cfg.grid);
    for (int i = 0; i < cfg.grid.n; ++i)
        for (int j = 0; j < cfg.grid.n; ++j)
            uy.comp[1].data[size_t(i) * cfg.grid.n + j] = 0.3 * std::sin(j * h);
    Snapshot osnap{0.0, ortho.rho, ortho.Z, uy};
    // div u varies in y only; with the pressure part of F frozen along y the
    // correlation with T_k(rho(x)) vanishes... but Pi_delta(rho) varies in x
    // and is constant in y, so Cov(F, T) = Cov(Pi(x), T(x)) which is NOT zero;
    // instead check the divergence part alone drops out:
    auto cfg_noP = cfg;
    Snapshot psnap = osnap;
    const double cov_full = diag::effective_viscous_flux(osnap, cfg_noP, 2.0);
    // removing the velocity must not change the correlation (div u orthogonal)
    Snapshot still = osnap;
    still.u = VectorField(cfg.grid);
    const double cov_still = diag::effective_viscous_flux(still, cfg_noP, 2.0);
    CHECK(cov_full == doctest::Approx(cov_still).epsilon(1e-10));
}

TEST_CASE("oscillation defect") {
    auto cfg = diag_config();
    auto traj = run_traj(cfg, smooth_state(cfg));
    CHECK(diag::oscillation_defect(traj, traj, 2.0, cfg.law.gamma) == 0.0);

    // constant shift below the truncation level: |c|^{gamma+1} * t * vol
    Trajectory shifted = traj;
    const double c = 0.05;
    for (auto& s : shifted.snaps)
        for (double& v : s.rho.data) v += c;
    const double got = diag::oscillation_defect(traj, shifted, 50.0, cfg.law.gamma);
    const double span = traj.snaps.back().time - traj.snaps.front().time;
    const double want = std::pow(c, cfg.law.gamma + 1.0) * span * cfg.grid.volume();
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("trajectories round trip through checkpoint directories") {
    namespace fs = std::filesystem;
    auto cfg = diag_config();
    cfg.t_end = 0.005;
    cfg.checkpoint_cadence = 2;
    const auto dir = fs::temp_directory_path() / "bfl_traj_rt";
    fs::remove_all(dir);
    cfg.output_dir = dir.string();
    auto res = run(cfg, smooth_state(cfg));
    REQUIRE(res.status == RunStatus::Completed);
    auto loaded = diag::load_trajectory(dir.string());
    REQUIRE(loaded.snaps.size() == res.trajectory.snaps.size());
    for (size_t j = 0; j < loaded.snaps.size(); ++j) {
        CHECK(loaded.snaps[j].time == res.trajectory.snaps[j].time);
        for (size_t x = 0; x < loaded.snaps[j].rho.data.size(); ++x)
            CHECK(loaded.snaps[j].rho.data[x] == res.trajectory.snaps[j].rho.data[x]);
    }
    CHECK_THROWS_AS(diag::load_trajectory((dir / "missing").string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("delta ladder study emits bounded and decreasing columns") {
    study::StudyConfig sc;
    sc.axis = study::Axis::Delta;
    sc.values = {1e-2, 1e-3, 1e-4};
    sc.base = diag_config();
    sc.base.t_end = 0.01;
    sc.theta = 0.25;
    sc.make_initial = [](const ApproxConfig& c) {
        Field rho(c.grid);
        const double h = TorusGrid::axis_length / c.grid.n;
        for (int i = 0; i < c.grid.n; ++i)
            for (int j = 0; j < c.grid.n; ++j)
                rho.data[size_t(i) * c.grid.n + j] =
                    1.0 + 0.1 * std::cos(i * h) * std::cos(j * h);
        Field z = rho;
        for (double& v : z.data) v *= 0.5;
        VectorField u(c.grid);
        for (int i = 0; i < c.grid.n; ++i)
            for (int j = 0; j < c.grid.n; ++j)
                u.comp[0].data[size_t(i) * c.grid.n + j] = 0.1 * std::sin(j * h);
        return prepare_initial(rho, {z}, u, c);
    };
    auto result = study::run_study(sc);
    REQUIRE(result.rows.size() == 3);
    double prev_high = std::numeric_limits<double>::infinity();
    for (const auto& row : result.rows) {
        CHECK(std::isfinite(row.scalars.at("int_rho_gamma_theta")));
        const double high = row.scalars.at("delta_int_rho_B_theta");
        CHECK(high < prev_high);
        prev_high = high;
        CHECK(std::isfinite(row.scalars.at("evf_corr_abs_mean")));
    }
    CHECK(result.slopes.count("slope_delta_int_rho_B_theta") == 1);
    CHECK(result.slopes.at("slope_delta_int_rho_B_theta") > 0.5);

    // single-value ladders skip the slope fit
    study::StudyConfig single = sc;
    single.values = {1e-3};
    auto one = study::run_study(single);
    CHECK(one.slopes.empty());

    // monotonicity guard
    study::StudyConfig badcfg = sc;
    badcfg.values = {1e-2, 1e-2};
    CHECK_THROWS_AS(study::run_study(badcfg), ConfigError);

    // reuse mode with a missing directory is a config error
    study::StudyConfig reuse = sc;
    reuse.reuse_dir = "/nonexistent/bfl_reuse";
    CHECK_THROWS_AS(study::run_study(reuse), ConfigError);
}

TEST_CASE("two-density renormalization reduces to the single-density form for b = rho") {
    auto cfg = diag_config();
    auto traj = run_traj(cfg, smooth_state(cfg));
    auto one = diag::renorm_residual(traj, diag::identity_map());
    diag::RenormMap2 rho_only{"rho",
                              [](double r, double) { return r; },
                              [](double, double) { return 1.0; },
                              [](double, double) { return 0.0; }};
    auto two = diag::renorm_residual2(traj, rho_only);
    REQUIRE(one.size() == two.size());
    for (size_t i = 0; i < one.size(); ++i)
        CHECK(one[i] == doctest::Approx(two[i]).epsilon(1e-12));
}

TEST_CASE("flux correlation ignores uniform pressure offsets") {
    auto cfg = diag_config();
    auto traj = run_traj(cfg, smooth_state(cfg, 0.5, 0.2));
    const auto& snap = traj.snaps.back();
    const double base = diag::effective_viscous_flux(snap, cfg, 2.0);
    auto shifted = cfg;
    auto value = cfg.law.value;
    shifted.law.value = [value](double r, std::span<const double> Z) {
        return value(r, Z) + 17.0;
    };
    const double moved = diag::effective_viscous_flux(snap, shifted, 2.0);
    CHECK(base == doctest::Approx(moved).epsilon(1e-9));
}

TEST_CASE("dt-axis ladders run and fit slopes for the residual column") {
    study::StudyConfig sc;
    sc.axis = study::Axis::Dt;
    sc.values = {4e-3, 2e-3, 1e-3};
    sc.base = diag_config(1e-6, 1e-3);
    sc.base.t_end = 0.02;
    sc.theta = 0.25;
    sc.make_initial = [](const ApproxConfig& c) {
        Field rho(c.grid);
        const double h = TorusGrid::axis_length / c.grid.n;
        for (int i = 0; i < c.grid.n; ++i)
            for (int j = 0; j < c.grid.n; ++j)
                rho.data[size_t(i) * c.grid.n + j] =
                    1.0 + 0.1 * std::cos(i * h) * std::cos(j * h);
        Field z = rho;
        for (double& v : z.data) v *= 0.5;
        VectorField u(c.grid);
        for (int i = 0; i < c.grid.n; ++i)
            for (int j = 0; j < c.grid.n; ++j)
                u.comp[0].data[size_t(i) * c.grid.n + j] = 0.2 * std::sin(j * h);
        return prepare_initial(rho, {z}, u, c);
    };
    auto result = study::run_study(sc);
    REQUIRE(result.rows.size() == 3);
    // the ledger residual column exists on every rung and fits a slope ~1
    CHECK(result.slopes.count("slope_terminal_residual_abs") == 1);
    CHECK(result.slopes.at("slope_terminal_residual_abs") >= 0.9);
    // cross-rung defect columns are unavailable on a dt ladder (cadence
    // mismatch) and must come back empty rather than wrong
    for (const auto& row : result.rows)
        if (row.scalars.count("osc_defect_vs_finest"))
            CHECK(!std::isfinite(row.scalars.at("osc_defect_vs_finest")));
}
