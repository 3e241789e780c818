#include "bifluid_lab/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace bifluidlab::solver {

using spectral::Field;
using spectral::Mode;
using spectral::Spectrum;
using spectral::TorusGrid;
using spectral::VectorField;

namespace {

std::span<const Mode> retained_modes(const ApproxConfig& cfg) {
    const auto& table = spectral::mode_table(cfg.grid);
    return {table.data(), static_cast<size_t>(cfg.galerkin_modes)};
}

Field total_density(const MixtureState& s) {
    Field sigma = s.rho;
    for (const auto& z : s.Z)
        for (size_t i = 0; i < sigma.data.size(); ++i) sigma.data[i] += z.data[i];
    return sigma;
}

// wrapped spectral lookup: coefficient of sigma at an arbitrary integer
// wavevector (grid-quadrature aliasing included)
std::complex<double> coeff_at(const Spectrum& s, const int q[3]) {
    const TorusGrid& g = s.grid;
    const int n = g.n, last = g.dim - 1;
    int k[3] = {0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
        k[a] = ((q[a] % n) + n) % n;           // into [0, n)
        if (k[a] > n / 2) k[a] -= n;           // into (-n/2, n/2]
    }
    bool conj_flag = false;
    if (k[last] < 0) {
        conj_flag = true;
        for (int a = 0; a < g.dim; ++a) k[a] = k[a] == n / 2 ? k[a] : -k[a];
    }
    const std::complex<double> v = s.data[spectral::storage_index(g, k)];
    return conj_flag ? std::conj(v) : v;
}

// entry of the weighted mass matrix  <sigma phi_a, phi_b>  from the sigma
// spectrum (orthonormal real trig modes)
double mass_entry(const Spectrum& sig, const Mode& a, const Mode& b) {
    int diff[3], sum[3];
    for (int i = 0; i < 3; ++i) {
        diff[i] = a.k[i] - b.k[i];
        sum[i] = a.k[i] + b.k[i];
    }
    const auto d = coeff_at(sig, diff);
    const auto s = coeff_at(sig, sum);
    auto kind = [](const Mode& m) { return m.kind; };
    if (kind(a) == Mode::Constant && kind(b) == Mode::Constant) return d.real();
    if (kind(a) == Mode::Constant)
        return kind(b) == Mode::Cosine ? std::sqrt(2.0) * s.real()
                                       : -std::sqrt(2.0) * s.imag();
    if (kind(b) == Mode::Constant)
        return kind(a) == Mode::Cosine ? std::sqrt(2.0) * d.real()
                                       : -std::sqrt(2.0) * d.imag();
    if (kind(a) == Mode::Cosine && kind(b) == Mode::Cosine) return d.real() + s.real();
    if (kind(a) == Mode::Sine && kind(b) == Mode::Sine) return d.real() - s.real();
    if (kind(a) == Mode::Cosine)  // (cos, sin)
        return d.imag() - s.imag();
    return -d.imag() - s.imag();  // (sin, cos)
}

struct PointwiseLaw {
    const ApproxConfig& cfg;
    std::vector<double> zbuf;

    explicit PointwiseLaw(const ApproxConfig& c) : cfg(c), zbuf(c.species()) {}

    void gather(const MixtureState& st, size_t x) {
        for (int i = 0; i < cfg.species(); ++i) zbuf[i] = std::max(0.0, st.Z[i].data[x]);
    }
};

Field pressure_field(const MixtureState& st, const ApproxConfig& cfg) {
    Field p(cfg.grid);
    PointwiseLaw pl(cfg);
    for (size_t x = 0; x < p.data.size(); ++x) {
        pl.gather(st, x);
        // pressure is evaluated on the nonnegative part; undershoots are
        // monitored, not enforced
        p.data[x] = constitutive::regularized_pressure(cfg.pressure, cfg.law,
                                                       std::max(0.0, st.rho.data[x]), pl.zbuf);
    }
    return p;
}

// advance one density field: implicit eps-diffusion, explicit dealiased
// advection; the mean mode is preserved bitwise
Field advance_density(const Field& d, const VectorField& u, const ApproxConfig& cfg) {
    const TorusGrid& g = cfg.grid;
    Spectrum acc(g);
    for (int a = 0; a < g.dim; ++a) {
        Field prod = spectral::dealiased_product(d, u.comp[a]);
        Spectrum ps = spectral::forward(prod);
        int k[3];
        for (size_t i = 0; i < acc.data.size(); ++i) {
            // ik_a multiplier, Nyquist dropped
            const int n = g.n, nc = n / 2 + 1;
            if (g.dim == 1) k[0] = static_cast<int>(i);
            else if (g.dim == 2) {
                int i0 = static_cast<int>(i / nc), i1 = static_cast<int>(i % nc);
                k[0] = i0 <= n / 2 ? i0 : i0 - n;
                k[1] = i1;
                k[2] = 0;
            } else {
                int i2 = static_cast<int>(i % nc);
                int rest = static_cast<int>(i / nc);
                k[0] = rest / n <= n / 2 ? rest / n : rest / n - n;
                k[1] = rest % n <= n / 2 ? rest % n : rest % n - n;
                k[2] = i2;
            }
            bool nyq = false;
            for (int ax = 0; ax < g.dim; ++ax) nyq = nyq || std::abs(k[ax]) == g.n / 2;
            if (nyq) continue;
            acc.data[i] += std::complex<double>(0.0, k[a]) * ps.data[i];
        }
    }
    Spectrum ds = spectral::forward(d);
    Spectrum out(g);
    const int n = g.n, nc = n / 2 + 1;
    for (size_t i = 0; i < out.data.size(); ++i) {
        int k0 = 0, k1 = 0, k2 = 0;
        if (g.dim == 1) k0 = static_cast<int>(i);
        else if (g.dim == 2) {
            int i0 = static_cast<int>(i / nc), i1 = static_cast<int>(i % nc);
            k0 = i0 <= n / 2 ? i0 : i0 - n;
            k1 = i1;
        } else {
            int i2 = static_cast<int>(i % nc);
            int rest = static_cast<int>(i / nc);
            k0 = rest / n <= n / 2 ? rest / n : rest / n - n;
            k1 = rest % n <= n / 2 ? rest % n : rest % n - n;
            k2 = i2;
        }
        const double k2norm = double(k0) * k0 + double(k1) * k1 + double(k2) * k2;
        out.data[i] = (ds.data[i] - cfg.dt * acc.data[i]) / (1.0 + cfg.dt * cfg.epsilon * k2norm);
    }
    return spectral::inverse(out);
}

double max_speed(const VectorField& u) {
    double m = 0.0;
    for (size_t x = 0; x < u.comp[0].data.size(); ++x) {
        double s2 = 0.0;
        for (int a = 0; a < u.grid.dim; ++a) s2 += u.comp[a].data[x] * u.comp[a].data[x];
        m = std::max(m, s2);
    }
    return std::sqrt(m);
}

void check_finite_state(const MixtureState& st, double when) {
    auto check = [&](const Field& f, const char* name) {
        for (double v : f.data)
            if (!std::isfinite(v))
                throw BlowupError(std::string("field '") + name + "' became non-finite", when);
    };
    check(st.rho, "rho");
    for (size_t i = 0; i < st.Z.size(); ++i) check(st.Z[i], "Z");
    for (const auto& comp : st.u_coeffs)
        for (double c : comp)
            if (!std::isfinite(c)) throw BlowupError("velocity coefficients non-finite", when);
}

int clamp_density(Field& f) {
    double mass_before = 0.0, mass_after = 0.0;
    int clamped = 0;
    for (double v : f.data) mass_before += v;
    for (double& v : f.data)
        if (v < 0.0) {
            v = 0.0;
            ++clamped;
        }
    if (clamped == 0) return 0;
    for (double v : f.data) mass_after += v;
    if (mass_after > 0.0) {
        const double scale = mass_before / mass_after;
        for (double& v : f.data) v *= scale;
    }
    return clamped;
}

}  // namespace

void ApproxConfig::validate() const {
    grid.validate();
    if (law.species() < 1 || law.region.species() != law.species())
        throw ConfigError("ApproxConfig: law/region species mismatch");
    law.region.validate();
    pressure.validate(law);
    if (!(mu > 0.0)) throw ConfigError("ApproxConfig: mu must be > 0");
    if (!(2.0 * mu + 3.0 * lambda >= 0.0))
        throw ConfigError("ApproxConfig: need 2*mu + 3*lambda >= 0");
    if (!(epsilon > 0.0) || !(dt > 0.0) || !(t_end > 0.0))
        throw ConfigError("ApproxConfig: epsilon, dt, t_end must be > 0");
    const auto& table = spectral::mode_table(grid);
    if (galerkin_modes < 1 || static_cast<size_t>(galerkin_modes) > table.size())
        throw ConfigError("ApproxConfig: galerkin_modes out of range for this grid");
    if (monitor_cadence < 1) throw ConfigError("ApproxConfig: monitor_cadence must be >= 1");
    if (checkpoint_cadence < 0) throw ConfigError("ApproxConfig: checkpoint_cadence must be >= 0");
}

VectorField velocity(const MixtureState& state, const ApproxConfig& cfg) {
    auto modes = retained_modes(cfg);
    VectorField u(cfg.grid);
    for (int a = 0; a < cfg.grid.dim; ++a) {
        Spectrum s(cfg.grid);
        for (size_t m = 0; m < modes.size(); ++m)
            if (state.u_coeffs[a][m] != 0.0) spectral::add_mode(s, modes[m], state.u_coeffs[a][m]);
        u.comp[a] = spectral::inverse(s);
    }
    return u;
}

MixtureState prepare_initial(const Field& rho0, const std::vector<Field>& Z0,
                             const VectorField& u0, const ApproxConfig& cfg,
                             int smooth_modes) {
    cfg.validate();
    if (!(rho0.grid == cfg.grid) || static_cast<int>(Z0.size()) != cfg.species())
        throw ConfigError("prepare_initial: field layout does not match the configuration");

    auto band_check = [&](const Field& rho, const std::vector<Field>& Z, const char* stage) {
        for (size_t x = 0; x < rho.data.size(); ++x) {
            if (!(rho.data[x] > 0.0)) {
                std::ostringstream os;
                os << "prepare_initial (" << stage << "): rho not strictly positive at cell "
                   << x << " (value " << rho.data[x] << ")";
                throw DomainError(os.str());
            }
            for (int i = 0; i < cfg.species(); ++i) {
                const double lo = cfg.law.region.a_lower[i] * rho.data[x];
                const double hi = cfg.law.region.a_upper[i] * rho.data[x];
                const double z = Z[i].data[x];
                const double slack = 1e-12 * (1.0 + hi);
                if (z < lo - slack || z > hi + slack) {
                    std::ostringstream os;
                    os << "prepare_initial (" << stage << "): admissible band violated at cell "
                       << x << ": Z_" << i + 1 << " = " << z << " outside [" << lo << ", " << hi
                       << "]";
                    throw DomainError(os.str());
                }
            }
        }
    };
    band_check(rho0, Z0, "input");

    MixtureState st;
    st.time = 0.0;
    if (smooth_modes > 0) {
        // smooth rho and the ratios s_i = Z_i/rho, then recombine; this keeps
        // the band structure through the projection
        st.rho = spectral::project_modes(rho0, smooth_modes);
        for (int i = 0; i < cfg.species(); ++i) {
            Field ratio(cfg.grid);
            for (size_t x = 0; x < ratio.data.size(); ++x)
                ratio.data[x] = Z0[i].data[x] / rho0.data[x];
            Field ratio_s = spectral::project_modes(ratio, smooth_modes);
            Field z(cfg.grid);
            for (size_t x = 0; x < z.data.size(); ++x)
                z.data[x] = ratio_s.data[x] * st.rho.data[x];
            st.Z.push_back(std::move(z));
        }
        band_check(st.rho, st.Z, "after smoothing");
    } else {
        st.rho = rho0;
        st.Z = Z0;
    }

    auto modes = retained_modes(cfg);
    st.u_coeffs.assign(cfg.grid.dim, std::vector<double>(modes.size(), 0.0));
    for (int a = 0; a < cfg.grid.dim; ++a) {
        Spectrum s = spectral::forward(u0.comp[a]);
        for (size_t m = 0; m < modes.size(); ++m)
            st.u_coeffs[a][m] = spectral::mode_coefficient(s, modes[m]);
    }
    return st;
}

std::pair<MixtureState, StepReport> step(const MixtureState& state, const ApproxConfig& cfg) {
    const TorusGrid& g = cfg.grid;
    const int d = g.dim;
    auto modes = retained_modes(cfg);
    const int N = static_cast<int>(modes.size());

    StepReport report;
    VectorField u = velocity(state, cfg);
    report.cfl = max_speed(u) * cfg.dt / g.dx();
    report.cfl_warning = report.cfl > cfg.cfl_warn_threshold;

    MixtureState next;
    next.time = state.time + cfg.dt;

    // continuity equations
    next.rho = advance_density(state.rho, u, cfg);
    for (int i = 0; i < cfg.species(); ++i)
        next.Z.push_back(advance_density(state.Z[i], u, cfg));
    if (cfg.positivity_clamp) {
        report.clamped_cells += clamp_density(next.rho);
        for (auto& z : next.Z) report.clamped_cells += clamp_density(z);
    }

    Field sigma_old = total_density(state);
    Field sigma_new = total_density(next);

    // explicit forces at the old velocity / new densities
    Field pi = pressure_field(next, cfg);
    VectorField grad_pi = spectral::gradient(pi);
    VectorField grad_sigma = spectral::gradient(sigma_new);

    std::vector<Field> mstar;
    for (int i = 0; i < d; ++i) {
        Field m_i(g);
        for (size_t x = 0; x < m_i.data.size(); ++x)
            m_i.data[x] = sigma_old.data[x] * u.comp[i].data[x];
        // div(m_i u) with dealiased products
        VectorField flux(g);
        for (int j = 0; j < d; ++j) flux.comp[j] = spectral::dealiased_product(m_i, u.comp[j]);
        Field advect = spectral::divergence(flux);
        // eps * (grad sigma . grad) u_i
        VectorField grad_ui = spectral::gradient(u.comp[i]);
        Field eps_term(g);
        for (int j = 0; j < d; ++j) {
            Field pr = spectral::dealiased_product(grad_sigma.comp[j], grad_ui.comp[j]);
            for (size_t x = 0; x < eps_term.data.size(); ++x)
                eps_term.data[x] += cfg.epsilon * pr.data[x];
        }
        for (size_t x = 0; x < m_i.data.size(); ++x)
            m_i.data[x] -= cfg.dt * (advect.data[x] + grad_pi.comp[i].data[x] + eps_term.data[x]);
        mstar.push_back(std::move(m_i));
    }

    // projected momentum solve: <sigma_new u_new, phi> = <m*, phi>
    //                            + dt <mu Lap u_new + (mu+lambda) grad div u_new, phi>
    Spectrum sig_hat = spectral::forward(sigma_new);
    const int dim_sys = d * N;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim_sys, dim_sys);
    Eigen::VectorXd rhs(dim_sys);
    for (int a = 0; a < N; ++a)
        for (int b = a; b < N; ++b) {
            const double m_ab = mass_entry(sig_hat, modes[a], modes[b]);
            for (int i = 0; i < d; ++i) {
                A(i * N + a, i * N + b) += m_ab;
                if (b != a) A(i * N + b, i * N + a) += m_ab;
            }
        }
    for (int a = 0; a < N; ++a) {
        const auto& k = modes[a].k;
        const double k2 = modes[a].k2;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double visc = cfg.mu * k2 * (i == j ? 1.0 : 0.0) +
                                    (cfg.mu + cfg.lambda) * k[i] * k[j];
                A(i * N + a, j * N + a) += cfg.dt * visc;
            }
    }
    std::vector<Spectrum> mhat;
    for (int i = 0; i < d; ++i) mhat.push_back(spectral::forward(mstar[i]));
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < N; ++a) rhs(i * N + a) = spectral::mode_coefficient(mhat[i], modes[a]);

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw BlowupError("momentum system lost positive definiteness", next.time);
    Eigen::VectorXd c = llt.solve(rhs);

    next.u_coeffs.assign(d, std::vector<double>(N, 0.0));
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < N; ++a) next.u_coeffs[i][a] = c(i * N + a);

    check_finite_state(next, next.time);

    // independent Galerkin-orthogonality check: the momentum defect tested
    // against every retained mode
    {
        VectorField u_new = velocity(next, cfg);
        double scale = 1.0;
        for (int i = 0; i < dim_sys; ++i) scale = std::max(scale, std::abs(rhs(i)));
        double worst = 0.0;
        for (int i = 0; i < d; ++i) {
            Field w(g);
            for (size_t x = 0; x < w.data.size(); ++x)
                w.data[x] = sigma_new.data[x] * u_new.comp[i].data[x];
            Spectrum ws = spectral::forward(w);
            for (int a = 0; a < N; ++a) {
                double visc_coef = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double visc = cfg.mu * modes[a].k2 * (i == j ? 1.0 : 0.0) +
                                        (cfg.mu + cfg.lambda) * modes[a].k[i] * modes[a].k[j];
                    visc_coef += visc * next.u_coeffs[j][a];
                }
                const double defect =
                    spectral::mode_coefficient(ws, modes[a]) - rhs(i * N + a) + cfg.dt * visc_coef;
                worst = std::max(worst, std::abs(defect));
            }
        }
        report.galerkin_residual = worst / scale;
    }

    return {std::move(next), report};
}

MonitorRecord check_min_principle(const MixtureState& state,
                                  const constitutive::AdmissibleRegion& region,
                                  double threshold) {
    MonitorRecord rec;
    rec.inf_rho = std::numeric_limits<double>::infinity();
    for (double v : state.rho.data) rec.inf_rho = std::min(rec.inf_rho, v);
    double l1 = 0.0, sup = 0.0;
    for (size_t i = 0; i < state.Z.size(); ++i) {
        const double lo = region.a_lower[i], hi = region.a_upper[i];
        for (size_t x = 0; x < state.rho.data.size(); ++x) {
            const double r = state.rho.data[x], z = state.Z[i].data[x];
            const double defect = std::max(0.0, lo * r - z) + std::max(0.0, z - hi * r);
            sup = std::max(sup, defect);
            l1 += defect;
        }
    }
    rec.band_defect_sup = sup;
    rec.band_defect_l1 = l1 * state.rho.grid.cell_volume();
    rec.pass = sup <= threshold;
    return rec;
}

namespace {

double kinetic_energy(const MixtureState& st, const ApproxConfig& cfg) {
    Field sigma = total_density(st);
    VectorField u = velocity(st, cfg);
    double acc = 0.0;
    for (size_t x = 0; x < sigma.data.size(); ++x) {
        double s2 = 0.0;
        for (int a = 0; a < cfg.grid.dim; ++a) s2 += u.comp[a].data[x] * u.comp[a].data[x];
        acc += sigma.data[x] * s2;
    }
    return 0.5 * acc * cfg.grid.cell_volume();
}

double helmholtz_energy(const MixtureState& st, const ApproxConfig& cfg) {
    PointwiseLaw pl(cfg);
    double acc = 0.0;
    for (size_t x = 0; x < st.rho.data.size(); ++x) {
        pl.gather(st, x);
        acc += constitutive::regularized_helmholtz(cfg.pressure, cfg.law,
                                                   std::max(0.0, st.rho.data[x]), pl.zbuf);
    }
    return acc * cfg.grid.cell_volume();
}

double dissipation_rate(const MixtureState& st, const ApproxConfig& cfg) {
    VectorField u = velocity(st, cfg);
    double acc = 0.0;
    for (int i = 0; i < cfg.grid.dim; ++i) {
        VectorField gi = spectral::gradient(u.comp[i]);
        for (int j = 0; j < cfg.grid.dim; ++j) acc += cfg.mu * spectral::inner(gi.comp[j], gi.comp[j]);
    }
    Field dv = spectral::divergence(u);
    acc += (cfg.mu + cfg.lambda) * spectral::inner(dv, dv);
    return acc;
}

double grad_squares(const MixtureState& st, const ApproxConfig& cfg, bool high_mode) {
    double acc = 0.0;
    auto add = [&](const Field& f) {
        Field v = f;
        if (high_mode) {
            const double e = cfg.pressure.B / 2.0;
            for (double& x : v.data) x = std::pow(std::max(0.0, x), e);
        }
        VectorField gf = spectral::gradient(v);
        for (int a = 0; a < cfg.grid.dim; ++a) acc += spectral::inner(gf.comp[a], gf.comp[a]);
    };
    add(st.rho);
    for (const auto& z : st.Z) add(z);
    return acc;
}

}  // namespace

EnergyLedger initial_ledger(const MixtureState& state, const ApproxConfig& cfg) {
    EnergyLedger led;
    led.kinetic = kinetic_energy(state, cfg);
    led.helmholtz_total = helmholtz_energy(state, cfg);
    led.initial_total = led.kinetic + led.helmholtz_total;
    led.residual = 0.0;
    return led;
}

EnergyLedger energy_ledger_update(const EnergyLedger& prev, const MixtureState& old_state,
                                  const MixtureState& new_state, const ApproxConfig& cfg) {
    EnergyLedger led = prev;
    led.kinetic = kinetic_energy(new_state, cfg);
    led.helmholtz_total = helmholtz_energy(new_state, cfg);
    const double dt = new_state.time - old_state.time;
    led.dissipation_cum +=
        0.5 * dt * (dissipation_rate(old_state, cfg) + dissipation_rate(new_state, cfg));
    led.eps_gradient_cum += cfg.epsilon * 0.5 * dt *
                            (grad_squares(old_state, cfg, false) + grad_squares(new_state, cfg, false));
    led.eps_highmode_cum += cfg.epsilon * 0.5 * dt *
                            (grad_squares(old_state, cfg, true) + grad_squares(new_state, cfg, true));
    led.residual = led.kinetic + led.helmholtz_total + led.dissipation_cum - led.initial_total;
    return led;
}

namespace {

std::vector<double> masses(const MixtureState& st) {
    std::vector<double> m{spectral::integral(st.rho)};
    for (const auto& z : st.Z) m.push_back(spectral::integral(z));
    return m;
}

void write_checkpoint(const std::string& dir, long stepno, const MixtureState& st,
                      const ApproxConfig& cfg) {
    namespace fs = std::filesystem;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%06ld", stepno);
    const fs::path base = fs::path(dir) / buf;
    fs::create_directories(base);
    spectral::write_field((base / "rho").string(), st.rho);
    for (size_t i = 0; i < st.Z.size(); ++i)
        spectral::write_field((base / ("Z" + std::to_string(i + 1))).string(), st.Z[i]);
    VectorField u = velocity(st, cfg);
    for (int a = 0; a < cfg.grid.dim; ++a)
        spectral::write_field((base / ("u" + std::to_string(a + 1))).string(), u.comp[a]);
    nlohmann::ordered_json meta;
    meta["step"] = stepno;
    meta["time"] = st.time;
    meta["species"] = static_cast<int>(st.Z.size());
    std::ofstream out(base / "snapshot.json");
    out << meta.dump(2) << "\n";
}

Snapshot make_snapshot(const MixtureState& st, const ApproxConfig& cfg) {
    Snapshot s;
    s.time = st.time;
    s.rho = st.rho;
    s.Z = st.Z;
    s.u = velocity(st, cfg);
    return s;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& rows,
                      int species) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_ledger_csv: cannot open " + path);
    out << "step,time,kinetic,helmholtz,dissipation_cum,eps_grad_cum,eps_highmode_cum,residual,"
           "inf_rho,band_defect_sup,band_defect_l1,mass_rho";
    for (int i = 1; i <= species; ++i) out << ",mass_Z" << i;
    out << ",galerkin_residual,cfl\n";
    for (const auto& r : rows) {
        out << r.step << ',' << fmt(r.time) << ',' << fmt(r.energy.kinetic) << ','
            << fmt(r.energy.helmholtz_total) << ',' << fmt(r.energy.dissipation_cum) << ','
            << fmt(r.energy.eps_gradient_cum) << ',' << fmt(r.energy.eps_highmode_cum) << ','
            << fmt(r.energy.residual) << ',' << fmt(r.monitor.inf_rho) << ','
            << fmt(r.monitor.band_defect_sup) << ',' << fmt(r.monitor.band_defect_l1);
        for (double m : r.masses) out << ',' << fmt(m);
        out << ',' << fmt(r.galerkin_residual) << ',' << fmt(r.cfl) << "\n";
    }
}

RunResult run(const ApproxConfig& cfg, const MixtureState& initial) {
    cfg.validate();
    RunResult result;
    result.trajectory.grid = cfg.grid;

    const long nsteps = std::max<long>(1, std::llround(cfg.t_end / cfg.dt));
    MixtureState state = initial;
    EnergyLedger ledger = initial_ledger(state, cfg);
    MonitorRecord monitor =
        check_min_principle(state, cfg.law.region, cfg.band_defect_threshold);

    const bool emit = !cfg.output_dir.empty();
    if (emit) std::filesystem::create_directories(cfg.output_dir);

    auto push_row = [&](long stepno, double gres, double cfl) {
        LedgerRow row;
        row.step = stepno;
        row.time = state.time;
        row.energy = ledger;
        row.monitor = monitor;
        row.masses = masses(state);
        row.galerkin_residual = gres;
        row.cfl = cfl;
        result.ledger.push_back(std::move(row));
    };
    auto checkpoint = [&](long stepno) {
        if (cfg.checkpoint_cadence <= 0) return;
        if (stepno % cfg.checkpoint_cadence != 0 && stepno != nsteps) return;
        if (emit) write_checkpoint(cfg.output_dir, stepno, state, cfg);
        result.trajectory.snaps.push_back(make_snapshot(state, cfg));
    };

    push_row(0, 0.0, 0.0);
    checkpoint(0);

    for (long s = 1; s <= nsteps; ++s) {
        try {
            auto [next, report] = step(state, cfg);
            ledger = energy_ledger_update(ledger, state, next, cfg);
            state = std::move(next);
            if (s % cfg.monitor_cadence == 0 || s == nsteps)
                monitor = check_min_principle(state, cfg.law.region, cfg.band_defect_threshold);
            if (report.cfl_warning) ++result.cfl_warnings;
            result.clamped_cells_total += report.clamped_cells;
            push_row(s, report.galerkin_residual, report.cfl);
            checkpoint(s);
        } catch (const BlowupError& e) {
            result.status = RunStatus::BlownUp;
            result.blowup_time = e.time;
            result.blowup_what = e.what();
            break;
        }
    }
    result.final_state = std::move(state);
    if (emit) write_ledger_csv((std::filesystem::path(cfg.output_dir) / "ledger.csv").string(),
                               result.ledger, cfg.species());
    return result;
}

}  // namespace bifluidlab::solver
