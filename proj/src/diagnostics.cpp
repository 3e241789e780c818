#include "bifluid_lab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "bifluid_lab/constitutive.hpp"

namespace bifluidlab::diag {

using solver::Snapshot;
using solver::Trajectory;
using spectral::Field;
using spectral::VectorField;

namespace {

void check_cadence(const Trajectory& a, const Trajectory& b) {
    if (!(a.grid == b.grid)) throw DomainError("trajectories live on different grids");
    if (a.snaps.size() != b.snaps.size())
        throw DomainError("trajectory cadence mismatch: snapshot counts differ");
    for (size_t i = 0; i < a.snaps.size(); ++i)
        if (std::abs(a.snaps[i].time - b.snaps[i].time) >
            1e-9 * (1.0 + std::abs(a.snaps[i].time)))
            throw DomainError("trajectory cadence mismatch: snapshot times differ");
}

Field map_field(const Field& f, const std::function<double(double)>& fn) {
    Field out = f;
    for (double& v : out.data) v = fn(v);
    return out;
}

}  // namespace

RenormMap identity_map() {
    return {"identity", [](double z) { return z; }, [](double) { return 1.0; },
            std::numeric_limits<double>::infinity()};
}

RenormMap constant_map(double c) {
    return {"constant", [c](double) { return c; }, [](double) { return 0.0; },
            std::numeric_limits<double>::infinity()};
}

RenormMap truncation_map(double k) {
    constitutive::TruncationKit kit(k);
    return {"T_k",
            [kit](double z) { return kit.truncate(z); },
            [kit](double z) { return kit.truncate_derivative(z); },
            std::numeric_limits<double>::infinity()};
}

std::vector<double> renorm_residual(const Trajectory& traj, const RenormMap& map) {
    const auto& snaps = traj.snaps;
    if (snaps.size() < 2) throw DomainError("renorm_residual: need at least two snapshots");
    double observed_max = 0.0;
    for (const auto& s : snaps) observed_max = std::max(observed_max, spectral::linf_norm(s.rho));
    if (observed_max > map.domain_max)
        throw DomainError("renorm_residual: map '" + map.name +
                          "' undefined on the observed density range");

    std::vector<double> norms;
    for (size_t j = 0; j < snaps.size(); ++j) {
        const size_t jm = j == 0 ? 0 : j - 1;
        const size_t jp = j + 1 == snaps.size() ? j : j + 1;
        const double dt = snaps[jp].time - snaps[jm].time;
        Field bj = map_field(snaps[j].rho, map.b);
        Field bp = map_field(snaps[jp].rho, map.b);
        Field bm = map_field(snaps[jm].rho, map.b);

        VectorField flux(traj.grid);
        for (int a = 0; a < traj.grid.dim; ++a)
            flux.comp[a] = spectral::dealiased_product(bj, snaps[j].u.comp[a]);
        Field divflux = spectral::divergence(flux);
        Field divu = spectral::divergence(snaps[j].u);

        Field res(traj.grid);
        double l1 = 0.0;
        for (size_t x = 0; x < res.data.size(); ++x) {
            const double rho = snaps[j].rho.data[x];
            const double dil = (rho * map.db(rho) - map.b(rho)) * divu.data[x];
            const double ddt = (bp.data[x] - bm.data[x]) / dt;
            l1 += std::abs(ddt + divflux.data[x] + dil);
        }
        norms.push_back(l1 * traj.grid.cell_volume());
    }
    return norms;
}

std::vector<double> renorm_residual2(const Trajectory& traj, const RenormMap2& map,
                                     int species) {
    const auto& snaps = traj.snaps;
    if (snaps.size() < 2) throw DomainError("renorm_residual2: need at least two snapshots");
    std::vector<double> norms;
    auto apply = [&](const Snapshot& s) {
        Field out(traj.grid);
        for (size_t x = 0; x < out.data.size(); ++x)
            out.data[x] = map.b(s.rho.data[x], s.Z[species].data[x]);
        return out;
    };
    for (size_t j = 0; j < snaps.size(); ++j) {
        const size_t jm = j == 0 ? 0 : j - 1;
        const size_t jp = j + 1 == snaps.size() ? j : j + 1;
        const double dt = snaps[jp].time - snaps[jm].time;
        Field bj = apply(snaps[j]);
        Field bp = apply(snaps[jp]);
        Field bm = apply(snaps[jm]);
        VectorField flux(traj.grid);
        for (int a = 0; a < traj.grid.dim; ++a)
            flux.comp[a] = spectral::dealiased_product(bj, snaps[j].u.comp[a]);
        Field divflux = spectral::divergence(flux);
        Field divu = spectral::divergence(snaps[j].u);
        double l1 = 0.0;
        for (size_t x = 0; x < bj.data.size(); ++x) {
            const double rho = snaps[j].rho.data[x], z = snaps[j].Z[species].data[x];
            const double dil =
                (rho * map.d_rho(rho, z) + z * map.d_Z(rho, z) - map.b(rho, z)) * divu.data[x];
            l1 += std::abs((bp.data[x] - bm.data[x]) / dt + divflux.data[x] + dil);
        }
        norms.push_back(l1 * traj.grid.cell_volume());
    }
    return norms;
}

std::vector<double> s_transport_defect(const Trajectory& traj, const Trajectory& reference,
                                       int p, int species) {
    if (p != 1 && p != 2) throw DomainError("s_transport_defect: p must be 1 or 2");
    check_cadence(traj, reference);
    std::vector<double> out;
    auto ratio = [](double z, double rho) { return rho > 0.0 ? z / rho : 0.0; };
    for (size_t j = 0; j < traj.snaps.size(); ++j) {
        const auto& a = traj.snaps[j];
        const auto& b = reference.snaps[j];
        double acc = 0.0;
        for (size_t x = 0; x < a.rho.data.size(); ++x) {
            const double sa = ratio(a.Z[species].data[x], a.rho.data[x]);
            const double sb = ratio(b.Z[species].data[x], b.rho.data[x]);
            const double d = std::abs(sa - sb);
            acc += a.rho.data[x] * (p == 1 ? d : d * d);
        }
        out.push_back(acc * traj.grid.cell_volume());
    }
    return out;
}

double time_trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
    double acc = 0.0;
    for (size_t i = 0; i + 1 < times.size(); ++i)
        acc += 0.5 * (values[i] + values[i + 1]) * (times[i + 1] - times[i]);
    return acc;
}

PressureIntegrals pressure_integrability(const Trajectory& traj,
                                         const solver::ApproxConfig& cfg, double theta) {
    const double gamma = cfg.law.gamma;
    const double gamma_bog = std::min(2.0 * gamma / 3.0 - 1.0, gamma / 2.0);
    if (!(theta > 0.0) || theta > gamma_bog + 1e-12) {
        std::ostringstream os;
        os << "pressure_integrability: Theta = " << theta
           << " outside (0, gamma_BOG], gamma_BOG = min{2*gamma/3 - 1, gamma/2} = " << gamma_bog;
        throw DomainError(os.str());
    }
    std::vector<double> times;
    std::vector<double> rho_pow, rho_high;
    std::vector<std::vector<double>> z_pow(cfg.species());
    for (const auto& s : traj.snaps) {
        times.push_back(s.time);
        double rp = 0.0, rh = 0.0;
        for (double v : s.rho.data) {
            const double r = std::max(0.0, v);
            rp += std::pow(r, gamma + theta);
            rh += std::pow(r, cfg.pressure.B + theta);
        }
        rho_pow.push_back(rp * traj.grid.cell_volume());
        rho_high.push_back(rh * traj.grid.cell_volume());
        for (int i = 0; i < cfg.species(); ++i) {
            double zp = 0.0;
            for (double v : s.Z[i].data) zp += std::pow(std::max(0.0, v), cfg.law.beta[i] + theta);
            z_pow[i].push_back(zp * traj.grid.cell_volume());
        }
    }
    PressureIntegrals out;
    out.rho_power = time_trapezoid(times, rho_pow);
    out.delta_rho_high = cfg.pressure.delta * time_trapezoid(times, rho_high);
    for (int i = 0; i < cfg.species(); ++i)
        out.Z_powers.push_back(time_trapezoid(times, z_pow[i]));
    return out;
}

double effective_viscous_flux(const Snapshot& snap, const solver::ApproxConfig& cfg,
                              double k) {
    constitutive::TruncationKit kit(k);
    Field divu = spectral::divergence(snap.u);
    std::vector<double> zbuf(cfg.species());
    double mean_f = 0.0, mean_t = 0.0, mean_ft = 0.0;
    const size_t n = snap.rho.data.size();
    for (size_t x = 0; x < n; ++x) {
        for (int i = 0; i < cfg.species(); ++i) zbuf[i] = std::max(0.0, snap.Z[i].data[x]);
        const double pi = constitutive::regularized_pressure(
            cfg.pressure, cfg.law, std::max(0.0, snap.rho.data[x]), zbuf);
        const double f = pi - (2.0 * cfg.mu + cfg.lambda) * divu.data[x];
        const double t = kit.truncate(std::max(0.0, snap.rho.data[x]));
        mean_f += f;
        mean_t += t;
        mean_ft += f * t;
    }
    mean_f /= double(n);
    mean_t /= double(n);
    mean_ft /= double(n);
    return mean_ft - mean_f * mean_t;
}

double oscillation_defect(const Trajectory& fine, const Trajectory& coarse, double k,
                          double gamma) {
    check_cadence(fine, coarse);
    constitutive::TruncationKit kit(k);
    std::vector<double> times, vals;
    for (size_t j = 0; j < fine.snaps.size(); ++j) {
        times.push_back(fine.snaps[j].time);
        double acc = 0.0;
        for (size_t x = 0; x < fine.snaps[j].rho.data.size(); ++x) {
            const double a = kit.truncate(std::max(0.0, coarse.snaps[j].rho.data[x]));
            const double b = kit.truncate(std::max(0.0, fine.snaps[j].rho.data[x]));
            acc += std::pow(std::abs(a - b), gamma + 1.0);
        }
        vals.push_back(acc * fine.grid.cell_volume());
    }
    return time_trapezoid(times, vals);
}

solver::Trajectory load_trajectory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw ConfigError("load_trajectory: missing checkpoint directory " + dir);
    std::vector<fs::path> steps;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && e.path().filename().string().rfind("step_", 0) == 0)
            steps.push_back(e.path());
    std::sort(steps.begin(), steps.end());
    if (steps.empty())
        throw ConfigError("load_trajectory: no step_* checkpoints under " + dir);

    Trajectory traj;
    for (const auto& p : steps) {
        Snapshot snap;
        std::ifstream meta(p / "snapshot.json");
        if (!meta) throw ConfigError("load_trajectory: missing " + (p / "snapshot.json").string());
        nlohmann::json j;
        meta >> j;
        snap.time = j.at("time").get<double>();
        const int species = j.at("species").get<int>();
        snap.rho = spectral::read_field((p / "rho").string());
        for (int i = 1; i <= species; ++i)
            snap.Z.push_back(spectral::read_field((p / ("Z" + std::to_string(i))).string()));
        snap.u = VectorField(snap.rho.grid);
        for (int a = 1; a <= snap.rho.grid.dim; ++a)
            snap.u.comp[a - 1] = spectral::read_field((p / ("u" + std::to_string(a))).string());
        traj.grid = snap.rho.grid;
        traj.snaps.push_back(std::move(snap));
    }
    return traj;
}

}  // namespace bifluidlab::diag
