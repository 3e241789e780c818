#include "bifluid_lab/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>

#include "bifluid_lab/audit.hpp"

namespace bifluidlab::study {

namespace {

solver::ApproxConfig rung_config(const StudyConfig& cfg, size_t i) {
    solver::ApproxConfig c = cfg.base;
    const double v = cfg.values[i];
    switch (cfg.axis) {
        case Axis::Epsilon: c.epsilon = v; break;
        case Axis::Delta: c.pressure.delta = v; break;
        case Axis::Dt: c.dt = v; break;
        case Axis::GridN: c.grid.n = static_cast<int>(std::llround(v)); break;
    }
    if (!cfg.output_dir.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "rung_%03zu", i);
        c.output_dir = (std::filesystem::path(cfg.output_dir) / buf).string();
    } else {
        c.output_dir.clear();
    }
    return c;
}

double median_density(const solver::Trajectory& traj) {
    if (traj.snaps.empty()) return 1.0;
    std::vector<double> v = traj.snaps.front().rho.data;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

struct RungData {
    solver::ApproxConfig cfg;
    solver::Trajectory traj;
    std::vector<solver::LedgerRow> ledger;
    bool blew_up = false;
};

}  // namespace

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::Epsilon: return "epsilon";
        case Axis::Delta: return "delta";
        case Axis::Dt: return "dt";
        default: return "n";
    }
}

StudyResult run_study(const StudyConfig& cfg) {
    if (cfg.values.size() < 1) throw ConfigError("study: empty ladder");
    for (size_t i = 0; i + 1 < cfg.values.size(); ++i) {
        const bool inc = cfg.values[1] > cfg.values[0];
        if ((cfg.values[i + 1] > cfg.values[i]) != inc || cfg.values[i + 1] == cfg.values[i])
            throw ConfigError("study: ladder values must be strictly monotone");
    }
    if (!cfg.reuse_dir && !cfg.make_initial)
        throw ConfigError("study: no initial-data generator supplied");

    std::vector<RungData> rungs(cfg.values.size());
    if (cfg.reuse_dir) {
        for (size_t i = 0; i < cfg.values.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "rung_%03zu", i);
            const std::string dir =
                (std::filesystem::path(*cfg.reuse_dir) / buf).string();
            rungs[i].cfg = rung_config(cfg, i);
            rungs[i].traj = diag::load_trajectory(dir);  // throws ConfigError if missing
        }
    } else {
        auto run_one = [&](size_t i) {
            RungData r;
            r.cfg = rung_config(cfg, i);
            if (r.cfg.checkpoint_cadence <= 0) r.cfg.checkpoint_cadence = 1;
            solver::MixtureState init = cfg.make_initial(r.cfg);
            solver::RunResult res = solver::run(r.cfg, init);
            r.traj = std::move(res.trajectory);
            r.ledger = std::move(res.ledger);
            r.blew_up = res.status == solver::RunStatus::BlownUp;
            return r;
        };
        const int jobs = std::max(1, cfg.jobs);
        for (size_t start = 0; start < rungs.size(); start += jobs) {
            std::vector<std::future<RungData>> batch;
            const size_t end = std::min(rungs.size(), start + jobs);
            for (size_t i = start; i < end; ++i)
                batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                           run_one, i));
            for (size_t i = start; i < end; ++i) rungs[i] = batch[i - start].get();
        }
    }

    // the finest rung stands in for the limit object
    size_t finest;
    if (cfg.axis == Axis::GridN)
        finest = cfg.values.back() > cfg.values.front() ? cfg.values.size() - 1 : 0;
    else
        finest = cfg.values.back() < cfg.values.front() ? cfg.values.size() - 1 : 0;

    StudyResult result;
    result.axis = cfg.axis;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 0; i < rungs.size(); ++i) {
        StudyRow row;
        row.value = cfg.values[i];
        auto& sc = row.scalars;
        const auto& r = rungs[i];

        if (!r.ledger.empty()) {
            sc["terminal_residual_abs"] = std::abs(r.ledger.back().energy.residual);
            double drift = 0.0;
            const double m0 = r.ledger.front().masses.at(0);
            for (const auto& lr : r.ledger)
                drift = std::max(drift, std::abs(lr.masses.at(0) - m0) / std::abs(m0));
            sc["mass_drift_rho"] = drift;
            sc["final_inf_rho"] = r.ledger.back().monitor.inf_rho;
            sc["band_defect_sup"] = r.ledger.back().monitor.band_defect_sup;
        }
        try {
            auto pi = diag::pressure_integrability(r.traj, r.cfg, cfg.theta);
            sc["int_rho_gamma_theta"] = pi.rho_power;
            sc["delta_int_rho_B_theta"] = pi.delta_rho_high;
            if (!pi.Z_powers.empty()) sc["int_Z1_beta_theta"] = pi.Z_powers[0];
        } catch (const DomainError&) {
            sc["int_rho_gamma_theta"] = nan;
        }
        {
            std::vector<double> covs;
            for (const auto& snap : r.traj.snaps)
                covs.push_back(diag::effective_viscous_flux(snap, r.cfg, cfg.flux_k));
            double mean = 0.0, mean_abs = 0.0;
            for (double c : covs) { mean += c; mean_abs += std::abs(c); }
            if (!covs.empty()) { mean /= covs.size(); mean_abs /= covs.size(); }
            sc["evf_corr_mean"] = mean;
            sc["evf_corr_abs_mean"] = mean_abs;
        }
        if (i != finest) {
            try {
                const double med = median_density(rungs[finest].traj);
                double osc = 0.0;
                for (int j = 0; j <= 4; ++j) {
                    const double k = std::max(1.000001, std::ldexp(med, j));
                    osc = std::max(osc, diag::oscillation_defect(rungs[finest].traj, r.traj, k,
                                                                 r.cfg.law.gamma));
                }
                sc["osc_defect_vs_finest"] = osc;
                auto sd = diag::s_transport_defect(r.traj, rungs[finest].traj, 1);
                sc["s_defect_vs_finest"] = sd.empty() ? 0.0 : sd.back();
            } catch (const DomainError&) {
                // cadence/grid mismatch across the ladder (dt or n axis)
                sc["osc_defect_vs_finest"] = nan;
                sc["s_defect_vs_finest"] = nan;
            }
        }
        result.rows.push_back(std::move(row));
    }

    if (result.rows.size() >= 2) {
        // collect keys present in every row with positive values
        for (const auto& [key, unused] : result.rows.front().scalars) {
            (void)unused;
            std::vector<double> xs, ys;
            bool usable = true;
            for (const auto& row : result.rows) {
                auto it = row.scalars.find(key);
                if (it == row.scalars.end() || !std::isfinite(it->second) || it->second <= 0.0) {
                    usable = false;
                    break;
                }
                xs.push_back(row.value);
                ys.push_back(it->second);
            }
            if (!usable) continue;
            if (auto s = audit::loglog_slope(xs, ys)) result.slopes["slope_" + key] = *s;
        }
    }
    return result;
}

void write_study_csv(const std::string& path, const StudyResult& result) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_study_csv: cannot open " + path);
    // union of scalar keys, sorted
    std::vector<std::string> keys;
    for (const auto& row : result.rows)
        for (const auto& [k, v] : row.scalars) {
            (void)v;
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
        }
    std::sort(keys.begin(), keys.end());

    out << "axis,value";
    for (const auto& k : keys) out << ',' << k;
    for (const auto& [k, v] : result.slopes) {
        (void)v;
        out << ',' << k;
    }
    out << "\n";
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& row : result.rows) {
        out << axis_name(result.axis) << ',' << fmt(row.value);
        for (const auto& k : keys) {
            auto it = row.scalars.find(k);
            out << ',';
            if (it != row.scalars.end() && std::isfinite(it->second)) out << fmt(it->second);
        }
        for (const auto& [k, v] : result.slopes) {
            (void)k;
            out << ',' << fmt(v);
        }
        out << "\n";
    }
}

}  // namespace bifluidlab::study
