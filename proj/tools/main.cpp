#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bifluid_lab/config.hpp"
#include "bifluid_lab/diagnostics.hpp"

namespace {

using namespace bifluidlab;
namespace fs = std::filesystem;

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int cmd_run(const std::string& config_path, const std::string& out_override, bool quiet) {
    config::RunSetup setup;
    nlohmann::json raw;
    try {
        raw = load_json(config_path);
        setup = config::parse_run_config(raw);
        if (!out_override.empty()) setup.config.output_dir = out_override;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        solver::MixtureState initial =
            config::build_initial(setup.config, setup.initial_spec, setup.smooth_modes);
        if (!setup.config.output_dir.empty()) {
            fs::create_directories(setup.config.output_dir);
            std::ofstream echo(fs::path(setup.config.output_dir) / "config.json");
            echo << raw.dump(2) << "\n";
        }
        solver::RunResult res = solver::run(setup.config, initial);
        if (res.cfl_warnings > 0 && !quiet)
            std::cerr << "warning: advisory CFL bound exceeded on " << res.cfl_warnings
                      << " step(s)\n";
        if (res.status == solver::RunStatus::BlownUp) {
            std::cerr << "blow-up at t = " << res.blowup_time << ": " << res.blowup_what << "\n";
            return 2;
        }
        if (!quiet) {
            const auto& last = res.ledger.back();
            std::cout << "completed " << last.step << " steps to t = " << last.time
                      << " (residual " << last.energy.residual << ")\n";
            if (!setup.config.output_dir.empty())
                std::cout << "ledger: " << (fs::path(setup.config.output_dir) / "ledger.csv").string()
                          << "\n";
        }
        return 0;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 2;
    }
}

int cmd_audit(const std::string& config_path, const std::string& out_dir, bool quiet) {
    config::AuditSetup setup;
    try {
        setup = config::parse_audit_config(load_json(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        audit::HypothesisReport report =
            setup.loaded.system
                ? bifluid::audit_bifluid(*setup.loaded.system, *setup.loaded.exponents,
                                         setup.bi_sampling)
                : audit::audit_hypotheses(setup.loaded.law, setup.sampling);
        const auto j = report.to_json();
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            std::ofstream out(fs::path(out_dir) / "report.json");
            out << j.dump(2) << "\n";
        }
        if (!quiet) std::cout << j.dump(2) << "\n";
        return report.any_fail() ? 3 : 0;
    } catch (const std::exception& e) {
        std::cerr << "audit failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_table(const std::string& config_path, const std::string& out_dir, bool quiet) {
    config::TableSetup setup;
    try {
        setup = config::parse_table_config(load_json(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        std::ostream* os = &std::cout;
        std::ofstream file;
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            file.open(fs::path(out_dir) / "bifluid_table.csv");
            os = &file;
        }
        const auto& sys = *setup.loaded.system;
        const auto& t = setup.table;
        auto fmt = [](double v) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        *os << "rho,Z,rho_plus,a_frac,P\n";
        for (int i = 0; i < t.rho_points; ++i) {
            const double rho =
                t.rho_min + (t.rho_max - t.rho_min) * i / std::max(1, t.rho_points - 1);
            for (int j = 0; j < t.Z_points; ++j) {
                const double Z = t.Z_min + (t.Z_max - t.Z_min) * j / std::max(1, t.Z_points - 1);
                const auto dec = bifluid::recover_phases(sys, rho, Z);
                const double P = sys.plus().value(dec.rho_plus);
                *os << fmt(rho) << ',' << fmt(Z) << ',' << fmt(dec.rho_plus) << ','
                    << fmt(dec.a_frac) << ',' << fmt(P) << "\n";
            }
        }
        if (!quiet && !out_dir.empty())
            std::cout << "table: " << (fs::path(out_dir) / "bifluid_table.csv").string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "bifluid-table failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_study(const std::string& config_path, const std::string& out_override, int jobs,
              bool quiet) {
    config::StudySetup setup;
    try {
        setup = config::parse_study_config(load_json(config_path));
        if (!out_override.empty()) setup.study.output_dir = out_override;
        setup.study.jobs = jobs;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        study::StudyResult result = study::run_study(setup.study);
        const std::string dir =
            setup.study.output_dir.empty() ? "." : setup.study.output_dir;
        fs::create_directories(dir);
        const std::string csv = (fs::path(dir) / "study.csv").string();
        study::write_study_csv(csv, result);
        if (!quiet) std::cout << "study: " << csv << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "study failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bifluid-lab: constructive approximation laboratory for compressible "
                 "multifluid systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int jobs = 1;
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress console summaries");

    auto add_common = [&](CLI::App* sub, bool with_jobs) {
        sub->add_option("--config", config_path, "path to the JSON config")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        if (with_jobs) sub->add_option("--jobs", jobs, "parallel ladder runs");
    };

    CLI::App* run = app.add_subcommand("run", "time-step one configuration");
    add_common(run, false);
    CLI::App* auditc = app.add_subcommand("audit", "sample the constitutive hypotheses");
    add_common(auditc, false);
    CLI::App* table = app.add_subcommand("bifluid-table",
                                         "tabulate the real-bifluid phase recovery");
    add_common(table, false);
    CLI::App* studyc = app.add_subcommand("study", "run a refinement ladder");
    add_common(studyc, true);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, out_dir, quiet);
    if (auditc->parsed()) return cmd_audit(config_path, out_dir, quiet);
    if (table->parsed()) return cmd_table(config_path, out_dir, quiet);
    if (studyc->parsed()) return cmd_study(config_path, out_dir, jobs, quiet);
    return 1;
}
