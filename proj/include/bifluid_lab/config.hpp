#pragma once
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>

#include "bifluid_lab/audit.hpp"
#include "bifluid_lab/bifluid.hpp"
#include "bifluid_lab/solver.hpp"
#include "bifluid_lab/study.hpp"

namespace bifluidlab::config {

// Exponents may arrive as JSON numbers or "p/q" strings; both forms carry an
// exact rational alongside the double.
struct Exponent {
    double value = 0.0;
    Rational exact;
};
Exponent parse_exponent(const nlohmann::json& j, const char* what);

struct LoadedLaw {
    constitutive::PressureLaw law;
    std::shared_ptr<bifluid::BiFluidSystem> system;  // set for catalog "bifluid"
    std::optional<bifluid::BiExponents> exponents;
};
LoadedLaw parse_law(const nlohmann::json& j);

struct RunSetup {
    solver::ApproxConfig config;
    std::shared_ptr<bifluid::BiFluidSystem> system;  // keeps effective laws alive
    nlohmann::json initial_spec;
    int smooth_modes = 0;
    unsigned long long seed = 0;
};
RunSetup parse_run_config(const nlohmann::json& j);

solver::MixtureState build_initial(const solver::ApproxConfig& cfg,
                                   const nlohmann::json& initial_spec, int smooth_modes);

struct AuditSetup {
    LoadedLaw loaded;
    audit::SamplingSpec sampling;        // direct pressure laws
    bifluid::BiSamplingSpec bi_sampling; // bifluid systems
};
AuditSetup parse_audit_config(const nlohmann::json& j);

struct TableSpec {
    double rho_min = 0.0, rho_max = 2.0;
    int rho_points = 21;
    double Z_min = 0.0, Z_max = 2.0;
    int Z_points = 21;
};

struct TableSetup {
    LoadedLaw loaded;
    TableSpec table;
};
TableSetup parse_table_config(const nlohmann::json& j);

struct StudySetup {
    study::StudyConfig study;
    std::shared_ptr<bifluid::BiFluidSystem> system;
};
StudySetup parse_study_config(const nlohmann::json& j);

}  // namespace bifluidlab::config
