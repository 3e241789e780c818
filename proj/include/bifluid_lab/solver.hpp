#pragma once
#include <string>
#include <vector>

#include "bifluid_lab/constitutive.hpp"
#include "bifluid_lab/spectral.hpp"

namespace bifluidlab::solver {

// The (N, epsilon, delta) approximation triple plus physics and stepping
// knobs for one run.
struct ApproxConfig {
    spectral::TorusGrid grid;
    constitutive::PressureLaw law;                    // K species
    constitutive::RegularizedPressureParams pressure; // delta, B
    int galerkin_modes = 16;   // scalar velocity modes per component
    double epsilon = 1e-3;
    double mu = 0.1;
    double lambda = 0.0;
    double dt = 1e-3;
    double t_end = 0.1;
    double cfl_warn_threshold = 0.5;
    bool positivity_clamp = false;
    int monitor_cadence = 1;
    int checkpoint_cadence = 0;  // 0: no checkpoints / no stored trajectory
    double band_defect_threshold = 1e-8;
    std::string output_dir;

    int species() const { return law.species(); }
    void validate() const;
};

// Grid densities plus Galerkin velocity coefficients at one time instant.
struct MixtureState {
    double time = 0.0;
    spectral::Field rho;
    std::vector<spectral::Field> Z;
    std::vector<std::vector<double>> u_coeffs;  // [component][mode]
};

spectral::VectorField velocity(const MixtureState& state, const ApproxConfig& cfg);

struct EnergyLedger {
    double kinetic = 0.0;
    double helmholtz_total = 0.0;
    double dissipation_cum = 0.0;
    double eps_gradient_cum = 0.0;   // eps * int |grad rho|^2 + |grad Z|^2, accumulated
    double eps_highmode_cum = 0.0;   // eps * int |grad rho^{B/2}|^2 + ..., accumulated
    double initial_total = 0.0;      // kinetic + helmholtz at t=0
    double residual = 0.0;           // (kinetic + helmholtz + dissipation) - initial
};

struct StepReport {
    double galerkin_residual = 0.0;  // max |<momentum defect, retained mode>|
    double cfl = 0.0;
    bool cfl_warning = false;
    int clamped_cells = 0;
};

struct MonitorRecord {
    double inf_rho = 0.0;
    double band_defect_sup = 0.0;
    double band_defect_l1 = 0.0;
    bool pass = true;
};

struct LedgerRow {
    long step = 0;
    double time = 0.0;
    EnergyLedger energy;
    MonitorRecord monitor;
    std::vector<double> masses;  // integral of rho, Z_1..Z_K
    double galerkin_residual = 0.0;
    double cfl = 0.0;
};

struct Snapshot {
    double time = 0.0;
    spectral::Field rho;
    std::vector<spectral::Field> Z;
    spectral::VectorField u;
};

struct Trajectory {
    spectral::TorusGrid grid;
    std::vector<Snapshot> snaps;
};

enum class RunStatus { Completed, BlownUp };

struct RunResult {
    RunStatus status = RunStatus::Completed;
    double blowup_time = 0.0;
    std::string blowup_what;
    MixtureState final_state;
    std::vector<LedgerRow> ledger;
    Trajectory trajectory;  // populated at checkpoint cadence
    int cfl_warnings = 0;
    int clamped_cells_total = 0;
};

// Validates positivity and admissible-band membership pointwise, optionally
// smooths (rho and the ratios Z_i/rho are projected, then recombined) and
// projects the velocity onto the retained modes.
MixtureState prepare_initial(const spectral::Field& rho0,
                             const std::vector<spectral::Field>& Z0,
                             const spectral::VectorField& u0, const ApproxConfig& cfg,
                             int smooth_modes = 0);

// One IMEX step: implicit spectral solve of the eps-diffusion in each
// continuity equation, explicit dealiased transport/pressure/compensation
// terms, then the projected momentum solve with the viscous operator
// treated implicitly.
std::pair<MixtureState, StepReport> step(const MixtureState& state, const ApproxConfig& cfg);

MonitorRecord check_min_principle(const MixtureState& state,
                                  const constitutive::AdmissibleRegion& region,
                                  double threshold);

EnergyLedger initial_ledger(const MixtureState& state, const ApproxConfig& cfg);
EnergyLedger energy_ledger_update(const EnergyLedger& prev, const MixtureState& old_state,
                                  const MixtureState& new_state, const ApproxConfig& cfg);

// Full time loop with per-step ledger rows, monitors, optional checkpoints
// under cfg.output_dir and an in-memory trajectory at checkpoint cadence.
RunResult run(const ApproxConfig& cfg, const MixtureState& initial);

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& rows,
                      int species);

}  // namespace bifluidlab::solver
