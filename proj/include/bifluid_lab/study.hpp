#pragma once
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bifluid_lab/diagnostics.hpp"
#include "bifluid_lab/solver.hpp"

namespace bifluidlab::study {

enum class Axis { Epsilon, Delta, Dt, GridN };

const char* axis_name(Axis a);

// One refinement ladder: runs the base configuration once per ladder value
// (or reuses stored checkpoints) and tabulates the monitored scalars.
struct StudyConfig {
    Axis axis = Axis::Delta;
    std::vector<double> values;  // strictly monotone ladder
    solver::ApproxConfig base;
    // regenerates initial data for a rung (the grid may change along the ladder)
    std::function<solver::MixtureState(const solver::ApproxConfig&)> make_initial;
    double theta = 0.25;     // pressure integrability exponent
    double flux_k = 2.0;     // truncation level for the flux correlation
    int jobs = 1;
    std::string output_dir;              // per-rung outputs under rung_###/
    std::optional<std::string> reuse_dir;  // read rung_###/ checkpoints instead of running
};

struct StudyRow {
    double value = 0.0;
    std::map<std::string, double> scalars;  // NaN = not available for this rung
};

struct StudyResult {
    Axis axis;
    std::vector<StudyRow> rows;
    std::map<std::string, double> slopes;  // log-log fits over the ladder
};

StudyResult run_study(const StudyConfig& cfg);

// one row per ladder value; slope columns repeat the fitted value, empty when
// no fit is available
void write_study_csv(const std::string& path, const StudyResult& result);

}  // namespace bifluidlab::study
