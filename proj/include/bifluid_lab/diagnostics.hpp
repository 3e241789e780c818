#pragma once
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bifluid_lab/solver.hpp"

namespace bifluidlab::diag {

// A renormalizing map b with bounded derivative on the observed range.
struct RenormMap {
    std::string name;
    std::function<double(double)> b;
    std::function<double(double)> db;
    double domain_max = std::numeric_limits<double>::infinity();
};

RenormMap identity_map();
RenormMap constant_map(double c);
RenormMap truncation_map(double k);  // T_k

// L^1-in-space residual of  d_t b(rho) + div(b(rho) u) + (rho b' - b) div u
// per snapshot: centered time differences at interior checkpoints, one-sided
// at the ends.
std::vector<double> renorm_residual(const solver::Trajectory& traj, const RenormMap& map);

// Two-density form: d_t b + div(b u) + (rho d_rho b + Z d_Z b - b) div u.
struct RenormMap2 {
    std::string name;
    std::function<double(double, double)> b;
    std::function<double(double, double)> d_rho;
    std::function<double(double, double)> d_Z;
};
std::vector<double> renorm_residual2(const solver::Trajectory& traj, const RenormMap2& map,
                                     int species = 0);

// integral of rho |s - s_ref|^p per snapshot, s = Z/rho with the vacuum
// convention s=0 at rho=0.
std::vector<double> s_transport_defect(const solver::Trajectory& traj,
                                       const solver::Trajectory& reference, int p,
                                       int species = 0);

struct PressureIntegrals {
    double rho_power = 0.0;               // II rho^{gamma+Theta}
    std::vector<double> Z_powers;         // II Z_i^{beta_i+Theta}
    double delta_rho_high = 0.0;          // delta * II rho^{B+Theta}
};
PressureIntegrals pressure_integrability(const solver::Trajectory& traj,
                                         const solver::ApproxConfig& cfg, double theta);

// Cov(F, T_k(rho)) over the torus with F = Pi_delta - (2 mu + lambda) div u.
double effective_viscous_flux(const solver::Snapshot& snap,
                              const solver::ApproxConfig& cfg, double k);

// II |T_k(rho_coarse) - T_k(rho_fine)|^{gamma+1} over paired trajectories.
double oscillation_defect(const solver::Trajectory& fine, const solver::Trajectory& coarse,
                          double k, double gamma);

// Reads the checkpoints written by solver::run back into a trajectory.
solver::Trajectory load_trajectory(const std::string& dir);

double time_trapezoid(const std::vector<double>& times, const std::vector<double>& values);

}  // namespace bifluidlab::diag
