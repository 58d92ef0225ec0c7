#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/linear_system.hpp"

namespace ivflow {

enum class Damping { none, step_clamp };

struct SolverOptions {
    double tol_residual = 1e-6;
    double tol_step = 1e-6;
    int max_iter = 100;
    double step_limit_voltage = 0.1;
    double step_limit_q = 1.0;  // also bounds group requests
    double step_limit_tap = 0.05;
    double step_limit_p = 1.0;
    Damping damping = Damping::step_clamp;
    /// Keep each updated bus voltage at its linearized magnitude (see newton.cpp).
    bool magnitude_correction = true;
    /// Crossing limiter for voltage-controlled buses, in e-folds of the
    /// sigmoid argument (see newton.cpp); 0 disables.
    double crossing_window = 4.0;
};

/// One NR iteration. The homotopy driver and the outer loop fill in the
/// fields that belong to them.
struct IterationRecord {
    std::string phase = "nr";
    int outer_iter = 0;
    int inner_iter = 0;
    double lambda_s = 0.0;
    double lambda_g_max = 1.0;
    double lambda_p = 0.0;
    double lambda_tx = 0.0;
    double max_residual = 0.0;
    double max_step = 0.0;
    int pv_to_pq = 0;
    int pq_to_pv = 0;
};

enum class Region { at_min, controlling, at_max, fixed };
enum class DeviceKind { generator, remote_group, switched_shunt, tap, agc };

struct DeviceRegion {
    DeviceKind kind;
    std::size_t index;  // generator, group, shunt or branch index
    Region region;
};

/// One sub-solve of a continuation path. `mu` runs from 1 (relaxed) to 0.
struct HomotopyStep {
    std::string phase;
    double mu = 0.0;
    bool accepted = false;
    int iterations = 0;
    double final_residual = 0.0;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;  // NR iterations summed over every sub-solve
    double final_residual = 0.0;
    std::vector<IterationRecord> trace;
    std::vector<DeviceRegion> device_regions;
    std::vector<HomotopyStep> path;
    std::vector<std::string> diagnostics;
};

/// Output within this fraction of the range from a limit counts as at-limit.
inline constexpr double kRegionTolerance = 0.004;

/// Per-variable clamp of a raw update; signs are preserved.
Eigen::VectorXd step_limit(const Eigen::VectorXd& delta, const Layout& layout, const SolverOptions& opts);

std::vector<DeviceRegion> classify_regions(const NetworkCase& net, const StateVector& state, const ControlMode& ctl);

/// Newton-Raphson on the equations selected by `ctl`, starting from `init`
/// (remapped onto the layout `ctl` implies). Non-convergence is reported;
/// singular systems and singular points throw.
std::pair<StateVector, SolveReport> nr_solve(const NetworkCase& net, const StateVector& init, const ControlMode& ctl,
                                             const SolverOptions& opts = {});

/// nr_solve from the flat start of `ctl`'s layout.
std::pair<StateVector, SolveReport> nr_solve(const NetworkCase& net, const ControlMode& ctl,
                                             const SolverOptions& opts = {});

}  // namespace ivflow
