#pragma once

// Snap-and-resolve for switched shunts and stepped taps: the continuous
// solution is rounded to the device step sets and the network is solved
// again with those devices fixed.

#include <vector>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/homotopy.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/newton.hpp"

namespace ivflow {

/// Nearest element of the ascending set `steps`; ties go to the smaller one.
double snap_to_steps(double value, const std::vector<double>& steps);

/// {b_min, b_min + step, ...} up to b_max, with b_max itself always included.
std::vector<double> shunt_steps(const SwitchedShunt& sh);
/// Same for a tap; empty when the tap has no step size.
std::vector<double> tap_steps(const TapControl& tap);

bool has_discrete_devices(const NetworkCase& net);

/// Continuous setting of every discrete device in a solution: shunts as the
/// susceptance Q / |V|^2 clamped to their limits, taps as their ratio.
struct DiscreteSettings {
    std::map<std::size_t, double> shunt_b;
    std::map<std::size_t, double> tap_ratio;
};
DiscreteSettings continuous_settings(const NetworkCase& net, const StateVector& solution, const ControlMode& ctl);

struct SnapOutcome {
    StateVector state;
    SolveReport report;
    ControlMode ctl;  // with every discrete device fixed at its step
    int direct_iterations = 0;
    bool continuation_used = false;
};

/// Snaps every discrete device at once and re-solves warm from `solution`.
/// If the direct solve fails, each device is moved linearly from its
/// continuous to its snapped value. Throws SnapInfeasibleError when that
/// continuation also fails.
SnapOutcome resolve_after_snap(const NetworkCase& net, const StateVector& solution, const ControlMode& ctl,
                               const SolverOptions& opts = {}, const HomotopySchedule& sched = {});

}  // namespace ivflow
