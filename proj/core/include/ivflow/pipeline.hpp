#pragma once

// End-to-end solve: continuous models (with optional homotopy and snapping)
// or the outer-loop baseline, returning everything the reports need.

#include <optional>
#include <string>
#include <vector>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/discrete.hpp"
#include "ivflow/homotopy.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/newton.hpp"
#include "ivflow/outer_loop.hpp"

namespace ivflow {

enum class Model { continuous, outer_loop };

const char* to_string(Model m);
Model parse_model(const std::string& name);

struct PipelineOptions {
    Model model = Model::continuous;
    HomotopySchedule schedule;
    /// With method none, a failed plain solve retries with smoothing and
    /// then the composite schedule.
    bool homotopy_fallback = true;
    double smoothing = 5000.0;
    bool agc = false;  // or'ed with the case's own flag
    bool snap = false;
    OuterLoopPolicy policy;
    SolverOptions solver;
};

struct PipelineResult {
    Model model = Model::continuous;
    bool converged = false;
    std::optional<StateVector> state;
    SolveReport report;
    ControlMode ctl;
    /// Method that produced the solution; differs from the requested one
    /// when the fallback ran.
    HomotopyMethod homotopy = HomotopyMethod::none;
    bool fallback_used = false;
    int outer_iterations = 0;
    std::optional<SwitchTrace> switches;
    bool snapped = false;
    int snap_iterations = 0;
    bool snap_continuation = false;
    std::vector<Stability> stability;
    std::optional<std::string> failure;
};

PipelineResult run_pipeline(const NetworkCase& net, const PipelineOptions& opts);

/// Control mode of the continuous pipeline before any relaxation.
ControlMode continuous_mode(const NetworkCase& net, const PipelineOptions& opts);

}  // namespace ivflow
