#pragma once

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/linear_system.hpp"

namespace ivflow {

/// Full NR system at `state`: every device stamped, slack last.
LinearSystem assemble(const NetworkCase& net, const StateVector& state, const ControlMode& ctl);

/// Residual vector f(state) of the equations selected by `ctl`.
Eigen::VectorXd residual(const NetworkCase& net, const StateVector& state, const ControlMode& ctl);

struct SlackOutput {
    double p = 0.0;
    double q = 0.0;
};

/// Complex power the slack bus injects at `state`.
SlackOutput slack_output(const NetworkCase& net, const StateVector& state, const ControlMode& ctl);

}  // namespace ivflow
