#pragma once

// Continuation drivers. Every path is parameterized by mu in [0, 1]: mu = 1
// is the relaxed problem, mu = 0 the target. Accepted steps halve mu; a
// failed sub-solve retries halfway back toward the last accepted value.

#include <functional>
#include <string>
#include <utility>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/newton.hpp"

namespace ivflow {

enum class HomotopyMethod { none, smoothing, q_limit, p_limit, tx, composite };

const char* to_string(HomotopyMethod m);
/// Accepts the CLI spellings ("q-limit", ...); throws std::invalid_argument.
HomotopyMethod parse_homotopy_method(const std::string& name);

struct HomotopySchedule {
    HomotopyMethod method = HomotopyMethod::none;
    /// Effective steepness at the start of the smoothing path.
    double initial_steepness = 100.0;
    double lambda_tx_init = 1.0;
    /// Fraction of mu kept by an accepted step.
    double decrement = 0.5;
    /// Fraction of a failed step kept by the retry.
    double backtrack = 0.5;
    int max_backtracks = 10;
    /// Once the next mu would fall to this value or below, the step goes to 0.
    double finish_below = 1.0 / 64.0;
    int max_steps = 200;
};

struct HomotopyPhase {
    std::string name;
    std::function<ControlMode(double mu)> mode_at;
};

/// Phase that blends `start` into `end`.
HomotopyPhase blend_phase(std::string name, const ControlMode& start, const ControlMode& end);

/// Traces one phase from `init`. NR traces, path steps and iterations are
/// appended to `acc`. Throws ContinuationError when mu = 1 cannot be solved
/// or a step exhausts its backtracks.
StateVector run_phase(const NetworkCase& net, const StateVector& init, const HomotopyPhase& phase,
                      const HomotopySchedule& sched, const SolverOptions& opts, SolveReport& acc);

/// Solves `target` with the method in `sched`. The returned report's
/// residual is re-evaluated on the target equations.
std::pair<StateVector, SolveReport> run_homotopy(const NetworkCase& net, const StateVector& init,
                                                 const ControlMode& target, const HomotopySchedule& sched,
                                                 const SolverOptions& opts = {});

/// Extra width beyond the unlimited output of a violating generator, as a
/// fraction of its widened reactive range.
inline constexpr double kQRelaxHeadroom = 0.1;

/// `target` with reactive limits widened so that the solution of the
/// unlimited (pure voltage-set) problem is feasible: scale = Q / Q_limit on
/// the violated side plus kQRelaxHeadroom of the range.
ControlMode init_q_limit_relaxation(const NetworkCase& net, const ControlMode& target, const SolverOptions& opts = {});

/// `target` with lambda_p = 1 and active-limit extras taken from a solve
/// with linear participation. Requires target.agc_enabled.
ControlMode init_p_limit_relaxation(const NetworkCase& net, const ControlMode& target, const SolverOptions& opts = {});

/// Branch admittances scaled by (1 + lambda_tx * tx_gain), lambda_tx from
/// `sched.lambda_tx_init` down to 0.
HomotopyPhase tx_stepping(const ControlMode& target, const HomotopySchedule& sched = {});

}  // namespace ivflow
