#pragma once

// Classical baseline: hard regulate-or-clamp device models, NR inner loop,
// and an outer loop that switches devices between regulating and clamped
// after each converged inner solve.

#include <vector>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/newton.hpp"

namespace ivflow {

enum class SwitchOrder { smallest_first, largest_first };

const char* to_string(SwitchOrder o);
SwitchOrder parse_switch_order(const std::string& name);

struct OuterLoopPolicy {
    /// Generators are ranked by P_max, then reactive range, then index.
    SwitchOrder order = SwitchOrder::smallest_first;
    int max_switches_per_gen = 5;
    /// Generator switches applied per outer iteration; 0 applies all of them.
    int max_switches_per_iter = 1;
    int max_outer_iter = 50;
};

struct OuterIteration {
    int inner_iterations = 0;
    int pv_to_pq = 0;
    int pq_to_pv = 0;
    int device_switches = 0;  // shunts and taps
    std::vector<int> switched;  // generator ids
};

struct SwitchTrace {
    std::vector<OuterIteration> iterations;
    std::vector<int> toggles;      // per generator
    std::vector<bool> fixed_pq;    // per generator
    bool oscillation_unresolved = false;

    [[nodiscard]] int total_toggles() const;
    [[nodiscard]] int pv_to_pq() const;
    [[nodiscard]] int pq_to_pv() const;
};

struct OuterLoopResult {
    StateVector state;
    SolveReport report;
    SwitchTrace switches;
    ControlMode ctl;  // final hard states
};

/// Runs the baseline from flat start. `base` supplies everything except the
/// limit models, which are forced to hard.
OuterLoopResult solve_outer_loop(const NetworkCase& net, const ControlMode& base, const SolverOptions& opts = {},
                                 const OuterLoopPolicy& policy = {});

enum class Stability { stable, unstable };

/// Output within this distance of a limit counts as sitting on it.
inline constexpr double kAtLimitTolerance = 1e-6;

/// Per generator: unstable iff at Q_min with its controlled voltage below
/// V_set, or at Q_max with it above. Slack and fixed-injection generators
/// are stable.
std::vector<Stability> classify_stability(const NetworkCase& net, const StateVector& solution,
                                          const ControlMode& ctl = {});

}  // namespace ivflow
