#pragma once

// Per-device contributions to the NR system. KCL rows carry
// "current leaving the bus through the network minus current injected by
// devices"; control rows carry "unknown minus its target".

#include <Eigen/Core>
#include <vector>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/linear_system.hpp"
#include "ivflow/smooth.hpp"

namespace ivflow {

/// Voltage magnitude at or below which injection stamps refuse to divide.
inline constexpr double kMinVoltage = 1e-4;

struct StampContext {
    const NetworkCase& net;
    const Layout& layout;
    const Eigen::VectorXd& x;
    const ControlMode& ctl;
    /// Hard model only: for each generator, the generator whose voltage row
    /// holds its bus (itself when it leads). Empty means every generator leads.
    std::vector<int> hard_lead = {};
};

struct Limits {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool degenerate() const { return !(hi > lo); }
};

/// Reactive limits of generator `g` after the relaxation in `ctl`.
Limits gen_q_limits(const NetworkCase& net, const ControlMode& ctl, std::size_t g);

/// Active-power share of an AGC member as a function of the slack surplus.
struct AgcShare {
    double value = 0.0;
    double deriv = 0.0;
    int region = 3;
};
bool is_agc_member(const NetworkCase& net, const Layout& layout, std::size_t g);
AgcShare agc_share(const NetworkCase& net, const ControlMode& ctl, std::size_t g, double delta_ps);
/// Scheduled output of the generators on the slack bus.
double scheduled_slack_p(const NetworkCase& net);
/// Participation curve of AGC member `g` (not used in unbounded mode).
ParticipationCurve agc_curve(const NetworkCase& net, const ControlMode& ctl, std::size_t g);

/// For each generator, the generator whose voltage row holds its bus in the
/// hard model.
std::vector<int> hard_leads(const NetworkCase& net, const Layout& layout, const ControlMode& ctl);

void stamp_branch(const StampContext& ctx, std::size_t branch, LinearSystem& sys);
void stamp_transformer(const StampContext& ctx, std::size_t branch, LinearSystem& sys);
void stamp_fixed_shunt(const StampContext& ctx, const FixedShunt& shunt, LinearSystem& sys);
void stamp_load(const StampContext& ctx, const Load& load, LinearSystem& sys);
/// Injection currents of any non-slack generator plus the control row of a
/// locally regulating one. Remote members get their rows from
/// stamp_remote_group.
void stamp_generator(const StampContext& ctx, std::size_t gen, LinearSystem& sys);
void stamp_remote_group(const StampContext& ctx, std::size_t group, LinearSystem& sys);
void stamp_switched_shunt(const StampContext& ctx, std::size_t shunt, LinearSystem& sys);
void stamp_agc_member(const StampContext& ctx, std::size_t gen, LinearSystem& sys);
/// Voltage the slack bus is held at: its first generator's setpoint, else
/// the bus's initial real voltage.
double slack_setpoint(const NetworkCase& net, const Layout& layout);

/// Sets every unknown held by a fixed row (clamped hard devices, degenerate
/// limits) to its target exactly.
void pin_clamped(const NetworkCase& net, const Layout& layout, const ControlMode& ctl, Eigen::VectorXd& x);

/// Slack voltage rows and, with AGC, the slack surplus row. Must run after
/// every other stamp since it reads the accumulated slack current.
void stamp_slack(const StampContext& ctx, LinearSystem& sys);

}  // namespace ivflow
