#include "ivflow/assemble.hpp"

#include <stdexcept>

#include "ivflow/stamps.hpp"

namespace ivflow {

LinearSystem assemble(const NetworkCase& net, const StateVector& state, const ControlMode& ctl) {
    const Layout& layout = *state.layout;
    if (layout.agc() != ctl.agc_enabled) throw std::invalid_argument("assemble: state layout does not match control mode");
    StampContext ctx{net, layout, state.x, ctl};
    if (ctl.gen_model == LimitModel::hard) ctx.hard_lead = hard_leads(net, layout, ctl);

    LinearSystem sys(layout.size());
    for (std::size_t k = 0; k < net.branches.size(); ++k) stamp_branch(ctx, k, sys);
    for (const auto& s : net.fixed_shunts) stamp_fixed_shunt(ctx, s, sys);
    for (const auto& l : net.loads) stamp_load(ctx, l, sys);
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        stamp_generator(ctx, g, sys);
        stamp_agc_member(ctx, g, sys);
    }
    for (std::size_t s = 0; s < net.switched_shunts.size(); ++s) stamp_switched_shunt(ctx, s, sys);
    for (std::size_t k = 0; k < net.remote_groups.size(); ++k) stamp_remote_group(ctx, k, sys);
    stamp_slack(ctx, sys);
    return sys;
}

Eigen::VectorXd residual(const NetworkCase& net, const StateVector& state, const ControlMode& ctl) {
    return assemble(net, state, ctl).residual();
}

SlackOutput slack_output(const NetworkCase& net, const StateVector& state, const ControlMode& ctl) {
    const LinearSystem sys = assemble(net, state, ctl);
    const std::size_t b = state.layout->slack_bus();
    const double vr = state.vr(b);
    const double vi = state.vi(b);
    const auto& k = sys.slack();
    return {vr * k.re + vi * k.im, vi * k.re - vr * k.im};
}

}  // namespace ivflow
