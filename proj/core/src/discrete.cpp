#include "ivflow/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ivflow/errors.hpp"

namespace ivflow {

namespace {

std::vector<double> step_set(double lo, double hi, double step) {
    std::vector<double> out;
    const double span = hi - lo;
    const auto n = static_cast<long>(std::floor(span / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    if (out.back() < hi - 1e-12 * std::max(1.0, std::abs(hi))) out.push_back(hi);
    return out;
}

}  // namespace

double snap_to_steps(double value, const std::vector<double>& steps) {
    if (steps.empty()) throw std::invalid_argument("snap_to_steps: empty step set");
    auto it = std::lower_bound(steps.begin(), steps.end(), value);
    if (it == steps.begin()) return steps.front();
    if (it == steps.end()) return steps.back();
    const double above = *it;
    const double below = *(it - 1);
    return above - value < value - below ? above : below;
}

std::vector<double> shunt_steps(const SwitchedShunt& sh) {
    if (!(sh.b_max > sh.b_min)) return {sh.b_min};
    return step_set(sh.b_min, sh.b_max, sh.step_size);
}

std::vector<double> tap_steps(const TapControl& tap) {
    if (!tap.step_size) return {};
    if (!(tap.tr_max > tap.tr_min)) return {tap.tr_min};
    return step_set(tap.tr_min, tap.tr_max, *tap.step_size);
}

bool has_discrete_devices(const NetworkCase& net) {
    if (!net.switched_shunts.empty()) return true;
    return std::any_of(net.branches.begin(), net.branches.end(),
                       [](const Branch& b) { return b.tap && b.tap->step_size; });
}

DiscreteSettings continuous_settings(const NetworkCase& net, const StateVector& solution, const ControlMode& ctl) {
    const Layout& lay = *solution.layout;
    DiscreteSettings out;
    for (std::size_t s = 0; s < net.switched_shunts.size(); ++s) {
        const auto& sh = net.switched_shunts[s];
        if (auto it = ctl.fixed_shunt_b.find(s); it != ctl.fixed_shunt_b.end()) {
            out.shunt_b[s] = it->second;
            continue;
        }
        const double m2 = std::pow(solution.vmag(lay.bus_index(sh.bus)), 2);
        const double b = m2 > 0.0 ? solution.x[lay.q_shunt(s)] / m2 : sh.b_min;
        out.shunt_b[s] = std::clamp(b, sh.b_min, sh.b_max);
    }
    for (std::size_t br = 0; br < net.branches.size(); ++br) {
        const auto& tap = net.branches[br].tap;
        if (!tap || !tap->step_size) continue;
        if (auto it = ctl.fixed_tap_ratio.find(br); it != ctl.fixed_tap_ratio.end()) {
            out.tap_ratio[br] = it->second;
        } else {
            out.tap_ratio[br] = std::clamp(solution.x[lay.tap(br)], tap->tr_min, tap->tr_max);
        }
    }
    return out;
}

SnapOutcome resolve_after_snap(const NetworkCase& net, const StateVector& solution, const ControlMode& ctl,
                               const SolverOptions& opts, const HomotopySchedule& sched) {
    const DiscreteSettings cont = continuous_settings(net, solution, ctl);
    DiscreteSettings snapped;
    for (const auto& [s, b] : cont.shunt_b) snapped.shunt_b[s] = snap_to_steps(b, shunt_steps(net.switched_shunts[s]));
    for (const auto& [br, t] : cont.tap_ratio) snapped.tap_ratio[br] = snap_to_steps(t, tap_steps(*net.branches[br].tap));

    SnapOutcome out;
    out.ctl = ctl;
    out.ctl.fixed_shunt_b = snapped.shunt_b;
    out.ctl.fixed_tap_ratio = snapped.tap_ratio;

    bool direct_ok = false;
    try {
        auto [x, rep] = nr_solve(net, solution, out.ctl, opts);
        out.direct_iterations = rep.iterations;
        direct_ok = rep.converged;
        out.state = std::move(x);
        out.report = std::move(rep);
        for (auto& rec : out.report.trace) rec.phase = "snap";
    } catch (const SingularPointError& e) {
        out.report.diagnostics.push_back(std::string("direct snapped solve: ") + e.what());
    } catch (const SingularSystemError& e) {
        out.report.diagnostics.push_back(std::string("direct snapped solve: ") + e.what());
    }
    if (direct_ok) return out;

    const ControlMode base = out.ctl;
    const HomotopyPhase sweep{"snap-continuation", [base, cont, snapped](double mu) {
                                  ControlMode c = base;
                                  for (auto& [s, b] : c.fixed_shunt_b) b = snapped.shunt_b.at(s) + mu * (cont.shunt_b.at(s) - snapped.shunt_b.at(s));
                                  for (auto& [br, t] : c.fixed_tap_ratio) t = snapped.tap_ratio.at(br) + mu * (cont.tap_ratio.at(br) - snapped.tap_ratio.at(br));
                                  return c;
                              }};
    out.continuation_used = true;
    SolveReport acc = out.report;
    acc.converged = false;
    try {
        out.state = run_phase(net, solution, sweep, sched, opts, acc);
    } catch (const ContinuationError& e) {
        throw SnapInfeasibleError(std::string("snapped discrete settings admit no solution reachable by continuation (") +
                                  e.what() + "); feasibility repair is not performed");
    }
    acc.converged = true;
    acc.final_residual = acc.path.empty() ? acc.final_residual : acc.path.back().final_residual;
    acc.device_regions = classify_regions(net, out.state, out.ctl);
    out.report = std::move(acc);
    return out;
}

}  // namespace ivflow
