#include "ivflow/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ivflow/assemble.hpp"
#include "ivflow/errors.hpp"
#include "ivflow/stamps.hpp"

namespace ivflow {

namespace {

double limit_for(UnknownKind kind, const SolverOptions& opts) {
    switch (kind) {
        case UnknownKind::v_real:
        case UnknownKind::v_imag: return opts.step_limit_voltage;
        case UnknownKind::q_gen:
        case UnknownKind::q_shunt:
        case UnknownKind::q_req: return opts.step_limit_q;
        case UnknownKind::tap: return opts.step_limit_tap;
        case UnknownKind::delta_ps: return opts.step_limit_p;
    }
    return std::numeric_limits<double>::infinity();
}

Region classify(double value, double lo, double hi) {
    if (!(hi > lo)) return Region::fixed;
    const double band = kRegionTolerance * (hi - lo);
    if (value <= lo + band) return Region::at_min;
    if (value >= hi - band) return Region::at_max;
    return Region::controlling;
}

// Rescales each bus phasor of `next` to the magnitude the linearization of
// the raw Newton step `raw` predicts, bounded by the voltage step limit.
// Without this, angle steps (and the clamp acting on them) change |V| by
// terms the Jacobian cannot see, which throws steep voltage controls onto
// their flat tails.
void correct_magnitudes(const Layout& layout, const Eigen::VectorXd& x0, const Eigen::VectorXd& raw,
                        Eigen::VectorXd& next, double limit) {
    for (std::size_t b = 0; b < layout.bus_count(); ++b) {
        const int r = layout.vr(b);
        const int i = layout.vi(b);
        const double m0 = std::hypot(x0[r], x0[i]);
        const double m1 = std::hypot(next[r], next[i]);
        if (!(m0 > 0.0) || !(m1 > 0.0)) continue;
        const double predicted = std::clamp((x0[r] * raw[r] + x0[i] * raw[i]) / m0, m0 - limit, m0 + limit);
        if (!(predicted > 0.5 * m0)) continue;
        next[r] *= predicted / m1;
        next[i] *= predicted / m1;
    }
}

struct ControlledBus {
    std::size_t bus;
    double v_set;
    double steepness;
};

std::vector<ControlledBus> sigmoid_controlled(const NetworkCase& net, const Layout& lay, const ControlMode& ctl) {
    std::vector<ControlledBus> out;
    if (ctl.gen_model == LimitModel::continuous) {
        for (std::size_t g = 0; g < net.generators.size(); ++g) {
            if (lay.role(g) != GenRole::local || gen_q_limits(net, ctl, g).degenerate()) continue;
            const auto& gen = net.generators[g];
            out.push_back({lay.bus_index(gen.bus), gen.v_set, ctl.steepness(g)});
        }
        for (const auto& grp : net.remote_groups) {
            out.push_back({lay.bus_index(grp.controlled_bus), net.generators[grp.members.front()].v_set,
                           ctl.steepness()});
        }
    }
    if (ctl.shunt_model == LimitModel::continuous) {
        for (std::size_t k = 0; k < net.switched_shunts.size(); ++k) {
            const auto& sh = net.switched_shunts[k];
            if (lay.q_shunt(k) >= 0 && sh.b_max > sh.b_min) out.push_back({lay.bus_index(sh.bus), sh.v_set, ctl.steepness()});
        }
    }
    if (ctl.tap_model == LimitModel::continuous) {
        for (std::size_t br = 0; br < net.branches.size(); ++br) {
            if (lay.tap(br) < 0) continue;
            const auto& b = net.branches[br];
            const BusId id = b.tap->controlled_side == ControlledSide::primary ? b.from : b.to;
            out.push_back({lay.bus_index(id), b.tap->v_set, ctl.steepness()});
        }
    }
    return out;
}

// A controlled voltage that jumps across its setpoint may land at most half
// as far out as it started, and never beyond `window` e-folds. From the far
// flat tail the Jacobian has no voltage coupling and the iteration would
// bounce between the two limits; the contraction breaks that cycle.
void limit_crossings(const std::vector<ControlledBus>& buses, const Layout& layout, const Eigen::VectorXd& x0,
                     Eigen::VectorXd& next, double window) {
    for (const auto& c : buses) {
        const int r = layout.vr(c.bus);
        const int i = layout.vi(c.bus);
        const double m0 = std::hypot(x0[r], x0[i]);
        const double m1 = std::hypot(next[r], next[i]);
        const double z0 = c.steepness * (m0 - c.v_set);
        const double z1 = c.steepness * (m1 - c.v_set);
        const double allowed = std::min(window, 0.5 * std::abs(z0));
        if (!(z0 * z1 < 0.0) || std::abs(z1) <= allowed || !(m1 > 0.0)) continue;
        const double target = c.v_set + std::copysign(allowed / c.steepness, z1);
        next[r] *= target / m1;
        next[i] *= target / m1;
    }
}

}  // namespace

Eigen::VectorXd step_limit(const Eigen::VectorXd& delta, const Layout& layout, const SolverOptions& opts) {
    Eigen::VectorXd out = delta;
    for (int k = 0; k < out.size(); ++k) {
        const double lim = limit_for(layout.unknown(k).kind, opts);
        out[k] = std::clamp(out[k], -lim, lim);
    }
    return out;
}

std::vector<DeviceRegion> classify_regions(const NetworkCase& net, const StateVector& state, const ControlMode& ctl) {
    const Layout& lay = *state.layout;
    std::vector<DeviceRegion> out;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        if (lay.q_gen(g) >= 0) {
            const auto lim = gen_q_limits(net, ctl, g);
            out.push_back({DeviceKind::generator, g, classify(state.x[lay.q_gen(g)], lim.lo, lim.hi)});
        }
        if (is_agc_member(net, lay, g)) {
            const auto& gen = net.generators[g];
            const double dp = agc_share(net, ctl, g, state.x[lay.dps()]).value;
            out.push_back({DeviceKind::agc, g, classify(dp, gen.p_min - gen.p_g, gen.p_max - gen.p_g)});
        }
    }
    for (std::size_t k = 0; k < net.remote_groups.size(); ++k) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t m : net.remote_groups[k].members) {
            const auto lim = gen_q_limits(net, ctl, m);
            lo += lim.lo;
            hi += lim.hi;
        }
        out.push_back({DeviceKind::remote_group, k, classify(state.x[lay.q_req(k)], lo, hi)});
    }
    for (std::size_t s = 0; s < net.switched_shunts.size(); ++s) {
        const auto& sh = net.switched_shunts[s];
        const int col = lay.q_shunt(s);
        out.push_back({DeviceKind::switched_shunt, s, col < 0 ? Region::fixed : classify(state.x[col], sh.b_min, sh.b_max)});
    }
    for (std::size_t br = 0; br < net.branches.size(); ++br) {
        if (!net.branches[br].tap) continue;
        const auto& t = *net.branches[br].tap;
        const int col = lay.tap(br);
        out.push_back({DeviceKind::tap, br, col < 0 ? Region::fixed : classify(state.x[col], t.tr_min, t.tr_max)});
    }
    return out;
}

std::pair<StateVector, SolveReport> nr_solve(const NetworkCase& net, const StateVector& init, const ControlMode& ctl,
                                             const SolverOptions& opts) {
    if (!(opts.tol_residual > 0.0) || !(opts.tol_step > 0.0) || opts.max_iter < 1) {
        throw std::invalid_argument("solver options: tolerances must be positive and max_iter >= 1");
    }
    auto layout = std::make_shared<const Layout>(net, ctl);
    StateVector s = remap(net, init, layout);
    SolveReport report;
    const auto controlled = sigmoid_controlled(net, *layout, ctl);
    double last_step = std::numeric_limits<double>::infinity();

    for (int k = 0;; ++k) {
        const LinearSystem sys = assemble(net, s, ctl);
        const double r = sys.max_residual();
        report.final_residual = r;
        if (!std::isfinite(r)) {
            report.diagnostics.push_back("residual is not finite at iteration " + std::to_string(k));
            break;
        }
        if (r < opts.tol_residual && (k == 0 || last_step < opts.tol_step)) {
            report.converged = true;
            break;
        }
        if (k >= opts.max_iter) break;

        Eigen::VectorXd next;
        try {
            next = solve_linear(sys);
        } catch (const SingularSystemError& e) {
            std::string where = e.row() >= 0 ? " (" + layout->describe(static_cast<int>(e.row())) + ")" : "";
            throw SingularSystemError(e.row(), "iteration " + std::to_string(k + 1) + ": " + e.what() + where);
        }
        Eigen::VectorXd delta = next - s.x;
        if (opts.damping == Damping::step_clamp) delta = step_limit(delta, *layout, opts);
        if (opts.magnitude_correction) {
            Eigen::VectorXd limited = s.x + delta;
            correct_magnitudes(*layout, s.x, next, limited, opts.step_limit_voltage);
            delta = limited - s.x;
        }
        if (opts.crossing_window > 0.0) {
            Eigen::VectorXd limited = s.x + delta;
            limit_crossings(controlled, *layout, s.x, limited, opts.crossing_window);
            delta = limited - s.x;
        }
        s.x += delta;
        // The slack and clamp rows are linear in one unknown each; take their
        // values exactly rather than through the factorization.
        s.x[layout->vr(layout->slack_bus())] = slack_setpoint(net, *layout);
        s.x[layout->vi(layout->slack_bus())] = 0.0;
        pin_clamped(net, *layout, ctl, s.x);
        for (std::size_t br = 0; br < net.branches.size(); ++br) {
            const int col = layout->tap(br);
            if (col >= 0 && !(s.x[col] > 0.0)) {
                s.x[col] = net.branches[br].tap->tr_min;
                report.diagnostics.push_back("tap ratio of branch " + std::to_string(br) + " left (0, inf); clamped");
            }
        }
        last_step = delta.size() ? delta.cwiseAbs().maxCoeff() : 0.0;

        IterationRecord rec;
        rec.inner_iter = k + 1;
        rec.lambda_s = ctl.lambda_s;
        rec.lambda_g_max = ctl.lambda_g_max();
        rec.lambda_p = ctl.lambda_p;
        rec.lambda_tx = ctl.lambda_tx;
        rec.max_residual = r;
        rec.max_step = last_step;
        report.trace.push_back(rec);
        report.iterations = k + 1;
    }
    report.device_regions = classify_regions(net, s, ctl);
    return {std::move(s), std::move(report)};
}

std::pair<StateVector, SolveReport> nr_solve(const NetworkCase& net, const ControlMode& ctl,
                                             const SolverOptions& opts) {
    auto layout = std::make_shared<const Layout>(net, ctl);
    return nr_solve(net, flat_start(net, layout), ctl, opts);
}

}  // namespace ivflow
