#include "ivflow/stamps.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <unordered_map>

#include "ivflow/errors.hpp"

namespace ivflow {

namespace {

using cd = std::complex<double>;

struct BusV {
    std::size_t b;
    int r, i;  // unknown indices
    double vr, vi;
    [[nodiscard]] double mag2() const { return vr * vr + vi * vi; }
};

BusV bus_v(const StampContext& ctx, std::size_t b) {
    const int r = ctx.layout.vr(b);
    const int i = ctx.layout.vi(b);
    return {b, r, i, ctx.x[r], ctx.x[i]};
}

BusV bus_v(const StampContext& ctx, BusId id) { return bus_v(ctx, ctx.layout.bus_index(id)); }

void guard(const StampContext& ctx, const BusV& v) {
    const double mag = std::sqrt(v.mag2());
    if (!(mag > kMinVoltage)) throw SingularPointError(ctx.layout.bus_id(v.b), mag);
}

// Outflow current Y*V_col added to the KCL rows of `row_bus`.
void stamp_admittance(const StampContext& ctx, LinearSystem& sys, std::size_t row_bus, const BusV& col, cd y) {
    const int rr = ctx.layout.kcl_r(row_bus);
    const int ri = ctx.layout.kcl_i(row_bus);
    const double g = y.real();
    const double b = y.imag();
    sys.add(rr, g * col.vr - b * col.vi, {{col.r, g}, {col.i, -b}}, ctx.x);
    sys.add(ri, b * col.vr + g * col.vi, {{col.r, b}, {col.i, g}}, ctx.x);
}

// Pi-model branch with turns ratio t on the from side. When `tap_col` is an
// unknown, the dependence of the currents on t is linearized as well.
void stamp_pi(const StampContext& ctx, LinearSystem& sys, const Branch& br, double t, int tap_col) {
    const double scale = 1.0 + ctx.ctl.lambda_tx * ctx.ctl.tx_gain;
    const cd ys = cd(br.g, br.b) * scale;
    const cd ytot = ys + cd(0.0, br.b_sh / 2.0);
    const BusV vf = bus_v(ctx, br.from);
    const BusV vt = bus_v(ctx, br.to);

    stamp_admittance(ctx, sys, vf.b, vf, ytot / (t * t));
    stamp_admittance(ctx, sys, vf.b, vt, -ys / t);
    stamp_admittance(ctx, sys, vt.b, vf, -ys / t);
    stamp_admittance(ctx, sys, vt.b, vt, ytot);

    if (tap_col < 0) return;
    // These terms only carry derivatives: their value is already counted above.
    const cd dyff = -2.0 * ytot / (t * t * t);
    const cd dyft = ys / (t * t);
    const cd vf_c(vf.vr, vf.vi);
    const cd vt_c(vt.vr, vt.vi);
    const cd dif = dyff * vf_c + dyft * vt_c;
    const cd dit = dyft * vf_c;
    auto derivative_only = [&](int row, double d) { sys.add(row, 0.0, {{tap_col, d}}, ctx.x); };
    derivative_only(ctx.layout.kcl_r(vf.b), dif.real());
    derivative_only(ctx.layout.kcl_i(vf.b), dif.imag());
    derivative_only(ctx.layout.kcl_r(vt.b), dit.real());
    derivative_only(ctx.layout.kcl_i(vt.b), dit.imag());
}

// Injection of P + jQ at bus v into its KCL rows. q_col/p_col carry the
// unknowns Q and P depend on (dp is dP/d(p_col)).
void stamp_injection(const StampContext& ctx, LinearSystem& sys, const BusV& v, double p, double q, int q_col,
                     int p_col = kNoRow, double dp = 0.0) {
    guard(ctx, v);
    const double m = v.mag2();
    const double ir = (p * v.vr + q * v.vi) / m;
    const double ii = (p * v.vi - q * v.vr) / m;
    const double dir_dvr = p / m - 2.0 * v.vr * ir / m;
    const double dir_dvi = q / m - 2.0 * v.vi * ir / m;
    const double dii_dvr = -q / m - 2.0 * v.vr * ii / m;
    const double dii_dvi = p / m - 2.0 * v.vi * ii / m;
    const int rr = ctx.layout.kcl_r(v.b);
    const int ri = ctx.layout.kcl_i(v.b);
    sys.add(rr, -ir,
            {{v.r, -dir_dvr}, {v.i, -dir_dvi}, {q_col, -v.vi / m}, {p_col, -dp * v.vr / m}}, ctx.x);
    sys.add(ri, -ii,
            {{v.r, -dii_dvr}, {v.i, -dii_dvi}, {q_col, v.vr / m}, {p_col, -dp * v.vi / m}}, ctx.x);
}

// row: y - s(|V|) = 0
void stamp_sigmoid_row(const StampContext& ctx, LinearSystem& sys, int row, double y, const BusV& v,
                       const SigmoidSaturation& s) {
    guard(ctx, v);
    const double mag = std::sqrt(v.mag2());
    const double d = s.deriv(mag);
    sys.add(row, y - s.eval(mag), {{row, 1.0}, {v.r, -d * v.vr / mag}, {v.i, -d * v.vi / mag}}, ctx.x);
}

// row: |V|^2 - v_set^2 = 0
void stamp_voltage_row(const StampContext& ctx, LinearSystem& sys, int row, const BusV& v, double v_set) {
    sys.add(row, v.mag2() - v_set * v_set, {{v.r, 2.0 * v.vr}, {v.i, 2.0 * v.vi}}, ctx.x);
}

// row: y - value = 0
void stamp_fixed_row(const StampContext& ctx, LinearSystem& sys, int row, double value) {
    sys.add(row, ctx.x[row] - value, {{row, 1.0}}, ctx.x);
}

double clamp_limit(HardState s, const Limits& lim) { return s == HardState::at_max ? lim.hi : lim.lo; }

}  // namespace

Limits gen_q_limits(const NetworkCase& net, const ControlMode& ctl, std::size_t g) {
    const auto& gen = net.generators[g];
    const auto r = ctl.relax(g);
    return {r.scale * gen.q_min - r.add_min, r.scale * gen.q_max + r.add_max};
}

void pin_clamped(const NetworkCase& net, const Layout& layout, const ControlMode& ctl, Eigen::VectorXd& x) {
    auto pin = [&x](int col, const Limits& lim, LimitModel model, HardState state) {
        if (col < 0) return;
        if (lim.degenerate()) {
            x[col] = lim.lo;
        } else if (model == LimitModel::hard && state != HardState::regulating) {
            x[col] = clamp_limit(state, lim);
        }
    };
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const GenRole role = layout.role(g);
        const Limits lim = gen_q_limits(net, ctl, g);
        if (role == GenRole::local || role == GenRole::remote_member) {
            pin(layout.q_gen(g), lim, ctl.gen_model, ctl.gen_hard(g));
        }
    }
    for (std::size_t k = 0; k < net.switched_shunts.size(); ++k) {
        const auto& sh = net.switched_shunts[k];
        pin(layout.q_shunt(k), Limits{sh.b_min, sh.b_max}, ctl.shunt_model, ctl.shunt_hard(k));
    }
    for (std::size_t br = 0; br < net.branches.size(); ++br) {
        if (!net.branches[br].tap) continue;
        const auto& t = *net.branches[br].tap;
        pin(layout.tap(br), Limits{t.tr_min, t.tr_max}, ctl.tap_model, ctl.tap_hard(br));
    }
}

bool is_agc_member(const NetworkCase& net, const Layout& layout, std::size_t g) {
    return layout.agc() && layout.role(g) != GenRole::slack && net.generators[g].agc_factor > 0.0;
}

ParticipationCurve agc_curve(const NetworkCase& net, const ControlMode& ctl, std::size_t g) {
    const auto& gen = net.generators[g];
    const double kappa = gen.agc_factor;
    const double lo0 = gen.p_min - gen.p_g;
    const double hi0 = gen.p_max - gen.p_g;
    const double lo = lo0 + ctl.lambda_p * ctl.extra_min(g);
    const double hi = hi0 + ctl.lambda_p * ctl.extra_max(g);
    // The patch width stays tied to the original limits so that relaxing
    // them only moves the breakpoints.
    const double delta = hi0 > lo0 ? default_patch_half_width(kappa, lo0, hi0) : default_patch_half_width(kappa, lo, hi);
    return ParticipationCurve::build(kappa, lo, hi, delta);
}

AgcShare agc_share(const NetworkCase& net, const ControlMode& ctl, std::size_t g, double delta_ps) {
    const auto& gen = net.generators[g];
    const double kappa = gen.agc_factor;
    if (!(kappa > 0.0)) return {0.0, 0.0, 3};
    if (ctl.unbounded_p) return {kappa * delta_ps, kappa, 3};
    const double lo = gen.p_min - gen.p_g + ctl.lambda_p * ctl.extra_min(g);
    const double hi = gen.p_max - gen.p_g + ctl.lambda_p * ctl.extra_max(g);
    if (!(hi > lo)) return {lo, 0.0, 1};
    const auto curve = agc_curve(net, ctl, g);
    return {curve.eval(delta_ps), curve.deriv(delta_ps), curve.region(delta_ps)};
}

double scheduled_slack_p(const NetworkCase& net) {
    BusId slack = 0;
    for (const auto& b : net.buses) {
        if (b.kind == BusKind::slack) slack = b.id;
    }
    double p = 0.0;
    for (const auto& g : net.generators) {
        if (g.bus == slack) p += g.p_g;
    }
    return p;
}

std::vector<int> hard_leads(const NetworkCase& net, const Layout& layout, const ControlMode& ctl) {
    std::vector<int> lead(net.generators.size());
    std::unordered_map<BusId, int> first;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        lead[g] = static_cast<int>(g);
        if (layout.role(g) != GenRole::local || ctl.gen_hard(g) != HardState::regulating) continue;
        if (gen_q_limits(net, ctl, g).degenerate()) continue;
        auto [it, inserted] = first.try_emplace(net.generators[g].bus, static_cast<int>(g));
        if (!inserted) lead[g] = it->second;
    }
    return lead;
}

void stamp_branch(const StampContext& ctx, std::size_t branch, LinearSystem& sys) {
    if (ctx.layout.tap(branch) >= 0) {
        stamp_transformer(ctx, branch, sys);
        return;
    }
    const auto& br = ctx.net.branches[branch];
    const auto fixed = ctx.ctl.fixed_tap_ratio.find(branch);
    stamp_pi(ctx, sys, br, fixed != ctx.ctl.fixed_tap_ratio.end() ? fixed->second : br.ratio, kNoRow);
}

void stamp_transformer(const StampContext& ctx, std::size_t branch, LinearSystem& sys) {
    const auto& br = ctx.net.branches[branch];
    const int col = ctx.layout.tap(branch);
    if (col < 0 || !br.tap) {
        stamp_branch(ctx, branch, sys);
        return;
    }
    const auto& tap = *br.tap;
    stamp_pi(ctx, sys, br, ctx.x[col], col);

    const BusV v = bus_v(ctx, tap.controlled_side == ControlledSide::primary ? br.from : br.to);
    const Limits lim{tap.tr_min, tap.tr_max};
    if (lim.degenerate()) {
        stamp_fixed_row(ctx, sys, col, lim.lo);
    } else if (ctx.ctl.tap_model == LimitModel::hard) {
        const auto state = ctx.ctl.tap_hard(branch);
        if (state == HardState::regulating) {
            stamp_voltage_row(ctx, sys, col, v, tap.v_set);
        } else {
            stamp_fixed_row(ctx, sys, col, clamp_limit(state, lim));
        }
    } else {
        // Primary-side control raises the ratio on low voltage; secondary-side
        // control lowers it.
        const SigmoidSaturation s{lim.lo, lim.hi, tap.v_set, ctx.ctl.steepness(),
                                  tap.controlled_side == ControlledSide::primary ? Orientation::decreasing
                                                                                 : Orientation::increasing};
        stamp_sigmoid_row(ctx, sys, col, ctx.x[col], v, s);
    }
}

void stamp_fixed_shunt(const StampContext& ctx, const FixedShunt& shunt, LinearSystem& sys) {
    if (shunt.g == 0.0 && shunt.b == 0.0) return;
    const BusV v = bus_v(ctx, shunt.bus);
    stamp_admittance(ctx, sys, v.b, v, cd(shunt.g, shunt.b));
}

void stamp_load(const StampContext& ctx, const Load& load, LinearSystem& sys) {
    if (load.p == 0.0 && load.q == 0.0) return;
    stamp_injection(ctx, sys, bus_v(ctx, load.bus), -load.p, -load.q, kNoRow);
}

void stamp_generator(const StampContext& ctx, std::size_t gen, LinearSystem& sys) {
    const GenRole role = ctx.layout.role(gen);
    if (role == GenRole::slack) return;
    const auto& g = ctx.net.generators[gen];
    const BusV v = bus_v(ctx, g.bus);
    const int col = ctx.layout.q_gen(gen);
    const double q = col >= 0 ? ctx.x[col] : g.q_init;
    stamp_injection(ctx, sys, v, g.p_g, q, col);
    if (role != GenRole::local) return;

    const Limits lim = gen_q_limits(ctx.net, ctx.ctl, gen);
    if (lim.degenerate()) {
        stamp_fixed_row(ctx, sys, col, lim.lo);
    } else if (ctx.ctl.gen_model == LimitModel::hard) {
        const auto state = ctx.ctl.gen_hard(gen);
        if (state != HardState::regulating) {
            stamp_fixed_row(ctx, sys, col, clamp_limit(state, lim));
            return;
        }
        const int lead = ctx.hard_lead.empty() ? static_cast<int>(gen) : ctx.hard_lead[gen];
        if (lead == static_cast<int>(gen)) {
            stamp_voltage_row(ctx, sys, col, v, g.v_set);
        } else {
            // A second regulating unit on the bus follows the lead in
            // proportion to its reactive range.
            const Limits lead_lim = gen_q_limits(ctx.net, ctx.ctl, static_cast<std::size_t>(lead));
            const double ratio = (lim.hi - lim.lo) / (lead_lim.hi - lead_lim.lo);
            const int lead_col = ctx.layout.q_gen(static_cast<std::size_t>(lead));
            sys.add(col, ctx.x[col] - ratio * ctx.x[lead_col], {{col, 1.0}, {lead_col, -ratio}}, ctx.x);
        }
    } else {
        const SigmoidSaturation s{lim.lo, lim.hi, g.v_set, ctx.ctl.steepness(gen), Orientation::decreasing};
        stamp_sigmoid_row(ctx, sys, col, q, v, s);
    }
}

void stamp_remote_group(const StampContext& ctx, std::size_t group, LinearSystem& sys) {
    const auto& grp = ctx.net.remote_groups[group];
    if (grp.members.empty()) throw std::invalid_argument("remote group " + std::to_string(group) + " has no members");
    const int req = ctx.layout.q_req(group);
    const double q_req = ctx.x[req];
    const BusV v = bus_v(ctx, grp.controlled_bus);
    const double v_set = ctx.net.generators[grp.members.front()].v_set;

    Limits total{0.0, 0.0};
    std::vector<Limits> lims;
    for (std::size_t m : grp.members) {
        lims.push_back(gen_q_limits(ctx.net, ctx.ctl, m));
        total.lo += lims.back().lo;
        total.hi += lims.back().hi;
    }

    if (ctx.ctl.gen_model == LimitModel::hard) {
        double kappa_sum = 0.0;
        std::size_t regulating = 0;
        for (std::size_t k = 0; k < grp.members.size(); ++k) {
            if (ctx.ctl.gen_hard(grp.members[k]) == HardState::regulating && !lims[k].degenerate()) {
                kappa_sum += grp.factors[k];
                ++regulating;
            }
        }
        std::vector<Partial> sum_partials{{req, 1.0}};
        double sum_q = 0.0;
        for (std::size_t k = 0; k < grp.members.size(); ++k) {
            const std::size_t m = grp.members[k];
            const int col = ctx.layout.q_gen(m);
            const auto state = ctx.ctl.gen_hard(m);
            sum_q += ctx.x[col];
            sum_partials.push_back({col, -1.0});
            if (state == HardState::regulating && !lims[k].degenerate()) {
                const double share = kappa_sum > 0.0 ? grp.factors[k] / kappa_sum : 1.0 / double(regulating);
                sys.add(col, ctx.x[col] - share * q_req, {{col, 1.0}, {req, -share}}, ctx.x);
            } else {
                stamp_fixed_row(ctx, sys, col, clamp_limit(state, lims[k]));
            }
        }
        if (regulating > 0) {
            stamp_voltage_row(ctx, sys, req, v, v_set);
        } else {
            sys.add(req, q_req - sum_q, sum_partials, ctx.x);
        }
        return;
    }

    for (std::size_t k = 0; k < grp.members.size(); ++k) {
        const std::size_t m = grp.members[k];
        const int col = ctx.layout.q_gen(m);
        const double kappa = grp.factors[k];
        if (lims[k].degenerate()) {
            stamp_fixed_row(ctx, sys, col, lims[k].lo);
        } else if (!(kappa > 0.0)) {
            stamp_fixed_row(ctx, sys, col, std::clamp(0.0, lims[k].lo, lims[k].hi));
        } else {
            const auto curve = ParticipationCurve::build(kappa, lims[k].lo, lims[k].hi);
            sys.add(col, ctx.x[col] - curve.eval(q_req), {{col, 1.0}, {req, -curve.deriv(q_req)}}, ctx.x);
        }
    }
    if (total.degenerate()) {
        stamp_fixed_row(ctx, sys, req, total.lo);
    } else {
        const SigmoidSaturation s{total.lo, total.hi, v_set, ctx.ctl.steepness(), Orientation::decreasing};
        stamp_sigmoid_row(ctx, sys, req, q_req, v, s);
    }
}

void stamp_switched_shunt(const StampContext& ctx, std::size_t shunt, LinearSystem& sys) {
    const auto& sh = ctx.net.switched_shunts[shunt];
    const BusV v = bus_v(ctx, sh.bus);
    if (auto it = ctx.ctl.fixed_shunt_b.find(shunt); it != ctx.ctl.fixed_shunt_b.end()) {
        if (it->second != 0.0) stamp_admittance(ctx, sys, v.b, v, cd(0.0, it->second));
        return;
    }
    const int col = ctx.layout.q_shunt(shunt);
    const double q = ctx.x[col];
    stamp_injection(ctx, sys, v, 0.0, q, col);

    const Limits lim{sh.b_min, sh.b_max};
    if (lim.degenerate()) {
        stamp_fixed_row(ctx, sys, col, lim.lo);
    } else if (ctx.ctl.shunt_model == LimitModel::hard) {
        const auto state = ctx.ctl.shunt_hard(shunt);
        if (state == HardState::regulating) {
            stamp_voltage_row(ctx, sys, col, v, sh.v_set);
        } else {
            stamp_fixed_row(ctx, sys, col, clamp_limit(state, lim));
        }
    } else {
        const SigmoidSaturation s{lim.lo, lim.hi, sh.v_set, ctx.ctl.steepness(), Orientation::decreasing};
        stamp_sigmoid_row(ctx, sys, col, q, v, s);
    }
}

void stamp_agc_member(const StampContext& ctx, std::size_t gen, LinearSystem& sys) {
    if (!is_agc_member(ctx.net, ctx.layout, gen)) return;
    const int dps = ctx.layout.dps();
    const AgcShare share = agc_share(ctx.net, ctx.ctl, gen, ctx.x[dps]);
    stamp_injection(ctx, sys, bus_v(ctx, ctx.net.generators[gen].bus), share.value, 0.0, kNoRow, dps, share.deriv);
}

double slack_setpoint(const NetworkCase& net, const Layout& layout) {
    const std::size_t b = layout.slack_bus();
    const BusId id = layout.bus_id(b);
    for (const auto& g : net.generators) {
        if (g.bus == id) return g.v_set;
    }
    return net.buses[b].v_init_real;
}

void stamp_slack(const StampContext& ctx, LinearSystem& sys) {
    const std::size_t b = ctx.layout.slack_bus();
    const BusV v = bus_v(ctx, b);
    const double v_set = slack_setpoint(ctx.net, ctx.layout);
    sys.add(v.r, v.vr - v_set, {{v.r, 1.0}}, ctx.x);
    sys.add(v.i, v.vi, {{v.i, 1.0}}, ctx.x);
    if (!ctx.layout.agc()) return;

    // The slack injects exactly the current its KCL rows leave unbalanced.
    const SlackCurrent& k = sys.slack();
    const int dps = ctx.layout.dps();
    Eigen::VectorXd grad = v.vr * k.d_re + v.vi * k.d_im;
    grad[v.r] += k.re;
    grad[v.i] += k.im;
    grad[dps] -= 1.0;
    std::vector<Partial> partials;
    for (int c = 0; c < grad.size(); ++c) {
        if (grad[c] != 0.0) partials.push_back({c, grad[c]});
    }
    const double f = v.vr * k.re + v.vi * k.im - scheduled_slack_p(ctx.net) - ctx.x[dps];
    sys.add(dps, f, partials, ctx.x);
}

}  // namespace ivflow
