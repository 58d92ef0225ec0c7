#include "ivflow/outer_loop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "ivflow/errors.hpp"
#include "ivflow/stamps.hpp"

namespace ivflow {

namespace {

BusId controlled_bus(const Generator& g) { return g.remote_bus.value_or(g.bus); }

// Next hard state of a device whose output rises as its controlled voltage
// falls (generators, shunts, primary-side taps). Flip `falling` for devices
// that move the other way.
HardState next_state(HardState s, double value, const Limits& lim, double v, double v_set, bool falling) {
    const double tol = kAtLimitTolerance;
    switch (s) {
        case HardState::regulating:
            if (value > lim.hi + tol) return HardState::at_max;
            if (value < lim.lo - tol) return HardState::at_min;
            return s;
        case HardState::at_max:
            return (falling ? v > v_set : v < v_set) ? HardState::regulating : s;
        case HardState::at_min:
            return (falling ? v < v_set : v > v_set) ? HardState::regulating : s;
    }
    return s;
}

struct Candidate {
    std::size_t gen;
    HardState to;
};

}  // namespace

const char* to_string(SwitchOrder o) { return o == SwitchOrder::smallest_first ? "smallest-first" : "largest-first"; }

SwitchOrder parse_switch_order(const std::string& name) {
    if (name == "smallest-first") return SwitchOrder::smallest_first;
    if (name == "largest-first") return SwitchOrder::largest_first;
    throw std::invalid_argument("unknown switch order '" + name + "'");
}

int SwitchTrace::total_toggles() const {
    int n = 0;
    for (int t : toggles) n += t;
    return n;
}

int SwitchTrace::pv_to_pq() const {
    int n = 0;
    for (const auto& it : iterations) n += it.pv_to_pq;
    return n;
}

int SwitchTrace::pq_to_pv() const {
    int n = 0;
    for (const auto& it : iterations) n += it.pq_to_pv;
    return n;
}

OuterLoopResult solve_outer_loop(const NetworkCase& net, const ControlMode& base, const SolverOptions& opts,
                                 const OuterLoopPolicy& policy) {
    OuterLoopResult out;
    ControlMode& ctl = out.ctl;
    ctl = base;
    ctl.gen_model = ctl.shunt_model = ctl.tap_model = LimitModel::hard;
    ctl.gen_state.assign(net.generators.size(), HardState::regulating);
    ctl.shunt_state.assign(net.switched_shunts.size(), HardState::regulating);
    ctl.tap_state.assign(net.branches.size(), HardState::regulating);
    out.switches.toggles.assign(net.generators.size(), 0);
    out.switches.fixed_pq.assign(net.generators.size(), false);

    auto layout = std::make_shared<const Layout>(net, ctl);
    StateVector s = flat_start(net, layout);

    std::vector<std::size_t> rank(net.generators.size());
    for (std::size_t g = 0; g < rank.size(); ++g) rank[g] = g;
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        const auto& ga = net.generators[a];
        const auto& gb = net.generators[b];
        const auto ka = std::make_tuple(ga.p_max, ga.q_max - ga.q_min, a);
        const auto kb = std::make_tuple(gb.p_max, gb.q_max - gb.q_min, b);
        return policy.order == SwitchOrder::smallest_first ? ka < kb : kb < ka;
    });

    for (int outer = 1;; ++outer) {
        SolveReport inner;
        try {
            auto solved = nr_solve(net, s, ctl, opts);
            s = std::move(solved.first);
            inner = std::move(solved.second);
        } catch (const SingularSystemError& e) {
            inner.diagnostics.push_back(e.what());
        } catch (const SingularPointError& e) {
            inner.diagnostics.push_back(e.what());
        }
        for (auto rec : inner.trace) {
            rec.outer_iter = outer;
            out.report.trace.push_back(rec);
        }
        out.report.iterations += inner.iterations;
        out.report.final_residual = inner.final_residual;
        for (const auto& d : inner.diagnostics) out.report.diagnostics.push_back(d);
        if (!inner.converged) {
            out.report.diagnostics.push_back("inner solve diverged at outer iteration " + std::to_string(outer));
            break;
        }

        const Layout& lay = *s.layout;
        auto vmag_of = [&](BusId id) { return s.vmag(lay.bus_index(id)); };
        OuterIteration step;
        step.inner_iterations = inner.iterations;

        std::vector<Candidate> cands;
        for (std::size_t g : rank) {
            const int col = lay.q_gen(g);
            const auto lim = gen_q_limits(net, ctl, g);
            if (col < 0 || lim.degenerate()) continue;
            const auto& gen = net.generators[g];
            const HardState cur = ctl.gen_state[g];
            const HardState nxt = next_state(cur, s.x[col], lim, vmag_of(controlled_bus(gen)), gen.v_set, true);
            if (nxt != cur) cands.push_back({g, nxt});
        }
        int applied = 0;
        for (const auto& c : cands) {
            if (policy.max_switches_per_iter > 0 && applied >= policy.max_switches_per_iter) break;
            const bool back_to_pv = c.to == HardState::regulating;
            if (back_to_pv) {
                if (out.switches.fixed_pq[c.gen] || out.switches.toggles[c.gen] + 2 > policy.max_switches_per_gen) {
                    out.switches.fixed_pq[c.gen] = true;
                    continue;
                }
            }
            ctl.gen_state[c.gen] = c.to;
            ++out.switches.toggles[c.gen];
            ++(back_to_pv ? step.pq_to_pv : step.pv_to_pq);
            step.switched.push_back(net.generators[c.gen].id);
            ++applied;
        }

        for (std::size_t k = 0; k < net.switched_shunts.size(); ++k) {
            const int col = lay.q_shunt(k);
            if (col < 0) continue;
            const auto& sh = net.switched_shunts[k];
            const Limits lim{sh.b_min, sh.b_max};
            if (lim.degenerate()) continue;
            const HardState nxt = next_state(ctl.shunt_state[k], s.x[col], lim, vmag_of(sh.bus), sh.v_set, true);
            if (nxt != ctl.shunt_state[k]) {
                ctl.shunt_state[k] = nxt;
                ++step.device_switches;
            }
        }
        for (std::size_t br = 0; br < net.branches.size(); ++br) {
            const int col = lay.tap(br);
            if (col < 0) continue;
            const auto& b = net.branches[br];
            const auto& t = *b.tap;
            const bool primary = t.controlled_side == ControlledSide::primary;
            const Limits lim{t.tr_min, t.tr_max};
            if (lim.degenerate()) continue;
            const double v = vmag_of(primary ? b.from : b.to);
            const HardState nxt = next_state(ctl.tap_state[br], s.x[col], lim, v, t.v_set, primary);
            if (nxt != ctl.tap_state[br]) {
                ctl.tap_state[br] = nxt;
                ++step.device_switches;
            }
        }

        IterationRecord rec;
        rec.phase = "switch";
        rec.outer_iter = outer;
        rec.inner_iter = inner.iterations;
        rec.max_residual = inner.final_residual;
        rec.pv_to_pq = step.pv_to_pq;
        rec.pq_to_pv = step.pq_to_pv;
        out.report.trace.push_back(rec);
        const bool settled = step.pv_to_pq + step.pq_to_pv + step.device_switches == 0;
        out.switches.iterations.push_back(std::move(step));
        if (settled) {
            out.report.converged = true;
            break;
        }
        if (outer >= policy.max_outer_iter) {
            out.switches.oscillation_unresolved = true;
            out.report.diagnostics.push_back("outer iteration cap reached with switches pending");
            break;
        }
    }
    out.state = std::move(s);
    out.report.device_regions = classify_regions(net, out.state, ctl);
    return out;
}

std::vector<Stability> classify_stability(const NetworkCase& net, const StateVector& solution,
                                          const ControlMode& ctl) {
    const Layout& lay = *solution.layout;
    std::vector<Stability> out(net.generators.size(), Stability::stable);
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const int col = lay.q_gen(g);
        const auto lim = gen_q_limits(net, ctl, g);
        if (col < 0 || lim.degenerate()) continue;
        const auto& gen = net.generators[g];
        const double q = solution.x[col];
        const double v = solution.vmag(lay.bus_index(controlled_bus(gen)));
        const bool at_min = std::abs(q - lim.lo) <= kAtLimitTolerance;
        const bool at_max = std::abs(q - lim.hi) <= kAtLimitTolerance;
        if ((at_min && v < gen.v_set) || (at_max && v > gen.v_set)) out[g] = Stability::unstable;
    }
    return out;
}

}  // namespace ivflow
