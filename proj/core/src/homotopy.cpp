#include "ivflow/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ivflow/assemble.hpp"
#include "ivflow/errors.hpp"
#include "ivflow/smooth.hpp"
#include "ivflow/stamps.hpp"

namespace ivflow {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// One sub-solve; failures of any kind come back as nullopt.
std::optional<StateVector> attempt(const NetworkCase& net, const StateVector& init, const ControlMode& mode,
                                   const std::string& phase, double mu, const SolverOptions& opts, SolveReport& acc) {
    HomotopyStep step{phase, mu, false, 0, 0.0};
    std::optional<StateVector> out;
    try {
        auto [x, rep] = nr_solve(net, init, mode, opts);
        for (auto rec : rep.trace) {
            rec.phase = phase;
            acc.trace.push_back(rec);
        }
        acc.iterations += rep.iterations;
        step.iterations = rep.iterations;
        step.final_residual = rep.final_residual;
        step.accepted = rep.converged;
        if (rep.converged) out = std::move(x);
    } catch (const SingularPointError& e) {
        acc.diagnostics.push_back(phase + " at mu=" + fmt(mu) + ": " + e.what());
    } catch (const SingularSystemError& e) {
        acc.diagnostics.push_back(phase + " at mu=" + fmt(mu) + ": " + e.what());
    }
    acc.path.push_back(step);
    return out;
}

struct Relaxed {
    ControlMode mode;
    std::optional<StateVector> warm;
};

ControlMode with_tx(ControlMode c, const HomotopySchedule& sched) {
    c.lambda_tx = sched.lambda_tx_init;
    return c;
}

ControlMode with_smoothing(ControlMode c, const HomotopySchedule& sched) {
    c.lambda_s = std::max(0.0, c.smoothing - sched.initial_steepness);
    c.gen_lambda_s.clear();
    return c;
}

std::optional<StateVector> solve_with_tx_fallback(const NetworkCase& net, const ControlMode& mode,
                                                  const SolverOptions& opts, SolveReport& log) {
    auto layout = std::make_shared<const Layout>(net, mode);
    const StateVector flat = flat_start(net, layout);
    if (auto s = attempt(net, flat, mode, "pre-solve", 0.0, opts, log)) return s;
    try {
        return run_phase(net, flat, tx_stepping(mode), HomotopySchedule{}, opts, log);
    } catch (const ContinuationError& e) {
        log.diagnostics.push_back(e.what());
        return std::nullopt;
    }
}

Relaxed q_relaxation(const NetworkCase& net, const ControlMode& target, const SolverOptions& opts, SolveReport& log) {
    ControlMode pre = target;
    pre.gen_model = LimitModel::hard;
    pre.gen_state.clear();
    pre.gen_relax.clear();
    auto sol = solve_with_tx_fallback(net, pre, opts, log);
    if (!sol) throw ContinuationError("relaxed problem unsolvable: the pre-solve without reactive limits diverged");

    const Layout& lay = *sol->layout;
    ControlMode out = target;
    out.gen_relax.assign(net.generators.size(), LimitRelaxation{});
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const int col = lay.q_gen(g);
        const auto& gen = net.generators[g];
        if (col < 0 || !(gen.q_max > gen.q_min)) continue;
        const double q = sol->x[col];
        const double range = gen.q_max - gen.q_min;
        auto& r = out.gen_relax[g];
        if (q > gen.q_max) {
            if (gen.q_max > 0.0 && gen.q_min <= 0.0) {
                r.scale = q / gen.q_max;
                r.add_max = kQRelaxHeadroom * r.scale * range;
            } else {
                const double excess = q - gen.q_max;
                r.add_max = excess + kQRelaxHeadroom * (range + excess);
            }
        } else if (q < gen.q_min) {
            if (gen.q_min < 0.0 && gen.q_max >= 0.0) {
                r.scale = q / gen.q_min;
                r.add_min = kQRelaxHeadroom * r.scale * range;
            } else {
                const double excess = gen.q_min - q;
                r.add_min = excess + kQRelaxHeadroom * (range + excess);
            }
        }
    }
    return {out, std::move(sol)};
}

Relaxed p_relaxation(const NetworkCase& net, const ControlMode& target, const SolverOptions& opts, SolveReport& log) {
    if (!target.agc_enabled) throw std::invalid_argument("active-limit relaxation needs AGC enabled");
    ControlMode pre = target;
    pre.unbounded_p = true;
    pre.lambda_p = 0.0;
    pre.p_extra_min.clear();
    pre.p_extra_max.clear();
    auto layout = std::make_shared<const Layout>(net, pre);
    auto sol = attempt(net, flat_start(net, layout), pre, "pre-solve", 0.0, opts, log);
    if (!sol) throw ContinuationError("relaxed problem unsolvable: the AGC solve without active limits diverged");

    ControlMode out = target;
    out.lambda_p = 1.0;
    out.p_extra_min.assign(net.generators.size(), 0.0);
    out.p_extra_max.assign(net.generators.size(), 0.0);
    const double dps = sol->x[layout->dps()];
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        if (!is_agc_member(net, *layout, g)) continue;
        const auto& gen = net.generators[g];
        const double kappa = gen.agc_factor;
        const double dp = kappa * dps;
        const double lo = gen.p_min - gen.p_g;
        const double hi = gen.p_max - gen.p_g;
        // Violators keep their pre-solve point on the linear stretch, clear of the patch.
        const double margin = hi > lo ? 2.0 * kappa * default_patch_half_width(kappa, lo, hi) : 0.0;
        if (dp > hi) out.p_extra_max[g] = dp - hi + margin;
        if (dp < lo) out.p_extra_min[g] = dp - lo - margin;
    }
    return {out, std::move(sol)};
}

}  // namespace

const char* to_string(HomotopyMethod m) {
    switch (m) {
        case HomotopyMethod::none: return "none";
        case HomotopyMethod::smoothing: return "smoothing";
        case HomotopyMethod::q_limit: return "q-limit";
        case HomotopyMethod::p_limit: return "p-limit";
        case HomotopyMethod::tx: return "tx";
        case HomotopyMethod::composite: return "composite";
    }
    return "none";
}

HomotopyMethod parse_homotopy_method(const std::string& name) {
    for (auto m : {HomotopyMethod::none, HomotopyMethod::smoothing, HomotopyMethod::q_limit, HomotopyMethod::p_limit,
                   HomotopyMethod::tx, HomotopyMethod::composite}) {
        if (name == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown homotopy method '" + name + "'");
}

HomotopyPhase blend_phase(std::string name, const ControlMode& start, const ControlMode& end) {
    return {std::move(name), [start, end](double mu) { return blend(start, end, mu); }};
}

HomotopyPhase tx_stepping(const ControlMode& target, const HomotopySchedule& sched) {
    return blend_phase("tx", with_tx(target, sched), target);
}

StateVector run_phase(const NetworkCase& net, const StateVector& init, const HomotopyPhase& phase,
                      const HomotopySchedule& sched, const SolverOptions& opts, SolveReport& acc) {
    auto first = attempt(net, init, phase.mode_at(1.0), phase.name, 1.0, opts, acc);
    if (!first) throw ContinuationError("relaxed problem unsolvable (" + phase.name + " at mu=1)");
    StateVector s = std::move(*first);
    double mu_ok = 1.0;
    for (int steps = 0; mu_ok > 0.0; ++steps) {
        if (steps >= sched.max_steps) {
            throw ContinuationError(phase.name + ": step budget exhausted at mu=" + fmt(mu_ok));
        }
        double mu = mu_ok * sched.decrement;
        if (mu <= sched.finish_below) mu = 0.0;
        for (int back = 0;; ++back) {
            if (auto next = attempt(net, s, phase.mode_at(mu), phase.name, mu, opts, acc)) {
                s = std::move(*next);
                mu_ok = mu;
                break;
            }
            if (back >= sched.max_backtracks) {
                throw ContinuationError(phase.name + ": continuation stalled between mu=" + fmt(mu_ok) +
                                        " (solved) and mu=" + fmt(mu) + " (failed)");
            }
            mu = mu_ok - sched.backtrack * (mu_ok - mu);
        }
    }
    return s;
}

ControlMode init_q_limit_relaxation(const NetworkCase& net, const ControlMode& target, const SolverOptions& opts) {
    SolveReport log;
    return q_relaxation(net, target, opts, log).mode;
}

ControlMode init_p_limit_relaxation(const NetworkCase& net, const ControlMode& target, const SolverOptions& opts) {
    SolveReport log;
    return p_relaxation(net, target, opts, log).mode;
}

std::pair<StateVector, SolveReport> run_homotopy(const NetworkCase& net, const StateVector& init,
                                                 const ControlMode& target, const HomotopySchedule& sched,
                                                 const SolverOptions& opts) {
    if (sched.method == HomotopyMethod::none) return nr_solve(net, init, target, opts);

    SolveReport report;
    StateVector s = init;
    const auto m = sched.method;
    const bool composite = m == HomotopyMethod::composite;

    // Each relaxation is applied on top of the ones after it; phase k
    // removes relaxation k with the later ones still in place.
    struct Relaxation {
        std::string name;
        std::function<ControlMode(ControlMode)> apply;
    };
    std::vector<Relaxation> chain;
    std::optional<StateVector> warm;

    if (composite || m == HomotopyMethod::tx) {
        chain.push_back({"tx", [&sched](ControlMode c) { return with_tx(std::move(c), sched); }});
    }
    if (composite || m == HomotopyMethod::q_limit) {
        try {
            auto r = q_relaxation(net, target, opts, report);
            auto relax = r.mode.gen_relax;
            chain.push_back({"q-limit", [relax](ControlMode c) {
                                 c.gen_relax = relax;
                                 return c;
                             }});
            if (!composite) warm = std::move(r.warm);
        } catch (const ContinuationError& e) {
            if (!composite) throw;
            report.diagnostics.push_back(std::string("q-limit relaxation skipped: ") + e.what());
        }
    }
    if (composite || m == HomotopyMethod::p_limit) {
        if (!target.agc_enabled) {
            report.diagnostics.push_back("p-limit relaxation skipped: AGC is not enabled");
        } else {
            auto r = p_relaxation(net, target, opts, report);
            chain.push_back({"p-limit", [mode = r.mode](ControlMode c) {
                                 c.lambda_p = mode.lambda_p;
                                 c.p_extra_min = mode.p_extra_min;
                                 c.p_extra_max = mode.p_extra_max;
                                 return c;
                             }});
            if (!composite) warm = std::move(r.warm);
        }
    }
    if (composite || m == HomotopyMethod::smoothing) {
        chain.push_back({"smoothing", [&sched](ControlMode c) { return with_smoothing(std::move(c), sched); }});
    }

    if (warm) s = *warm;
    if (chain.empty()) {
        auto [x, rep] = nr_solve(net, s, target, opts);
        rep.diagnostics.insert(rep.diagnostics.begin(), report.diagnostics.begin(), report.diagnostics.end());
        return {std::move(x), std::move(rep)};
    }

    auto relaxed_from = [&](std::size_t k) {
        ControlMode c = target;
        for (std::size_t j = chain.size(); j-- > k;) c = chain[j].apply(std::move(c));
        return c;
    };
    for (std::size_t k = 0; k < chain.size(); ++k) {
        s = run_phase(net, s, blend_phase(chain[k].name, relaxed_from(k), relaxed_from(k + 1)), sched, opts, report);
    }

    // Endpoint check on the unrelaxed equations, independent of the last sub-solve.
    auto layout = std::make_shared<const Layout>(net, target);
    s = remap(net, s, layout);
    const Eigen::VectorXd f = residual(net, s, target);
    report.final_residual = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    report.converged = report.final_residual < opts.tol_residual;
    if (!report.converged) report.diagnostics.push_back("endpoint residual above tolerance on the target equations");
    report.device_regions = classify_regions(net, s, target);
    return {std::move(s), std::move(report)};
}

}  // namespace ivflow
