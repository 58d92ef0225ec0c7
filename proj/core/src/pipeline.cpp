#include "ivflow/pipeline.hpp"

#include <stdexcept>

#include "ivflow/errors.hpp"

namespace ivflow {

namespace {

bool try_homotopy(const NetworkCase& net, const ControlMode& target, HomotopySchedule sched, HomotopyMethod m,
                  const SolverOptions& opts, PipelineResult& res) {
    sched.method = m;
    auto layout = std::make_shared<const Layout>(net, target);
    try {
        auto [x, rep] = run_homotopy(net, flat_start(net, layout), target, sched, opts);
        rep.diagnostics.insert(rep.diagnostics.begin(), res.report.diagnostics.begin(), res.report.diagnostics.end());
        rep.iterations += res.report.iterations;
        res.report = std::move(rep);
        res.state = std::move(x);
        res.homotopy = m;
        return res.report.converged;
    } catch (const ContinuationError& e) {
        res.report.diagnostics.push_back(std::string(to_string(m)) + ": " + e.what());
    } catch (const SingularSystemError& e) {
        res.report.diagnostics.push_back(std::string(to_string(m)) + ": " + e.what());
    } catch (const SingularPointError& e) {
        res.report.diagnostics.push_back(std::string(to_string(m)) + ": " + e.what());
    }
    return false;
}

void run_continuous(const NetworkCase& net, const PipelineOptions& opts, PipelineResult& res) {
    res.ctl = continuous_mode(net, opts);
    const auto requested = opts.schedule.method;
    if (try_homotopy(net, res.ctl, opts.schedule, requested, opts.solver, res)) return;
    if (requested != HomotopyMethod::none || !opts.homotopy_fallback) return;
    for (auto m : {HomotopyMethod::smoothing, HomotopyMethod::composite}) {
        res.fallback_used = true;
        res.report.diagnostics.push_back(std::string("falling back to ") + to_string(m) + " homotopy");
        if (try_homotopy(net, res.ctl, opts.schedule, m, opts.solver, res)) return;
    }
}

}  // namespace

const char* to_string(Model m) { return m == Model::continuous ? "continuous" : "outer-loop"; }

Model parse_model(const std::string& name) {
    if (name == "continuous") return Model::continuous;
    if (name == "outer-loop") return Model::outer_loop;
    throw std::invalid_argument("unknown model '" + name + "'");
}

ControlMode continuous_mode(const NetworkCase& net, const PipelineOptions& opts) {
    ControlMode ctl;
    ctl.smoothing = opts.smoothing;
    ctl.agc_enabled = opts.agc || net.agc_enabled;
    return ctl;
}

PipelineResult run_pipeline(const NetworkCase& net, const PipelineOptions& opts) {
    PipelineResult res;
    res.model = opts.model;

    if (opts.model == Model::continuous) {
        run_continuous(net, opts, res);
    } else {
        ControlMode base = continuous_mode(net, opts);
        auto ol = solve_outer_loop(net, base, opts.solver, opts.policy);
        res.ctl = std::move(ol.ctl);
        res.report = std::move(ol.report);
        res.state = std::move(ol.state);
        res.outer_iterations = static_cast<int>(ol.switches.iterations.size());
        res.switches = std::move(ol.switches);
    }
    res.converged = res.state && res.report.converged;
    if (!res.converged) {
        res.failure = res.report.diagnostics.empty() ? "not converged" : res.report.diagnostics.back();
        return res;
    }

    if (opts.snap && has_discrete_devices(net)) {
        try {
            auto snap = resolve_after_snap(net, *res.state, res.ctl, opts.solver, opts.schedule);
            res.snapped = true;
            res.snap_iterations = snap.report.iterations;
            res.snap_continuation = snap.continuation_used;
            res.report.iterations += snap.report.iterations;
            res.report.trace.insert(res.report.trace.end(), snap.report.trace.begin(), snap.report.trace.end());
            res.report.path.insert(res.report.path.end(), snap.report.path.begin(), snap.report.path.end());
            res.report.final_residual = snap.report.final_residual;
            res.report.device_regions = snap.report.device_regions;
            res.ctl = std::move(snap.ctl);
            res.state = std::move(snap.state);
        } catch (const SnapInfeasibleError& e) {
            res.converged = false;
            res.failure = e.what();
            res.report.diagnostics.push_back(e.what());
            return res;
        }
    }
    res.stability = classify_stability(net, *res.state);
    return res;
}

}  // namespace ivflow
