#include "ivflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ivflow/assemble.hpp"
#include "ivflow/stamps.hpp"

namespace ivflow {

namespace {

std::string num(double v, int digits = 8) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

const char* flag(bool b) { return b ? "true" : "false"; }

struct GenDispatch {
    double p_sched = 0.0;
    double delta = 0.0;
};

std::vector<GenDispatch> dispatch(const NetworkCase& net, const PipelineResult& res) {
    std::vector<GenDispatch> out(net.generators.size());
    const StateVector& s = *res.state;
    const Layout& lay = *s.layout;
    const SlackOutput slack = slack_output(net, s, res.ctl);
    double slack_sched = 0.0;
    int slack_count = 0;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        out[g].p_sched = net.generators[g].p_g;
        if (lay.role(g) == GenRole::slack) {
            slack_sched += net.generators[g].p_g;
            ++slack_count;
        } else if (is_agc_member(net, lay, g)) {
            out[g].delta = agc_share(net, res.ctl, g, s.x[lay.dps()]).value;
        }
    }
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        if (lay.role(g) != GenRole::slack) continue;
        const double share = slack_sched != 0.0 ? net.generators[g].p_g / slack_sched : 1.0 / slack_count;
        out[g].delta = slack.p * share - net.generators[g].p_g;
    }
    return out;
}

}  // namespace

Extrema voltage_extrema(const StateVector& state) {
    Extrema e{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::size_t b = 0; b < state.layout->bus_count(); ++b) {
        const double v = state.vmag(b);
        const double a = state.angle_deg(b);
        e.v_max = std::max(e.v_max, v);
        e.v_min = std::min(e.v_min, v);
        e.theta_max = std::max(e.theta_max, a);
        e.theta_min = std::min(e.theta_min, a);
    }
    return e;
}

RegionCounts count_regions(const SolveReport& report) {
    RegionCounts c;
    for (const auto& d : report.device_regions) {
        switch (d.region) {
            case Region::at_min: ++c.at_min; break;
            case Region::controlling: ++c.controlling; break;
            case Region::at_max: ++c.at_max; break;
            case Region::fixed: ++c.fixed; break;
        }
    }
    return c;
}

int count_unstable(const PipelineResult& res) {
    return static_cast<int>(std::count(res.stability.begin(), res.stability.end(), Stability::unstable));
}

void write_summary(std::ostream& os, const std::string& case_name, const NetworkCase& net, const PipelineResult& res) {
    os << "summary_version=" << kSummaryVersion << '\n';
    os << "case=" << case_name << '\n';
    os << "model=" << to_string(res.model) << '\n';
    os << "converged=" << flag(res.converged) << '\n';
    os << "iterations=" << res.report.iterations << '\n';
    os << "outer_iterations=" << res.outer_iterations << '\n';
    os << "homotopy=" << to_string(res.homotopy) << '\n';
    os << "homotopy_fallback=" << flag(res.fallback_used) << '\n';
    os << "homotopy_steps=" << res.report.path.size() << '\n';
    os << "final_residual=" << num(res.report.final_residual, 4) << '\n';
    if (res.failure) os << "failure=" << *res.failure << '\n';
    if (!res.state) return;

    const auto e = voltage_extrema(*res.state);
    os << "v_max_pu=" << num(e.v_max) << '\n';
    os << "v_min_pu=" << num(e.v_min) << '\n';
    os << "theta_max_deg=" << num(e.theta_max) << '\n';
    os << "theta_min_deg=" << num(e.theta_min) << '\n';
    const auto rc = count_regions(res.report);
    os << "regions_at_min=" << rc.at_min << '\n';
    os << "regions_controlling=" << rc.controlling << '\n';
    os << "regions_at_max=" << rc.at_max << '\n';
    os << "regions_fixed=" << rc.fixed << '\n';
    if (res.converged) {
        const int unstable = count_unstable(res);
        os << "stable_generators=" << static_cast<int>(res.stability.size()) - unstable << '\n';
        os << "unstable_generators=" << unstable << '\n';
    }
    if (res.switches) {
        os << "pv_to_pq=" << res.switches->pv_to_pq() << '\n';
        os << "pq_to_pv=" << res.switches->pq_to_pv() << '\n';
        os << "fixed_as_pq=" << std::count(res.switches->fixed_pq.begin(), res.switches->fixed_pq.end(), true)
           << '\n';
        os << "oscillation_unresolved=" << flag(res.switches->oscillation_unresolved) << '\n';
    }
    if (res.snapped) {
        os << "snap_iterations=" << res.snap_iterations << '\n';
        os << "snap_continuation=" << flag(res.snap_continuation) << '\n';
        for (const auto& [s, b] : res.ctl.fixed_shunt_b) os << "snap_shunt_" << s << "_b_pu=" << num(b, 10) << '\n';
        for (const auto& [br, t] : res.ctl.fixed_tap_ratio) os << "snap_tap_" << br << "_ratio=" << num(t, 10) << '\n';
    }
    const SlackOutput slack = slack_output(net, *res.state, res.ctl);
    os << "slack_p_mw=" << num(slack.p * net.s_base) << '\n';
    os << "slack_q_mvar=" << num(slack.q * net.s_base) << '\n';
    if (res.state->layout->agc()) {
        os << "agc_delta_ps_mw=" << num(res.state->x[res.state->layout->dps()] * net.s_base) << '\n';
    }
    for (const auto& d : res.report.diagnostics) os << "diagnostic=" << d << '\n';
}

void write_dispatch(std::ostream& os, const NetworkCase& net, const PipelineResult& res) {
    if (!res.state) return;
    const auto d = dispatch(net, res);
    os << "gen,bus,p_sched_mw,delta_p_mw,p_final_mw,p_max_mw\n";
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        os << gen.id << ',' << gen.bus << ',' << num(d[g].p_sched * net.s_base) << ',' << num(d[g].delta * net.s_base)
           << ',' << num((d[g].p_sched + d[g].delta) * net.s_base) << ',' << num(gen.p_max * net.s_base) << '\n';
    }
}

void write_trace_csv(std::ostream& os, const PipelineResult& res) {
    os << kTraceHeader << '\n';
    for (const auto& r : res.report.trace) {
        os << r.phase << ',' << r.outer_iter << ',' << r.inner_iter << ',' << num(r.lambda_s) << ','
           << num(r.lambda_g_max) << ',' << num(r.lambda_p) << ',' << num(r.lambda_tx) << ','
           << num(r.max_residual, 6) << ',' << num(r.max_step, 6) << ',' << r.pv_to_pq << ',' << r.pq_to_pv << '\n';
    }
}

void write_compare(std::ostream& os, const PipelineResult& cont, const PipelineResult& outer) {
    auto row = [&os](const std::string& name, const std::string& a, const std::string& b) {
        os << std::left << std::setw(22) << name << std::setw(16) << a << b << '\n';
    };
    auto ext = [](const PipelineResult& r, double Extrema::*field) {
        return r.state ? num(voltage_extrema(*r.state).*field, 6) : std::string("-");
    };
    row("field", "continuous", "outer-loop");
    row("converged", flag(cont.converged), flag(outer.converged));
    row("iterations", std::to_string(cont.report.iterations), std::to_string(outer.report.iterations));
    row("outer_iterations", std::to_string(cont.outer_iterations), std::to_string(outer.outer_iterations));
    row("pv_to_pq", "0", outer.switches ? std::to_string(outer.switches->pv_to_pq()) : "-");
    row("pq_to_pv", "0", outer.switches ? std::to_string(outer.switches->pq_to_pv()) : "-");
    row("v_max_pu", ext(cont, &Extrema::v_max), ext(outer, &Extrema::v_max));
    row("v_min_pu", ext(cont, &Extrema::v_min), ext(outer, &Extrema::v_min));
    row("theta_max_deg", ext(cont, &Extrema::theta_max), ext(outer, &Extrema::theta_max));
    row("theta_min_deg", ext(cont, &Extrema::theta_min), ext(outer, &Extrema::theta_min));
    auto unstable = [](const PipelineResult& r) { return r.converged ? std::to_string(count_unstable(r)) : "-"; };
    row("unstable_generators", unstable(cont), unstable(outer));
    if (cont.state && outer.state) {
        double dv = 0.0;
        for (std::size_t b = 0; b < cont.state->layout->bus_count(); ++b) {
            dv = std::max(dv, std::abs(cont.state->vmag(b) - outer.state->vmag(b)));
        }
        row("max_abs_dv_pu", num(dv, 4), "");
    }
}

}  // namespace ivflow
