// Acceptance run: one PASS / FAIL / SKIP line per criterion. Exit status is
// nonzero when any gating criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "jacobian.hpp"
#include "ivflow/assemble.hpp"
#include "ivflow/pipeline.hpp"
#include "ivflow/report.hpp"
#include "ivflow/smooth.hpp"
#include "ivflow/stamps.hpp"

using namespace ivflow;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::pass;
    std::string detail;
};

// Collects failed conditions; the first few go into the report line.
class Findings {
public:
    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (failures_++ < 3) {
            if (!text_.empty()) text_ += "; ";
            text_ += what;
        }
    }
    [[nodiscard]] Outcome outcome(const std::string& summary) const {
        if (failures_ == 0) return {Status::pass, summary};
        return {Status::fail, summary + "; " + std::to_string(failures_) + " failed: " + text_};
    }

private:
    int failures_ = 0;
    std::string text_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

double fd_error(double analytic, double numeric) { return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic)); }

template <class F>
double central_difference(F f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double max_dv(const StateVector& a, const StateVector& b) {
    double dv = 0.0;
    for (std::size_t k = 0; k < a.layout->bus_count(); ++k) dv = std::max(dv, std::abs(a.vmag(k) - b.vmag(k)));
    return dv;
}

double unrelaxed_residual(const NetworkCase& net, const StateVector& s, const ControlMode& target) {
    return residual(net, s, target).cwiseAbs().maxCoeff();
}

PipelineResult pipeline(const NetworkCase& net, Model model, bool agc = false,
                        SwitchOrder order = SwitchOrder::smallest_first) {
    PipelineOptions o;
    o.model = model;
    o.agc = agc;
    o.policy.order = order;
    return run_pipeline(net, o);
}

int unstable(const PipelineResult& r) { return count_unstable(r); }

Outcome ac1_primitives() {
    const auto t0 = Clock::now();
    Findings f;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double lo = -2.0 + 2.0 * unit(rng);
        const SigmoidSaturation s{lo, lo + 0.01 + 3.0 * unit(rng), 0.9 + 0.2 * unit(rng), 5000.0,
                                  k % 2 ? Orientation::increasing : Orientation::decreasing};
        const double span = k % 4 < 2 ? 8.0 / s.steepness : 0.3;
        const double x = s.x_set + span * (2.0 * unit(rng) - 1.0);
        const double e = fd_error(s.deriv(x), central_difference([&](double v) { return s.eval(v); }, x, 1e-7));
        worst = std::max(worst, e);
    }
    for (int k = 0; k < 1000; ++k) {
        const auto p = ParticipationCurve::build(0.02 + 2.0 * unit(rng), -0.5 - 5.0 * unit(rng), 0.2 + 5.0 * unit(rng));
        const auto bp = p.breakpoints();
        const double x = k % 2 == 0 ? bp[k % 4] + (k % 4 < 2 ? 1e-6 : -1e-6)
                                    : (bp[0] - 1.0) + (bp[3] - bp[0] + 2.0) * unit(rng);
        const double e = fd_error(p.deriv(x), central_difference([&](double v) { return p.eval(v); }, x, 1e-8));
        worst = std::max(worst, e);
    }
    f.require(worst < 1e-5, "worst derivative error " + fmt(worst));

    const SigmoidSaturation s{-1.0, 1.0, 1.0, 5000.0, Orientation::decreasing};
    double band_err = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double d = 1.11e-3 + 0.05 * k / 1000.0;
        band_err = std::max({band_err, std::abs(s.eval(1.0 + d) - s.y_min), std::abs(s.eval(1.0 - d) - s.y_max)});
    }
    f.require(band_err <= 0.004 * (s.y_max - s.y_min), "saturation error " + fmt(band_err));
    const double t = seconds_since(t0);
    f.require(t < 1.0, "runtime " + fmt(t) + " s");
    return f.outcome("2000 derivative checks, worst " + fmt(worst, 2) + "; band error " +
                     fmt(100.0 * band_err / 2.0, 2) + "% of range");
}

Outcome ac2_jacobian() {
    const auto t0 = Clock::now();
    Findings f;
    int states = 0;
    std::uint64_t seed = 100;
    auto sweep = [&](const NetworkCase& net, const std::string& label) {
        for (const auto& cfg : test::jacobian_configs(net)) {
            const auto r = test::sweep_random_states(net, cfg.sample, seed++);
            states += r.states;
            f.require(r.bad_states == 0, label + " / " + cfg.name + ": " + r.first);
        }
    };
    sweep(test::all_devices_case(), "all-devices");
    sweep(test::load("discrete_5bus.json"), "discrete_5bus");
    sweep(test::load("oscillation_3bus.json"), "oscillation_3bus");
    const double t = seconds_since(t0);
    f.require(t < 10.0, "runtime " + fmt(t) + " s");
    return f.outcome(std::to_string(states) + " random states in " + fmt(t, 2) + " s");
}

Outcome ac3_two_bus() {
    Findings f;
    const auto net = test::load("two_bus.json");
    const auto [s, rep] = nr_solve(net, ControlMode{});
    f.require(rep.converged, "did not converge");
    const double r = 0.01, x = 0.1, p = 0.5, q = 0.1;
    const double b = 2.0 * (r * p + x * q) - 1.0;
    const double c = (r * r + x * x) * (p * p + q * q);
    const double v2 = std::sqrt((-b + std::sqrt(b * b - 4.0 * c)) / 2.0);
    const double err = std::abs(s.vmag(1) - v2);
    f.require(err < 1e-8, "|V2| error " + fmt(err));
    return f.outcome("|V2| = " + fmt(s.vmag(1), 10) + ", error " + fmt(err, 2));
}

Outcome ac4_small_cases() {
    Findings f;
    std::string summary;
    for (const char* file : {"case9.m", "case14.m", "case30.m", "case118.m"}) {
        const auto t0 = Clock::now();
        const auto net = test::load(file);
        PipelineOptions o;
        const auto r = run_pipeline(net, o);
        const double t = seconds_since(t0);
        const std::string name = std::filesystem::path(file).stem().string();
        f.require(r.converged, name + " did not converge");
        if (r.state) {
            const double res = unrelaxed_residual(net, *r.state, continuous_mode(net, o));
            f.require(res < 1e-6, name + " residual " + fmt(res));
        }
        f.require(t < 5.0, name + " took " + fmt(t) + " s");
        if (!summary.empty()) summary += ", ";
        summary += name + " " + std::to_string(r.report.iterations) + " it" +
                   (r.fallback_used ? " (fallback " + std::string(to_string(r.homotopy)) + ")" : "");
    }
    return f.outcome(summary);
}

Outcome ac5_equivalence() {
    Findings f;
    int compared = 0;
    double worst_dv = 0.0;
    double worst_dq = 0.0;
    for (const auto& file : test::bundled_cases()) {
        const auto net = test::load(file);
        const auto ol = pipeline(net, Model::outer_loop);
        if (!ol.converged || !ol.switches) continue;
        const auto& sw = *ol.switches;
        const bool oscillated = sw.pq_to_pv() > 0 || sw.oscillation_unresolved ||
                                std::count(sw.fixed_pq.begin(), sw.fixed_pq.end(), true) > 0;
        if (oscillated) continue;
        const auto cont = pipeline(net, Model::continuous);
        f.require(cont.converged, file + ": continuous did not converge");
        if (!cont.converged) continue;
        ++compared;
        const double dv = max_dv(*cont.state, *ol.state);
        worst_dv = std::max(worst_dv, dv);
        f.require(dv <= 2e-3, file + ": |dV| " + fmt(dv));
        for (std::size_t g = 0; g < net.generators.size(); ++g) {
            if (ol.state->layout->q_gen(g) < 0 || cont.state->layout->q_gen(g) < 0) continue;
            const auto& gen = net.generators[g];
            const double range = gen.q_max - gen.q_min;
            if (!(range > 0.0)) continue;
            const double dq = std::abs(test::gen_q(*cont.state, net, g) - test::gen_q(*ol.state, net, g)) / range;
            worst_dq = std::max(worst_dq, dq);
            f.require(dq <= 0.004, file + ": gen " + std::to_string(gen.id) + " |dQ| " + fmt(100.0 * dq) + "% of range");
        }
    }
    f.require(compared > 0, "no case qualified");
    return f.outcome(std::to_string(compared) + " cases, worst |dV| " + fmt(worst_dv, 2) + " pu, worst |dQ| " +
                     fmt(100.0 * worst_dq, 2) + "% of range");
}

Outcome ac6_oscillation() {
    Findings f;
    const auto osc = test::load("oscillation_3bus.json");
    const auto ol = pipeline(osc, Model::outer_loop);
    const auto cont = pipeline(osc, Model::continuous);
    const int toggles = ol.switches ? ol.switches->pv_to_pq() + ol.switches->pq_to_pv() : 0;
    f.require(toggles >= 4, "only " + std::to_string(toggles) + " toggles");
    f.require(ol.converged && unstable(ol) >= 1, "outer loop has no unstable generator");
    f.require(cont.converged, "continuous did not converge");
    f.require(cont.converged && unstable(cont) == 0, "continuous has unstable generators");

    const auto ord = test::load("order_sensitivity_5bus.json");
    const auto small = pipeline(ord, Model::outer_loop, false, SwitchOrder::smallest_first);
    const auto large = pipeline(ord, Model::outer_loop, false, SwitchOrder::largest_first);
    f.require(small.converged && large.converged, "order case did not converge");
    const double dv = small.state && large.state ? max_dv(*small.state, *large.state) : 0.0;
    f.require(dv > 1e-3, "order |dV| " + fmt(dv));
    return f.outcome(std::to_string(toggles) + " toggles, " + std::to_string(ol.converged ? unstable(ol) : 0) +
                     " unstable (continuous 0); order |dV| " + fmt(dv, 3) + " pu");
}

Outcome ac7_distributed_slack() {
    Findings f;
    const std::vector<int> ids{101, 102, 206, 211, 3011, 3018};
    const std::vector<double> kappa{0.23, 0.23, 0.25, 0.18, 0.08, 0.03};
    const std::vector<double> p_max{810, 810, 900, 616, 900, 117};
    const auto base = test::load("savnw_like.json");
    f.require(base.generators.size() == 6, "expected 6 generators");
    for (std::size_t k = 0; k < ids.size() && base.generators.size() == 6; ++k) {
        const auto& g = base.generators[test::gen_index(base, ids[k])];
        f.require(g.agc_factor == kappa[k] && std::abs(g.p_max * base.s_base - p_max[k]) < 1e-9,
                  "gen " + std::to_string(ids[k]) + " data");
    }

    auto losses = [](const NetworkCase& net, const PipelineResult& r) {
        double p = 0.0;
        for (const auto& v : test::network_power(net, *r.state, r.ctl)) p += v.real();
        return p;
    };
    auto balance = [&](const NetworkCase& net, const PipelineResult& r, const std::string& label) {
        f.require(test::max_bus_mismatch(net, *r.state, r.ctl) <= 1e-6, label + ": bus balance");
        const std::size_t sb = r.state->layout->slack_bus();
        const double from_buses =
            (test::network_power(net, *r.state, r.ctl)[sb] - test::device_power(net, *r.state, r.ctl)[sb]).real();
        f.require(std::abs(from_buses - slack_output(net, *r.state, r.ctl).p) <= 1e-6, label + ": slack balance");
        f.require(r.outer_iterations == 0 && !r.switches, label + ": outer-loop iterations");
    };
    auto final_p = [](const NetworkCase& net, const PipelineResult& r, std::size_t g) {
        const double dps = r.state->layout->agc() ? r.state->x[r.state->layout->dps()] : 0.0;
        return net.generators[g].p_g + (r.state->layout->agc() ? agc_share(net, r.ctl, g, dps).value : 0.0);
    };

    const auto pre = pipeline(base, Model::continuous);
    const auto net = drop_generator(base, 211);
    const auto off = pipeline(net, Model::continuous);
    const auto on = pipeline(net, Model::continuous, true);
    const auto heavy_net = drop_generator(test::load("savnw_like_heavy.json"), 211);
    const auto heavy = pipeline(heavy_net, Model::continuous, true);
    if (!(pre.converged && off.converged && on.converged && heavy.converged)) {
        return {Status::fail, "a savnw solve did not converge"};
    }

    const double lost = base.generators[test::gen_index(base, 211)].p_g;
    const double d_slack = slack_output(net, *off.state, off.ctl).p - slack_output(base, *pre.state, pre.ctl).p;
    const double d_loss = losses(net, off) - losses(base, pre);
    f.require(std::abs(d_slack - lost - d_loss) <= 1e-6, "AGC off: slack change " + fmt(d_slack));
    balance(net, off, "AGC off");

    const double dps = on.state->x[on.state->layout->dps()];
    for (int id : {101, 102}) {
        const double p = final_p(net, on, test::gen_index(net, id)) * net.s_base;
        f.require(std::abs(p - 810.0) <= 1e-4, "AGC on: gen " + std::to_string(id) + " at " + fmt(p, 8) + " MW");
    }
    const auto g3018 = test::gen_index(net, 3018);
    const double share = final_p(net, on, g3018) - net.generators[g3018].p_g;
    f.require(std::abs(share - 0.03 * dps) <= 1e-9 * std::abs(dps), "AGC on: 3018 off its factor");
    balance(net, on, "AGC on");

    for (std::size_t g = 0; g < heavy_net.generators.size(); ++g) {
        if (heavy.state->layout->role(g) == GenRole::slack) continue;
        const double gap = std::abs(final_p(heavy_net, heavy, g) - heavy_net.generators[g].p_max);
        f.require(gap <= 1e-6, "heavy: gen " + std::to_string(heavy_net.generators[g].id) + " off P_max by " + fmt(gap));
    }
    balance(heavy_net, heavy, "heavy");
    return f.outcome("slack +" + fmt(d_slack * net.s_base, 5) + " MW without AGC; 101/102 at 810 MW with AGC; "
                     "heavy case all participants at P_max");
}

Outcome ac8_snap() {
    Findings f;
    int cases = 0;
    std::string summary;
    auto on_steps = [](const std::vector<double>& steps, double v) {
        return std::any_of(steps.begin(), steps.end(), [v](double s) { return std::abs(s - v) <= 1e-12; });
    };
    for (const auto& file : test::bundled_cases()) {
        const auto net = test::load(file);
        if (!has_discrete_devices(net)) continue;
        ++cases;
        PipelineOptions o;
        o.snap = true;
        const auto r = run_pipeline(net, o);
        f.require(r.converged && r.snapped, file + ": snapped re-solve did not converge");
        if (!r.converged) continue;
        for (const auto& [k, b] : r.ctl.fixed_shunt_b) {
            f.require(on_steps(shunt_steps(net.switched_shunts[k]), b), file + ": shunt " + std::to_string(k));
        }
        for (const auto& [br, t] : r.ctl.fixed_tap_ratio) {
            f.require(on_steps(tap_steps(*net.branches[br].tap), t), file + ": tap " + std::to_string(br));
        }
        const auto [flat, flat_rep] = nr_solve(net, r.ctl);
        f.require(flat_rep.converged, file + ": flat-start re-solve failed");
        f.require(r.snap_iterations <= flat_rep.iterations,
                  file + ": warm " + std::to_string(r.snap_iterations) + " > flat " + std::to_string(flat_rep.iterations));
        if (!summary.empty()) summary += ", ";
        summary += file + " warm " + std::to_string(r.snap_iterations) + " / flat " + std::to_string(flat_rep.iterations);
    }
    f.require(cases > 0, "no bundled case has discrete devices");
    return f.outcome(summary);
}

std::string pegase_path() {
    if (const char* env = std::getenv("IVFLOW_PEGASE_CASE"); env && *env) return env;
    return test::case_path("case13659pegase.m");
}

Outcome ac9_pegase() {
    const std::string path = pegase_path();
    if (!std::filesystem::exists(path)) return {Status::skip, "case13659pegase.m not supplied"};
    Findings f;
    const auto t0 = Clock::now();
    const auto net = load_case(path);
    const auto r = run_pipeline(net, PipelineOptions{});
    const double t = seconds_since(t0);
    f.require(r.converged, "did not converge");
    if (!r.state) return f.outcome("");
    const auto e = voltage_extrema(*r.state);
    f.require(std::abs(e.v_max - 1.18) <= 0.01, "V_max " + fmt(e.v_max, 4));
    f.require(std::abs(e.v_min - 0.84) <= 0.01, "V_min " + fmt(e.v_min, 4));
    f.require(t < 120.0, "runtime " + fmt(t) + " s");
    return f.outcome("V_max " + fmt(e.v_max, 4) + ", V_min " + fmt(e.v_min, 4) + " in " + fmt(t) + " s");
}

Outcome ac10_endpoints() {
    Findings f;
    int runs = 0;
    double worst = 0.0;
    for (const auto& file : test::bundled_cases()) {
        const auto net = test::load(file);
        for (auto m : {HomotopyMethod::none, HomotopyMethod::smoothing, HomotopyMethod::q_limit,
                       HomotopyMethod::p_limit, HomotopyMethod::tx, HomotopyMethod::composite}) {
            const std::string label = file + " " + to_string(m);
            ControlMode target;
            target.agc_enabled = m == HomotopyMethod::p_limit || m == HomotopyMethod::composite;
            HomotopySchedule sched;
            sched.method = m;
            try {
                auto lay = std::make_shared<const Layout>(net, target);
                const auto [s, rep] = run_homotopy(net, flat_start(net, lay), target, sched, SolverOptions{});
                ++runs;
                f.require(rep.converged, label + " did not converge");
                const double res = unrelaxed_residual(net, s, target);
                worst = std::max(worst, res);
                f.require(res < 1e-6, label + " residual " + fmt(res));
            } catch (const std::exception& e) {
                f.require(false, label + ": " + e.what());
            }
        }
    }
    return f.outcome(std::to_string(runs) + " runs, worst residual " + fmt(worst, 2) + " pu");
}

struct Criterion {
    const char* id;
    const char* title;
    bool gating;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"AC-1", "primitive fidelity", true, ac1_primitives},
        {"AC-2", "Jacobian correctness", true, ac2_jacobian},
        {"AC-3", "2-bus closed form", true, ac3_two_bus},
        {"AC-4", "small-case convergence", true, ac4_small_cases},
        {"AC-5", "continuous vs outer-loop", true, ac5_equivalence},
        {"AC-6", "oscillation and order sensitivity", true, ac6_oscillation},
        {"AC-7", "distributed slack", true, ac7_distributed_slack},
        {"AC-8", "snap and re-solve", true, ac8_snap},
        {"AC-9", "Pegase 13659-bus", false, ac9_pegase},
        {"AC-10", "homotopy endpoints", true, ac10_endpoints},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        if (o.status == Status::fail && c.gating) ++failed;
        std::cout << std::left << std::setw(6) << c.id << ' ' << tag << "  " << c.title << ": " << o.detail << " ["
                  << fmt(seconds_since(t0), 2) << " s]" << (o.status == Status::fail && !c.gating ? " (non-gating)" : "")
                  << std::endl;
    }
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
