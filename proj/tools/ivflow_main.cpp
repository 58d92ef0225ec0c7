// ivflow solve <case> [options]
// ivflow compare <case> [options]
//
// Exit status: 0 converged, 1 not converged, 2 input error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ivflow/case_model.hpp"
#include "ivflow/pipeline.hpp"
#include "ivflow/report.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitInputError = 2;

struct Args {
    std::string case_path;
    std::string models = "continuous";
    std::string homotopy = "none";
    double smoothing = 5000.0;
    double tol = 1e-6;
    int max_iter = 100;
    bool agc = false;
    std::string contingency;
    bool snap = false;
    std::string order = "smallest-first";
    std::string trace;
    std::string format;
    bool dispatch = false;
};

void add_common(CLI::App& cmd, Args& a) {
    cmd.add_option("case", a.case_path, "Case file (.m is MATPOWER, anything else native)")->required();
    cmd.add_option("--homotopy", a.homotopy, "none|smoothing|q-limit|p-limit|tx|composite")
        ->check(CLI::IsMember({"none", "smoothing", "q-limit", "p-limit", "tx", "composite"}));
    cmd.add_option("--smoothing", a.smoothing, "Sigmoid steepness S")->check(CLI::PositiveNumber);
    cmd.add_option("--tol", a.tol, "Residual and step tolerance in pu")->check(CLI::PositiveNumber);
    cmd.add_option("--max-iter", a.max_iter, "NR iteration cap per solve")->check(CLI::PositiveNumber);
    cmd.add_flag("--agc", a.agc, "Enable distributed slack");
    cmd.add_option("--contingency", a.contingency, "drop-gen:<id>");
    cmd.add_flag("--snap", a.snap, "Snap shunts and stepped taps, then re-solve");
    cmd.add_option("--order", a.order, "Outer-loop switch order")
        ->check(CLI::IsMember({"smallest-first", "largest-first"}));
    cmd.add_option("--trace", a.trace, "Write the per-iteration CSV trace here");
    cmd.add_option("--format", a.format, "matpower|native (default: by extension)")
        ->check(CLI::IsMember({"matpower", "native"}));
    cmd.add_flag("--dispatch", a.dispatch, "Print the active-power dispatch table");
}

ivflow::NetworkCase load(const Args& a) {
    std::optional<ivflow::CaseFormat> fmt;
    if (a.format == "matpower") fmt = ivflow::CaseFormat::matpower;
    if (a.format == "native") fmt = ivflow::CaseFormat::native;
    ivflow::NetworkCase net = ivflow::load_case(a.case_path, fmt);
    if (!a.contingency.empty()) {
        const std::string prefix = "drop-gen:";
        if (a.contingency.rfind(prefix, 0) != 0) {
            throw std::invalid_argument("unsupported contingency '" + a.contingency + "'; expected drop-gen:<id>");
        }
        std::size_t used = 0;
        const std::string id = a.contingency.substr(prefix.size());
        const int gen_id = std::stoi(id, &used);
        if (used != id.size()) throw std::invalid_argument("bad generator id in '" + a.contingency + "'");
        net = ivflow::drop_generator(net, gen_id);
        if (auto diag = ivflow::validate(net); !diag.empty()) throw ivflow::ValidationError(std::move(diag));
    }
    return net;
}

ivflow::PipelineOptions options(const Args& a, ivflow::Model model) {
    ivflow::PipelineOptions o;
    o.model = model;
    o.schedule.method = ivflow::parse_homotopy_method(a.homotopy);
    o.smoothing = a.smoothing;
    o.agc = a.agc;
    o.snap = a.snap;
    o.policy.order = ivflow::parse_switch_order(a.order);
    o.solver.tol_residual = a.tol;
    o.solver.tol_step = a.tol;
    o.solver.max_iter = a.max_iter;
    return o;
}

std::string case_name(const Args& a) { return std::filesystem::path(a.case_path).filename().string(); }

void write_trace(const std::string& path, const ivflow::PipelineResult& first, const ivflow::PipelineResult* second) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file " + path);
    ivflow::write_trace_csv(out, first);
    if (second) {
        std::ostringstream rest;
        ivflow::write_trace_csv(rest, *second);
        const std::string body = rest.str();
        out << body.substr(body.find('\n') + 1);
    }
}

int run_solve(const Args& a) {
    const auto net = load(a);
    const auto res = ivflow::run_pipeline(net, options(a, ivflow::parse_model(a.models)));
    ivflow::write_summary(std::cout, case_name(a), net, res);
    if (a.dispatch) ivflow::write_dispatch(std::cout, net, res);
    if (!a.trace.empty()) write_trace(a.trace, res, nullptr);
    return res.converged ? kExitConverged : kExitNotConverged;
}

int run_compare(const Args& a) {
    const auto net = load(a);
    const auto cont = ivflow::run_pipeline(net, options(a, ivflow::Model::continuous));
    const auto outer = ivflow::run_pipeline(net, options(a, ivflow::Model::outer_loop));
    std::cout << "case=" << case_name(a) << '\n';
    ivflow::write_compare(std::cout, cont, outer);
    if (!a.trace.empty()) write_trace(a.trace, cont, &outer);
    return cont.converged && outer.converged ? kExitConverged : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"I-V power flow with continuous device controls"};
    app.require_subcommand(1);
    Args solve_args, compare_args;

    auto* solve = app.add_subcommand("solve", "Solve one case and print a key=value summary");
    add_common(*solve, solve_args);
    solve->add_option("--models", solve_args.models, "continuous|outer-loop")
        ->check(CLI::IsMember({"continuous", "outer-loop"}));

    auto* compare = app.add_subcommand("compare", "Run the continuous and outer-loop pipelines side by side");
    add_common(*compare, compare_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    try {
        if (solve->parsed()) return run_solve(solve_args);
        return run_compare(compare_args);
    } catch (const ivflow::ValidationError& e) {
        std::cerr << "error: invalid case\n";
        for (const auto& d : e.diagnostics()) std::cerr << "  " << d << '\n';
    } catch (const ivflow::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kExitInputError;
}
