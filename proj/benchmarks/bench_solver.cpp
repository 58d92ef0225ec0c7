#include <benchmark/benchmark.h>

#include <memory>
#include <string>

#include "ivflow/assemble.hpp"
#include "ivflow/case_model.hpp"
#include "ivflow/pipeline.hpp"
#include "ivflow/smooth.hpp"

namespace {

ivflow::NetworkCase load(const std::string& file) {
    return ivflow::load_case(std::string(IVFLOW_DATA_DIR) + "/cases/" + file);
}

void BM_SigmoidEval(benchmark::State& state) {
    const ivflow::SigmoidSaturation s{-0.5, 1.5, 1.0, 5000.0, ivflow::Orientation::decreasing};
    double x = 0.999;
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.eval(x) + s.deriv(x));
        x = x < 1.001 ? x + 1e-7 : 0.999;
    }
}
BENCHMARK(BM_SigmoidEval);

void BM_Assemble(benchmark::State& state, const char* file) {
    const auto net = load(file);
    const ivflow::ControlMode ctl;
    auto lay = std::make_shared<const ivflow::Layout>(net, ctl);
    const auto s = ivflow::flat_start(net, lay);
    for (auto _ : state) benchmark::DoNotOptimize(ivflow::assemble(net, s, ctl).matrix());
    state.counters["unknowns"] = lay->size();
}
BENCHMARK_CAPTURE(BM_Assemble, case118, "case118.m")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Assemble, savnw_like, "savnw_like.json")->Unit(benchmark::kMicrosecond);

void BM_Solve(benchmark::State& state, const char* file, ivflow::HomotopyMethod method, bool agc) {
    const auto net = load(file);
    ivflow::PipelineOptions o;
    o.schedule.method = method;
    o.agc = agc;
    int iterations = 0;
    for (auto _ : state) {
        const auto r = ivflow::run_pipeline(net, o);
        if (!r.converged) state.SkipWithError("did not converge");
        iterations = r.report.iterations;
    }
    state.counters["nr_iterations"] = iterations;
}
BENCHMARK_CAPTURE(BM_Solve, case118, "case118.m", ivflow::HomotopyMethod::none, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, case118_composite, "case118.m", ivflow::HomotopyMethod::composite, false)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, savnw_heavy_agc, "savnw_like_heavy.json", ivflow::HomotopyMethod::none, true)
    ->Unit(benchmark::kMillisecond);

void BM_OuterLoop(benchmark::State& state) {
    const auto net = load("case118.m");
    ivflow::PipelineOptions o;
    o.model = ivflow::Model::outer_loop;
    for (auto _ : state) benchmark::DoNotOptimize(ivflow::run_pipeline(net, o).converged);
}
BENCHMARK(BM_OuterLoop)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
