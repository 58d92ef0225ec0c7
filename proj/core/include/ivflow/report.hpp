#pragma once

// Text outputs: key=value summaries, the CSV iteration trace and the
// side-by-side comparison table.

#include <ostream>
#include <string>

#include "ivflow/case_model.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/pipeline.hpp"

namespace ivflow {

inline constexpr int kSummaryVersion = 1;
inline constexpr const char* kTraceHeader =
    "phase,outer_iter,inner_iter,lambda_s,lambda_g_max,lambda_p,lambda_tx,max_residual,max_step,pv_to_pq,pq_to_pv";

struct Extrema {
    double v_max = 0.0;
    double v_min = 0.0;
    double theta_max = 0.0;  // degrees
    double theta_min = 0.0;
};

Extrema voltage_extrema(const StateVector& state);

struct RegionCounts {
    int at_min = 0;
    int controlling = 0;
    int at_max = 0;
    int fixed = 0;
};

RegionCounts count_regions(const SolveReport& report);
int count_unstable(const PipelineResult& res);

/// One key=value record for a pipeline run.
void write_summary(std::ostream& os, const std::string& case_name, const NetworkCase& net, const PipelineResult& res);

/// AGC dispatch: per generator scheduled P, change and final P in MW.
void write_dispatch(std::ostream& os, const NetworkCase& net, const PipelineResult& res);

void write_trace_csv(std::ostream& os, const PipelineResult& res);

/// Continuous and outer-loop results side by side.
void write_compare(std::ostream& os, const PipelineResult& cont, const PipelineResult& outer);

}  // namespace ivflow
