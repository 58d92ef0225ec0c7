#pragma once

// Everything that selects *which* equations are assembled for a case: the
// device limit model, the homotopy parameters and the discrete devices that
// have been snapped to a fixed value.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace ivflow {

enum class LimitModel {
    continuous,  // sigmoid / participation rows
    hard,        // regulate-or-clamp rows driven by HardState
};

/// Hard-model state of one controllable device.
enum class HardState { regulating, at_min, at_max };

/// Relaxed reactive limits: [scale*min - add_min, scale*max + add_max].
struct LimitRelaxation {
    double scale = 1.0;
    double add_min = 0.0;
    double add_max = 0.0;

    bool operator==(const LimitRelaxation&) const = default;
};

struct ControlMode {
    double smoothing = 5000.0;
    double lambda_s = 0.0;
    double steepness_floor = 10.0;
    /// Per-generator lambda_s overriding the global value when set.
    std::vector<std::optional<double>> gen_lambda_s;

    std::vector<LimitRelaxation> gen_relax;  // indexed by generator; empty means none

    bool agc_enabled = false;
    bool unbounded_p = false;  // participation curves replaced by their linear part
    double lambda_p = 0.0;
    std::vector<double> p_extra_min;  // <= 0, indexed by generator
    std::vector<double> p_extra_max;  // >= 0

    double lambda_tx = 0.0;
    double tx_gain = 1e3;

    LimitModel gen_model = LimitModel::continuous;
    LimitModel shunt_model = LimitModel::continuous;
    LimitModel tap_model = LimitModel::continuous;
    std::vector<HardState> gen_state;  // empty means all regulating
    std::vector<HardState> shunt_state;
    std::vector<HardState> tap_state;  // indexed by branch

    /// Snapped discrete devices: switched-shunt index -> susceptance,
    /// branch index -> turns ratio. These devices leave the unknown set.
    std::map<std::size_t, double> fixed_shunt_b;
    std::map<std::size_t, double> fixed_tap_ratio;

    [[nodiscard]] double steepness(std::size_t gen) const;
    [[nodiscard]] double steepness() const;
    [[nodiscard]] LimitRelaxation relax(std::size_t gen) const;
    [[nodiscard]] HardState gen_hard(std::size_t gen) const;
    [[nodiscard]] HardState shunt_hard(std::size_t s) const;
    [[nodiscard]] HardState tap_hard(std::size_t br) const;
    [[nodiscard]] double extra_min(std::size_t gen) const;
    [[nodiscard]] double extra_max(std::size_t gen) const;
    /// Largest reactive-limit scale in effect (1 when unrelaxed).
    [[nodiscard]] double lambda_g_max() const;

    bool operator==(const ControlMode&) const = default;
};

/// `end + mu * (start - end)` for every continuous parameter; discrete
/// fields are taken from `end`. mu = 1 gives `start`, mu = 0 gives `end`.
ControlMode blend(const ControlMode& start, const ControlMode& end, double mu);

}  // namespace ivflow
