#include "ivflow/control_mode.hpp"

#include <algorithm>

namespace ivflow {

namespace {

template <typename T>
T at_or(const std::vector<T>& v, std::size_t k, T fallback) {
    return k < v.size() ? v[k] : fallback;
}

double mix(double start, double end, double mu) { return end + mu * (start - end); }

std::vector<double> mix(const std::vector<double>& start, const std::vector<double>& end, double mu) {
    std::vector<double> out(std::max(start.size(), end.size()), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = mix(at_or(start, k, 0.0), at_or(end, k, 0.0), mu);
    return out;
}

}  // namespace

double ControlMode::steepness() const { return std::max(smoothing - lambda_s, steepness_floor); }

double ControlMode::steepness(std::size_t gen) const {
    const auto over = at_or(gen_lambda_s, gen, std::optional<double>{});
    return std::max(smoothing - over.value_or(lambda_s), steepness_floor);
}

LimitRelaxation ControlMode::relax(std::size_t gen) const { return at_or(gen_relax, gen, LimitRelaxation{}); }
HardState ControlMode::gen_hard(std::size_t gen) const { return at_or(gen_state, gen, HardState::regulating); }
HardState ControlMode::shunt_hard(std::size_t s) const { return at_or(shunt_state, s, HardState::regulating); }
HardState ControlMode::tap_hard(std::size_t br) const { return at_or(tap_state, br, HardState::regulating); }
double ControlMode::extra_min(std::size_t gen) const { return at_or(p_extra_min, gen, 0.0); }
double ControlMode::extra_max(std::size_t gen) const { return at_or(p_extra_max, gen, 0.0); }

double ControlMode::lambda_g_max() const {
    double m = 1.0;
    for (const auto& r : gen_relax) m = std::max(m, r.scale);
    return m;
}

ControlMode blend(const ControlMode& start, const ControlMode& end, double mu) {
    ControlMode out = end;
    out.smoothing = mix(start.smoothing, end.smoothing, mu);
    out.lambda_s = mix(start.lambda_s, end.lambda_s, mu);
    out.lambda_p = mix(start.lambda_p, end.lambda_p, mu);
    out.lambda_tx = mix(start.lambda_tx, end.lambda_tx, mu);

    const std::size_t n_over = std::max(start.gen_lambda_s.size(), end.gen_lambda_s.size());
    out.gen_lambda_s.assign(n_over, std::nullopt);
    for (std::size_t k = 0; k < n_over; ++k) {
        const auto a = at_or(start.gen_lambda_s, k, std::optional<double>{});
        const auto b = at_or(end.gen_lambda_s, k, std::optional<double>{});
        if (a || b) out.gen_lambda_s[k] = mix(a.value_or(start.lambda_s), b.value_or(end.lambda_s), mu);
    }

    const std::size_t n_relax = std::max(start.gen_relax.size(), end.gen_relax.size());
    out.gen_relax.assign(n_relax, LimitRelaxation{});
    for (std::size_t k = 0; k < n_relax; ++k) {
        const auto a = start.relax(k);
        const auto b = end.relax(k);
        out.gen_relax[k] = {mix(a.scale, b.scale, mu), mix(a.add_min, b.add_min, mu), mix(a.add_max, b.add_max, mu)};
    }
    out.p_extra_min = mix(start.p_extra_min, end.p_extra_min, mu);
    out.p_extra_max = mix(start.p_extra_max, end.p_extra_max, mu);
    return out;
}

}  // namespace ivflow
