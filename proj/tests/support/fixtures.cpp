#include "fixtures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "ivflow/stamps.hpp"

namespace ivflow::test {

namespace {

using cd = std::complex<double>;

double tap_ratio(const NetworkCase& net, const StateVector& s, const ControlMode& ctl, std::size_t br) {
    if (auto it = ctl.fixed_tap_ratio.find(br); it != ctl.fixed_tap_ratio.end()) return it->second;
    const int col = s.layout->tap(br);
    return col >= 0 ? s.x[col] : net.branches[br].ratio;
}

}  // namespace

std::string case_path(const std::string& file) { return std::string(IVFLOW_DATA_DIR) + "/cases/" + file; }

NetworkCase load(const std::string& file) { return load_case(case_path(file)); }

std::vector<std::string> bundled_cases() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(std::string(IVFLOW_DATA_DIR) + "/cases")) {
        const auto ext = e.path().extension();
        if (ext == ".m" || ext == ".json") out.push_back(e.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

SolverOptions textbook_newton() {
    SolverOptions o;
    o.damping = Damping::none;
    o.magnitude_correction = false;
    o.crossing_window = 0.0;
    return o;
}

std::vector<cd> network_power(const NetworkCase& net, const StateVector& s, const ControlMode& ctl) {
    const Layout& lay = *s.layout;
    const auto n = static_cast<Eigen::Index>(lay.bus_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    const double scale = 1.0 + ctl.lambda_tx * ctl.tx_gain;
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        const auto f = static_cast<Eigen::Index>(lay.bus_index(br.from));
        const auto t = static_cast<Eigen::Index>(lay.bus_index(br.to));
        const double a = tap_ratio(net, s, ctl, k);
        const cd ys = cd(br.g, br.b) * scale;
        const cd ysh(0.0, br.b_sh / 2.0);
        y(f, f) += (ys + ysh) / (a * a);
        y(f, t) -= ys / a;
        y(t, f) -= ys / a;
        y(t, t) += ys + ysh;
    }
    for (const auto& sh : net.fixed_shunts) {
        const auto b = static_cast<Eigen::Index>(lay.bus_index(sh.bus));
        y(b, b) += cd(sh.g, sh.b);
    }
    Eigen::VectorXcd v(n);
    for (Eigen::Index b = 0; b < n; ++b) v[b] = cd(s.vr(static_cast<std::size_t>(b)), s.vi(static_cast<std::size_t>(b)));
    const Eigen::VectorXcd i = y * v;
    std::vector<cd> out(static_cast<std::size_t>(n));
    for (Eigen::Index b = 0; b < n; ++b) out[static_cast<std::size_t>(b)] = v[b] * std::conj(i[b]);
    return out;
}

std::vector<cd> device_power(const NetworkCase& net, const StateVector& s, const ControlMode& ctl) {
    const Layout& lay = *s.layout;
    std::vector<cd> out(lay.bus_count());
    for (const auto& l : net.loads) out[lay.bus_index(l.bus)] -= cd(l.p, l.q);
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        if (lay.role(g) == GenRole::slack) continue;
        const auto& gen = net.generators[g];
        double p = gen.p_g;
        if (is_agc_member(net, lay, g)) p += agc_share(net, ctl, g, s.x[lay.dps()]).value;
        out[lay.bus_index(gen.bus)] += cd(p, gen_q(s, net, g));
    }
    for (std::size_t k = 0; k < net.switched_shunts.size(); ++k) {
        const auto b = lay.bus_index(net.switched_shunts[k].bus);
        if (auto it = ctl.fixed_shunt_b.find(k); it != ctl.fixed_shunt_b.end()) {
            out[b] += cd(0.0, it->second * s.vmag(b) * s.vmag(b));
        } else if (lay.q_shunt(k) >= 0) {
            out[b] += cd(0.0, s.x[lay.q_shunt(k)]);
        }
    }
    return out;
}

double max_bus_mismatch(const NetworkCase& net, const StateVector& s, const ControlMode& ctl) {
    const auto sn = network_power(net, s, ctl);
    const auto sd = device_power(net, s, ctl);
    double worst = 0.0;
    for (std::size_t b = 0; b < sn.size(); ++b) {
        if (b == s.layout->slack_bus()) continue;
        worst = std::max(worst, std::abs(sn[b] - sd[b]) / s.vmag(b));
    }
    return worst;
}

double gen_q(const StateVector& s, const NetworkCase& net, std::size_t g) {
    const int col = s.layout->q_gen(g);
    return col >= 0 ? s.x[col] : net.generators[g].q_init;
}

std::size_t gen_index(const NetworkCase& net, int id) {
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        if (net.generators[g].id == id) return g;
    }
    throw std::out_of_range("no generator " + std::to_string(id));
}

}  // namespace ivflow::test
