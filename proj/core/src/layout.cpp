#include "ivflow/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ivflow {

Layout::Layout(const NetworkCase& net, const ControlMode& ctl) {
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
        bus_ids_.push_back(net.buses[b].id);
        bus_index_.emplace(net.buses[b].id, b);
        if (net.buses[b].kind == BusKind::slack) slack_ = b;
        unknowns_.push_back({UnknownKind::v_real, b});
        unknowns_.push_back({UnknownKind::v_imag, b});
    }
    auto next = [this](UnknownKind kind, std::size_t device) {
        unknowns_.push_back({kind, device});
        return static_cast<int>(unknowns_.size() - 1);
    };

    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        gen_ids_.push_back(gen.id);
        const BusKind kind = net.buses[bus_index_.at(gen.bus)].kind;
        GenRole role = GenRole::fixed;
        if (kind == BusKind::slack) {
            role = GenRole::slack;
        } else if (gen.remote_bus) {
            role = GenRole::remote_member;
        } else if (kind == BusKind::pv) {
            role = GenRole::local;
        }
        roles_.push_back(role);
        q_gen_.push_back(role == GenRole::local || role == GenRole::remote_member ? next(UnknownKind::q_gen, g)
                                                                                 : kNoRow);
    }
    for (std::size_t s = 0; s < net.switched_shunts.size(); ++s) {
        q_shunt_.push_back(ctl.fixed_shunt_b.count(s) ? kNoRow : next(UnknownKind::q_shunt, s));
    }
    for (std::size_t k = 0; k < net.remote_groups.size(); ++k) q_req_.push_back(next(UnknownKind::q_req, k));
    for (std::size_t br = 0; br < net.branches.size(); ++br) {
        const bool controlled = net.branches[br].tap && !ctl.fixed_tap_ratio.count(br);
        tap_.push_back(controlled ? next(UnknownKind::tap, br) : kNoRow);
    }
    if (ctl.agc_enabled) dps_ = next(UnknownKind::delta_ps, 0);
}

std::string Layout::describe(int k) const {
    if (k < 0 || k >= size()) return "row " + std::to_string(k);
    const auto& u = unknown(k);
    const auto dev = std::to_string(u.device);
    switch (u.kind) {
        case UnknownKind::v_real: return "V_R at bus " + std::to_string(bus_ids_[u.device]);
        case UnknownKind::v_imag: return "V_I at bus " + std::to_string(bus_ids_[u.device]);
        case UnknownKind::q_gen: return "Q of generator " + std::to_string(gen_ids_[u.device]);
        case UnknownKind::q_shunt: return "Q of switched shunt " + dev;
        case UnknownKind::q_req: return "Q_REQ of remote group " + dev;
        case UnknownKind::tap: return "tap ratio of branch " + dev;
        case UnknownKind::delta_ps: return "slack surplus";
    }
    return "row " + std::to_string(k);
}

bool Layout::operator==(const Layout& o) const {
    if (bus_ids_ != o.bus_ids_ || slack_ != o.slack_ || dps_ != o.dps_) return false;
    return q_gen_ == o.q_gen_ && q_shunt_ == o.q_shunt_ && q_req_ == o.q_req_ && tap_ == o.tap_;
}

double StateVector::vmag(std::size_t b) const { return std::hypot(vr(b), vi(b)); }

double StateVector::angle_deg(std::size_t b) const { return std::atan2(vi(b), vr(b)) * 180.0 / std::numbers::pi; }

namespace {

double initial_value(const NetworkCase& net, const UnknownInfo& u) {
    switch (u.kind) {
        case UnknownKind::v_real: return net.buses[u.device].v_init_real;
        case UnknownKind::v_imag: return net.buses[u.device].v_init_imag;
        case UnknownKind::q_gen: {
            const auto& g = net.generators[u.device];
            return std::clamp(g.q_init, g.q_min, g.q_max);
        }
        case UnknownKind::q_shunt: {
            const auto& s = net.switched_shunts[u.device];
            return std::clamp(0.0, s.b_min, s.b_max);
        }
        case UnknownKind::q_req: {
            double sum = 0.0;
            for (std::size_t m : net.remote_groups[u.device].members) {
                const auto& g = net.generators[m];
                sum += std::clamp(g.q_init, g.q_min, g.q_max);
            }
            return sum;
        }
        case UnknownKind::tap: {
            const auto& br = net.branches[u.device];
            return std::clamp(br.ratio, br.tap->tr_min, br.tap->tr_max);
        }
        case UnknownKind::delta_ps: return 0.0;
    }
    return 0.0;
}

int index_in(const Layout& lay, const UnknownInfo& u) {
    switch (u.kind) {
        case UnknownKind::v_real: return lay.vr(u.device);
        case UnknownKind::v_imag: return lay.vi(u.device);
        case UnknownKind::q_gen: return lay.q_gen(u.device);
        case UnknownKind::q_shunt: return lay.q_shunt(u.device);
        case UnknownKind::q_req: return lay.q_req(u.device);
        case UnknownKind::tap: return lay.tap(u.device);
        case UnknownKind::delta_ps: return lay.dps();
    }
    return kNoRow;
}

}  // namespace

StateVector flat_start(const NetworkCase& net, std::shared_ptr<const Layout> layout) {
    StateVector s{layout, Eigen::VectorXd(layout->size())};
    for (int k = 0; k < layout->size(); ++k) s.x[k] = initial_value(net, layout->unknown(k));
    return s;
}

StateVector remap(const NetworkCase& net, const StateVector& from, std::shared_ptr<const Layout> layout) {
    if (from.layout == layout || *from.layout == *layout) return StateVector{layout, from.x};
    StateVector s{layout, Eigen::VectorXd(layout->size())};
    for (int k = 0; k < layout->size(); ++k) {
        const auto& u = layout->unknown(k);
        const int old = index_in(*from.layout, u);
        s.x[k] = old >= 0 ? from.x[old] : initial_value(net, u);
    }
    return s;
}

}  // namespace ivflow
