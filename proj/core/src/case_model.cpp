#include "ivflow/case_model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace ivflow {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : std::runtime_error("invalid case: " + join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

void build_remote_groups(NetworkCase& net) {
    net.remote_groups.clear();
    std::map<BusId, std::size_t> by_bus;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        if (!gen.remote_bus) continue;
        auto [it, inserted] = by_bus.try_emplace(*gen.remote_bus, net.remote_groups.size());
        if (inserted) net.remote_groups.push_back(RemoteControlGroup{*gen.remote_bus, {}, {}});
        net.remote_groups[it->second].members.push_back(g);
    }
    for (auto& group : net.remote_groups) {
        const bool any_given = std::any_of(group.members.begin(), group.members.end(), [&](std::size_t g) {
            return net.generators[g].remote_factor > 0.0;
        });
        group.factors.clear();
        for (std::size_t g : group.members) {
            const auto& gen = net.generators[g];
            double f = any_given ? gen.remote_factor : gen.q_max - gen.q_min;
            group.factors.push_back(std::max(f, 0.0));
        }
        double total = std::accumulate(group.factors.begin(), group.factors.end(), 0.0);
        if (total <= 0.0) {
            std::fill(group.factors.begin(), group.factors.end(), 1.0);
            total = static_cast<double>(group.factors.size());
        }
        for (double& f : group.factors) f /= total;
    }
}

NetworkCase drop_generator(const NetworkCase& net, int gen_id) {
    NetworkCase out = net;
    auto it = std::find_if(out.generators.begin(), out.generators.end(),
                           [&](const Generator& g) { return g.id == gen_id; });
    if (it == out.generators.end()) {
        throw std::invalid_argument("no generator with id " + std::to_string(gen_id));
    }
    const BusId bus = it->bus;
    out.generators.erase(it);
    // A PV bus left without a generator can no longer hold its voltage.
    const bool still_controlled = std::any_of(out.generators.begin(), out.generators.end(),
                                              [&](const Generator& g) { return g.bus == bus; });
    if (!still_controlled) {
        for (auto& b : out.buses) {
            if (b.id == bus && b.kind == BusKind::pv) b.kind = BusKind::pq;
        }
    }
    build_remote_groups(out);
    return out;
}

NetworkCase load_case(const std::string& path, std::optional<CaseFormat> format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open case file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    CaseFormat fmt = format.value_or(path.size() >= 2 && path.substr(path.size() - 2) == ".m"
                                         ? CaseFormat::matpower
                                         : CaseFormat::native);
    return fmt == CaseFormat::matpower ? parse_matpower(buf.str()) : parse_native(buf.str());
}

}  // namespace ivflow
