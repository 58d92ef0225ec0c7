#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "ivflow/case_model.hpp"

namespace ivflow {

namespace {

std::string idx(const char* what, std::size_t k) { return std::string(what) + " " + std::to_string(k); }

// Union-find over bus indices.
struct Components {
    std::vector<std::size_t> parent;
    explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<std::string> validate(const NetworkCase& net) {
    std::vector<std::string> diag;
    auto report = [&](std::string msg) { diag.push_back(std::move(msg)); };

    if (!(net.s_base > 0.0)) report("s_base must be positive");
    if (net.buses.empty()) {
        report("case has no buses");
        return diag;
    }

    std::unordered_map<BusId, std::size_t> bus_of;
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        const auto& b = net.buses[k];
        if (!bus_of.emplace(b.id, k).second) report("duplicate bus id " + std::to_string(b.id));
        if (!(b.base_kv > 0.0)) report("bus " + std::to_string(b.id) + " has non-positive base_kv");
    }
    auto known = [&](BusId id) { return bus_of.count(id) > 0; };
    auto unknown_bus = [&](const std::string& who, BusId id) {
        report(who + " references unknown bus " + std::to_string(id));
    };

    Components comp(net.buses.size());
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const auto& br = net.branches[k];
        const std::string who = idx("branch", k);
        bool ok = true;
        if (!known(br.from)) { unknown_bus(who, br.from); ok = false; }
        if (!known(br.to)) { unknown_bus(who, br.to); ok = false; }
        if (br.from == br.to) { report(who + " connects bus " + std::to_string(br.from) + " to itself"); ok = false; }
        if (br.g == 0.0 && br.b == 0.0) report(who + " has zero series admittance");
        if (!(br.ratio > 0.0)) report(who + " has non-positive turns ratio");
        if (br.tap) {
            const auto& t = *br.tap;
            if (!(t.tr_min > 0.0) || t.tr_min > t.tr_max) report(who + " tap limits must satisfy 0 < tr_min <= tr_max");
            if (!(t.v_set > 0.0)) report(who + " tap v_set must be positive");
            if (t.step_size && !(*t.step_size > 0.0)) report(who + " tap step_size must be positive");
        }
        if (ok) comp.unite(bus_of[br.from], bus_of[br.to]);
    }

    std::set<int> gen_ids;
    for (std::size_t k = 0; k < net.generators.size(); ++k) {
        const auto& g = net.generators[k];
        const std::string who = idx("generator", k);
        if (!gen_ids.insert(g.id).second) report(who + " has duplicate id " + std::to_string(g.id));
        if (!known(g.bus)) {
            unknown_bus(who, g.bus);
            continue;
        }
        const bool at_slack = net.buses[bus_of[g.bus]].kind == BusKind::slack;
        if (g.q_min > g.q_max) report(who + " has q_min > q_max");
        if (g.p_min > g.p_max) report(who + " has p_min > p_max");
        if (!at_slack && (g.p_g < g.p_min || g.p_g > g.p_max)) report(who + " active setpoint outside [p_min, p_max]");
        if (!(g.v_set > 0.0)) report(who + " has non-positive v_set");
        if (g.agc_factor < 0.0) report(who + " has negative agc_factor");
        if (g.remote_factor < 0.0) report(who + " has negative remote_factor");
        if (g.remote_bus && !known(*g.remote_bus)) unknown_bus(who + " remote_bus", *g.remote_bus);
        if (g.remote_bus && at_slack) report(who + " at the slack bus cannot join a remote group");
    }
    for (std::size_t k = 0; k < net.loads.size(); ++k) {
        if (!known(net.loads[k].bus)) unknown_bus(idx("load", k), net.loads[k].bus);
    }
    for (std::size_t k = 0; k < net.fixed_shunts.size(); ++k) {
        if (!known(net.fixed_shunts[k].bus)) unknown_bus(idx("fixed shunt", k), net.fixed_shunts[k].bus);
    }
    for (std::size_t k = 0; k < net.switched_shunts.size(); ++k) {
        const auto& s = net.switched_shunts[k];
        const std::string who = idx("switched shunt", k);
        if (!known(s.bus)) unknown_bus(who, s.bus);
        if (s.b_min > s.b_max) report(who + " has b_min > b_max");
        if (!(s.step_size > 0.0)) report(who + " step_size must be positive");
        if (!(s.v_set > 0.0)) report(who + " has non-positive v_set");
    }

    for (std::size_t k = 0; k < net.remote_groups.size(); ++k) {
        const auto& grp = net.remote_groups[k];
        const std::string who = idx("remote group", k);
        if (grp.members.empty()) {
            report(who + " has no members");
            continue;
        }
        if (grp.factors.size() != grp.members.size()) report(who + " factor count does not match member count");
        if (!known(grp.controlled_bus)) unknown_bus(who, grp.controlled_bus);
        const double total = std::accumulate(grp.factors.begin(), grp.factors.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-9) report(who + " factors do not sum to 1");
        std::set<double> setpoints;
        for (std::size_t m : grp.members) {
            if (m >= net.generators.size()) {
                report(who + " references unknown generator " + std::to_string(m));
                continue;
            }
            const auto& gen = net.generators[m];
            if (!gen.remote_bus || *gen.remote_bus != grp.controlled_bus) {
                report(who + " member generator " + std::to_string(m) + " regulates a different bus");
            }
            setpoints.insert(gen.v_set);
        }
        if (setpoints.size() > 1) report(who + " members disagree on v_set");
        if (known(grp.controlled_bus)) {
            const auto& bus = net.buses[bus_of[grp.controlled_bus]];
            bool local = bus.kind == BusKind::slack;
            for (const auto& g : net.generators) {
                if (g.bus == grp.controlled_bus && !g.remote_bus && bus.kind == BusKind::pv) local = true;
            }
            if (local) {
                report(who + ": bus " + std::to_string(grp.controlled_bus) + " already has local voltage control");
            }
        }
    }

    // Islands are numbered by their lowest bus index.
    std::vector<long> island_of_root(net.buses.size(), -1);
    std::vector<std::size_t> island(net.buses.size());
    long islands = 0;
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        const std::size_t r = comp.find(k);
        if (island_of_root[r] < 0) island_of_root[r] = islands++;
        island[k] = static_cast<std::size_t>(island_of_root[r]);
    }
    std::vector<int> slacks(static_cast<std::size_t>(islands), 0);
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        if (net.buses[k].kind == BusKind::slack) ++slacks[island[k]];
    }
    const long total_slacks = std::accumulate(slacks.begin(), slacks.end(), 0L);
    if (total_slacks == 0) report("no slack bus");
    for (long i = 0; i < islands; ++i) {
        const auto n = slacks[static_cast<std::size_t>(i)];
        if (n > 1) report("multiple slack buses in island " + std::to_string(i));
        if (n == 0 && total_slacks > 0) report("island " + std::to_string(i) + " is not connected to a slack bus");
    }
    return diag;
}

}  // namespace ivflow
