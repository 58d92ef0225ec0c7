// Native case format: one JSON document per case mirroring NetworkCase field
// for field. Quantities are stored per-unit so that parse and serialize are
// exact inverses. Remote groups are derived from the generator fields.

#include <json.hpp>

#include "ivflow/case_model.hpp"

namespace ivflow {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

struct Reader {
    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ParseError(0, "schema violation at '" + path + "': " + what);
    }

    static const json& field(const json& obj, const std::string& path, const char* key) {
        if (!obj.is_object()) fail(path, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(path + "." + key, "missing required field");
        return *it;
    }

    static double number(const json& obj, const std::string& path, const char* key) {
        const json& v = field(obj, path, key);
        if (!v.is_number()) fail(path + "." + key, "expected a number");
        return v.get<double>();
    }

    static double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
        return obj.contains(key) ? number(obj, path, key) : fallback;
    }

    static std::int64_t integer(const json& obj, const std::string& path, const char* key) {
        const json& v = field(obj, path, key);
        if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
        return v.get<std::int64_t>();
    }

    static std::string text(const json& obj, const std::string& path, const char* key) {
        const json& v = field(obj, path, key);
        if (!v.is_string()) fail(path + "." + key, "expected a string");
        return v.get<std::string>();
    }

    static const json& array(const json& obj, const char* key) {
        static const json empty = json::array();
        auto it = obj.find(key);
        if (it == obj.end()) return empty;
        if (!it->is_array()) fail(key, "expected an array");
        return *it;
    }
};

std::string at(const char* list, std::size_t k) { return std::string(list) + "[" + std::to_string(k) + "]"; }

BusKind bus_kind(const std::string& s, const std::string& path) {
    if (s == "slack") return BusKind::slack;
    if (s == "pv") return BusKind::pv;
    if (s == "pq") return BusKind::pq;
    Reader::fail(path, "unknown bus kind '" + s + "'");
}

const char* bus_kind_name(BusKind k) {
    switch (k) {
        case BusKind::slack: return "slack";
        case BusKind::pv: return "pv";
        case BusKind::pq: return "pq";
    }
    return "pq";
}

}  // namespace

NetworkCase parse_native(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("malformed native case: ") + e.what());
    }
    using R = Reader;
    if (!doc.is_object()) R::fail("$", "expected an object");
    const auto version = R::integer(doc, "$", "format_version");
    if (version != kFormatVersion) R::fail("format_version", "unsupported version " + std::to_string(version));

    NetworkCase net;
    net.s_base = R::number(doc, "$", "s_base");
    if (doc.contains("agc_enabled")) {
        if (!doc["agc_enabled"].is_boolean()) R::fail("agc_enabled", "expected a boolean");
        net.agc_enabled = doc["agc_enabled"].get<bool>();
    }

    const json& buses = R::array(doc, "buses");
    for (std::size_t k = 0; k < buses.size(); ++k) {
        const auto path = at("buses", k);
        const json& o = buses[k];
        Bus b;
        b.id = R::integer(o, path, "id");
        b.base_kv = R::number(o, path, "base_kv");
        b.kind = bus_kind(R::text(o, path, "kind"), path + ".kind");
        b.v_init_real = R::number_or(o, path, "v_init_real", 1.0);
        b.v_init_imag = R::number_or(o, path, "v_init_imag", 0.0);
        net.buses.push_back(b);
    }

    const json& branches = R::array(doc, "branches");
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto path = at("branches", k);
        const json& o = branches[k];
        Branch br;
        br.from = R::integer(o, path, "from");
        br.to = R::integer(o, path, "to");
        br.g = R::number(o, path, "g");
        br.b = R::number(o, path, "b");
        br.b_sh = R::number_or(o, path, "b_sh", 0.0);
        br.ratio = R::number_or(o, path, "ratio", 1.0);
        if (o.contains("tap")) {
            const auto tpath = path + ".tap";
            const json& t = o["tap"];
            TapControl tap;
            tap.tr_min = R::number(t, tpath, "tr_min");
            tap.tr_max = R::number(t, tpath, "tr_max");
            tap.v_set = R::number(t, tpath, "v_set");
            const auto side = R::text(t, tpath, "controlled_side");
            if (side == "primary") {
                tap.controlled_side = ControlledSide::primary;
            } else if (side == "secondary") {
                tap.controlled_side = ControlledSide::secondary;
            } else {
                R::fail(tpath + ".controlled_side", "expected 'primary' or 'secondary'");
            }
            if (t.contains("step_size")) tap.step_size = R::number(t, tpath, "step_size");
            br.tap = tap;
        }
        net.branches.push_back(br);
    }

    const json& gens = R::array(doc, "generators");
    for (std::size_t k = 0; k < gens.size(); ++k) {
        const auto path = at("generators", k);
        const json& o = gens[k];
        Generator g;
        g.id = static_cast<int>(R::integer(o, path, "id"));
        g.bus = R::integer(o, path, "bus");
        g.p_g = R::number(o, path, "p_g");
        g.q_init = R::number_or(o, path, "q_init", 0.0);
        g.v_set = R::number(o, path, "v_set");
        g.q_min = R::number(o, path, "q_min");
        g.q_max = R::number(o, path, "q_max");
        g.p_min = R::number(o, path, "p_min");
        g.p_max = R::number(o, path, "p_max");
        g.agc_factor = R::number_or(o, path, "agc_factor", 0.0);
        if (o.contains("remote_bus")) g.remote_bus = R::integer(o, path, "remote_bus");
        g.remote_factor = R::number_or(o, path, "remote_factor", 0.0);
        net.generators.push_back(g);
    }

    const json& loads = R::array(doc, "loads");
    for (std::size_t k = 0; k < loads.size(); ++k) {
        const auto path = at("loads", k);
        net.loads.push_back(Load{R::integer(loads[k], path, "bus"), R::number(loads[k], path, "p"),
                                 R::number(loads[k], path, "q")});
    }

    const json& fixed = R::array(doc, "fixed_shunts");
    for (std::size_t k = 0; k < fixed.size(); ++k) {
        const auto path = at("fixed_shunts", k);
        net.fixed_shunts.push_back(FixedShunt{R::integer(fixed[k], path, "bus"), R::number(fixed[k], path, "g"),
                                              R::number(fixed[k], path, "b")});
    }

    const json& switched = R::array(doc, "switched_shunts");
    for (std::size_t k = 0; k < switched.size(); ++k) {
        const auto path = at("switched_shunts", k);
        const json& o = switched[k];
        SwitchedShunt s;
        s.bus = R::integer(o, path, "bus");
        s.b_min = R::number(o, path, "b_min");
        s.b_max = R::number(o, path, "b_max");
        s.step_size = R::number(o, path, "step_size");
        s.v_set = R::number(o, path, "v_set");
        net.switched_shunts.push_back(s);
    }

    // Regulated buses without an explicit initial voltage start at the
    // setpoint of their local generator.
    for (std::size_t k = 0; k < net.buses.size(); ++k) {
        auto& bus = net.buses[k];
        if (bus.kind == BusKind::pq || buses[k].contains("v_init_real")) continue;
        for (const auto& g : net.generators) {
            if (g.bus == bus.id && !g.remote_bus) {
                bus.v_init_real = g.v_set;
                break;
            }
        }
    }

    build_remote_groups(net);
    if (auto diag = validate(net); !diag.empty()) throw ValidationError(std::move(diag));
    return net;
}

std::string serialize_native(const NetworkCase& net) {
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["s_base"] = net.s_base;
    doc["agc_enabled"] = net.agc_enabled;

    json buses = json::array();
    for (const auto& b : net.buses) {
        buses.push_back({{"id", b.id},
                         {"base_kv", b.base_kv},
                         {"kind", bus_kind_name(b.kind)},
                         {"v_init_real", b.v_init_real},
                         {"v_init_imag", b.v_init_imag}});
    }
    doc["buses"] = std::move(buses);

    json branches = json::array();
    for (const auto& br : net.branches) {
        json o = {{"from", br.from}, {"to", br.to}, {"g", br.g}, {"b", br.b}, {"b_sh", br.b_sh}, {"ratio", br.ratio}};
        if (br.tap) {
            json t = {{"tr_min", br.tap->tr_min},
                      {"tr_max", br.tap->tr_max},
                      {"v_set", br.tap->v_set},
                      {"controlled_side",
                       br.tap->controlled_side == ControlledSide::primary ? "primary" : "secondary"}};
            if (br.tap->step_size) t["step_size"] = *br.tap->step_size;
            o["tap"] = std::move(t);
        }
        branches.push_back(std::move(o));
    }
    doc["branches"] = std::move(branches);

    json gens = json::array();
    for (const auto& g : net.generators) {
        json o = {{"id", g.id},         {"bus", g.bus},     {"p_g", g.p_g},       {"q_init", g.q_init},
                  {"v_set", g.v_set},   {"q_min", g.q_min}, {"q_max", g.q_max},   {"p_min", g.p_min},
                  {"p_max", g.p_max},   {"agc_factor", g.agc_factor}, {"remote_factor", g.remote_factor}};
        if (g.remote_bus) o["remote_bus"] = *g.remote_bus;
        gens.push_back(std::move(o));
    }
    doc["generators"] = std::move(gens);

    json loads = json::array();
    for (const auto& l : net.loads) loads.push_back({{"bus", l.bus}, {"p", l.p}, {"q", l.q}});
    doc["loads"] = std::move(loads);

    json fixed = json::array();
    for (const auto& s : net.fixed_shunts) fixed.push_back({{"bus", s.bus}, {"g", s.g}, {"b", s.b}});
    doc["fixed_shunts"] = std::move(fixed);

    json switched = json::array();
    for (const auto& s : net.switched_shunts) {
        switched.push_back({{"bus", s.bus},
                            {"b_min", s.b_min},
                            {"b_max", s.b_max},
                            {"step_size", s.step_size},
                            {"v_set", s.v_set}});
    }
    doc["switched_shunts"] = std::move(switched);

    return doc.dump(2) + "\n";
}

}  // namespace ivflow
