// Reader for the MATPOWER case subset: baseMVA plus the bus, gen and branch
// matrices. An optional `mpc.gen_regbus` column (one row per gen row, either
// `regulated_bus` or `regulated_bus factor`) declares remote voltage control.

#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>

#include "ivflow/case_model.hpp"

namespace ivflow {

namespace {

struct Row {
    std::size_t line = 0;
    std::vector<double> values;
};

struct Table {
    std::size_t line = 0;
    std::vector<Row> rows;
};

std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\'') in_quote = !in_quote;
        if (line[i] == '%' && !in_quote) return line.substr(0, i);
    }
    return line;
}

double parse_number(const std::string& tok, std::size_t line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        if (tok == "Inf" || tok == "inf") return HUGE_VAL;
        if (tok == "-Inf" || tok == "-inf") return -HUGE_VAL;
        throw ParseError(line, "malformed table row: '" + tok + "' is not a number");
    }
    return v;
}

void finish_row(Row& row, Table& table) {
    if (!row.values.empty()) table.rows.push_back(std::move(row));
    row = Row{};
}

void split_tokens(const std::string& text, std::size_t line, Row& row, Table& table) {
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        if (row.values.empty()) row.line = line;
        row.values.push_back(parse_number(tok, line));
        tok.clear();
    };
    for (char c : text) {
        if (c == ';') {
            flush();
            finish_row(row, table);
        } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
            flush();
        } else {
            tok.push_back(c);
        }
    }
    flush();
}

struct Document {
    std::optional<double> base_mva;
    std::map<std::string, Table> tables;
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Document read_document(const std::string& text) {
    Document doc;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    Table* open = nullptr;
    Row pending;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        line = strip_comment(line);
        if (line.find("...") != std::string::npos) line.erase(line.find("..."));

        if (open) {
            const auto close = line.find(']');
            split_tokens(close == std::string::npos ? line : line.substr(0, close), line_no, pending, *open);
            if (close == std::string::npos) {
                finish_row(pending, *open);  // newline ends a row
            } else {
                finish_row(pending, *open);
                open = nullptr;
            }
            continue;
        }

        const auto key = line.find("mpc.");
        if (key == std::string::npos) continue;
        const auto eq = line.find('=', key);
        if (eq == std::string::npos) continue;
        const std::string name = trim(line.substr(key + 4, eq - key - 4));
        std::string rhs = trim(line.substr(eq + 1));
        if (name == "baseMVA") {
            if (!rhs.empty() && rhs.back() == ';') rhs.pop_back();
            doc.base_mva = parse_number(trim(rhs), line_no);
            continue;
        }
        const auto bracket = rhs.find('[');
        if (bracket == std::string::npos) continue;  // version strings and other scalars
        Table& table = doc.tables[name];
        table = Table{};
        table.line = line_no;
        rhs = rhs.substr(bracket + 1);
        const auto close = rhs.find(']');
        split_tokens(close == std::string::npos ? rhs : rhs.substr(0, close), line_no, pending, table);
        finish_row(pending, table);
        if (close == std::string::npos) open = &table;
    }
    if (open) throw ParseError(line_no, "unterminated matrix");
    return doc;
}

const Table& require(const Document& doc, const std::string& name) {
    auto it = doc.tables.find(name);
    if (it == doc.tables.end()) throw ParseError(0, "missing mpc." + name + " table");
    return it->second;
}

void require_columns(const Row& row, std::size_t n, const std::string& table) {
    if (row.values.size() < n) {
        throw ParseError(row.line, "malformed table row: " + table + " rows need at least " + std::to_string(n) +
                                       " columns, found " + std::to_string(row.values.size()));
    }
}

BusId as_bus_id(double v, std::size_t line) {
    if (v != std::floor(v)) throw ParseError(line, "malformed table row: bus number must be an integer");
    return static_cast<BusId>(v);
}

}  // namespace

NetworkCase parse_matpower(const std::string& text) {
    const Document doc = read_document(text);
    if (!doc.base_mva) throw ParseError(0, "missing mpc.baseMVA");

    NetworkCase net;
    net.s_base = *doc.base_mva;
    const double base = net.s_base;

    std::unordered_map<BusId, std::size_t> bus_index;
    for (const auto& row : require(doc, "bus").rows) {
        require_columns(row, 10, "bus");
        const auto& v = row.values;
        Bus bus;
        bus.id = as_bus_id(v[0], row.line);
        switch (static_cast<int>(v[1])) {
            case 1: bus.kind = BusKind::pq; break;
            case 2: bus.kind = BusKind::pv; break;
            case 3: bus.kind = BusKind::slack; break;
            default:
                throw ParseError(row.line, "unsupported bus type " + std::to_string(static_cast<int>(v[1])));
        }
        // A zero base voltage means "unspecified" in many published cases.
        bus.base_kv = v[9] > 0.0 ? v[9] : 1.0;
        bus_index.emplace(bus.id, net.buses.size());
        net.buses.push_back(bus);
        if (v[2] != 0.0 || v[3] != 0.0) net.loads.push_back(Load{bus.id, v[2] / base, v[3] / base});
        if (v[4] != 0.0 || v[5] != 0.0) net.fixed_shunts.push_back(FixedShunt{bus.id, v[4] / base, v[5] / base});
    }

    const Table& gens = require(doc, "gen");
    std::vector<std::size_t> gen_row_to_index(gens.rows.size(), SIZE_MAX);
    for (std::size_t r = 0; r < gens.rows.size(); ++r) {
        const auto& row = gens.rows[r];
        require_columns(row, 10, "gen");
        const auto& v = row.values;
        if (v[7] <= 0.0) continue;  // out of service
        Generator g;
        g.id = static_cast<int>(r + 1);
        g.bus = as_bus_id(v[0], row.line);
        g.p_g = v[1] / base;
        g.q_init = v[2] / base;
        g.q_max = v[3] / base;
        g.q_min = v[4] / base;
        g.v_set = v[5];
        g.p_max = v[8] / base;
        g.p_min = v[9] / base;
        gen_row_to_index[r] = net.generators.size();
        net.generators.push_back(g);
    }

    if (auto it = doc.tables.find("gen_regbus"); it != doc.tables.end()) {
        const auto& rows = it->second.rows;
        if (rows.size() != gens.rows.size()) {
            throw ParseError(it->second.line, "gen_regbus must have one row per gen row");
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& v = rows[r].values;
            if (gen_row_to_index[r] == SIZE_MAX || v.empty() || v[0] == 0.0) continue;
            auto& g = net.generators[gen_row_to_index[r]];
            const BusId reg = as_bus_id(v[0], rows[r].line);
            if (reg == g.bus) continue;
            g.remote_bus = reg;
            g.remote_factor = v.size() > 1 ? v[1] : 0.0;
        }
    }

    for (const auto& row : require(doc, "branch").rows) {
        require_columns(row, 11, "branch");
        const auto& v = row.values;
        if (v[10] <= 0.0) continue;
        const double r = v[2];
        const double x = v[3];
        if (r == 0.0 && x == 0.0) throw ParseError(row.line, "zero-impedance branch");
        if (v[9] != 0.0) throw ParseError(row.line, "phase-shifting transformers are not supported");
        const double mag2 = r * r + x * x;
        Branch br;
        br.from = as_bus_id(v[0], row.line);
        br.to = as_bus_id(v[1], row.line);
        br.g = r / mag2;
        br.b = -x / mag2;
        br.b_sh = v[4];
        br.ratio = v[8] == 0.0 ? 1.0 : v[8];
        net.branches.push_back(br);
    }

    // Regulated buses without an in-service local generator behave as PQ;
    // the rest start at their generator setpoint.
    for (auto& bus : net.buses) {
        if (bus.kind == BusKind::pq) continue;
        const Generator* local = nullptr;
        for (const auto& g : net.generators) {
            if (g.bus == bus.id && !g.remote_bus) {
                local = &g;
                break;
            }
        }
        if (local) {
            bus.v_init_real = local->v_set;
        } else if (bus.kind == BusKind::pv) {
            bus.kind = BusKind::pq;
        }
    }

    build_remote_groups(net);
    if (auto diag = validate(net); !diag.empty()) throw ValidationError(std::move(diag));
    return net;
}

}  // namespace ivflow
