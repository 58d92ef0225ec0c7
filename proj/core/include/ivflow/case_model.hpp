#pragma once

// Immutable network description consumed by every solver stage. All
// electrical quantities are per-unit on NetworkCase::s_base.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ivflow {

using BusId = std::int64_t;

enum class BusKind { slack, pv, pq };

struct Bus {
    BusId id = 0;
    double base_kv = 1.0;
    BusKind kind = BusKind::pq;
    double v_init_real = 1.0;
    double v_init_imag = 0.0;

    bool operator==(const Bus&) const = default;
};

enum class ControlledSide { primary, secondary };

/// Voltage-regulating tap changer. The tap sits on the from (primary) side
/// of its branch; `controlled_side` selects which terminal voltage it
/// regulates.
struct TapControl {
    double tr_min = 0.9;
    double tr_max = 1.1;
    double v_set = 1.0;
    ControlledSide controlled_side = ControlledSide::secondary;
    std::optional<double> step_size;

    bool operator==(const TapControl&) const = default;
};

/// Pi-model branch. `g`/`b` are the series admittance, `b_sh` the total
/// line charging and `ratio` the fixed off-nominal turns ratio on the
/// from side (1 for lines). When `tap` is present, `ratio` is only the
/// initial value of the controlled turns ratio.
struct Branch {
    BusId from = 0;
    BusId to = 0;
    double g = 0.0;
    double b = 0.0;
    double b_sh = 0.0;
    double ratio = 1.0;
    std::optional<TapControl> tap;

    bool operator==(const Branch&) const = default;
};

struct Generator {
    int id = 0;
    BusId bus = 0;
    double p_g = 0.0;
    double q_init = 0.0;  // initial guess; fixed injection for generators on PQ buses
    double v_set = 1.0;
    double q_min = 0.0;
    double q_max = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
    double agc_factor = 0.0;
    std::optional<BusId> remote_bus;
    double remote_factor = 0.0;

    bool operator==(const Generator&) const = default;
};

struct Load {
    BusId bus = 0;
    double p = 0.0;
    double q = 0.0;

    bool operator==(const Load&) const = default;
};

/// Constant shunt admittance to ground (MATPOWER GS/BS).
struct FixedShunt {
    BusId bus = 0;
    double g = 0.0;
    double b = 0.0;

    bool operator==(const FixedShunt&) const = default;
};

struct SwitchedShunt {
    BusId bus = 0;
    double b_min = 0.0;
    double b_max = 0.0;
    double step_size = 1.0;
    double v_set = 1.0;

    bool operator==(const SwitchedShunt&) const = default;
};

/// Generators jointly regulating one bus. Factors are normalized to sum to 1.
struct RemoteControlGroup {
    BusId controlled_bus = 0;
    std::vector<std::size_t> members;  // indices into NetworkCase::generators
    std::vector<double> factors;

    bool operator==(const RemoteControlGroup&) const = default;
};

struct NetworkCase {
    double s_base = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;
    std::vector<FixedShunt> fixed_shunts;
    std::vector<SwitchedShunt> switched_shunts;
    std::vector<RemoteControlGroup> remote_groups;
    bool agc_enabled = false;

    bool operator==(const NetworkCase&) const = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> diagnostics);
    [[nodiscard]] const std::vector<std::string>& diagnostics() const { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

/// Rebuilds `remote_groups` from the generators' remote_bus/remote_factor
/// fields. Factors default to the members' reactive range when all are zero.
void build_remote_groups(NetworkCase& net);

/// All invariant violations; empty iff the case is solvable-shaped.
std::vector<std::string> validate(const NetworkCase& net);

/// Copy of `net` without the generator whose id is `gen_id`.
NetworkCase drop_generator(const NetworkCase& net, int gen_id);

NetworkCase parse_matpower(const std::string& text);
NetworkCase parse_native(const std::string& text);
std::string serialize_native(const NetworkCase& net);

enum class CaseFormat { matpower, native };

/// Reads a case file; when `format` is empty it is picked from the extension
/// (`.m` is MATPOWER, anything else native).
NetworkCase load_case(const std::string& path, std::optional<CaseFormat> format = std::nullopt);

}  // namespace ivflow
