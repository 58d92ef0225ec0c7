#pragma once

// Numbering of unknowns and equations. Bus b owns unknowns 2b (V_R) and
// 2b+1 (V_I) and the KCL rows with the same indices; every other unknown
// owns the control row with its own index. The slack bus KCL rows are
// replaced by its voltage rows and survive only as virtual rows whose sums
// give the slack current.

#include <Eigen/Core>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"

namespace ivflow {

inline constexpr int kNoRow = -1;
inline constexpr int kSlackRowR = -2;
inline constexpr int kSlackRowI = -3;

enum class GenRole {
    slack,          // absorbs the mismatch through the slack bus
    local,          // regulates its own PV bus
    remote_member,  // member of a remote control group
    fixed,          // constant P, Q injection (generator on a PQ bus)
};

enum class UnknownKind { v_real, v_imag, q_gen, q_shunt, q_req, tap, delta_ps };

struct UnknownInfo {
    UnknownKind kind;
    std::size_t device;  // bus index, generator, shunt, group or branch index
};

class Layout {
public:
    Layout(const NetworkCase& net, const ControlMode& ctl);

    [[nodiscard]] int size() const { return static_cast<int>(unknowns_.size()); }
    [[nodiscard]] std::size_t bus_count() const { return bus_ids_.size(); }
    [[nodiscard]] std::size_t bus_index(BusId id) const { return bus_index_.at(id); }
    [[nodiscard]] BusId bus_id(std::size_t b) const { return bus_ids_[b]; }
    [[nodiscard]] std::size_t slack_bus() const { return slack_; }

    [[nodiscard]] int vr(std::size_t b) const { return static_cast<int>(2 * b); }
    [[nodiscard]] int vi(std::size_t b) const { return static_cast<int>(2 * b + 1); }
    [[nodiscard]] int kcl_r(std::size_t b) const { return b == slack_ ? kSlackRowR : vr(b); }
    [[nodiscard]] int kcl_i(std::size_t b) const { return b == slack_ ? kSlackRowI : vi(b); }

    [[nodiscard]] GenRole role(std::size_t g) const { return roles_[g]; }
    [[nodiscard]] int q_gen(std::size_t g) const { return q_gen_[g]; }
    [[nodiscard]] int q_shunt(std::size_t s) const { return q_shunt_[s]; }
    [[nodiscard]] int q_req(std::size_t grp) const { return q_req_[grp]; }
    [[nodiscard]] int tap(std::size_t br) const { return tap_[br]; }
    [[nodiscard]] int dps() const { return dps_; }
    [[nodiscard]] bool agc() const { return dps_ >= 0; }

    [[nodiscard]] const UnknownInfo& unknown(int k) const { return unknowns_[static_cast<std::size_t>(k)]; }
    /// Human-readable owner of an unknown, e.g. "V_R at bus 5".
    [[nodiscard]] std::string describe(int k) const;

    bool operator==(const Layout&) const;

private:
    std::vector<BusId> bus_ids_;
    std::unordered_map<BusId, std::size_t> bus_index_;
    std::size_t slack_ = 0;
    std::vector<GenRole> roles_;
    std::vector<int> q_gen_, q_shunt_, q_req_, tap_;
    int dps_ = kNoRow;
    std::vector<UnknownInfo> unknowns_;
    std::vector<int> gen_ids_;
};

/// Solver unknowns tied to the layout that numbers them.
struct StateVector {
    std::shared_ptr<const Layout> layout;
    Eigen::VectorXd x;

    [[nodiscard]] double vr(std::size_t b) const { return x[layout->vr(b)]; }
    [[nodiscard]] double vi(std::size_t b) const { return x[layout->vi(b)]; }
    [[nodiscard]] double vmag(std::size_t b) const;
    [[nodiscard]] double angle_deg(std::size_t b) const;
};

/// Flat start: bus initial voltages, generator q_init, group requests equal
/// to the members' sum, tap ratios at their branch ratio, zero slack surplus.
StateVector flat_start(const NetworkCase& net, std::shared_ptr<const Layout> layout);

/// Moves `from` onto `layout`: unknowns present in both are copied, new
/// ones take their flat-start value.
StateVector remap(const NetworkCase& net, const StateVector& from, std::shared_ptr<const Layout> layout);

}  // namespace ivflow
