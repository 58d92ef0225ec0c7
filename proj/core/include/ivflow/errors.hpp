#pragma once

#include <stdexcept>
#include <string>

#include "ivflow/case_model.hpp"

namespace ivflow {

/// A stamp met a voltage magnitude at or below the singularity guard.
class SingularPointError : public std::runtime_error {
public:
    SingularPointError(BusId bus, double magnitude)
        : std::runtime_error("singular point: |V| = " + std::to_string(magnitude) + " pu at bus " +
                             std::to_string(bus)),
          bus_(bus) {}
    [[nodiscard]] BusId bus() const { return bus_; }

private:
    BusId bus_;
};

/// The NR matrix could not be factored. `row()` is the offending unknown,
/// `what()` names the device that owns it when known.
class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(long row, const std::string& what) : std::runtime_error(what), row_(row) {}
    [[nodiscard]] long row() const { return row_; }

private:
    long row_;
};

class ContinuationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SnapInfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ivflow
