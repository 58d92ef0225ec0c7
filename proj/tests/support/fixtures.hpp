#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ivflow/case_model.hpp"
#include "ivflow/control_mode.hpp"
#include "ivflow/layout.hpp"
#include "ivflow/newton.hpp"

namespace ivflow::test {

std::string case_path(const std::string& file);
NetworkCase load(const std::string& file);

/// Every bundled case file name, MATPOWER and native.
std::vector<std::string> bundled_cases();

/// Undamped Newton with every solver aid switched off.
SolverOptions textbook_newton();

/// Power each bus sends into the network, from an admittance matrix built
/// directly from the branch and fixed-shunt data.
std::vector<std::complex<double>> network_power(const NetworkCase& net, const StateVector& s, const ControlMode& ctl);

/// Power the devices at each bus inject (generators minus loads, switched
/// shunts included). The slack generators are left out.
std::vector<std::complex<double>> device_power(const NetworkCase& net, const StateVector& s, const ControlMode& ctl);

/// Largest current mismatch |S_network - S_devices| / |V| over the non-slack buses.
double max_bus_mismatch(const NetworkCase& net, const StateVector& s, const ControlMode& ctl);

/// Reactive output of generator g at a solution (non-slack generators only).
double gen_q(const StateVector& s, const NetworkCase& net, std::size_t g);

/// Generator index for a generator id.
std::size_t gen_index(const NetworkCase& net, int id);

}  // namespace ivflow::test
