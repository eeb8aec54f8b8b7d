// Flat key = value configuration files.
//
//   # comment
//   names = H, F, C
//   j_coupling = 0, 50, 224, 50, 0, -311, 224, -311, 0   (row-major, Hz)
//   t2 = 1, 1, 0.65
//   gamma_rel = 1, 0.94, 0.25
//   rf_scales = ...            rf_weights = ...   (explicit static ensemble)
//   pulse_90_duration = 1e-05
//   polarization = 1e-05
//   rf_mode = none | static_ensemble | per_pulse_stochastic
//   loss_per_90deg = 0.05      (also rebuilds the static ensemble unless rf_scales is given)
//   seed = 1
//   trajectories = 64
//   t2_enabled = false
//   prep.experiment.<l> = CNOT 0 1; CNOT 1 0     (l = 0, 1, ...; empty = identity)
//   prep.weights = w0, w1, ...
//
// Unset keys keep the CHFBr2 defaults. Unknown keys are errors.
#pragma once

#include "nmrq/circuit.hpp"
#include "nmrq/spinsys.hpp"
#include "nmrq/stateprep.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nmrq {

struct RunConfig {
  SpinSystemConfig system = SpinSystemConfig::chfbr2();
  ErrorModel error;
  std::vector<GateCircuit> prep_circuits;  // empty = default scheme
  std::vector<double> prep_weights;        // empty = solve
};

RunConfig parse_config(std::istream& is);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

void write_config(std::ostream& os, const RunConfig& config);
std::string to_text(const RunConfig& config);

/// Preparation scheme described by the config: default circuits when none
/// are listed; weights solved unless given.
PrepScheme prep_scheme(const RunConfig& config);

}  // namespace nmrq
