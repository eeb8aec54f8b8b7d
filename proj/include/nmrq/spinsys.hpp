// Weakly coupled spin-1/2 system in the multiple rotating frame.
//
//   H = sum_{i<j} 2 pi J_ij Iz_i Iz_j   (+ per-spin T2 dephasing)
//
// Larmor terms vanish in each spin's rotating frame; they survive only as
// gamma_rel (equilibrium polarization) and as spectral frequency origins.
#pragma once

#include "nmrq/pulse.hpp"
#include "nmrq/qcore.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nmrq {

struct RfEnsembleMember {
  double scale = 1.0;
  double weight = 1.0;
};

struct SpinSystemConfig {
  std::vector<std::string> names;
  Eigen::MatrixXd j_coupling;  // Hz, symmetric, zero diagonal
  std::vector<double> t2;      // seconds
  std::vector<double> gamma_rel;
  std::vector<RfEnsembleMember> rf_ensemble;
  double pulse_90_duration = 10e-6;  // nominal, seconds
  double polarization = 1e-5;        // high-temperature linearization scale

  int n() const { return static_cast<int>(names.size()); }
  double j(int a, int b) const { return j_coupling(a, b); }

  /// 1H-19F-13C of 13C-labelled CHFBr2 (H, F, C order).
  static SpinSystemConfig chfbr2();

  /// Throws Error on any violated invariant.
  void validate() const;
};

/// Symmetric five-point RF scale distribution with weights
/// (0.1, 0.2, 0.4, 0.2, 0.1) and spacing chosen so that one 90 degree pulse
/// retains exactly 1 - loss of the transverse signal.
std::vector<RfEnsembleMember> five_point_rf_ensemble(double loss_per_90deg);

enum class RfMode { none, static_ensemble, per_pulse_stochastic };

struct ErrorModel {
  RfMode rf_mode = RfMode::none;
  double loss_per_90deg = 0.05;
  std::uint64_t seed = 1;
  int trajectories = 64;  // Monte Carlo members for per_pulse_stochastic
  bool t2_enabled = false;

  static ErrorModel none() { return {}; }
  static ErrorModel static_ensemble() { return {RfMode::static_ensemble}; }
  static ErrorModel stochastic(double loss, std::uint64_t seed = 1, int trajectories = 64) {
    return {RfMode::per_pulse_stochastic, loss, seed, trajectories, false};
  }
  static ErrorModel t2_only() {
    ErrorModel e;
    e.t2_enabled = true;
    return e;
  }

  void validate() const;
};

std::string to_string(RfMode mode);
RfMode rf_mode_from_string(const std::string& s);

/// exp(-i 2 pi J_pair t Iz_i Iz_j).
ComplexMatrix coupling_propagator(const SpinSystemConfig& cfg, int i, int j, double duration_s);

/// exp(-i scale theta (Ix cos phi + Iy sin phi)) on `spin`, 2x2.
Eigen::Matrix2cd rf_rotation(double phase_deg, double angle_deg, double scale = 1.0);
ComplexMatrix rf_propagator(int spin, double phase_deg, double angle_deg, double scale, int n);

/// Independent per-spin dephasing: <a|rho|b> *= exp(-t sum_i [a_i != b_i] / T2_i).
DensityMatrix dephasing_channel(const DensityMatrix& rho, const SpinSystemConfig& cfg,
                                double duration_s);

/// Ideal propagator of a single op.
ComplexMatrix op_propagator(const PulseOp& op, const SpinSystemConfig& cfg);

DensityMatrix run_pulse_program(const DensityMatrix& rho0, const PulseProgram& program,
                                const SpinSystemConfig& cfg, const ErrorModel& err);

/// Raw matrix variant for mixtures whose trace is not 1 (linear in rho0).
ComplexMatrix run_pulse_program_raw(const ComplexMatrix& rho0, const PulseProgram& program,
                                    const SpinSystemConfig& cfg, const ErrorModel& err);

/// Signal retention of the cumulative-error reference curve: (1 - loss)^p for
/// any RF error mode, 1 when RF errors are off.
double ensemble_signal_retention(const ErrorModel& err, double pulses_90_equiv);

}  // namespace nmrq
