// Readout side: state tomography, stick spectra, damped-oscillation fits and
// relative-error tables.
#pragma once

#include "nmrq/grover.hpp"
#include "nmrq/pulse.hpp"
#include "nmrq/qcore.hpp"
#include "nmrq/spinsys.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nmrq {

enum class Readout { none, x, y };
using TomographySetting = std::vector<Readout>;

/// All 3^n settings; spin 0 varies slowest.
std::vector<TomographySetting> tomography_settings(int n);

/// X: 90 degrees at phase 0, Y: 90 degrees at phase 90.
PulseProgram readout_program(const TomographySetting& setting, const SpinSystemConfig& cfg);

/// Produces the post-readout state for a setting.
using StateSource = std::function<ComplexMatrix(const TomographySetting&)>;

/// Applies the readout program to `rho` under `err`.
StateSource readout_source(const ComplexMatrix& rho, const SpinSystemConfig& cfg, const ErrorModel& err = {});

/// Linear inversion from all z-parity expectations of every setting.
DeviationDensityMatrix tomography(const StateSource& source, const SpinSystemConfig& cfg);

struct SpectralLine {
  int spin = 0;
  double frequency_offset_hz = 0.0;
  Complex amplitude;
  BasisLabel others;  // configuration of all spins, with `spin` itself set to 0
};

/// Lines of spin `spin` after an X readout; offset sum_j J_ij m_j with
/// m = +1/2 for |0>, amplitude positive real for spin `spin` in |0>.
std::vector<SpectralLine> stick_spectrum(const ComplexMatrix& rho, int spin, const SpinSystemConfig& cfg,
                                         double threshold = 1e-9);

/// Reads a basis label off the three spectra of an effective pure
/// eigenstate; empty if any spin does not show exactly one line or the
/// spins disagree.
std::optional<BasisLabel> decode_label(const ComplexMatrix& rho, const SpinSystemConfig& cfg,
                                       double threshold = 1e-9);

/// Real part of the Lorentzian-broadened spectrum at `freqs_hz`; width is
/// the full width at half maximum.
std::vector<double> lorentzian_trace(const std::vector<SpectralLine>& lines, const std::vector<double>& freqs_hz,
                                     double fwhm_hz);

struct FitResult {
  double T_d = 0.0;  // iterations
  double a = 0.0;
  double b = 0.0;
  double omega = 0.0;
  double phi = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  bool no_damping = false;
  std::string message;
};

inline constexpr double kNoDampingSentinel = 1e4;

/// y(k) = a e^{-k/T_d} cos(omega k + phi) + b by Levenberg-Marquardt from a
/// fixed grid of starts. Decay rates below 1e-4 report T_d >= 1e4 and set
/// no_damping.
FitResult fit_damped_oscillation(const std::vector<double>& k, const std::vector<double>& y);
FitResult fit_damped_oscillation(const SweepResult& sweep);

struct ErrorRow {
  int k = 0;
  double retention = 1.0;
  double eps_uncompensated = 0.0;  // c = 1
  double eps_compensated = 0.0;    // c = 1 / retention
  double eps_best_scale = 0.0;     // c minimizing the error (measured signal loss)
};

std::vector<ErrorRow> error_report(const std::vector<DeviationDensityMatrix>& experiment,
                                   const std::vector<DeviationDensityMatrix>& theory,
                                   const std::vector<double>& retention);

/// Retention per k from ensemble_signal_retention of each program's
/// pulse_90_equivalents. Both sweeps need full states.
std::vector<ErrorRow> error_report(const SweepResult& experiment, const SweepResult& theory, const ErrorModel& err);

}  // namespace nmrq
