#include "nmrq/analysis.hpp"

#include "nmrq/compiler.hpp"

#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nmrq {

namespace {

ComplexMatrix pauli(int which) {
  ComplexMatrix p(2, 2);
  switch (which) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, Complex(0, -1), Complex(0, 1), 0; break;
    default: p << 1, 0, 0, -1; break;
  }
  return p;
}

// Pauli product with digit d_i (0..3) on spin i; spin 0 is the most
// significant base-4 digit of m.
ComplexMatrix pauli_product(std::size_t m, int n) {
  const int d = dim_for(n);
  ComplexMatrix p = ComplexMatrix::Identity(d, d);
  for (int i = n - 1; i >= 0; --i, m /= 4)
    if (m % 4 != 0) p = (p * embed_single_spin(pauli(static_cast<int>(m % 4)), i, n)).eval();
  return p;
}

}  // namespace

std::vector<TomographySetting> tomography_settings(int n) {
  std::vector<TomographySetting> out;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (std::size_t s = 0; s < total; ++s) {
    TomographySetting t(static_cast<std::size_t>(n));
    std::size_t v = s;
    for (int i = n - 1; i >= 0; --i, v /= 3) t[static_cast<std::size_t>(i)] = static_cast<Readout>(v % 3);
    out.push_back(t);
  }
  return out;
}

PulseProgram readout_program(const TomographySetting& setting, const SpinSystemConfig& cfg) {
  if (static_cast<int>(setting.size()) != cfg.n()) throw Error("readout_program: setting size mismatch");
  PulseProgram p;
  p.n = cfg.n();
  p.source = "readout";
  for (int i = 0; i < p.n; ++i) {
    const Readout r = setting[static_cast<std::size_t>(i)];
    if (r == Readout::none) continue;
    p.ops.emplace_back(RfPulse{i, r == Readout::x ? 0.0 : 90.0, 90.0, cfg.pulse_90_duration});
  }
  return p;
}

StateSource readout_source(const ComplexMatrix& rho, const SpinSystemConfig& cfg, const ErrorModel& err) {
  return [rho, cfg, err](const TomographySetting& s) {
    return run_pulse_program_raw(rho, readout_program(s, cfg), cfg, err);
  };
}

DeviationDensityMatrix tomography(const StateSource& source, const SpinSystemConfig& cfg) {
  const int n = cfg.n();
  const int d = dim_for(n);
  const std::size_t n_pauli = std::size_t{1} << (2 * n);
  std::vector<ComplexMatrix> paulis;
  for (std::size_t m = 1; m < n_pauli; ++m) paulis.push_back(pauli_product(m, n));
  std::vector<ComplexMatrix> parities;  // Z_S for nonempty S
  for (std::size_t mask = 1; mask < static_cast<std::size_t>(d); ++mask) {
    ComplexMatrix z = ComplexMatrix::Identity(d, d);
    for (int i = 0; i < n; ++i)
      if (mask >> (n - 1 - i) & 1) z = (z * embed_single_spin(pauli(3), i, n)).eval();
    parities.push_back(z);
  }

  const auto settings = tomography_settings(n);
  const auto rows = static_cast<Eigen::Index>(settings.size() * parities.size());
  Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(paulis.size()));
  Eigen::VectorXd y(rows);
  Eigen::Index row = 0;
  for (const auto& s : settings) {
    const ComplexMatrix u = program_unitary(readout_program(s, cfg), cfg);
    const ComplexMatrix measured = source(s);
    if (measured.rows() != d || measured.cols() != d) throw Error("tomography: source returned wrong dimension");
    for (const auto& z : parities) {
      // <Z_S> after readout = Tr(rho U^dag Z_S U) = sum_m c_m Tr(P_m U^dag Z_S U) / 2^n.
      const ComplexMatrix heis = u.adjoint() * z * u;
      for (std::size_t m = 0; m < paulis.size(); ++m)
        a(row, static_cast<Eigen::Index>(m)) = (paulis[m] * heis).trace().real() / d;
      y(row) = (measured * z).trace().real();
      ++row;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() != a.cols()) throw Error("tomography: observable set does not span the deviation space");
  const Eigen::VectorXd c = qr.solve(y);
  ComplexMatrix dev = ComplexMatrix::Zero(d, d);
  for (std::size_t m = 0; m < paulis.size(); ++m) dev += c(static_cast<Eigen::Index>(m)) * paulis[m] / d;
  return DeviationDensityMatrix((0.5 * (dev + dev.adjoint())).eval());
}

std::vector<SpectralLine> stick_spectrum(const ComplexMatrix& rho, int spin, const SpinSystemConfig& cfg,
                                         double threshold) {
  const int n = cfg.n();
  if (spin < 0 || spin >= n) throw Error("stick_spectrum: spin out of range");
  if (rho.rows() != dim_for(n)) throw Error("stick_spectrum: dimension mismatch");
  const ComplexMatrix u = rf_propagator(spin, 0.0, 90.0, 1.0, n);
  const ComplexMatrix r = u * rho * u.adjoint();
  std::vector<SpectralLine> lines;
  for (std::size_t x = 0; x < static_cast<std::size_t>(dim_for(n)); ++x) {
    if (spin_bit(x, spin, n) != 0) continue;
    const std::size_t y = x | (std::size_t{1} << (n - 1 - spin));
    const Complex amp = Complex(0, -1) * r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    if (std::abs(amp) < threshold) continue;
    double offset = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != spin) offset += cfg.j(spin, j) * (spin_bit(x, j, n) ? -0.5 : 0.5);
    lines.push_back({spin, offset, amp, BasisLabel::from_index(x, n)});
  }
  return lines;
}

std::optional<BasisLabel> decode_label(const ComplexMatrix& rho, const SpinSystemConfig& cfg, double threshold) {
  const int n = cfg.n();
  std::optional<BasisLabel> agreed;
  for (int i = 0; i < n; ++i) {
    const auto lines = stick_spectrum(rho, i, cfg, threshold);
    if (lines.size() != 1) return std::nullopt;
    // Recover the other spins from the line position alone.
    std::optional<std::size_t> match;
    for (std::size_t x = 0; x < static_cast<std::size_t>(dim_for(n)); ++x) {
      if (spin_bit(x, i, n) != 0) continue;
      double offset = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) offset += cfg.j(i, j) * (spin_bit(x, j, n) ? -0.5 : 0.5);
      if (std::abs(offset - lines[0].frequency_offset_hz) > 1e-6) continue;
      if (match) return std::nullopt;  // ambiguous coupling pattern
      match = x;
    }
    if (!match) return std::nullopt;
    std::size_t index = *match;
    if (lines[0].amplitude.real() < 0) index |= std::size_t{1} << (n - 1 - i);
    const BasisLabel label = BasisLabel::from_index(index, n);
    if (agreed && !(*agreed == label)) return std::nullopt;
    agreed = label;
  }
  return agreed;
}

std::vector<double> lorentzian_trace(const std::vector<SpectralLine>& lines, const std::vector<double>& freqs_hz,
                                     double fwhm_hz) {
  if (!(fwhm_hz > 0)) throw Error("lorentzian_trace: width must be positive");
  const double hw2 = 0.25 * fwhm_hz * fwhm_hz;
  std::vector<double> out(freqs_hz.size(), 0.0);
  for (std::size_t f = 0; f < freqs_hz.size(); ++f)
    for (const auto& l : lines) {
      const double df = freqs_hz[f] - l.frequency_offset_hz;
      out[f] += l.amplitude.real() * hw2 / (df * df + hw2);
    }
  return out;
}

namespace {

// Parameters (A, B, b, s, w): y = e^{-s^2 k} (A cos wk + B sin wk) + b.
struct DampedCosine {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const std::vector<double>& k;
  const std::vector<double>& y;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(k.size()); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < k.size(); ++i) {
      const double e = std::exp(-x(3) * x(3) * k[i]);
      f(static_cast<Eigen::Index>(i)) =
          e * (x(0) * std::cos(x(4) * k[i]) + x(1) * std::sin(x(4) * k[i])) + x(2) - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    for (std::size_t i = 0; i < k.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double e = std::exp(-x(3) * x(3) * k[i]);
      const double c = std::cos(x(4) * k[i]), s = std::sin(x(4) * k[i]);
      const double osc = x(0) * c + x(1) * s;
      j(r, 0) = e * c;
      j(r, 1) = e * s;
      j(r, 2) = 1.0;
      j(r, 3) = -2.0 * x(3) * k[i] * e * osc;
      j(r, 4) = e * k[i] * (-x(0) * s + x(1) * c);
    }
    return 0;
  }
};

// Best (A, B, b) for fixed decay rate and frequency.
Eigen::VectorXd linear_start(const std::vector<double>& k, const std::vector<double>& y, double lambda,
                             double omega) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k.size()), 3);
  Eigen::VectorXd v(static_cast<Eigen::Index>(k.size()));
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double e = std::exp(-lambda * k[i]);
    m(r, 0) = e * std::cos(omega * k[i]);
    m(r, 1) = e * std::sin(omega * k[i]);
    m(r, 2) = 1.0;
    v(r) = y[i];
  }
  return m.completeOrthogonalDecomposition().solve(v);
}

double periodogram_peak(const std::vector<double>& k, const std::vector<double>& y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double best = 0.0, best_w = 1.0;
  for (double w = 0.01; w <= std::numbers::pi; w += 0.001) {
    Complex acc = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) acc += (y[i] - mean) * std::polar(1.0, -w * k[i]);
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace

FitResult fit_damped_oscillation(const std::vector<double>& k, const std::vector<double>& y) {
  if (k.size() != y.size()) throw Error("fit_damped_oscillation: length mismatch");
  if (k.size() < 8) throw Error("fit_damped_oscillation: at least 8 points required");

  const double grover_omega = 4.0 * std::asin(1.0 / std::sqrt(8.0));
  const std::vector<double> omegas{grover_omega, periodogram_peak(k, y)};
  const std::vector<double> lambdas{0.0, 0.02, 0.1, 0.4, 1.0, 3.0};

  DampedCosine functor{k, y};
  FitResult best;
  best.residual_norm = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (double w0 : omegas)
    for (double l0 : lambdas) {
      const Eigen::VectorXd lin = linear_start(k, y, l0, w0);
      Eigen::VectorXd x(5);
      x << lin(0), lin(1), lin(2), std::sqrt(l0), w0;
      Eigen::LevenbergMarquardt<DampedCosine> lm(functor);
      lm.parameters.maxfev = 5000;
      lm.parameters.ftol = 1e-14;
      lm.parameters.xtol = 1e-14;
      const auto status = lm.minimize(x);
      Eigen::VectorXd f(static_cast<Eigen::Index>(k.size()));
      functor(x, f);
      const double res = f.norm();
      if (!std::isfinite(res)) continue;

      FitResult r;
      r.residual_norm = res;
      const double lambda = x(3) * x(3);
      r.a = std::hypot(x(0), x(1));
      r.phi = std::atan2(-x(1), x(0));
      r.b = x(2);
      // Fold the frequency into [0, pi]: integer sampling aliases w and 2pi - w.
      double w = std::fmod(x(4), 2.0 * std::numbers::pi);
      if (w < 0) w += 2.0 * std::numbers::pi;
      if (w > std::numbers::pi) {
        w = 2.0 * std::numbers::pi - w;
        r.phi = -r.phi;
      }
      r.omega = w;
      r.no_damping = lambda < 1e-4;
      r.T_d = lambda > 0 ? 1.0 / lambda : kNoDampingSentinel;
      if (r.no_damping) r.T_d = std::max(r.T_d, kNoDampingSentinel);
      using Status = Eigen::LevenbergMarquardtSpace::Status;
      r.converged = status == Status::RelativeReductionTooSmall || status == Status::RelativeErrorTooSmall ||
                    status == Status::RelativeErrorAndReductionTooSmall || status == Status::CosinusTooSmall ||
                    status == Status::FtolTooSmall || status == Status::XtolTooSmall ||
                    status == Status::GtolTooSmall || res < 1e-12;
      r.message = r.converged ? "ok" : "Levenberg-Marquardt stopped with status " + std::to_string(int(status));
      // Converged starts win over stalled ones; then the smaller residual.
      const bool better = !have_best || (r.converged && !best.converged) ||
                          (r.converged == best.converged && res < best.residual_norm - 1e-15);
      if (better) best = r, have_best = true;
    }
  if (!have_best) {
    best.converged = false;
    best.message = "no start produced a finite residual";
  }
  return best;
}

FitResult fit_damped_oscillation(const SweepResult& sweep) {
  std::vector<double> k(sweep.k_values.begin(), sweep.k_values.end());
  return fit_damped_oscillation(k, sweep.d_x0);
}

std::vector<ErrorRow> error_report(const std::vector<DeviationDensityMatrix>& experiment,
                                   const std::vector<DeviationDensityMatrix>& theory,
                                   const std::vector<double>& retention) {
  if (experiment.size() != theory.size() || experiment.size() != retention.size())
    throw Error("error_report: length mismatch");
  std::vector<ErrorRow> rows;
  for (std::size_t i = 0; i < experiment.size(); ++i) {
    if (!(retention[i] > 0)) throw Error("error_report: retention must be positive");
    ErrorRow r;
    r.k = static_cast<int>(i);
    r.retention = retention[i];
    r.eps_uncompensated = relative_error(experiment[i], theory[i], 1.0);
    r.eps_compensated = relative_error(experiment[i], theory[i], 1.0 / retention[i]);
    const ComplexMatrix& e = experiment[i].matrix();
    const double ee = e.squaredNorm();
    const double c = ee > 0 ? (e.adjoint() * theory[i].matrix()).trace().real() / ee : 1.0;
    r.eps_best_scale = relative_error(experiment[i], theory[i], c);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ErrorRow> error_report(const SweepResult& experiment, const SweepResult& theory, const ErrorModel& err) {
  if (experiment.full_states.size() != experiment.k_values.size() ||
      theory.full_states.size() != theory.k_values.size())
    throw Error("error_report: sweeps must keep full states");
  std::vector<double> retention;
  for (const auto& c : experiment.cost) retention.push_back(ensemble_signal_retention(err, c.pulse_90_equivalents));
  auto rows = error_report(experiment.full_states, theory.full_states, retention);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].k = experiment.k_values[i];
  return rows;
}

}  // namespace nmrq
