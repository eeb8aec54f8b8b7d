#include "nmrq/spinsys.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace nmrq {

namespace {

constexpr double kPi = std::numbers::pi;

// Diagonal coupling evolution applied elementwise: rho_ab *= exp(-i (E_a - E_b) t).
void apply_diagonal_phase(ComplexMatrix& rho, const Eigen::VectorXd& energies_times_t) {
  const Eigen::Index d = rho.rows();
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index a = 0; a < d; ++a) {
      const double dphi = energies_times_t(a) - energies_times_t(b);
      if (dphi != 0.0) rho(a, b) *= std::polar(1.0, -dphi);
    }
}

Eigen::VectorXd coupling_phases(const SpinSystemConfig& cfg, int i, int j, double t) {
  return 2.0 * kPi * cfg.j(i, j) * t * zz_diagonal(i, j, cfg.n());
}

void apply_dephasing(ComplexMatrix& rho, const SpinSystemConfig& cfg, double t) {
  if (t <= 0.0) return;
  const int n = cfg.n();
  const Eigen::Index d = rho.rows();
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index a = 0; a < d; ++a) {
      if (a == b) continue;
      double rate = 0.0;
      for (int s = 0; s < n; ++s)
        if (spin_bit(a, s, n) != spin_bit(b, s, n)) rate += 1.0 / cfg.t2[s];
      rho(a, b) *= std::exp(-t * rate);
    }
}

// Single-spin unitary U on `spin`: rho -> U rho U^dagger.
void apply_spin_unitary(ComplexMatrix& rho, const Eigen::Matrix2cd& u, int spin, int n) {
  const ComplexMatrix full = embed_single_spin(u, spin, n);
  rho = (full * rho * full.adjoint()).eval();
}

struct Trajectory {
  const SpinSystemConfig& cfg;
  bool t2;
  // Returns the rotation angle actually applied for a nominal pulse.
  std::function<double(const RfPulse&)> realized_angle;
};

void propagate(ComplexMatrix& rho, const PulseProgram& program, const Trajectory& tr) {
  const int n = tr.cfg.n();
  for (const auto& op : program.ops) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, RfPulse>) {
            apply_spin_unitary(rho, rf_rotation(o.phase_deg, tr.realized_angle(o)), o.spin, n);
          } else if constexpr (std::is_same_v<T, JEvolution>) {
            apply_diagonal_phase(rho, coupling_phases(tr.cfg, o.i, o.j, o.duration_s));
          } else {
            Eigen::VectorXd phases = Eigen::VectorXd::Zero(dim_for(n));
            for (const auto& [a, b] : o.couplings) phases += coupling_phases(tr.cfg, a, b, o.duration_s);
            apply_diagonal_phase(rho, phases);
          }
          if (tr.t2) apply_dephasing(rho, tr.cfg, o.duration_s);
        },
        op);
  }
}

void check_program(const PulseProgram& program, const SpinSystemConfig& cfg) {
  if (program.n != cfg.n()) throw Error("pulse program spin count does not match configuration");
  for (const auto& op : program.ops) {
    if (op_duration(op) < 0) throw Error("pulse program contains a negative duration");
    if (const auto* p = std::get_if<RfPulse>(&op); p && (p->spin < 0 || p->spin >= cfg.n()))
      throw Error("pulse on invalid spin " + std::to_string(p->spin));
  }
}

}  // namespace

SpinSystemConfig SpinSystemConfig::chfbr2() {
  SpinSystemConfig cfg;
  cfg.names = {"H", "F", "C"};
  cfg.j_coupling.resize(3, 3);
  // clang-format off
  cfg.j_coupling <<    0.0,   50.0,  224.0,
                      50.0,    0.0, -311.0,
                     224.0, -311.0,    0.0;
  // clang-format on
  cfg.t2 = {1.0, 1.0, 0.65};
  cfg.gamma_rel = {1.0, 0.94, 0.25};
  cfg.rf_ensemble = five_point_rf_ensemble(0.05);
  return cfg;
}

void SpinSystemConfig::validate() const {
  const int n = this->n();
  if (n < 1 || n > 6) throw Error("spin count must be in 1..6");
  if (j_coupling.rows() != n || j_coupling.cols() != n)
    throw Error("j_coupling must be an n x n matrix");
  for (int a = 0; a < n; ++a) {
    if (j_coupling(a, a) != 0.0) throw Error("j_coupling diagonal must be zero");
    for (int b = 0; b < n; ++b)
      if (j_coupling(a, b) != j_coupling(b, a)) throw Error("j_coupling must be symmetric");
  }
  if (static_cast<int>(t2.size()) != n) throw Error("t2 needs one entry per spin");
  if (static_cast<int>(gamma_rel.size()) != n) throw Error("gamma_rel needs one entry per spin");
  for (double v : t2)
    if (!(v > 0)) throw Error("t2 entries must be positive");
  for (double v : gamma_rel)
    if (!(v > 0)) throw Error("gamma_rel entries must be positive");
  if (rf_ensemble.empty()) throw Error("rf_ensemble must not be empty");
  double total = 0.0;
  for (const auto& m : rf_ensemble) {
    if (!(m.weight > 0)) throw Error("rf_ensemble weights must be positive");
    if (!(m.scale > 0)) throw Error("rf_ensemble scales must be positive");
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("rf_ensemble weights must sum to 1");
  if (!(pulse_90_duration >= 0)) throw Error("pulse_90_duration must be nonnegative");
  if (!(polarization > 0)) throw Error("polarization must be positive");
}

std::vector<RfEnsembleMember> five_point_rf_ensemble(double loss_per_90deg) {
  if (!(loss_per_90deg >= 0 && loss_per_90deg < 0.5))
    throw Error("loss_per_90deg must be in [0, 0.5)");
  // Retention of a 90 degree pulse: 0.4 + 0.4 cos(d pi/2) + 0.2 cos(d pi).
  // With u = cos(d pi/2) this is 0.4 u^2 + 0.4 u + 0.2 = 1 - loss.
  const double c = (0.8 - loss_per_90deg) / 0.4;
  const double u = (-1.0 + std::sqrt(1.0 + 4.0 * c)) / 2.0;
  const double d = 2.0 / kPi * std::acos(std::min(1.0, u));
  return {{1 - 2 * d, 0.1}, {1 - d, 0.2}, {1.0, 0.4}, {1 + d, 0.2}, {1 + 2 * d, 0.1}};
}

void ErrorModel::validate() const {
  if (!(loss_per_90deg >= 0 && loss_per_90deg < 0.5))
    throw Error("loss_per_90deg must be in [0, 0.5)");
  if (trajectories < 1) throw Error("trajectories must be positive");
}

std::string to_string(RfMode mode) {
  switch (mode) {
    case RfMode::none: return "none";
    case RfMode::static_ensemble: return "static_ensemble";
    case RfMode::per_pulse_stochastic: return "per_pulse_stochastic";
  }
  return "none";
}

RfMode rf_mode_from_string(const std::string& s) {
  if (s == "none") return RfMode::none;
  if (s == "static_ensemble" || s == "static") return RfMode::static_ensemble;
  if (s == "per_pulse_stochastic" || s == "stochastic") return RfMode::per_pulse_stochastic;
  throw Error("unknown rf_mode '" + s + "'");
}

ComplexMatrix coupling_propagator(const SpinSystemConfig& cfg, int i, int j, double duration_s) {
  const int n = cfg.n();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw Error("coupling_propagator: invalid pair");
  const Eigen::VectorXd phases = coupling_phases(cfg, i, j, duration_s);
  ComplexMatrix u = ComplexMatrix::Zero(phases.size(), phases.size());
  for (Eigen::Index x = 0; x < phases.size(); ++x) u(x, x) = std::polar(1.0, -phases(x));
  return u;
}

Eigen::Matrix2cd rf_rotation(double phase_deg, double angle_deg, double scale) {
  if (!(scale > 0)) throw Error("rf_rotation: scale must be positive");
  const double theta = scale * angle_deg * kPi / 180.0;
  const double phi = phase_deg * kPi / 180.0;
  // exp(-i theta/2 (cos phi sx + sin phi sy))
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const Complex off = Complex(0, -1) * s * std::polar(1.0, -phi);
  Eigen::Matrix2cd u;
  u << c, off, -std::conj(off), c;
  return u;
}

ComplexMatrix rf_propagator(int spin, double phase_deg, double angle_deg, double scale, int n) {
  return embed_single_spin(rf_rotation(phase_deg, angle_deg, scale), spin, n);
}

DensityMatrix dephasing_channel(const DensityMatrix& rho, const SpinSystemConfig& cfg,
                                double duration_s) {
  if (rho.spins() != cfg.n()) throw Error("dephasing_channel: dimension mismatch");
  for (double v : cfg.t2)
    if (!(v > 0)) throw Error("dephasing_channel: t2 entries must be positive");
  ComplexMatrix m = rho.matrix();
  apply_dephasing(m, cfg, duration_s);
  return DensityMatrix(std::move(m));
}

ComplexMatrix op_propagator(const PulseOp& op, const SpinSystemConfig& cfg) {
  const int n = cfg.n();
  return std::visit(
      [&](const auto& o) -> ComplexMatrix {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, RfPulse>) {
          return rf_propagator(o.spin, o.phase_deg, o.angle_deg, 1.0, n);
        } else if constexpr (std::is_same_v<T, JEvolution>) {
          return coupling_propagator(cfg, o.i, o.j, o.duration_s);
        } else {
          const int d = dim_for(n);
          Eigen::VectorXd phases = Eigen::VectorXd::Zero(d);
          for (const auto& [a, b] : o.couplings) phases += coupling_phases(cfg, a, b, o.duration_s);
          ComplexMatrix u = ComplexMatrix::Zero(d, d);
          for (int x = 0; x < d; ++x) u(x, x) = std::polar(1.0, -phases(x));
          return u;
        }
      },
      op);
}

ComplexMatrix run_pulse_program_raw(const ComplexMatrix& rho0, const PulseProgram& program,
                                    const SpinSystemConfig& cfg, const ErrorModel& err) {
  err.validate();
  check_program(program, cfg);
  if (rho0.rows() != dim_for(cfg.n()) || rho0.cols() != rho0.rows())
    throw Error("run_pulse_program: state dimension does not match configuration");

  ComplexMatrix result;
  switch (err.rf_mode) {
    case RfMode::none: {
      result = rho0;
      propagate(result, program, {cfg, err.t2_enabled, [](const RfPulse& p) { return p.angle_deg; }});
      break;
    }
    case RfMode::static_ensemble: {
      result = ComplexMatrix::Zero(rho0.rows(), rho0.cols());
      for (const auto& member : cfg.rf_ensemble) {
        ComplexMatrix rho = rho0;
        const double s = member.scale;
        propagate(rho, program, {cfg, err.t2_enabled, [s](const RfPulse& p) { return s * p.angle_deg; }});
        result += member.weight * rho;
      }
      break;
    }
    case RfMode::per_pulse_stochastic: {
      // Gaussian angle noise whose variance grows linearly with nominal angle:
      // E[cos delta] = (1 - loss)^(|angle| / 90).
      const double var_per_90 = -2.0 * std::log1p(-err.loss_per_90deg);
      result = ComplexMatrix::Zero(rho0.rows(), rho0.cols());
      for (int t = 0; t < err.trajectories; ++t) {
        std::seed_seq seq{static_cast<std::uint32_t>(err.seed), static_cast<std::uint32_t>(err.seed >> 32),
                          static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        ComplexMatrix rho = rho0;
        propagate(rho, program,
                  {cfg, err.t2_enabled, [&](const RfPulse& p) {
                     const double sigma_rad = std::sqrt(var_per_90 * std::abs(p.angle_deg) / 90.0);
                     return p.angle_deg + normal(rng) * sigma_rad * 180.0 / kPi;
                   }});
        result += rho;
      }
      result /= static_cast<double>(err.trajectories);
      break;
    }
  }
  return (0.5 * (result + result.adjoint())).eval();
}

DensityMatrix run_pulse_program(const DensityMatrix& rho0, const PulseProgram& program,
                                const SpinSystemConfig& cfg, const ErrorModel& err) {
  return DensityMatrix(run_pulse_program_raw(rho0.matrix(), program, cfg, err));
}

double ensemble_signal_retention(const ErrorModel& err, double pulses_90_equiv) {
  if (pulses_90_equiv < 0) throw Error("ensemble_signal_retention: negative pulse count");
  if (err.rf_mode == RfMode::none) return 1.0;
  return std::pow(1.0 - err.loss_per_90deg, pulses_90_equiv);
}

}  // namespace nmrq
