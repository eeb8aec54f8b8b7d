#include "nmrq/pulse.hpp"
#include "nmrq/spinsys.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nmrq;

namespace {

const SpinSystemConfig& cfg() {
  static const SpinSystemConfig c = SpinSystemConfig::chfbr2();
  return c;
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  ComplexMatrix phase = ComplexMatrix::Zero(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phase(i, i) = std::polar(1.0, -t * es.eigenvalues()(i));
  return es.eigenvectors() * phase * es.eigenvectors().adjoint();
}

PulseProgram single(PulseOp op) {
  PulseProgram p;
  p.n = 3;
  p.ops.push_back(op);
  return p;
}

}  // namespace

TEST(SpinSystem, DefaultsValidate) {
  EXPECT_NO_THROW(cfg().validate());
  EXPECT_DOUBLE_EQ(cfg().j(0, 2), 224.0);
  EXPECT_DOUBLE_EQ(cfg().j(0, 1), 50.0);
  EXPECT_DOUBLE_EQ(cfg().j(1, 2), -311.0);
  EXPECT_DOUBLE_EQ(cfg().t2[2], 0.65);
  SpinSystemConfig bad = cfg();
  bad.j_coupling(0, 1) = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg();
  bad.rf_ensemble[0].weight += 0.01;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(SpinSystem, CouplingPropagatorClosedForm) {
  const double t = 1.0 / (2 * 224.0);
  const ComplexMatrix u = coupling_propagator(cfg(), 0, 2, t);
  // Independent route: matrix exponential of the Hamiltonian.
  const ComplexMatrix iz0 = embed_single_spin(SpinOps<>::iz(), 0, 3);
  const ComplexMatrix iz2 = embed_single_spin(SpinOps<>::iz(), 2, 3);
  const ComplexMatrix h = 2 * std::numbers::pi * 224.0 * iz0 * iz2;
  EXPECT_LT((u - expm_hermitian(h, t)).norm(), 1e-12);
  EXPECT_NEAR(std::arg(u(0, 0)), -std::numbers::pi / 4, 1e-12);
  EXPECT_NEAR(std::arg(u(1, 1)), std::numbers::pi / 4, 1e-12);
  EXPECT_LT((coupling_propagator(cfg(), 0, 2, 0.0) - ComplexMatrix::Identity(8, 8)).norm(), 1e-15);
  const ComplexMatrix q = coupling_propagator(cfg(), 1, 2, 1.0 / (4 * 311.0));
  EXPECT_LT((q * q - coupling_propagator(cfg(), 1, 2, 1.0 / (2 * 311.0))).norm(), 1e-12);
}

TEST(SpinSystem, RfRotationMatchesExponential) {
  for (double phase : {0.0, 90.0, 180.0, 270.0, 33.0})
    for (double angle : {90.0, 180.0, 45.0, 270.0}) {
      const double ph = phase * std::numbers::pi / 180;
      const ComplexMatrix h = std::cos(ph) * ComplexMatrix(SpinOps<>::ix()) + std::sin(ph) * ComplexMatrix(SpinOps<>::iy());
      const ComplexMatrix ref = expm_hermitian(h, angle * std::numbers::pi / 180);
      EXPECT_LT((ComplexMatrix(rf_rotation(phase, angle)) - ref).norm(), 1e-12) << phase << " " << angle;
    }
}

TEST(SpinSystem, RfExamples) {
  const auto rho = run_pulse_program(DensityMatrix::pure(BasisLabel::from_string("000")),
                                     single(RfPulse{2, 0, 90, 1e-5}), cfg(), ErrorModel::none());
  EXPECT_NEAR(rho.matrix()(0, 0).real(), 0.5, 1e-12);
  EXPECT_NEAR(rho.matrix()(1, 1).real(), 0.5, 1e-12);
  const ComplexMatrix xx = rf_propagator(1, 180, 90, 1, 3) * rf_propagator(1, 0, 90, 1, 3);
  EXPECT_LT((xx - ComplexMatrix::Identity(8, 8)).norm(), 1e-12);
}

TEST(SpinSystem, ZIdentityFromYXYbar) {
  // Time order Y, X, -Y equals exp(-i pi/2 Iz).
  const Eigen::Matrix2cd u = rf_rotation(270, 90) * rf_rotation(0, 90) * rf_rotation(90, 90);
  Eigen::Matrix2cd rz;
  rz << std::polar(1.0, -std::numbers::pi / 4), 0, 0, std::polar(1.0, std::numbers::pi / 4);
  const Complex overlap = (rz.adjoint() * u).trace() / 2.0;
  EXPECT_NEAR(std::abs(overlap), 1.0, 1e-12);
}

TEST(SpinSystem, DephasingChannel) {
  ComplexMatrix m = ComplexMatrix::Identity(8, 8) / 8.0;
  m(0, 1) = m(1, 0) = 0.05;  // coherence on C only
  m(0, 4) = m(4, 0) = 0.04;  // coherence on H only
  const DensityMatrix rho(m);
  const auto out = dephasing_channel(rho, cfg(), 0.65);
  EXPECT_NEAR(out.matrix()(0, 1).real(), 0.05 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(out.matrix()(0, 4).real(), 0.04 * std::exp(-0.65), 1e-12);
  EXPECT_LT((out.matrix().diagonal() - m.diagonal()).norm(), 1e-15);
  EXPECT_NEAR(out.matrix().trace().real(), 1.0, 1e-12);
  EXPECT_LE(out.matrix().norm(), m.norm() + 1e-15);
  EXPECT_LT((dephasing_channel(rho, cfg(), 0.0).matrix() - m).norm(), 1e-15);
}

TEST(SpinSystem, RefocusedEvolutionCommutesWithOtherSpinZ) {
  const ComplexMatrix j = coupling_propagator(cfg(), 0, 1, 0.003);
  const ComplexMatrix z = embed_single_spin(rf_rotation(270, 90) * rf_rotation(0, 37) * rf_rotation(90, 90), 2, 3);
  EXPECT_LT((j * z - z * j).norm(), 1e-12);
}

TEST(SpinSystem, PurityPreservedWithoutErrors) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> spin(0, 2), ph(0, 3);
  PulseProgram p;
  for (int k = 0; k < 60; ++k) {
    if (k % 5 == 4) p.ops.emplace_back(JEvolution{0, 2, 0.5, 1.0 / 448});
    else p.ops.emplace_back(RfPulse{spin(rng), 90.0 * ph(rng), 90, 1e-5});
  }
  const auto out = run_pulse_program(DensityMatrix::pure(BasisLabel::from_string("000")), p, cfg(), ErrorModel::none());
  EXPECT_NEAR(out.purity(), 1.0, 1e-9);
}

TEST(SpinSystem, FivePointEnsembleRetention) {
  for (double loss : {0.0, 0.01, 0.05, 0.2}) {
    const auto ens = five_point_rf_ensemble(loss);
    double retention = 0.0, total = 0.0;
    for (const auto& m : ens) retention += m.weight * std::sin(m.scale * std::numbers::pi / 2), total += m.weight;
    EXPECT_NEAR(total, 1.0, 1e-15);
    EXPECT_NEAR(retention, 1.0 - loss, 1e-12);
  }
}

TEST(SpinSystem, SingleMemberEnsembleMatchesErrorFree) {
  SpinSystemConfig c = cfg();
  c.rf_ensemble = {{1.0, 1.0}};
  PulseProgram p;
  p.ops = {RfPulse{0, 0, 90, 1e-5}, JEvolution{0, 2, 0.5, 1.0 / 448}, RfPulse{2, 90, 45, 5e-6}};
  const auto rho0 = DensityMatrix::pure(BasisLabel::from_string("000"));
  const auto a = run_pulse_program(rho0, p, c, ErrorModel::static_ensemble());
  const auto b = run_pulse_program(rho0, p, c, ErrorModel::none());
  EXPECT_LT((a.matrix() - b.matrix()).norm(), 1e-14);
}

TEST(SpinSystem, StochasticTrainMatchesClosedForm) {
  // Independent of the implementation's noise model details: the mean
  // transverse magnetization after m nominal X pulses retains 0.95^m.
  for (int m : {1, 4, 10}) {
    PulseProgram train;
    train.n = 3;
    for (int k = 0; k < m; ++k) train.ops.emplace_back(RfPulse{2, 90, 90, 1e-5});
    // Start with C along z; a train of y pulses rotates it in the x-z plane.
    const auto rho0 = DensityMatrix::pure(BasisLabel::from_string("000"));
    const ErrorModel err = ErrorModel::stochastic(0.05, 17, 400);
    const auto noisy = run_pulse_program(rho0, train, cfg(), err);
    const auto ideal = run_pulse_program(rho0, train, cfg(), ErrorModel::none());
    // Bloch vector of spin C: the component carried by the ideal rotation decays.
    const ComplexMatrix ix = embed_single_spin(SpinOps<>::ix(), 2, 3);
    const ComplexMatrix iz = embed_single_spin(SpinOps<>::iz(), 2, 3);
    const double nx = (noisy.matrix() * ix).trace().real(), nz = (noisy.matrix() * iz).trace().real();
    const double ix0 = (ideal.matrix() * ix).trace().real(), iz0 = (ideal.matrix() * iz).trace().real();
    const double projected = (nx * ix0 + nz * iz0) / (ix0 * ix0 + iz0 * iz0);
    EXPECT_NEAR(projected, std::pow(0.95, m), 0.03) << m;
  }
}

TEST(SpinSystem, StochasticIsSeedDeterministic) {
  PulseProgram p;
  for (int k = 0; k < 5; ++k) p.ops.emplace_back(RfPulse{k % 3, 0, 90, 1e-5});
  const auto rho0 = DensityMatrix::pure(BasisLabel::from_string("000"));
  const auto a = run_pulse_program(rho0, p, cfg(), ErrorModel::stochastic(0.05, 9, 8));
  const auto b = run_pulse_program(rho0, p, cfg(), ErrorModel::stochastic(0.05, 9, 8));
  const auto c = run_pulse_program(rho0, p, cfg(), ErrorModel::stochastic(0.05, 10, 8));
  EXPECT_EQ((a.matrix() - b.matrix()).norm(), 0.0);
  EXPECT_GT((a.matrix() - c.matrix()).norm(), 0.0);
}

TEST(SpinSystem, SignalRetention) {
  EXPECT_DOUBLE_EQ(ensemble_signal_retention(ErrorModel::static_ensemble(), 0), 1.0);
  EXPECT_NEAR(ensemble_signal_retention(ErrorModel::stochastic(0.05), 1), 0.95, 1e-15);
  EXPECT_NEAR(ensemble_signal_retention(ErrorModel::stochastic(0.05), 48), 0.0853, 5e-5);
  EXPECT_DOUBLE_EQ(ensemble_signal_retention(ErrorModel::none(), 48), 1.0);
}

TEST(PulseProgramText, RoundTrip) {
  PulseProgram p;
  p.n = 3;
  p.source = "test";
  p.ops = {RfPulse{0, 90, 90, 1e-5}, JEvolution{1, 2, 0.25, 1.0 / (4 * 311.0)}, Delay{0.001, {{0, 1}, {1, 2}}},
           RfPulse{2, 270, 45, 5e-6}};
  const auto q = parse_program_text(to_text(p));
  EXPECT_EQ(to_text(q), to_text(p));
  EXPECT_THROW(parse_program_text("n 3\nPULSE 0 0\n"), Error);
}
