#include "nmrq/qcore.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nmrq;

namespace {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix random_density(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  const int d = dim_for(n);
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST(QCore, EmbedMatchesKroneckerChain) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix iz = SpinOps<>::iz();
  const ComplexMatrix ix = SpinOps<>::ix();
  EXPECT_LT((embed_single_spin(iz, 0, 3) - kron(kron(iz, id), id)).norm(), 1e-15);
  EXPECT_LT((embed_single_spin(ix, 1, 3) - kron(kron(id, ix), id)).norm(), 1e-15);
  EXPECT_LT((embed_single_spin(ix, 2, 3) - kron(kron(id, id), ix)).norm(), 1e-15);
  EXPECT_THROW(embed_single_spin(iz, 3, 3), Error);
}

TEST(QCore, SpinZeroIsMostSignificant) {
  EXPECT_EQ(spin_bit(4, 0, 3), 1);
  EXPECT_EQ(spin_bit(4, 2, 3), 0);
  EXPECT_EQ(spin_bit(1, 2, 3), 1);
  const auto z = z_diagonal(0, 3);
  EXPECT_DOUBLE_EQ(z(0), 0.5);
  EXPECT_DOUBLE_EQ(z(4), -0.5);
  const auto zz = zz_diagonal(0, 2, 3);
  EXPECT_DOUBLE_EQ(zz(0), 0.25);
  EXPECT_DOUBLE_EQ(zz(1), -0.25);
  EXPECT_DOUBLE_EQ(zz(5), 0.25);
}

TEST(QCore, BasisLabelRoundTrip) {
  const auto l = BasisLabel::from_string("101");
  EXPECT_EQ(l.index(), 5u);
  EXPECT_EQ(l.str(), "101");
  EXPECT_EQ(BasisLabel::from_index(6, 3).str(), "110");
  EXPECT_THROW(BasisLabel::from_string("12"), Error);
}

TEST(QCore, DensityMatrixValidation) {
  EXPECT_NEAR(DensityMatrix::pure(BasisLabel::from_string("010")).purity(), 1.0, 1e-14);
  EXPECT_NEAR(DensityMatrix::maximally_mixed(3).purity(), 1.0 / 8, 1e-14);
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix{bad}, Error);  // trace 2
  ComplexMatrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix{neg}, Error);
  ComplexMatrix nonherm(2, 2);
  nonherm << 0.5, 0.1, 0.0, 0.5;
  EXPECT_THROW(DensityMatrix{nonherm}, Error);
}

TEST(QCore, DeviationIsTraceless) {
  std::mt19937 rng(3);
  const DensityMatrix rho(random_density(3, rng));
  const auto dev = deviation(rho);
  EXPECT_LT(std::abs(dev.matrix().trace()), 1e-14);
  EXPECT_LT((dev.matrix() + ComplexMatrix::Identity(8, 8) / 8.0 - rho.matrix()).norm(), 1e-14);
}

TEST(QCore, RelativeError) {
  std::mt19937 rng(5);
  const auto dev = deviation(DensityMatrix(random_density(3, rng)));
  EXPECT_EQ(relative_error(dev, dev, 1.0), 0.0);
  const DeviationDensityMatrix half((0.5 * dev.matrix()).eval());
  EXPECT_NEAR(relative_error(half, dev, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(relative_error(half, dev, 1.0), 0.5, 1e-14);
  const DeviationDensityMatrix zero(ComplexMatrix::Zero(8, 8));
  EXPECT_THROW(relative_error(dev, zero, 1.0), Error);
}

TEST(QCore, PhaseAlignedDeviationIgnoresGlobalPhase) {
  std::mt19937 rng(7);
  const ComplexMatrix a = random_density(2, rng);
  EXPECT_LT(phase_aligned_deviation(a, std::polar(1.0, 1.234) * a), 1e-14);
  EXPECT_GT(phase_aligned_deviation(a, a.transpose().eval()), 1e-3);
}

TEST(QCore, ApplyUnitaryRejectsNonUnitary) {
  const auto rho = DensityMatrix::maximally_mixed(1);
  EXPECT_THROW(apply_unitary(rho, (2.0 * ComplexMatrix::Identity(2, 2)).eval()), Error);
}
