#include "nmrq/qcore.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>

namespace nmrq {

namespace {

int spins_for_dim(Eigen::Index d) {
  if (d < 2 || !std::has_single_bit(static_cast<std::size_t>(d)))
    throw Error("matrix dimension " + std::to_string(d) + " is not a power of two");
  return std::countr_zero(static_cast<std::size_t>(d));
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(std::string(what) + ": matrix must be square and non-empty");
}

double checked_diagonal(const ComplexMatrix& m, const BasisLabel& x) {
  if (dim_for(x.size()) != m.rows())
    throw Error("diagonal_entry: label " + x.str() + " does not match matrix dimension");
  const Complex v = m(static_cast<Eigen::Index>(x.index()), static_cast<Eigen::Index>(x.index()));
  if (std::abs(v.imag()) >= 1e-10)
    throw Error("diagonal_entry: imaginary residue " + std::to_string(v.imag()) +
                " indicates a corrupted state");
  return v.real();
}

}  // namespace

Eigen::VectorXd zz_diagonal(int i, int j, int n) {
  const int d = dim_for(n);
  Eigen::VectorXd out(d);
  for (int x = 0; x < d; ++x) {
    const double zi = spin_bit(x, i, n) ? -0.5 : 0.5;
    const double zj = spin_bit(x, j, n) ? -0.5 : 0.5;
    out(x) = zi * zj;
  }
  return out;
}

Eigen::VectorXd z_diagonal(int i, int n) {
  const int d = dim_for(n);
  Eigen::VectorXd out(d);
  for (int x = 0; x < d; ++x) out(x) = spin_bit(x, i, n) ? -0.5 : 0.5;
  return out;
}

double phase_aligned_deviation(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("phase_aligned_deviation: dimension mismatch");
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

BasisLabel::BasisLabel(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_)
    if (b > 1) throw Error("BasisLabel: bits must be 0 or 1");
}

BasisLabel BasisLabel::from_string(std::string_view s) {
  std::vector<std::uint8_t> bits;
  for (char c : s) {
    if (c != '0' && c != '1') throw Error("BasisLabel: invalid label '" + std::string(s) + "'");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  if (bits.empty()) throw Error("BasisLabel: empty label");
  return BasisLabel(std::move(bits));
}

BasisLabel BasisLabel::from_index(std::size_t index, int n) {
  if (n < 1 || index >= static_cast<std::size_t>(dim_for(n)))
    throw Error("BasisLabel: index " + std::to_string(index) + " out of range");
  std::vector<std::uint8_t> bits(n);
  for (int s = 0; s < n; ++s) bits[s] = static_cast<std::uint8_t>(spin_bit(index, s, n));
  return BasisLabel(std::move(bits));
}

std::size_t BasisLabel::index() const {
  std::size_t idx = 0;
  for (auto b : bits_) idx = (idx << 1) | b;
  return idx;
}

std::string BasisLabel::str() const {
  std::string s;
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  spins_for_dim(m_.rows());
  if (hermiticity_error(m_) > 1e-12) throw Error("DensityMatrix: not Hermitian within 1e-12");
  if (std::abs(m_.trace() - Complex(1.0)) > 1e-12)
    throw Error("DensityMatrix: trace deviates from 1 by more than 1e-12");
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw Error("DensityMatrix: negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
}

DensityMatrix DensityMatrix::pure(const BasisLabel& label) {
  const int d = dim_for(label.size());
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(static_cast<Eigen::Index>(label.index()), static_cast<Eigen::Index>(label.index())) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  const int d = dim_for(n);
  return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::from_state_vector(const Eigen::VectorXcd& psi) {
  const Eigen::VectorXcd v = psi / psi.norm();
  return DensityMatrix(v * v.adjoint());
}

int DensityMatrix::spins() const { return spins_for_dim(m_.rows()); }

DeviationDensityMatrix::DeviationDensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  require_square(m_, "DeviationDensityMatrix");
  spins_for_dim(m_.rows());
  if (hermiticity_error(m_) > 1e-12)
    throw Error("DeviationDensityMatrix: not Hermitian within 1e-12");
  if (std::abs(m_.trace()) > 1e-12)
    throw Error("DeviationDensityMatrix: trace is not zero within 1e-12");
}

int DeviationDensityMatrix::spins() const { return spins_for_dim(m_.rows()); }

DensityMatrix apply_unitary(const DensityMatrix& rho, const ComplexMatrix& u) {
  if (u.rows() != rho.dim() || u.cols() != rho.dim())
    throw Error("apply_unitary: dimension mismatch");
  if (!is_unitary(u, 1e-10)) throw Error("apply_unitary: operator is not unitary within 1e-10");
  ComplexMatrix out = u * rho.matrix() * u.adjoint();
  // Conjugation doubles rounding on the off-diagonals; restore exact Hermiticity.
  out = (0.5 * (out + out.adjoint())).eval();
  return DensityMatrix(std::move(out));
}

DeviationDensityMatrix deviation(const DensityMatrix& rho) {
  const auto& m = rho.matrix();
  const double shift = m.trace().real() / static_cast<double>(m.rows());
  ComplexMatrix d = m;
  d.diagonal().array() -= shift;
  return DeviationDensityMatrix(std::move(d));
}

DeviationDensityMatrix deviation(const DeviationDensityMatrix& rho) {
  const auto& m = rho.matrix();
  const double shift = m.trace().real() / static_cast<double>(m.rows());
  ComplexMatrix d = m;
  d.diagonal().array() -= shift;
  return DeviationDensityMatrix(std::move(d));
}

double relative_error(const DeviationDensityMatrix& rho_exp, const DeviationDensityMatrix& rho_th,
                      double c) {
  if (rho_exp.dim() != rho_th.dim()) throw Error("relative_error: dimension mismatch");
  const double denom = rho_th.matrix().norm();
  if (denom == 0.0) throw Error("relative_error: reference matrix has zero norm");
  return (c * rho_exp.matrix() - rho_th.matrix()).norm() / denom;
}

double diagonal_entry(const DensityMatrix& rho, const BasisLabel& x) {
  return checked_diagonal(rho.matrix(), x);
}

double diagonal_entry(const DeviationDensityMatrix& rho, const BasisLabel& x) {
  return checked_diagonal(rho.matrix(), x);
}

}  // namespace nmrq
