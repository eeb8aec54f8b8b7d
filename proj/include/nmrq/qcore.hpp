// Dense complex-matrix state algebra for small spin registers.
//
// Qubit ordering is fixed: spin 0 is the most significant bit of a basis
// index (H, F, C for the default molecule, C least significant). |0> is the
// spin-up state, so Iz|0> = +1/2 |0>.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nmrq {

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
using ComplexMatrix = CMatrix<double>;
using Complex = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spin-1/2 operators (Ix, Iy, Iz) and identity, as 2x2 matrices.
template <typename Scalar = double>
struct SpinOps {
  using M2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
  static M2 ix() {
    M2 m;
    m << 0, Scalar(0.5), Scalar(0.5), 0;
    return m;
  }
  static M2 iy() {
    using C = std::complex<Scalar>;
    M2 m;
    m << C(0), C(0, -0.5), C(0, 0.5), C(0);
    return m;
  }
  static M2 iz() {
    M2 m;
    m << Scalar(0.5), 0, 0, Scalar(-0.5);
    return m;
  }
  static M2 id() { return M2::Identity(); }
};

inline int dim_for(int n) { return 1 << n; }

/// Bit of spin `spin` in basis index `index` for an n-spin register.
inline int spin_bit(std::size_t index, int spin, int n) {
  return static_cast<int>((index >> (n - 1 - spin)) & 1u);
}

/// I (x) ... (x) op (x) ... (x) I with `op` at `spin_index`.
template <typename Derived>
CMatrix<typename Derived::RealScalar> embed_single_spin(const Eigen::MatrixBase<Derived>& op,
                                                        int spin_index, int n) {
  using Scalar = typename Derived::RealScalar;
  if (n < 1) throw Error("embed_single_spin: n must be positive");
  if (spin_index < 0 || spin_index >= n)
    throw Error("embed_single_spin: spin index " + std::to_string(spin_index) +
                " out of range for n=" + std::to_string(n));
  if (op.rows() != 2 || op.cols() != 2) throw Error("embed_single_spin: op must be 2x2");
  // Index-wise construction avoids materializing the Kronecker chain.
  const int d = dim_for(n);
  const int shift = n - 1 - spin_index;
  CMatrix<Scalar> out = CMatrix<Scalar>::Zero(d, d);
  for (int r = 0; r < d; ++r) {
    const int rb = (r >> shift) & 1;
    for (int cb = 0; cb < 2; ++cb) {
      const auto v = op(rb, cb);
      if (v == std::complex<Scalar>(0)) continue;
      const int c = (r & ~(1 << shift)) | (cb << shift);
      out(r, c) = v;
    }
  }
  return out;
}

/// Diagonal of Iz_i Iz_j (entries +-1/4).
Eigen::VectorXd zz_diagonal(int i, int j, int n);
/// Diagonal of Iz_i (entries +-1/2).
Eigen::VectorXd z_diagonal(int i, int n);

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  const auto prod = (u.adjoint() * u).eval();
  return (prod - decltype(prod)::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
double hermiticity_error(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename DerivedA, typename DerivedB>
double frobenius_distance(const Eigen::MatrixBase<DerivedA>& a,
                          const Eigen::MatrixBase<DerivedB>& b) {
  return (a - b).norm();
}

/// Max entrywise deviation between a and e^{i alpha} b, alpha aligned on the
/// trace overlap. Global phase is never compared.
double phase_aligned_deviation(const ComplexMatrix& a, const ComplexMatrix& b);

class BasisLabel {
 public:
  BasisLabel() = default;
  explicit BasisLabel(std::vector<std::uint8_t> bits);
  static BasisLabel from_string(std::string_view bits);
  static BasisLabel from_index(std::size_t index, int n);

  int size() const { return static_cast<int>(bits_.size()); }
  std::size_t index() const;
  int bit(int spin) const { return bits_.at(spin); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::string str() const;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), unit trace (1e-12) and eigenvalues >= -1e-10.
  explicit DensityMatrix(ComplexMatrix m);
  static DensityMatrix pure(const BasisLabel& label);
  static DensityMatrix maximally_mixed(int n);
  static DensityMatrix from_state_vector(const Eigen::VectorXcd& psi);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  int spins() const;
  double purity() const { return (m_ * m_).trace().real(); }

 private:
  ComplexMatrix m_;
};

class DeviationDensityMatrix {
 public:
  /// Validates Hermiticity (1e-12) and zero trace (1e-12).
  explicit DeviationDensityMatrix(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  int spins() const;

 private:
  ComplexMatrix m_;
};

/// U rho U^dagger. Throws if U is not unitary within 1e-10.
DensityMatrix apply_unitary(const DensityMatrix& rho, const ComplexMatrix& u);

/// rho - (Tr rho / 2^n) I.
DeviationDensityMatrix deviation(const DensityMatrix& rho);
DeviationDensityMatrix deviation(const DeviationDensityMatrix& rho);

/// ||c rho_exp - rho_th||_F / ||rho_th||_F.
double relative_error(const DeviationDensityMatrix& rho_exp, const DeviationDensityMatrix& rho_th,
                      double c);

double diagonal_entry(const DensityMatrix& rho, const BasisLabel& x);
double diagonal_entry(const DeviationDensityMatrix& rho, const BasisLabel& x);

}  // namespace nmrq
