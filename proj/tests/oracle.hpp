// Brute-force reference semantics used by the tests. Deliberately written
// against basis indices rather than the library's gate_unitary.
#pragma once

#include "nmrq/qcore.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

using nmrq::Complex;
using nmrq::ComplexMatrix;

inline int bit(int index, int spin, int n) { return (index >> (n - 1 - spin)) & 1; }

inline ComplexMatrix cnot(int c, int t, int n) {
  const int d = 1 << n;
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  for (int x = 0; x < d; ++x) u(bit(x, c, n) ? x ^ (1 << (n - 1 - t)) : x, x) = 1.0;
  return u;
}

inline ComplexMatrix not_gate(int s, int n) {
  const int d = 1 << n;
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  for (int x = 0; x < d; ++x) u(x ^ (1 << (n - 1 - s)), x) = 1.0;
  return u;
}

/// Multiplies |1..1> on `spins` by phase.
inline ComplexMatrix controlled_phase(std::initializer_list<int> spins, Complex phase, int n) {
  const int d = 1 << n;
  ComplexMatrix u = ComplexMatrix::Identity(d, d);
  for (int x = 0; x < d; ++x) {
    bool all = true;
    for (int s : spins) all = all && bit(x, s, n);
    if (all) u(x, x) = phase;
  }
  return u;
}

/// 90 degree rotation about +y (sign +1) or -y on one spin: exp(-i sign pi/2 Iy).
inline ComplexMatrix pseudo_hadamard(int s, int sign, int n) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd m;
  m << r, -sign * r, sign * r, r;
  const int d = 1 << n;
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  for (int x = 0; x < d; ++x)
    for (int b = 0; b < 2; ++b) {
      const int y = (x & ~(1 << (n - 1 - s))) | (b << (n - 1 - s));
      u(y, x) = m(b, bit(x, s, n));
    }
  return u;
}

/// Grover iterate for marked x0 on n spins built from the textbook
/// reflections, acting on a state vector.
inline Eigen::VectorXcd grover_state(int x0, int k, int n) {
  const int d = 1 << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(d, 1.0 / std::sqrt(double(d)));
  const Eigen::VectorXcd s = psi;
  for (int it = 0; it < k; ++it) {
    psi(x0) = -psi(x0);
    psi = 2.0 * s * (s.adjoint() * psi)(0) - psi;
  }
  return psi;
}

inline double grover_probability(int k, int n) {
  const double theta = std::asin(1.0 / std::sqrt(double(1 << n)));
  return std::pow(std::sin((2 * k + 1) * theta), 2);
}

}  // namespace oracle
