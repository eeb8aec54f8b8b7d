// Abstract gate circuits and their ideal (pulse-independent) semantics.
#pragma once

#include "nmrq/qcore.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace nmrq {

enum class Axis { x, y, z };

/// exp(-i angle I_axis). Z rotations carry a realization variant 1..4.
struct Rot {
  int spin = 0;
  Axis axis = Axis::z;
  double angle_deg = 90.0;
  int variant = 1;
};

/// 180 degree x rotation.
struct Not {
  int spin = 0;
};

/// NMR pseudo-Hadamard: 90 degree rotation about +y (sign +1) or -y (sign -1).
struct PseudoHadamard {
  int spin = 0;
  int sign = +1;
};

/// Flips target iff control is |1>. variant 1..4 picks the pulse form;
/// z_variant picks the realization of the control Z rotation.
struct Cnot {
  int control = 0;
  int target = 1;
  int variant = 1;
  int z_variant = 1;
};

/// Controlled phase: multiplies |1_c 1_t> by exp(i sign v_angle).
/// v_angle 90 is the square root of the controlled-Z used by the Toffoli
/// construction; 180 is the controlled-Z itself.
struct ControlledV {
  int control = 0;
  int target = 1;
  double v_angle_deg = 90.0;
  int sign = +1;
  int zc_variant = 1;
  int zt_variant = 1;
  int flip_variant = 1;  // 1: sign-reversing pi pulses on target, 2: on control
};

/// Number of variant slots consumed by a ToffoliPhase expansion:
/// CV (3), CNOT (2), CV (3), CNOT (2), CV (3).
inline constexpr int kToffoliSlots = 13;

/// Three-spin diagonal gate flipping the sign of |111> on `spins`.
struct ToffoliPhase {
  std::array<int, 3> spins{0, 1, 2};
  std::array<int, kToffoliSlots> variants{};  // 0 = library default
};

using Gate = std::variant<Rot, Not, PseudoHadamard, Cnot, ControlledV, ToffoliPhase>;

struct GateCircuit {
  int n = 3;
  std::vector<Gate> gates;

  /// Throws if any spin index is out of range or repeated within a gate.
  void validate() const;
};

std::string gate_name(const Gate& g);
std::vector<int> gate_spins(const Gate& g);

/// Ideal unitary of a single gate / a whole circuit, built directly from
/// gate definitions (no pulses involved).
ComplexMatrix gate_unitary(const Gate& g, int n);
ComplexMatrix circuit_unitary(const GateCircuit& circuit);

/// True if every gate permutes computational basis states (NOT/CNOT only).
bool is_classical_permutation(const GateCircuit& circuit);
/// Basis permutation of a NOT/CNOT circuit: result[x] = image of x.
std::vector<std::size_t> classical_permutation(const GateCircuit& circuit);

// Text format, one gate per line ('#' starts a comment):
//   n 3
//   ROT <spin> <x|y|z> <angle_deg> [v=N]
//   NOT <spin>
//   PH <spin> [+|-]
//   CNOT <control> <target> [v=N] [z=N]
//   CV <control> <target> <v_angle_deg> [+|-] [zc=N] [zt=N] [flip=N]
//   TOFFPHASE <a> <b> <c> [v=N,N,...]
// Parse errors report the line number.
GateCircuit parse_circuit(std::istream& is, int default_n = 3);
GateCircuit parse_circuit_text(const std::string& text, int default_n = 3);
void write_circuit(std::ostream& os, const GateCircuit& circuit);
std::string to_text(const GateCircuit& circuit);

/// Gates joined by "; " on a single line (used inside config files).
std::string to_inline_text(const GateCircuit& circuit);
GateCircuit parse_inline_circuit(const std::string& text, int n);

}  // namespace nmrq
