// Circuit -> pulse program compiler.
//
// expand() replaces every gate by a realization from the building-block
// library; simplify() then runs rewrite passes to a fixed point:
//   cancel-inverse   drop same-spin pulse pairs that multiply to identity
//   merge-rotations  fuse same-axis pulses on one spin by angle addition
//   commute-z        move Z-rotation pulse runs rightwards across J evolutions
//   canonical-order  sort runs of consecutive pulses by spin index
// Pulses are "adjacent" when no op touching the same spin lies between them.
#pragma once

#include "nmrq/circuit.hpp"
#include "nmrq/pulse.hpp"
#include "nmrq/spinsys.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nmrq {

struct ExpandOptions {
  /// Controlled-V gates built from CNOTs and Z rotations only.
  bool naive = false;
  /// Per-gate variant overrides, keyed by gate index; see variant_slots().
  std::map<std::size_t, std::vector<int>> overrides;
};

/// Upper bound (inclusive, lower bound 1) of each variant slot of a gate.
std::vector<int> variant_slots(const Gate& g);

/// Variant vector for a ToffoliPhase slot list where 0 means "library default".
std::array<int, kToffoliSlots> default_toffoli_variants();

PulseProgram expand(const GateCircuit& circuit, const SpinSystemConfig& cfg,
                    const ExpandOptions& options = {});

struct RewriteRule {
  std::string name;
  bool enabled = true;
  /// Applies one rewrite; returns false when the rule has nothing to do.
  std::function<bool(PulseProgram&)> apply;
};

std::vector<RewriteRule> default_rules();
RewriteRule cancel_inverse_rule();
RewriteRule merge_rotations_rule();
RewriteRule commute_z_rule();
RewriteRule canonical_order_rule();

PulseProgram simplify(PulseProgram program, const std::vector<RewriteRule>& passes = default_rules(),
                      int max_iterations = 100000);

/// Deletes trailing Z-rotation pulses on every spin. Only valid when the
/// program output is read out as populations.
PulseProgram absorb_trailing_z(PulseProgram program);

/// Replaces each ideal JEvolution by free evolution of all couplings with a
/// pi-pulse pair (phases 0 and 180) on the remaining spin. n <= 3 only.
PulseProgram expand_refocusing(const PulseProgram& program, const SpinSystemConfig& cfg);

ComplexMatrix program_unitary(const PulseProgram& program, const SpinSystemConfig& cfg);

struct Equivalence {
  bool equivalent = false;
  double max_deviation = 0.0;
};

Equivalence verify_equivalence(const PulseProgram& a, const PulseProgram& b,
                               const SpinSystemConfig& cfg, double tol = 1e-9);
Equivalence verify_equivalence(const PulseProgram& a, const GateCircuit& b,
                               const SpinSystemConfig& cfg, double tol = 1e-9);

struct CostReport {
  int rf_pulse_count = 0;
  double pulse_90_equivalents = 0.0;
  int j_half_count = 0;
  int j_quarter_count = 0;
  double total_duration_s = 0.0;
};

CostReport cost(const PulseProgram& program);

struct CompileOptions {
  ExpandOptions expand;
  bool simplify = true;
  bool explicit_refocus = false;
  bool absorb_trailing_z = false;
};

PulseProgram compile(const GateCircuit& circuit, const SpinSystemConfig& cfg,
                     const CompileOptions& options = {});

struct VariantSearchResult {
  std::map<std::size_t, std::vector<int>> choice;
  CostReport cost;
  std::size_t evaluated = 0;
};

/// Exhaustive search over all variant combinations of a circuit with at most
/// 12 gates; minimizes (rf_pulse_count, pulse_90_equivalents, duration) of
/// the simplified program, ties broken by the lexicographically smallest
/// variant vector. Throws if the space exceeds max_combinations.
VariantSearchResult search_variants(const GateCircuit& circuit, const SpinSystemConfig& cfg,
                                    std::size_t max_combinations = 1u << 20);

}  // namespace nmrq
