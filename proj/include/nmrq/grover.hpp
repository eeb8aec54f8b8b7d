// Three-qubit Grover search: instances, ideal theory, and iteration sweeps.
#pragma once

#include "nmrq/circuit.hpp"
#include "nmrq/compiler.hpp"
#include "nmrq/spinsys.hpp"
#include "nmrq/stateprep.hpp"

#include <optional>
#include <vector>

namespace nmrq {

struct GroverInstance {
  BasisLabel x0;
  GateCircuit oracle;     // -1 on |x0>
  GateCircuit diffusion;  // inversion about the mean
  int n = 3;
};

/// Oracle: ToffoliPhase conjugated by NOTs on the zero bits of x0.
/// Diffusion: PH(-) on all spins, NOT-conjugated ToffoliPhase, PH(+).
GroverInstance build_instance(const BasisLabel& x0);

/// PH(+) on every spin: |0...0> to the uniform superposition.
GateCircuit superposition_circuit(int n);

/// Superposition followed by k oracle+diffusion iterations.
GateCircuit grover_circuit(const GroverInstance& instance, int k);

/// sin^2((2k+1) asin(1/sqrt(N))).
double ideal_success_probability(int k, int N);

/// Random sampling without replacement, the last candidate needing no query.
double classical_expected_queries(int N);

enum class PrepMode { pure, temporal };

struct SweepOptions {
  int k_max = 28;
  PrepMode prep = PrepMode::pure;
  /// Temporal-averaging scheme; default_prep_scheme(cfg) when empty.
  std::optional<PrepScheme> scheme;
  CompileOptions compile;
  bool keep_states = false;
};

struct SweepResult {
  BasisLabel x0;
  std::vector<int> k_values;
  std::vector<double> d_x0;        // raw deviation diagonal at x0
  std::vector<double> p_estimate;  // d_x0 / input_scale + 1/2^n
  std::vector<CostReport> cost;    // whole compiled program at each k
  std::vector<DeviationDensityMatrix> full_states;
  /// Ground excess of the input deviation times 2^n / (2^n - 1); 1 for a
  /// pure input.
  double input_scale = 1.0;
};

SweepResult run_sweep(const BasisLabel& x0, const SpinSystemConfig& cfg, const ErrorModel& err,
                      const SweepOptions& options = {});

/// Output state of the compiled k-iteration program for one input choice.
DensityMatrix run_grover(const BasisLabel& x0, int k, const SpinSystemConfig& cfg, const ErrorModel& err,
                         const SweepOptions& options = {});

/// Mean duration of one iteration of a sweep, (t(k_max) - t(0)) / k_max.
double iteration_duration(const SweepResult& sweep);

}  // namespace nmrq
