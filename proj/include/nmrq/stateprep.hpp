// Effective-pure-state preparation by temporal averaging of
// population-permuted equilibrium experiments.
#pragma once

#include "nmrq/circuit.hpp"
#include "nmrq/qcore.hpp"
#include "nmrq/spinsys.hpp"

#include <vector>

namespace nmrq {

struct EquilibriumState {
  int n = 0;
  double epsilon = 0.0;
  Eigen::VectorXd diag;  // populations, unit trace
};

/// High-temperature linearization: 1/2^n + epsilon * sum_i gamma_i diag(Iz_i).
EquilibriumState equilibrium_state(const SpinSystemConfig& cfg);

struct PrepExperiment {
  GateCircuit circuit;
  Eigen::VectorXd resulting_diag;
};

/// Permutation route: resulting_diag[pi(x)] = eq.diag[x].
PrepExperiment permuted_populations(const EquilibriumState& eq, const GateCircuit& circuit);

/// Unitary route: diagonal of U diag(eq) U^dagger with U the compiled
/// program's unitary. Must agree with permuted_populations().
Eigen::VectorXd permuted_populations_unitary(const EquilibriumState& eq, const GateCircuit& circuit,
                                             const SpinSystemConfig& cfg);

/// Ideal effective pure ground state with the same ground-state excess as
/// the equilibrium: uniform background, trace 1.
Eigen::VectorXd effective_pure_target(const EquilibriumState& eq);

struct WeightSolution {
  Eigen::VectorXd weights;
  double residual = 0.0;  // 2-norm over the deviation part
  int rank = 0;
};

/// Least squares sum_l w_l (diag_l - 1/2^n) = target - 1/2^n.
WeightSolution solve_weights(const std::vector<PrepExperiment>& experiments, const Eigen::VectorXd& target);

struct PrepScheme {
  std::vector<PrepExperiment> experiments;
  Eigen::VectorXd weights;
  Eigen::VectorXd target;
  double residual = 0.0;
};

/// Builds the experiments for `circuits` and solves their weights.
PrepScheme make_prep_scheme(const EquilibriumState& eq, const std::vector<GateCircuit>& circuits);

struct EffectivePureState {
  DensityMatrix state;
  /// std / mean of the non-ground deviation populations.
  double variance_metric = 0.0;
  /// var / mean^2 of the same populations.
  double relative_variance = 0.0;
};

/// sum_l w_l rho_l renormalized to unit trace.
EffectivePureState effective_pure_state(const PrepScheme& scheme);

/// Frozen three-experiment scheme: identity and two three-CNOT permutations.
std::vector<GateCircuit> default_prep_circuits();
PrepScheme default_prep_scheme(const SpinSystemConfig& cfg);

/// 2^n - 1 experiments cycling all non-ground populations (n = 3 only).
PrepScheme cyclic_prep_scheme(const SpinSystemConfig& cfg);

/// Shortest NOT/CNOT circuit for every affine basis permutation of n <= 3
/// spins, in breadth-first discovery order (identity first).
std::vector<GateCircuit> affine_permutation_circuits(int n);

/// Exhaustive search for the best `experiments`-member scheme (2 or 3) with
/// the unpermuted equilibrium pinned as the first experiment; minimizes
/// variance_metric among schemes whose ground population dominates.
PrepScheme search_prep_scheme(const SpinSystemConfig& cfg, int experiments = 3);

}  // namespace nmrq
