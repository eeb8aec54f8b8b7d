#include "nmrq/stateprep.hpp"

#include "nmrq/compiler.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace nmrq {

namespace {

struct Spread {
  double rel_std = 0.0;
  double mean = 0.0;
  bool ground_dominates = false;
};

// Statistics of a combined deviation diagonal (index 0 is the ground state).
Spread background_spread(const Eigen::VectorXd& dev) {
  const Eigen::Index m = dev.size() - 1;
  const Eigen::VectorXd bg = dev.tail(m);
  Spread s;
  s.mean = bg.mean();
  const double var = (bg.array() - s.mean).square().sum() / static_cast<double>(m);
  s.rel_std = std::sqrt(var) / std::abs(s.mean);
  s.ground_dominates = dev(0) > bg.maxCoeff();
  return s;
}

Eigen::MatrixXd deviation_columns(const std::vector<PrepExperiment>& experiments) {
  const Eigen::Index d = experiments.front().resulting_diag.size();
  Eigen::MatrixXd a(d, static_cast<Eigen::Index>(experiments.size()));
  for (std::size_t l = 0; l < experiments.size(); ++l) {
    if (experiments[l].resulting_diag.size() != d) throw Error("solve_weights: experiment dimension mismatch");
    a.col(static_cast<Eigen::Index>(l)) = experiments[l].resulting_diag.array() - 1.0 / static_cast<double>(d);
  }
  return a;
}

}  // namespace

EquilibriumState equilibrium_state(const SpinSystemConfig& cfg) {
  cfg.validate();
  const int n = cfg.n();
  EquilibriumState eq;
  eq.n = n;
  eq.epsilon = cfg.polarization;
  eq.diag = Eigen::VectorXd::Constant(dim_for(n), 1.0 / dim_for(n));
  for (int i = 0; i < n; ++i) eq.diag += cfg.polarization * cfg.gamma_rel[i] * z_diagonal(i, n);
  return eq;
}

PrepExperiment permuted_populations(const EquilibriumState& eq, const GateCircuit& circuit) {
  if (circuit.n != eq.n) throw Error("permuted_populations: spin count mismatch");
  if (!is_classical_permutation(circuit)) throw Error("permuted_populations: circuit contains a non-permutation gate");
  const auto perm = classical_permutation(circuit);
  PrepExperiment ex{circuit, Eigen::VectorXd::Zero(eq.diag.size())};
  for (std::size_t x = 0; x < perm.size(); ++x)
    ex.resulting_diag(static_cast<Eigen::Index>(perm[x])) = eq.diag(static_cast<Eigen::Index>(x));
  return ex;
}

Eigen::VectorXd permuted_populations_unitary(const EquilibriumState& eq, const GateCircuit& circuit,
                                             const SpinSystemConfig& cfg) {
  if (!is_classical_permutation(circuit)) throw Error("permuted_populations: circuit contains a non-permutation gate");
  const ComplexMatrix u = program_unitary(compile(circuit, cfg), cfg);
  const ComplexMatrix rho = eq.diag.cast<Complex>().asDiagonal();
  return (u * rho * u.adjoint()).diagonal().real();
}

Eigen::VectorXd effective_pure_target(const EquilibriumState& eq) {
  const double d = static_cast<double>(eq.diag.size());
  const double ground_excess = eq.diag(0) - 1.0 / d;
  Eigen::VectorXd t = Eigen::VectorXd::Constant(eq.diag.size(), 1.0 / d - ground_excess / (d - 1.0));
  t(0) = 1.0 / d + ground_excess;
  return t;
}

WeightSolution solve_weights(const std::vector<PrepExperiment>& experiments, const Eigen::VectorXd& target) {
  if (experiments.empty()) throw Error("solve_weights: no experiments");
  const Eigen::MatrixXd a = deviation_columns(experiments);
  if (target.size() != a.rows()) throw Error("solve_weights: target dimension mismatch");
  const Eigen::VectorXd b = target.array() - 1.0 / static_cast<double>(a.rows());
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  cod.setThreshold(1e-10);
  WeightSolution s;
  s.weights = cod.solve(b);
  s.rank = static_cast<int>(cod.rank());
  s.residual = (a * s.weights - b).norm();
  return s;
}

PrepScheme make_prep_scheme(const EquilibriumState& eq, const std::vector<GateCircuit>& circuits) {
  PrepScheme scheme;
  for (const auto& c : circuits) scheme.experiments.push_back(permuted_populations(eq, c));
  scheme.target = effective_pure_target(eq);
  const auto w = solve_weights(scheme.experiments, scheme.target);
  scheme.weights = w.weights;
  scheme.residual = w.residual;
  return scheme;
}

EffectivePureState effective_pure_state(const PrepScheme& scheme) {
  if (scheme.experiments.empty()) throw Error("effective_pure_state: empty scheme");
  if (scheme.weights.size() != static_cast<Eigen::Index>(scheme.experiments.size()))
    throw Error("effective_pure_state: weights not solved");
  const Eigen::MatrixXd a = deviation_columns(scheme.experiments);
  const double total = scheme.weights.sum();
  if (std::abs(total) < 1e-300) throw Error("effective_pure_state: weights sum to zero");
  const Eigen::VectorXd dev = a * scheme.weights / total;
  const Eigen::VectorXd pops = dev.array() + 1.0 / static_cast<double>(a.rows());
  if (pops.minCoeff() < -1e-10) throw Error("effective_pure_state: combined state has a negative population");
  const ComplexMatrix rho = pops.cast<Complex>().asDiagonal();
  const Spread s = background_spread(dev);
  return {DensityMatrix(rho), s.rel_std, s.rel_std * s.rel_std};
}

std::vector<GateCircuit> default_prep_circuits() {
  return {
      GateCircuit{3, {}},
      parse_inline_circuit("CNOT 0 1; CNOT 1 0; CNOT 2 0", 3),
      parse_inline_circuit("CNOT 1 0; CNOT 2 0; CNOT 0 1", 3),
  };
}

PrepScheme default_prep_scheme(const SpinSystemConfig& cfg) {
  if (cfg.n() != 3) throw Error("default_prep_scheme: three spins required");
  return make_prep_scheme(equilibrium_state(cfg), default_prep_circuits());
}

PrepScheme cyclic_prep_scheme(const SpinSystemConfig& cfg) {
  if (cfg.n() != 3) throw Error("cyclic_prep_scheme: three spins required");
  // First linear permutation (fixes |000>) that cycles the seven other labels.
  GateCircuit step;
  for (const auto& c : affine_permutation_circuits(3)) {
    const auto p = classical_permutation(c);
    if (p[0] != 0) continue;
    std::size_t x = 1;
    int order = 0;
    do {
      x = p[x];
      ++order;
    } while (x != 1);
    if (order == 7) {
      step = c;
      break;
    }
  }
  std::vector<GateCircuit> circuits;
  GateCircuit c{3, {}};
  for (int k = 0; k < 7; ++k) {
    circuits.push_back(c);
    c.gates.insert(c.gates.end(), step.gates.begin(), step.gates.end());
  }
  return make_prep_scheme(equilibrium_state(cfg), circuits);
}

std::vector<GateCircuit> affine_permutation_circuits(int n) {
  if (n < 1 || n > 3) throw Error("affine_permutation_circuits: 1 <= n <= 3");
  std::vector<Gate> generators;
  for (int s = 0; s < n; ++s) generators.emplace_back(Not{s});
  for (int c = 0; c < n; ++c)
    for (int t = 0; t < n; ++t)
      if (c != t) generators.emplace_back(Cnot{c, t});
  std::vector<std::vector<std::size_t>> gen_perm;
  for (const auto& g : generators) gen_perm.push_back(classical_permutation(GateCircuit{n, {g}}));

  std::vector<std::size_t> id(static_cast<std::size_t>(dim_for(n)));
  for (std::size_t x = 0; x < id.size(); ++x) id[x] = x;
  std::map<std::vector<std::size_t>, std::size_t> seen{{id, 0}};
  std::vector<GateCircuit> out{GateCircuit{n, {}}};
  std::vector<std::vector<std::size_t>> perms{id};
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (std::size_t g = 0; g < generators.size(); ++g) {
      std::vector<std::size_t> next(id.size());
      for (std::size_t x = 0; x < id.size(); ++x) next[x] = gen_perm[g][perms[head][x]];
      if (seen.count(next)) continue;
      seen.emplace(next, out.size());
      GateCircuit c = out[head];
      c.gates.push_back(generators[g]);
      out.push_back(c);
      perms.push_back(next);
    }
  }
  return out;
}

PrepScheme search_prep_scheme(const SpinSystemConfig& cfg, int experiments) {
  if (experiments < 2 || experiments > 3) throw Error("search_prep_scheme: 2 or 3 experiments supported");
  const EquilibriumState eq = equilibrium_state(cfg);
  const auto circuits = affine_permutation_circuits(eq.n);
  std::vector<PrepExperiment> all;
  for (const auto& c : circuits) all.push_back(permuted_populations(eq, c));
  const Eigen::VectorXd target = effective_pure_target(eq);

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_set;
  auto consider = [&](std::vector<std::size_t> set) {
    std::vector<PrepExperiment> ex;
    for (auto k : set) ex.push_back(all[k]);
    const auto w = solve_weights(ex, target);
    const double total = w.weights.sum();
    if (!(total > 0)) return;
    const Spread s = background_spread(deviation_columns(ex) * w.weights / total);
    if (s.ground_dominates && s.rel_std < best - 1e-12) {
      best = s.rel_std;
      best_set = std::move(set);
    }
  };
  for (std::size_t j = 1; j < all.size(); ++j) {
    if (experiments == 2) {
      consider({0, j});
      continue;
    }
    for (std::size_t k = j + 1; k < all.size(); ++k) consider({0, j, k});
  }
  if (best_set.empty()) throw Error("search_prep_scheme: no admissible scheme");
  std::vector<GateCircuit> chosen;
  for (auto k : best_set) chosen.push_back(circuits[k]);
  return make_prep_scheme(eq, chosen);
}

}  // namespace nmrq
