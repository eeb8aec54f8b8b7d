#include "nmrq/grover.hpp"

#include <cmath>

namespace nmrq {

namespace {

struct Input {
  std::vector<ComplexMatrix> members;
  std::vector<double> weights;
  double scale = 1.0;
};

Input make_input(const SpinSystemConfig& cfg, const SweepOptions& options) {
  const int n = cfg.n();
  const int d = dim_for(n);
  Input in;
  if (options.prep == PrepMode::pure) {
    in.members.push_back(DensityMatrix::pure(BasisLabel::from_index(0, n)).matrix());
    in.weights.push_back(1.0);
    in.scale = 1.0;
    return in;
  }
  const PrepScheme scheme = options.scheme ? *options.scheme : default_prep_scheme(cfg);
  const double total = scheme.weights.sum();
  double ground = 0.0;
  for (std::size_t l = 0; l < scheme.experiments.size(); ++l) {
    const auto& diag = scheme.experiments[l].resulting_diag;
    if (diag.size() != d) throw Error("run_sweep: preparation scheme dimension mismatch");
    in.members.push_back(diag.cast<Complex>().asDiagonal());
    in.weights.push_back(scheme.weights(static_cast<Eigen::Index>(l)) / total);
    ground += in.weights.back() * (diag(0) - 1.0 / d);
  }
  in.scale = ground * d / (d - 1.0);
  return in;
}

ComplexMatrix run_input(const Input& in, const PulseProgram& program, const SpinSystemConfig& cfg,
                        const ErrorModel& err) {
  ComplexMatrix out = ComplexMatrix::Zero(in.members.front().rows(), in.members.front().cols());
  for (std::size_t l = 0; l < in.members.size(); ++l)
    out += in.weights[l] * run_pulse_program_raw(in.members[l], program, cfg, err);
  return out;
}

void check_x0(const BasisLabel& x0, const SpinSystemConfig& cfg) {
  if (x0.size() != 3 || cfg.n() != 3) throw Error("Grover instances are defined for three spins");
}

}  // namespace

GroverInstance build_instance(const BasisLabel& x0) {
  if (x0.size() != 3) throw Error("build_instance: x0 must have three bits");
  GroverInstance g;
  g.x0 = x0;
  g.n = 3;
  g.oracle.n = g.diffusion.n = 3;
  std::vector<Gate> flips;
  for (int s = 0; s < 3; ++s)
    if (x0.bit(s) == 0) flips.emplace_back(Not{s});
  auto& o = g.oracle.gates;
  o.insert(o.end(), flips.begin(), flips.end());
  o.emplace_back(ToffoliPhase{});
  o.insert(o.end(), flips.begin(), flips.end());

  auto& d = g.diffusion.gates;
  for (int s = 0; s < 3; ++s) d.emplace_back(PseudoHadamard{s, -1});
  for (int s = 0; s < 3; ++s) d.emplace_back(Not{s});
  d.emplace_back(ToffoliPhase{});
  for (int s = 0; s < 3; ++s) d.emplace_back(Not{s});
  for (int s = 0; s < 3; ++s) d.emplace_back(PseudoHadamard{s, +1});
  return g;
}

GateCircuit superposition_circuit(int n) {
  GateCircuit c{n, {}};
  for (int s = 0; s < n; ++s) c.gates.emplace_back(PseudoHadamard{s, +1});
  return c;
}

GateCircuit grover_circuit(const GroverInstance& instance, int k) {
  if (k < 0) throw Error("grover_circuit: negative iteration count");
  GateCircuit c = superposition_circuit(instance.n);
  for (int i = 0; i < k; ++i) {
    c.gates.insert(c.gates.end(), instance.oracle.gates.begin(), instance.oracle.gates.end());
    c.gates.insert(c.gates.end(), instance.diffusion.gates.begin(), instance.diffusion.gates.end());
  }
  return c;
}

double ideal_success_probability(int k, int N) {
  if (k < 0 || N < 1) throw Error("ideal_success_probability: k >= 0 and N >= 1 required");
  const double theta = std::asin(1.0 / std::sqrt(static_cast<double>(N)));
  const double s = std::sin((2.0 * k + 1.0) * theta);
  return s * s;
}

double classical_expected_queries(int N) {
  if (N < 1) throw Error("classical_expected_queries: N >= 1 required");
  double sum = 0.0;
  for (int k = 1; k < N; ++k) sum += static_cast<double>(k) / N;
  return sum + static_cast<double>(N - 1) / N;
}

DensityMatrix run_grover(const BasisLabel& x0, int k, const SpinSystemConfig& cfg, const ErrorModel& err,
                         const SweepOptions& options) {
  check_x0(x0, cfg);
  const Input in = make_input(cfg, options);
  const PulseProgram program = compile(grover_circuit(build_instance(x0), k), cfg, options.compile);
  return DensityMatrix(run_input(in, program, cfg, err));
}

SweepResult run_sweep(const BasisLabel& x0, const SpinSystemConfig& cfg, const ErrorModel& err,
                      const SweepOptions& options) {
  check_x0(x0, cfg);
  if (options.k_max < 0 || options.k_max > 64) throw Error("run_sweep: k_max must be in 0..64");
  err.validate();
  const GroverInstance instance = build_instance(x0);
  const Input in = make_input(cfg, options);
  const double background = 1.0 / dim_for(cfg.n());

  SweepResult r;
  r.x0 = x0;
  r.input_scale = in.scale;
  for (int k = 0; k <= options.k_max; ++k) {
    const PulseProgram program = compile(grover_circuit(instance, k), cfg, options.compile);
    const ComplexMatrix out = run_input(in, program, cfg, err);
    const auto id = ComplexMatrix::Identity(out.rows(), out.cols());
    const DeviationDensityMatrix dev((out - out.trace() / static_cast<double>(out.rows()) * id).eval());
    const double d = diagonal_entry(dev, x0);
    r.k_values.push_back(k);
    r.d_x0.push_back(d);
    r.p_estimate.push_back(d / in.scale + background);
    r.cost.push_back(cost(program));
    if (options.keep_states) r.full_states.push_back(dev);
  }
  return r;
}

double iteration_duration(const SweepResult& sweep) {
  if (sweep.cost.size() < 2) throw Error("iteration_duration: sweep needs at least two points");
  return (sweep.cost.back().total_duration_s - sweep.cost.front().total_duration_s) /
         static_cast<double>(sweep.cost.size() - 1);
}

}  // namespace nmrq
