// Acceptance gate. Runs every criterion (or the one given on the command
// line) and prints one PASS/FAIL line each with the measured values.
#include "nmrq/analysis.hpp"
#include "nmrq/compiler.hpp"
#include "nmrq/grover.hpp"
#include "nmrq/stateprep.hpp"

#include "oracle.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

using namespace nmrq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const SpinSystemConfig& cfg() {
  static const SpinSystemConfig c = SpinSystemConfig::chfbr2();
  return c;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

GateCircuit toffoli_circuit() {
  GateCircuit c;
  c.gates = {ToffoliPhase{}};
  return c;
}

ComplexMatrix toffoli_target() { return oracle::controlled_phase({0, 1, 2}, -1.0, 3); }

Outcome c01() {
  const auto p = compile(toffoli_circuit(), cfg());
  const auto k = cost(p);
  const double dev = phase_aligned_deviation(program_unitary(p, cfg()), toffoli_target());
  return {k.rf_pulse_count <= 19 && k.j_half_count == 2 && k.j_quarter_count == 3 && dev <= 1e-9,
          fmt("rf_pulses=%d half_J=%d quarter_J=%d deviation=%.2e", k.rf_pulse_count, k.j_half_count,
              k.j_quarter_count, dev)};
}

Outcome c02() {
  CompileOptions naive;
  naive.expand.naive = true;
  naive.simplify = false;
  const auto p = compile(toffoli_circuit(), cfg(), naive);
  const auto k = cost(p);
  const double dev = phase_aligned_deviation(program_unitary(p, cfg()), toffoli_target());
  return {std::abs(k.pulse_90_equivalents - 70.5) <= 7.05 && k.j_half_count == 8 && dev <= 1e-9,
          fmt("pulse_90_equivalents=%.2f half_J=%d deviation=%.2e", k.pulse_90_equivalents, k.j_half_count, dev)};
}

Outcome c03() {
  double worst = 0.0;
  bool first_max_at_2 = true;
  double p2 = 0.0;
  for (int x0 = 0; x0 < 8; ++x0) {
    const auto r = run_sweep(BasisLabel::from_index(x0, 3), cfg(), ErrorModel::none());
    for (std::size_t i = 0; i < r.k_values.size(); ++i) {
      const Eigen::VectorXcd psi = oracle::grover_state(x0, r.k_values[i], 3);
      worst = std::max(worst, std::abs(r.p_estimate[i] - std::norm(psi(x0))));
    }
    // First local maximum of the sweep.
    std::size_t m = 0;
    while (m + 1 < r.p_estimate.size() && r.p_estimate[m + 1] > r.p_estimate[m]) ++m;
    first_max_at_2 = first_max_at_2 && r.k_values[m] == 2;
    p2 = r.p_estimate[2];
  }
  return {worst <= 1e-9 && first_max_at_2 && std::abs(p2 - 0.9453) < 1e-4,
          fmt("max |p - oracle|=%.2e over 8 instances, k=0..28; first maximum at k=2: %s; p(2)=%.6f", worst,
              first_max_at_2 ? "yes" : "no", p2)};
}

Outcome c04() {
  struct Model {
    const char* name;
    ErrorModel err;
    bool refocus;
  };
  const Model models[] = {{"static", ErrorModel::static_ensemble(), true},
                          {"stochastic", ErrorModel::stochastic(0.05, 1, 64), false},
                          {"t2", ErrorModel::t2_only(), true}};
  bool ok = true;
  std::string detail;
  for (const auto& m : models) {
    int hits = 0;
    double margin = 1e9;
    for (int x0 = 0; x0 < 8; ++x0) {
      SweepOptions opt;
      opt.prep = PrepMode::temporal;
      opt.compile.explicit_refocus = m.refocus;
      const auto rho = run_grover(BasisLabel::from_index(x0, 3), 2, cfg(), m.err, opt);
      const Eigen::VectorXd d = rho.matrix().diagonal().real();
      Eigen::Index arg;
      d.maxCoeff(&arg);
      hits += arg == x0;
      double second = -1e9;
      for (int y = 0; y < 8; ++y)
        if (y != x0) second = std::max(second, d(y));
      margin = std::min(margin, (d(x0) - second) / (d(x0) - d.mean()));
    }
    ok = ok && hits == 8;
    detail += fmt("%s %d/8 (min relative margin %.3f); ", m.name, hits, margin);
  }
  return {ok, detail + "temporal-averaged input, k=2"};
}

SweepResult sweep_with(const ErrorModel& err, bool refocus) {
  SweepOptions opt;
  opt.compile.explicit_refocus = refocus;
  return run_sweep(BasisLabel::from_string("101"), cfg(), err, opt);
}

Outcome c05() {
  const ErrorModel err = ErrorModel::stochastic(0.05, 1, 64);
  const auto f = fit_damped_oscillation(sweep_with(err, false));
  return {f.converged && f.T_d <= 1.5,
          fmt("T_d=%.3f iterations (5%% per 90-degree pulse, 64 trajectories, converged=%d)", f.T_d, f.converged)};
}

Outcome c06() {
  const auto fs = fit_damped_oscillation(sweep_with(ErrorModel::static_ensemble(), true));
  const auto fp = fit_damped_oscillation(sweep_with(ErrorModel::stochastic(0.05, 1, 64), true));
  return {fs.T_d > fp.T_d, fmt("T_d static=%.3f > T_d stochastic=%.3f (explicit refocusing, 5%%)", fs.T_d, fp.T_d)};
}

Outcome c07() {
  const auto ideal = sweep_with(ErrorModel::none(), true);
  const auto t2 = sweep_with(ErrorModel::t2_only(), true);
  const double t_iter = iteration_duration(t2);
  const double bound = std::exp(-t_iter / cfg().t2[2]);
  double worst = 1e9;
  int used = 0;
  for (std::size_t i = 1; i < ideal.k_values.size(); ++i) {
    if (std::abs(ideal.d_x0[i]) < 0.3) continue;
    const double r = std::pow(t2.d_x0[i] / ideal.d_x0[i], 1.0 / ideal.k_values[i]);
    worst = std::min(worst, r);
    ++used;
  }
  return {used > 0 && worst >= 0.95 * bound,
          fmt("min per-iteration ratio=%.4f over %d points; exp(-t_iter/T2)=%.4f with t_iter=%.4f s", worst, used,
              bound, t_iter)};
}

Outcome c08() {
  const auto cyc = effective_pure_state(cyclic_prep_scheme(cfg()));
  const auto def = effective_pure_state(default_prep_scheme(cfg()));
  return {cyc.variance_metric <= 1e-12 && def.variance_metric <= 0.10,
          fmt("7-experiment std/mean=%.2e; 3-experiment std/mean=%.4f (var/mean^2=%.4f)", cyc.variance_metric,
              def.variance_metric, def.relative_variance)};
}

Outcome c09() {
  std::mt19937 rng(12345);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    ComplexMatrix a(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) a(i, j) = Complex(g(rng), g(rng));
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    const auto rec = tomography(readout_source(rho, cfg()), cfg());
    worst = std::max(worst, (rec.matrix() - deviation(DensityMatrix(rho)).matrix()).norm());
  }
  return {worst <= 1e-8, fmt("max Frobenius error=%.2e over 100 random states", worst)};
}

Outcome c10() {
  int single = 0, decoded = 0;
  for (int x = 0; x < 8; ++x) {
    ComplexMatrix rho = ComplexMatrix::Identity(8, 8) * ((1 - 1e-4) / 8);
    rho(x, x) += 1e-4;
    for (int s = 0; s < 3; ++s) single += stick_spectrum(rho, s, cfg()).size() == 1;
    const auto label = decode_label(rho, cfg());
    decoded += label && label->index() == static_cast<std::size_t>(x);
  }
  return {single == 24 && decoded == 8, fmt("single-line spectra %d/24, labels decoded %d/8", single, decoded)};
}

Outcome c11() {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  std::vector<DeviationDensityMatrix> th, atten;
  std::vector<double> retention;
  double identical = 0.0, scaled = 0.0;
  for (int k = 0; k < 10; ++k) {
    ComplexMatrix a(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) a(i, j) = Complex(g(rng), g(rng));
    const ComplexMatrix h = a + a.adjoint();
    const DeviationDensityMatrix d((h - h.trace() / 8.0 * ComplexMatrix::Identity(8, 8)).eval());
    const double r = std::pow(0.9, k + 1);
    th.push_back(d);
    atten.emplace_back((r * d.matrix()).eval());
    retention.push_back(r);
    identical = std::max(identical, relative_error(d, d, 1.0));
    scaled = std::max(scaled, relative_error(atten.back(), d, 1.0 / r));
  }
  double comp = 0.0;
  bool grows = true;
  const auto rows = error_report(atten, th, retention);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    comp = std::max(comp, rows[k].eps_compensated);
    if (k) grows = grows && rows[k].eps_uncompensated > rows[k - 1].eps_uncompensated;
  }
  return {identical == 0.0 && scaled <= 1e-14 && comp <= 1e-12 && grows,
          fmt("identical=%.1e scaled=%.1e compensated(pure attenuation)=%.1e uncompensated grows=%s", identical,
              scaled, comp, grows ? "yes" : "no")};
}

Outcome c12() {
  const double q = classical_expected_queries(8);
  return {q == 4.375, fmt("classical_expected_queries(8)=%.6f", q)};
}

Outcome c13() {
  std::mt19937 rng(2718);
  std::uniform_int_distribution<int> kind(0, 9), spin(0, 2), ph(0, 3), an(0, 4), pr(0, 2), len(1, 40);
  const double angles[] = {90, 180, 270, 45, 90};
  const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
  double worst = 0.0;
  int failures = 0;
  for (int t = 0; t < 500; ++t) {
    PulseProgram p;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) {
      const int what = kind(rng);
      if (what < 7) {
        p.ops.emplace_back(RfPulse{spin(rng), 90.0 * ph(rng), angles[an(rng)], 1e-5});
      } else if (what < 9) {
        const auto [i, j] = pairs[pr(rng)];
        const double f = what == 7 ? 0.5 : 0.25;
        p.ops.emplace_back(JEvolution{i, j, f, f / std::abs(cfg().j(i, j))});
      } else {
        p.ops.emplace_back(Delay{0.0011, {{0, 1}, {0, 2}, {1, 2}}});
      }
    }
    const auto q = simplify(p);
    const double dev = phase_aligned_deviation(program_unitary(p, cfg()), program_unitary(q, cfg()));
    worst = std::max(worst, dev);
    failures += dev > 1e-9;
  }
  return {failures == 0, fmt("500 random programs, max deviation=%.2e, failures=%d", worst, failures)};
}

Outcome c14() {
  const auto inst = build_instance(BasisLabel::from_string("101"));
  const auto k = cost(compile(grover_circuit(inst, 28), cfg()));
  const double lo = 1350 * 0.85, hi = 1350 * 1.15;
  return {k.rf_pulse_count >= lo && k.rf_pulse_count <= hi,
          fmt("rf_pulse_count=%d (accepted %.1f..%.1f), pulse_90_equivalents=%.1f", k.rf_pulse_count, lo, hi,
              k.pulse_90_equivalents)};
}

struct Criterion {
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion criteria[] = {
      {"Toffoli compilation cost", 1, c01},   {"naive-mode cost", 1, c02},
      {"ideal Grover sweep", 30, c03},        {"identification robustness", 300, c04},
      {"cumulative-error damping", 600, c05}, {"cancellation ordering", 900, c06},
      {"T2 bound", 600, c07},                 {"temporal averaging", 1, c08},
      {"tomography round trip", 60, c09},     {"spectrum decoding", 1, c10},
      {"relative error properties", 1, c11},  {"classical baseline", 1, c12},
      {"rewrite soundness", 120, c13},        {"pulse-count scale", 10, c14},
  };
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 14) {
      std::fprintf(stderr, "usage: %s [criterion 1..14]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (int i = 1; i <= 14; ++i) {
    if (only && i != only) continue;
    const auto& c = criteria[i - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] %2d %s: %s; %.2f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", i, c.title, o.detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
