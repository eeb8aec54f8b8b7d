#include "nmrq/cli.hpp"

#include "nmrq/analysis.hpp"
#include "nmrq/compiler.hpp"
#include "nmrq/config.hpp"
#include "nmrq/grover.hpp"
#include "nmrq/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nmrq {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "out";
  std::string format = "all";
};

struct RunFlags {
  std::string x0 = "101";
  int k_max = 28;
  std::string err;  // empty: error model from the config
  double loss = -1.0;
  std::string prep = "pure";
  bool no_simplify = false;
  bool naive_cnot = false;
  bool explicit_refocus = false;
  bool states = false;
};

bool wants(const Common& c, const std::string& kind) { return c.format == "all" || c.format == kind; }

RunConfig load(const Common& c) {
  RunConfig rc;
  if (!c.config_path.empty()) {
    try {
      rc = load_config(c.config_path);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (c.seed_given) rc.error.seed = c.seed;
  return rc;
}

// Applies --err / --loss; returns whether explicit refocusing is implied.
bool apply_error_flags(RunConfig& rc, const RunFlags& f) {
  bool refocus = f.explicit_refocus;
  if (f.loss >= 0) {
    if (f.loss >= 0.5) throw UsageError("--loss must be in [0, 0.5)");
    rc.error.loss_per_90deg = f.loss;
    rc.system.rf_ensemble = five_point_rf_ensemble(f.loss);
  }
  if (f.err.empty()) return refocus;
  auto& e = rc.error;
  if (f.err == "none") {
    e.rf_mode = RfMode::none, e.t2_enabled = false;
  } else if (f.err == "static") {
    e.rf_mode = RfMode::static_ensemble, e.t2_enabled = false;
  } else if (f.err == "stochastic") {
    e.rf_mode = RfMode::per_pulse_stochastic, e.t2_enabled = false;
  } else if (f.err == "t2") {
    e.rf_mode = RfMode::none, e.t2_enabled = true;
  } else if (f.err == "all") {
    e.rf_mode = RfMode::static_ensemble, e.t2_enabled = true;
    refocus = true;
  } else {
    throw UsageError("unknown --err value '" + f.err + "'");
  }
  return refocus;
}

BasisLabel parse_x0(const std::string& s, int n) {
  try {
    const BasisLabel l = BasisLabel::from_string(s);
    if (l.size() != n) throw Error("expected " + std::to_string(n) + " bits");
    return l;
  } catch (const Error& e) {
    throw UsageError("invalid --x0 '" + s + "': " + e.what());
  }
}

SweepOptions sweep_options(const RunConfig& rc, const RunFlags& f, bool refocus) {
  SweepOptions o;
  o.k_max = f.k_max;
  if (f.k_max < 0 || f.k_max > 64) throw UsageError("--kmax must be in 0..64");
  if (f.prep == "temporal") {
    o.prep = PrepMode::temporal;
    o.scheme = prep_scheme(rc);
  } else if (f.prep != "pure") {
    throw UsageError("unknown --prep value '" + f.prep + "'");
  }
  o.compile.simplify = !f.no_simplify;
  o.compile.expand.naive = f.naive_cnot;
  o.compile.explicit_refocus = refocus;
  o.keep_states = f.states;
  return o;
}

Manifest manifest(const std::string& scenario, const Common& c, const RunConfig& rc, const std::string& flags) {
  Manifest m;
  m.scenario = scenario;
  m.config_path = c.config_path;
  m.config_hash = fnv1a64_hex(to_text(rc) + flags);
  m.seed = rc.error.seed;
  m.output_dir = c.out_dir;
  m.formats = c.format;
  return m;
}

std::string flag_text(const RunFlags& f) {
  std::ostringstream os;
  os << "x0=" << f.x0 << " kmax=" << f.k_max << " err=" << f.err << " loss=" << f.loss << " prep=" << f.prep
     << " no_simplify=" << f.no_simplify << " naive=" << f.naive_cnot << " refocus=" << f.explicit_refocus;
  return os.str();
}

int cmd_compile(const Common& c, const std::string& file, const RunFlags& f, bool absorb_z, std::ostream& out) {
  RunConfig rc = load(c);
  GateCircuit circuit;
  {
    std::ifstream is(file);
    if (!is) throw UsageError("cannot open circuit file '" + file + "'");
    try {
      circuit = parse_circuit(is, rc.system.n());
    } catch (const Error& e) {
      throw UsageError(file + ": " + e.what());
    }
  }
  CompileOptions opts;
  opts.simplify = !f.no_simplify;
  opts.expand.naive = f.naive_cnot;
  opts.explicit_refocus = f.explicit_refocus;
  opts.absorb_trailing_z = absorb_z;
  PulseProgram program = compile(circuit, rc.system, opts);
  program.source = std::filesystem::path(file).filename().string();
  const CostReport cr = cost(program);

  Equivalence eq{true, 0.0};
  if (!absorb_z) eq = verify_equivalence(program, circuit, rc.system);

  const Manifest m = manifest("compile", c, rc, flag_text(f) + " file=" + file + " absorb=" + std::to_string(absorb_z));
  const std::string stem = std::filesystem::path(file).stem().string();
  write_file(c.out_dir, stem + ".pulses", manifest_comment(m) + to_text(program));
  nlohmann::ordered_json j;
  j["manifest"] = to_json(m);
  j["cost"] = to_json(cr);
  j["equivalent"] = eq.equivalent;
  j["max_deviation"] = eq.max_deviation;
  if (wants(c, "json")) write_file(c.out_dir, stem + ".cost.json", j.dump(2) + "\n");
  if (wants(c, "csv")) {
    std::ostringstream os;
    os << manifest_comment(m) << "rf_pulse_count,pulse_90_equivalents,j_half_count,j_quarter_count,total_duration_s\n"
       << std::setprecision(12) << cr.rf_pulse_count << "," << cr.pulse_90_equivalents << "," << cr.j_half_count << ","
       << cr.j_quarter_count << "," << cr.total_duration_s << "\n";
    write_file(c.out_dir, stem + ".cost.csv", os.str());
  }
  out << cost_table(cr);
  out << j.dump() << "\n";
  if (!eq.equivalent) {
    out << "verification FAILED: max deviation " << eq.max_deviation << "\n";
    return 2;
  }
  return 0;
}

int cmd_sweep(const Common& c, const RunFlags& f, const std::string& scenario, std::ostream& out,
              std::vector<ErrorRow>* error_rows = nullptr) {
  RunConfig rc = load(c);
  const bool refocus = apply_error_flags(rc, f);
  rc.error.validate();
  const BasisLabel x0 = parse_x0(f.x0, rc.system.n());
  SweepOptions o = sweep_options(rc, f, refocus);
  if (error_rows) o.keep_states = true;
  const SweepResult s = run_sweep(x0, rc.system, rc.error, o);

  SweepOptions ideal_opts = o;
  ideal_opts.compile.explicit_refocus = false;
  const SweepResult ideal = run_sweep(x0, rc.system, ErrorModel::none(), ideal_opts);

  const Manifest m = manifest(scenario, c, rc, flag_text(f));
  std::optional<FitResult> fit;
  if (s.k_values.size() >= 8) fit = fit_damped_oscillation(s);

  std::vector<double> k(s.k_values.begin(), s.k_values.end());
  const double peak = (1.0 - 1.0 / dim_for(rc.system.n())) * s.input_scale;
  const double t2_min = *std::min_element(rc.system.t2.begin(), rc.system.t2.end());
  std::vector<double> t2_ref, rf_ref;
  for (std::size_t i = 0; i < k.size(); ++i) {
    t2_ref.push_back(peak * std::exp(-s.cost[i].total_duration_s / t2_min));
    rf_ref.push_back(peak * ensemble_signal_retention(rc.error, s.cost[i].pulse_90_equivalents));
  }

  if (wants(c, "csv")) write_file(c.out_dir, scenario + ".csv", sweep_csv(s, m));
  if (wants(c, "json")) {
    nlohmann::ordered_json j;
    j["manifest"] = to_json(m);
    j["x0"] = x0.str();
    j["error_model"] = {{"rf_mode", to_string(rc.error.rf_mode)},
                        {"loss_per_90deg", rc.error.loss_per_90deg},
                        {"t2_enabled", rc.error.t2_enabled},
                        {"trajectories", rc.error.trajectories},
                        {"explicit_refocus", refocus}};
    j["prep"] = f.prep;
    j["input_scale"] = s.input_scale;
    j["k"] = s.k_values;
    j["d_x0_raw"] = s.d_x0;
    j["p_estimate"] = s.p_estimate;
    j["d_x0_ideal"] = ideal.d_x0;
    j["t2_reference"] = t2_ref;
    j["rf_reference"] = rf_ref;
    nlohmann::ordered_json costs = nlohmann::ordered_json::array();
    for (const auto& cr : s.cost) costs.push_back(to_json(cr));
    j["cost"] = costs;
    j["fit"] = fit ? to_json(*fit) : nlohmann::ordered_json(nullptr);
    if (error_rows) {
      *error_rows = error_report(s, ideal, rc.error);
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& r : *error_rows)
        rows.push_back({{"k", r.k}, {"retention", r.retention}, {"eps_r_c1", r.eps_uncompensated},
                        {"eps_r_compensated", r.eps_compensated},
                        {"eps_r_best_scale", r.eps_best_scale}});
      j["eps_r"] = rows;
    }
    if (f.states) {
      nlohmann::ordered_json states = nlohmann::ordered_json::array();
      for (const auto& st : s.full_states) states.push_back(matrix_json(st.matrix()));
      j["states"] = states;
    }
    write_file(c.out_dir, scenario + ".json", j.dump(2) + "\n");
  } else if (error_rows) {
    *error_rows = error_report(s, ideal, rc.error);
  }
  if (wants(c, "svg")) {
    std::vector<PlotSeries> series;
    series.push_back({"simulated d_x0", k, s.d_x0, "#1f4e99", false, true, true});
    series.push_back({"ideal", k, ideal.d_x0, "#555555", false, true, false});
    if (fit) {
      std::vector<double> fk, fy;
      for (double x = 0; x <= k.back() + 1e-9; x += 0.1) {
        fk.push_back(x);
        fy.push_back(fit->a * std::exp(-x / fit->T_d) * std::cos(fit->omega * x + fit->phi) + fit->b);
      }
      series.push_back({"fit", fk, fy, "#2e8b57", true, false, true});
    }
    series.push_back({"T2 decay", k, t2_ref, "#b03a2e", true, false, true});
    series.push_back({"cumulative RF loss", k, rf_ref, "#999999", false, false, true});
    write_file(c.out_dir, scenario + ".svg",
               line_plot_svg("d_x0 vs Grover iterations (x0 = " + x0.str() + ")", "iterations k", "d_x0", series, m));
  }

  std::size_t arg = 0;
  for (std::size_t i = 0; i < s.p_estimate.size(); ++i)
    if (s.d_x0[i] > s.d_x0[arg]) arg = i;
  out << "x0 " << x0.str() << ", k 0.." << f.k_max << ", max d_x0 at k=" << s.k_values[arg] << "\n";
  if (fit) out << "T_d " << fit->T_d << " iterations (" << fit->message << ")\n";
  return 0;
}

int cmd_tomo(const Common& c, const RunFlags& f, const std::string& scenario, const std::string& name,
             std::ostream& out) {
  RunConfig rc = load(c);
  const bool refocus = apply_error_flags(rc, f);
  const int n = rc.system.n();
  const int d = dim_for(n);
  ComplexMatrix truth;
  if (scenario == "grover") {
    const BasisLabel x0 = parse_x0(f.x0, n);
    SweepOptions o = sweep_options(rc, f, refocus);
    truth = run_grover(x0, f.k_max, rc.system, rc.error, o).matrix();
  } else if (scenario == "mixed") {
    truth = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
  } else if (scenario == "eigen") {
    truth = DensityMatrix::pure(parse_x0(f.x0, n)).matrix();
  } else {
    throw UsageError("unknown tomography scenario '" + scenario + "'");
  }
  const DeviationDensityMatrix rec = tomography(readout_source(truth, rc.system), rc.system);
  const ComplexMatrix truth_dev = truth - truth.trace() / static_cast<double>(d) * ComplexMatrix::Identity(d, d);
  const double dist = frobenius_distance(rec.matrix(), truth_dev);
  Eigen::Index dominant = 0;
  rec.matrix().diagonal().real().maxCoeff(&dominant);

  const Manifest m = manifest(name, c, rc, flag_text(f) + " scenario=" + scenario);
  if (wants(c, "csv")) write_file(c.out_dir, name + ".csv", matrix_csv(rec.matrix(), m));
  if (wants(c, "json")) {
    nlohmann::ordered_json j;
    j["manifest"] = to_json(m);
    j["scenario"] = scenario;
    j["reconstructed"] = matrix_json(rec.matrix());
    j["ground_truth"] = matrix_json(truth_dev);
    j["frobenius_distance"] = dist;
    j["dominant_diagonal"] = BasisLabel::from_index(static_cast<std::size_t>(dominant), n).str();
    write_file(c.out_dir, name + ".json", j.dump(2) + "\n");
  }
  if (wants(c, "svg"))
    write_file(c.out_dir, name + ".svg", matrix_bars_svg("reconstructed deviation density matrix", rec.matrix(), n, m));
  out << "frobenius distance to simulator " << dist << "\n";
  out << "dominant diagonal " << BasisLabel::from_index(static_cast<std::size_t>(dominant), n).str() << "\n";
  return 0;
}

int cmd_spectrum(const Common& c, const RunFlags& f, const std::string& scenario, std::ostream& out) {
  RunConfig rc = load(c);
  const bool refocus = apply_error_flags(rc, f);
  const int n = rc.system.n();
  const int d = dim_for(n);
  ComplexMatrix rho;
  if (scenario == "grover") {
    rho = run_grover(parse_x0(f.x0, n), f.k_max, rc.system, rc.error, sweep_options(rc, f, refocus)).matrix();
  } else if (scenario == "eigen") {
    rho = DensityMatrix::pure(parse_x0(f.x0, n)).matrix();
  } else if (scenario == "equilibrium") {
    rho = equilibrium_state(rc.system).diag.cast<Complex>().asDiagonal();
  } else {
    throw UsageError("unknown spectrum scenario '" + scenario + "'");
  }
  rho -= rho.trace() / static_cast<double>(d) * ComplexMatrix::Identity(d, d);
  std::vector<SpectralLine> lines;
  for (int i = 0; i < n; ++i) {
    const auto l = stick_spectrum(rho, i, rc.system);
    lines.insert(lines.end(), l.begin(), l.end());
  }
  const auto label = decode_label(rho, rc.system);
  const Manifest m = manifest("spectrum", c, rc, flag_text(f) + " scenario=" + scenario);
  if (wants(c, "csv")) write_file(c.out_dir, "spectrum.csv", spectrum_csv(lines, m));
  if (wants(c, "json")) {
    nlohmann::ordered_json j;
    j["manifest"] = to_json(m);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& l : lines)
      arr.push_back({{"spin", l.spin},
                     {"frequency_offset_hz", l.frequency_offset_hz},
                     {"amplitude", {l.amplitude.real(), l.amplitude.imag()}}});
    j["lines"] = arr;
    j["decoded"] = label ? nlohmann::ordered_json(label->str()) : nlohmann::ordered_json(nullptr);
    write_file(c.out_dir, "spectrum.json", j.dump(2) + "\n");
  }
  if (wants(c, "svg")) {
    std::vector<PlotSeries> series;
    const char* colors[] = {"#1f4e99", "#b03a2e", "#2e8b57", "#8e44ad", "#d35400", "#555555"};
    for (int i = 0; i < n; ++i) {
      std::vector<double> fr;
      for (double x = -400; x <= 400; x += 0.5) fr.push_back(x);
      std::vector<SpectralLine> mine;
      for (const auto& l : lines)
        if (l.spin == i) mine.push_back(l);
      const double fwhm = 1.0 / (std::numbers::pi * rc.system.t2[static_cast<std::size_t>(i)]);
      series.push_back({rc.system.names[static_cast<std::size_t>(i)], fr, lorentzian_trace(mine, fr, std::max(fwhm, 2.0)),
                        colors[i % 6], false, false, true});
    }
    write_file(c.out_dir, "spectrum.svg", line_plot_svg("stick spectra after X readout", "offset (Hz)", "amplitude", series, m));
  }
  for (const auto& l : lines)
    out << rc.system.names[static_cast<std::size_t>(l.spin)] << " " << l.frequency_offset_hz << " Hz  "
        << l.amplitude.real() << (l.amplitude.imag() < 0 ? " - " : " + ") << std::abs(l.amplitude.imag()) << "i\n";
  out << "decoded " << (label ? label->str() : std::string("(none)")) << "\n";
  return 0;
}

int cmd_preset(Common c, const std::string& name, std::ostream& out) {
  RunFlags f;
  f.x0 = "101";
  if (name == "paper-fig2a") {
    f.k_max = 2, f.err = "none";
    return cmd_tomo(c, f, "grover", "fig2a", out);
  }
  if (name == "paper-fig2b") {
    f.k_max = 28, f.err = "stochastic", f.loss = 0.001;
    return cmd_tomo(c, f, "grover", "fig2b", out);
  }
  if (name == "paper-fig3") {
    f.k_max = 28, f.err = "all";
    std::vector<ErrorRow> rows;
    const int rc = cmd_sweep(c, f, "fig3", out, &rows);
    RunConfig cfg = load(c);
    apply_error_flags(cfg, f);
    const Manifest m = manifest("fig3-eps", c, cfg, flag_text(f));
    if (wants(c, "csv")) write_file(c.out_dir, "fig3_eps.csv", error_table_csv(rows, m));
    if (wants(c, "svg")) {
      std::vector<double> k, e1, eb;
      for (const auto& r : rows) k.push_back(r.k), e1.push_back(r.eps_uncompensated), eb.push_back(r.eps_best_scale);
      write_file(c.out_dir, "fig3_eps.svg",
                 line_plot_svg("relative error", "iterations k", "eps_r",
                               {{"c = 1", k, e1, "#b03a2e", false, true, true},
                                {"c = measured signal loss", k, eb, "#1f4e99", false, true, true}},
                               m));
    }
    return rc;
  }
  throw UsageError("unknown preset '" + name + "'");
}

void add_run_flags(CLI::App* sub, RunFlags& f, bool errors) {
  sub->add_option("--x0", f.x0, "marked item as bits, spin 0 first")->capture_default_str();
  sub->add_option("--kmax", f.k_max, "number of Grover iterations")->capture_default_str();
  if (errors) {
    sub->add_option("--err", f.err, "error model")->check(CLI::IsMember({"none", "static", "stochastic", "t2", "all"}));
    sub->add_option("--loss", f.loss, "RF signal loss per 90 degree pulse");
    sub->add_option("--prep", f.prep, "input state")->check(CLI::IsMember({"pure", "temporal"}))->capture_default_str();
  }
  sub->add_flag("--no-simplify", f.no_simplify, "skip the rewrite passes");
  sub->add_flag("--naive-cnot", f.naive_cnot, "controlled-V from CNOTs and Z rotations");
  sub->add_flag("--explicit-refocus", f.explicit_refocus, "expand refocusing pi pulses");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"NMR quantum search simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "configuration file");
  auto* seed_opt = app.add_option("--seed", common.seed, "random seed");
  app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", common.format, "output formats")
      ->check(CLI::IsMember({"csv", "json", "svg", "all"}))
      ->capture_default_str();

  RunFlags flags;
  std::string file, scenario = "grover", preset;
  bool absorb_z = false;

  auto* compile_cmd = app.add_subcommand("compile", "compile a circuit file to a pulse program");
  compile_cmd->add_option("file", file, "circuit file")->required();
  compile_cmd->add_flag("--no-simplify", flags.no_simplify, "skip the rewrite passes");
  compile_cmd->add_flag("--naive-cnot", flags.naive_cnot, "controlled-V from CNOTs and Z rotations");
  compile_cmd->add_flag("--explicit-refocus", flags.explicit_refocus, "expand refocusing pi pulses");
  compile_cmd->add_flag("--absorb-z", absorb_z, "drop trailing Z rotations (population readout only)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Grover iteration sweep");
  add_run_flags(sweep_cmd, flags, true);
  sweep_cmd->add_flag("--states", flags.states, "include full deviation matrices in JSON");

  auto* tomo_cmd = app.add_subcommand("tomo", "state tomography of a scenario");
  tomo_cmd->add_option("--scenario", scenario, "grover, mixed or eigen")->capture_default_str();
  add_run_flags(tomo_cmd, flags, true);

  auto* spec_cmd = app.add_subcommand("spectrum", "stick spectra of a scenario");
  spec_cmd->add_option("--scenario", scenario, "grover, eigen or equilibrium")->capture_default_str();
  add_run_flags(spec_cmd, flags, true);

  auto* preset_cmd = app.add_subcommand("preset", "run a named reproduction scenario");
  preset_cmd->add_option("name", preset, "paper-fig2a, paper-fig2b or paper-fig3")
      ->required()
      ->check(CLI::IsMember({"paper-fig2a", "paper-fig2b", "paper-fig3"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  common.seed_given = seed_opt->count() > 0;

  try {
    if (compile_cmd->parsed()) return cmd_compile(common, file, flags, absorb_z, out);
    if (sweep_cmd->parsed()) return cmd_sweep(common, flags, "sweep", out);
    if (tomo_cmd->parsed()) return cmd_tomo(common, flags, scenario, "tomo", out);
    if (spec_cmd->parsed()) return cmd_spectrum(common, flags, scenario, out);
    if (preset_cmd->parsed()) return cmd_preset(common, preset, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace nmrq
