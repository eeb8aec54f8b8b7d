#include "nmrq/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace nmrq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

double to_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("config key '" + key + "': bad number '" + s + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& value, const std::string& key) {
  std::vector<double> out;
  for (const auto& s : split_list(value)) out.push_back(to_double(s, key));
  return out;
}

long long to_integer(const std::string& s, const std::string& key) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("config key '" + key + "': bad integer '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error("config key '" + key + "': bad boolean '" + s + "'");
}

// Shortest round-trip decimal form.
std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v[i]);
    if (i) out += ", ";
    out.append(buf, res.ptr);
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& is) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (kv.count(key)) throw Error("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = {trim(line.substr(eq + 1)), lineno};
  }

  RunConfig c;
  auto& sys = c.system;
  std::optional<std::vector<double>> scales, weights;
  std::map<long long, GateCircuit> experiments;
  std::vector<std::pair<std::string, std::string>> deferred;  // circuits need the final n
  bool loss_given = false;

  for (const auto& [key, entry] : kv) {
    const auto& [value, lineno] = entry;
    try {
      if (key == "names") {
        sys.names = split_list(value);
      } else if (key == "j_coupling") {
        const auto v = to_doubles(value, key);
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
        if (n * n != static_cast<Eigen::Index>(v.size())) throw Error("j_coupling needs n*n entries");
        sys.j_coupling.resize(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
          for (Eigen::Index b = 0; b < n; ++b) sys.j_coupling(a, b) = v[static_cast<std::size_t>(a * n + b)];
      } else if (key == "t2") {
        sys.t2 = to_doubles(value, key);
      } else if (key == "gamma_rel") {
        sys.gamma_rel = to_doubles(value, key);
      } else if (key == "rf_scales") {
        scales = to_doubles(value, key);
      } else if (key == "rf_weights") {
        weights = to_doubles(value, key);
      } else if (key == "pulse_90_duration") {
        sys.pulse_90_duration = to_double(value, key);
      } else if (key == "polarization") {
        sys.polarization = to_double(value, key);
      } else if (key == "rf_mode") {
        c.error.rf_mode = rf_mode_from_string(value);
      } else if (key == "loss_per_90deg") {
        c.error.loss_per_90deg = to_double(value, key);
        loss_given = true;
      } else if (key == "seed") {
        const long long s = to_integer(value, key);
        if (s < 0) throw Error("seed must be nonnegative");
        c.error.seed = static_cast<std::uint64_t>(s);
      } else if (key == "trajectories") {
        c.error.trajectories = static_cast<int>(to_integer(value, key));
      } else if (key == "t2_enabled") {
        c.error.t2_enabled = to_bool(value, key);
      } else if (key == "prep.weights") {
        c.prep_weights = to_doubles(value, key);
      } else if (key.rfind("prep.experiment.", 0) == 0) {
        deferred.emplace_back(key, value);
      } else {
        throw Error("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }

  if (scales || weights) {
    if (!scales || !weights || scales->size() != weights->size())
      throw Error("config: rf_scales and rf_weights must be given together with equal lengths");
    sys.rf_ensemble.clear();
    for (std::size_t i = 0; i < scales->size(); ++i) sys.rf_ensemble.push_back({(*scales)[i], (*weights)[i]});
  } else if (loss_given) {
    sys.rf_ensemble = five_point_rf_ensemble(c.error.loss_per_90deg);
  }
  sys.validate();
  c.error.validate();

  for (const auto& [key, value] : deferred) {
    const int lineno = kv[key].second;
    try {
      const long long l = to_integer(key.substr(std::string("prep.experiment.").size()), key);
      if (l < 0) throw Error("experiment index must be nonnegative");
      GateCircuit circuit = parse_inline_circuit(value, sys.n());
      if (!is_classical_permutation(circuit)) throw Error("preparation circuits may contain only NOT and CNOT");
      experiments[l] = std::move(circuit);
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  long long expected = 0;
  for (auto& [l, circuit] : experiments) {
    if (l != expected++) throw Error("config: prep.experiment indices must be 0, 1, 2, ... without gaps");
    c.prep_circuits.push_back(std::move(circuit));
  }
  if (!c.prep_weights.empty() && c.prep_weights.size() != c.prep_circuits.size())
    throw Error("config: prep.weights needs one weight per prep.experiment");
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config file '" + path + "'");
  try {
    return parse_config(is);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_config(std::ostream& os, const RunConfig& config) {
  const auto& sys = config.system;
  os << "names = ";
  for (std::size_t i = 0; i < sys.names.size(); ++i) os << (i ? ", " : "") << sys.names[i];
  os << "\n";
  std::vector<double> j;
  for (int a = 0; a < sys.n(); ++a)
    for (int b = 0; b < sys.n(); ++b) j.push_back(sys.j(a, b));
  os << "j_coupling = " << join(j) << "\n";
  os << "t2 = " << join(sys.t2) << "\n";
  os << "gamma_rel = " << join(sys.gamma_rel) << "\n";
  std::vector<double> scales, weights;
  for (const auto& m : sys.rf_ensemble) scales.push_back(m.scale), weights.push_back(m.weight);
  os << "rf_scales = " << join(scales) << "\n";
  os << "rf_weights = " << join(weights) << "\n";
  os << "pulse_90_duration = " << join({sys.pulse_90_duration}) << "\n";
  os << "polarization = " << join({sys.polarization}) << "\n";
  os << "rf_mode = " << to_string(config.error.rf_mode) << "\n";
  os << "loss_per_90deg = " << join({config.error.loss_per_90deg}) << "\n";
  os << "seed = " << config.error.seed << "\n";
  os << "trajectories = " << config.error.trajectories << "\n";
  os << "t2_enabled = " << (config.error.t2_enabled ? "true" : "false") << "\n";
  for (std::size_t l = 0; l < config.prep_circuits.size(); ++l)
    os << "prep.experiment." << l << " = " << to_inline_text(config.prep_circuits[l]) << "\n";
  if (!config.prep_weights.empty()) os << "prep.weights = " << join(config.prep_weights) << "\n";
}

std::string to_text(const RunConfig& config) {
  std::ostringstream os;
  write_config(os, config);
  return os.str();
}

PrepScheme prep_scheme(const RunConfig& config) {
  const auto circuits = config.prep_circuits.empty() ? default_prep_circuits() : config.prep_circuits;
  PrepScheme scheme = make_prep_scheme(equilibrium_state(config.system), circuits);
  if (!config.prep_weights.empty()) {
    scheme.weights = Eigen::Map<const Eigen::VectorXd>(config.prep_weights.data(),
                                                       static_cast<Eigen::Index>(config.prep_weights.size()));
    const Eigen::Index d = scheme.target.size();
    Eigen::VectorXd combined = Eigen::VectorXd::Zero(d);
    for (std::size_t l = 0; l < scheme.experiments.size(); ++l)
      combined += scheme.weights(static_cast<Eigen::Index>(l)) *
                  (scheme.experiments[l].resulting_diag.array() - 1.0 / d).matrix();
    scheme.residual = (combined - (scheme.target.array() - 1.0 / d).matrix()).norm();
  }
  return scheme;
}

}  // namespace nmrq
