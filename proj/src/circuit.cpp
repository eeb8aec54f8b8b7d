#include "nmrq/circuit.hpp"

#include "nmrq/spinsys.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace nmrq {

namespace {

constexpr double kPi = std::numbers::pi;

char axis_char(Axis a) { return a == Axis::x ? 'x' : a == Axis::y ? 'y' : 'z'; }

ComplexMatrix diagonal_matrix(const Eigen::VectorXcd& d) {
  ComplexMatrix m = ComplexMatrix::Zero(d.size(), d.size());
  m.diagonal() = d;
  return m;
}

ComplexMatrix permutation_matrix(const std::vector<std::size_t>& perm) {
  const auto d = static_cast<Eigen::Index>(perm.size());
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (std::size_t x = 0; x < perm.size(); ++x) m(static_cast<Eigen::Index>(perm[x]), static_cast<Eigen::Index>(x)) = 1.0;
  return m;
}

std::size_t apply_classical(const Gate& g, std::size_t x, int n) {
  if (const auto* ng = std::get_if<Not>(&g)) return x ^ (std::size_t{1} << (n - 1 - ng->spin));
  const auto& c = std::get<Cnot>(g);
  if (spin_bit(x, c.control, n)) return x ^ (std::size_t{1} << (n - 1 - c.target));
  return x;
}

int parse_sign(const std::string& tok) {
  if (tok == "+" || tok == "+1") return +1;
  if (tok == "-" || tok == "-1") return -1;
  throw Error("invalid sign '" + tok + "'");
}

struct LineParser {
  std::istringstream ls;
  int line_no;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("circuit line " + std::to_string(line_no) + ": " + msg);
  }
  int integer() {
    std::string tok;
    if (!(ls >> tok)) fail("missing integer argument");
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) fail("invalid integer '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("invalid integer '" + tok + "'");
    }
  }
  double real() {
    std::string tok;
    if (!(ls >> tok)) fail("missing numeric argument");
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail("invalid number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("invalid number '" + tok + "'");
    }
  }
  std::vector<std::string> rest() {
    std::vector<std::string> out;
    std::string tok;
    while (ls >> tok) out.push_back(tok);
    return out;
  }
  int option_int(const std::string& tok, const std::string& key) const {
    try {
      return std::stoi(tok.substr(key.size() + 1));
    } catch (const std::logic_error&) {
      fail("invalid option '" + tok + "'");
    }
  }
};

bool has_prefix(const std::string& s, const std::string& key) { return s.rfind(key + "=", 0) == 0; }

Gate parse_gate(LineParser& p, const std::string& kw) {
  if (kw == "ROT") {
    Rot r;
    r.spin = p.integer();
    std::string ax;
    if (!(p.ls >> ax) || ax.size() != 1 || std::string("xyz").find(ax[0]) == std::string::npos)
      p.fail("axis must be x, y or z");
    r.axis = ax[0] == 'x' ? Axis::x : ax[0] == 'y' ? Axis::y : Axis::z;
    r.angle_deg = p.real();
    for (const auto& tok : p.rest()) {
      if (has_prefix(tok, "v")) r.variant = p.option_int(tok, "v");
      else p.fail("unknown option '" + tok + "'");
    }
    return r;
  }
  if (kw == "NOT") {
    Not g{p.integer()};
    if (!p.rest().empty()) p.fail("trailing tokens");
    return g;
  }
  if (kw == "PH") {
    PseudoHadamard h;
    h.spin = p.integer();
    const auto rest = p.rest();
    if (rest.size() > 1) p.fail("trailing tokens");
    try {
      if (!rest.empty()) h.sign = parse_sign(rest[0]);
    } catch (const Error& e) {
      p.fail(e.what());
    }
    return h;
  }
  if (kw == "CNOT") {
    Cnot c;
    c.control = p.integer();
    c.target = p.integer();
    for (const auto& tok : p.rest()) {
      if (has_prefix(tok, "v")) c.variant = p.option_int(tok, "v");
      else if (has_prefix(tok, "z")) c.z_variant = p.option_int(tok, "z");
      else p.fail("unknown option '" + tok + "'");
    }
    return c;
  }
  if (kw == "CV") {
    ControlledV v;
    v.control = p.integer();
    v.target = p.integer();
    v.v_angle_deg = p.real();
    for (const auto& tok : p.rest()) {
      if (tok == "+" || tok == "-") v.sign = parse_sign(tok);
      else if (has_prefix(tok, "zc")) v.zc_variant = p.option_int(tok, "zc");
      else if (has_prefix(tok, "zt")) v.zt_variant = p.option_int(tok, "zt");
      else if (has_prefix(tok, "flip")) v.flip_variant = p.option_int(tok, "flip");
      else p.fail("unknown option '" + tok + "'");
    }
    return v;
  }
  if (kw == "TOFFPHASE") {
    ToffoliPhase t;
    for (auto& s : t.spins) s = p.integer();
    for (const auto& tok : p.rest()) {
      if (!has_prefix(tok, "v")) p.fail("unknown option '" + tok + "'");
      std::istringstream vs(tok.substr(2));
      std::string item;
      int k = 0;
      while (std::getline(vs, item, ',')) {
        if (k >= kToffoliSlots) p.fail("too many TOFFPHASE variants");
        try {
          t.variants[k++] = std::stoi(item);
        } catch (const std::logic_error&) {
          p.fail("invalid variant list '" + tok + "'");
        }
      }
      if (k != kToffoliSlots) p.fail("TOFFPHASE needs " + std::to_string(kToffoliSlots) + " variants");
    }
    return t;
  }
  p.fail("unknown gate '" + kw + "'");
}

void check_variant(int v, int hi, const std::string& what) {
  if (v < 1 || v > hi) throw Error(what + " variant " + std::to_string(v) + " out of range 1.." + std::to_string(hi));
}

}  // namespace

void GateCircuit::validate() const {
  if (n < 1 || n > 6) throw Error("circuit spin count must be in 1..6");
  for (const auto& g : gates) {
    const auto spins = gate_spins(g);
    std::set<int> seen;
    for (int s : spins) {
      if (s < 0 || s >= n) throw Error(gate_name(g) + ": spin index " + std::to_string(s) + " out of range");
      if (!seen.insert(s).second) throw Error(gate_name(g) + ": repeated spin index");
    }
    std::visit(
        [](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, Rot>) {
            check_variant(o.variant, 4, "ROT");
          } else if constexpr (std::is_same_v<T, PseudoHadamard>) {
            if (o.sign != 1 && o.sign != -1) throw Error("PH sign must be +1 or -1");
          } else if constexpr (std::is_same_v<T, Cnot>) {
            check_variant(o.variant, 4, "CNOT");
            check_variant(o.z_variant, 4, "CNOT z");
          } else if constexpr (std::is_same_v<T, ControlledV>) {
            if (o.v_angle_deg != 90.0 && o.v_angle_deg != 180.0)
              throw Error("CV angle must be 90 or 180");
            if (o.sign != 1 && o.sign != -1) throw Error("CV sign must be +1 or -1");
            check_variant(o.zc_variant, 4, "CV zc");
            check_variant(o.zt_variant, 4, "CV zt");
            check_variant(o.flip_variant, 2, "CV flip");
          } else if constexpr (std::is_same_v<T, ToffoliPhase>) {
            for (int v : o.variants)
              if (v < 0 || v > 4) throw Error("TOFFPHASE variant out of range 0..4");
          }
        },
        g);
  }
}

std::string gate_name(const Gate& g) {
  static const char* names[] = {"ROT", "NOT", "PH", "CNOT", "CV", "TOFFPHASE"};
  return names[g.index()];
}

std::vector<int> gate_spins(const Gate& g) {
  return std::visit(
      [](const auto& o) -> std::vector<int> {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Cnot> || std::is_same_v<T, ControlledV>) {
          return {o.control, o.target};
        } else if constexpr (std::is_same_v<T, ToffoliPhase>) {
          return {o.spins[0], o.spins[1], o.spins[2]};
        } else {
          return {o.spin};
        }
      },
      g);
}

ComplexMatrix gate_unitary(const Gate& g, int n) {
  const int d = dim_for(n);
  return std::visit(
      [&](const auto& o) -> ComplexMatrix {
        using T = std::decay_t<decltype(o)>;
        using Ops = SpinOps<double>;
        if constexpr (std::is_same_v<T, Rot>) {
          const double theta = o.angle_deg * kPi / 180.0;
          const Eigen::Matrix2cd gen = o.axis == Axis::x ? Ops::ix() : o.axis == Axis::y ? Ops::iy() : Ops::iz();
          // exp(-i theta I_axis) = cos(theta/2) - 2i sin(theta/2) I_axis
          const Eigen::Matrix2cd u = std::cos(theta / 2) * Eigen::Matrix2cd::Identity() -
                                     Complex(0, 2 * std::sin(theta / 2)) * gen;
          return embed_single_spin(u, o.spin, n);
        } else if constexpr (std::is_same_v<T, Not>) {
          Eigen::Matrix2cd x;
          x << 0, 1, 1, 0;
          return embed_single_spin(x, o.spin, n);
        } else if constexpr (std::is_same_v<T, PseudoHadamard>) {
          const double c = std::sqrt(0.5);
          Eigen::Matrix2cd u;
          u << c, -o.sign * c, o.sign * c, c;
          return embed_single_spin(u, o.spin, n);
        } else if constexpr (std::is_same_v<T, Cnot>) {
          std::vector<std::size_t> perm(d);
          for (int x = 0; x < d; ++x) perm[x] = apply_classical(o, x, n);
          return permutation_matrix(perm);
        } else if constexpr (std::is_same_v<T, ControlledV>) {
          Eigen::VectorXcd diag = Eigen::VectorXcd::Ones(d);
          const double phi = o.sign * o.v_angle_deg * kPi / 180.0;
          for (int x = 0; x < d; ++x)
            if (spin_bit(x, o.control, n) && spin_bit(x, o.target, n)) diag(x) = std::polar(1.0, phi);
          return diagonal_matrix(diag);
        } else {
          Eigen::VectorXcd diag = Eigen::VectorXcd::Ones(d);
          for (int x = 0; x < d; ++x)
            if (spin_bit(x, o.spins[0], n) && spin_bit(x, o.spins[1], n) && spin_bit(x, o.spins[2], n))
              diag(x) = -1.0;
          return diagonal_matrix(diag);
        }
      },
      g);
}

ComplexMatrix circuit_unitary(const GateCircuit& circuit) {
  circuit.validate();
  const int d = dim_for(circuit.n);
  ComplexMatrix u = ComplexMatrix::Identity(d, d);
  for (const auto& g : circuit.gates) u = (gate_unitary(g, circuit.n) * u).eval();
  return u;
}

bool is_classical_permutation(const GateCircuit& circuit) {
  return std::all_of(circuit.gates.begin(), circuit.gates.end(), [](const Gate& g) {
    return std::holds_alternative<Not>(g) || std::holds_alternative<Cnot>(g);
  });
}

std::vector<std::size_t> classical_permutation(const GateCircuit& circuit) {
  circuit.validate();
  if (!is_classical_permutation(circuit))
    throw Error("circuit contains a gate that is not a basis permutation");
  const int d = dim_for(circuit.n);
  std::vector<std::size_t> perm(d);
  for (int x = 0; x < d; ++x) {
    std::size_t y = static_cast<std::size_t>(x);
    for (const auto& g : circuit.gates) y = apply_classical(g, y, circuit.n);
    perm[x] = y;
  }
  return perm;
}

GateCircuit parse_circuit(std::istream& is, int default_n) {
  GateCircuit circuit;
  circuit.n = default_n;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    LineParser p{std::istringstream(line), line_no};
    std::string kw;
    if (!(p.ls >> kw)) continue;
    if (kw == "n") {
      circuit.n = p.integer();
      if (!circuit.gates.empty()) p.fail("spin count must precede gates");
      continue;
    }
    circuit.gates.push_back(parse_gate(p, kw));
    try {
      GateCircuit probe{circuit.n, {circuit.gates.back()}};
      probe.validate();
    } catch (const Error& e) {
      p.fail(e.what());
    }
  }
  return circuit;
}

GateCircuit parse_circuit_text(const std::string& text, int default_n) {
  std::istringstream is(text);
  return parse_circuit(is, default_n);
}

namespace {

void write_gate(std::ostream& os, const Gate& g) {
  std::visit(
      [&os](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Rot>) {
          os << "ROT " << o.spin << ' ' << axis_char(o.axis) << ' ' << o.angle_deg;
          if (o.axis == Axis::z && o.variant != 1) os << " v=" << o.variant;
        } else if constexpr (std::is_same_v<T, Not>) {
          os << "NOT " << o.spin;
        } else if constexpr (std::is_same_v<T, PseudoHadamard>) {
          os << "PH " << o.spin << ' ' << (o.sign > 0 ? '+' : '-');
        } else if constexpr (std::is_same_v<T, Cnot>) {
          os << "CNOT " << o.control << ' ' << o.target;
          if (o.variant != 1) os << " v=" << o.variant;
          if (o.z_variant != 1) os << " z=" << o.z_variant;
        } else if constexpr (std::is_same_v<T, ControlledV>) {
          os << "CV " << o.control << ' ' << o.target << ' ' << o.v_angle_deg << ' '
             << (o.sign > 0 ? '+' : '-');
          if (o.zc_variant != 1) os << " zc=" << o.zc_variant;
          if (o.zt_variant != 1) os << " zt=" << o.zt_variant;
          if (o.flip_variant != 1) os << " flip=" << o.flip_variant;
        } else {
          os << "TOFFPHASE " << o.spins[0] << ' ' << o.spins[1] << ' ' << o.spins[2];
          if (std::any_of(o.variants.begin(), o.variants.end(), [](int v) { return v != 0; })) {
            os << " v=";
            for (int k = 0; k < kToffoliSlots; ++k) os << (k ? "," : "") << o.variants[k];
          }
        }
      },
      g);
}

}  // namespace

void write_circuit(std::ostream& os, const GateCircuit& circuit) {
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  os << "n " << circuit.n << '\n';
  for (const auto& g : circuit.gates) {
    write_gate(os, g);
    os << '\n';
  }
  os.precision(old_precision);
}

std::string to_text(const GateCircuit& circuit) {
  std::ostringstream os;
  write_circuit(os, circuit);
  return os.str();
}

std::string to_inline_text(const GateCircuit& circuit) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
    if (k) os << "; ";
    write_gate(os, circuit.gates[k]);
  }
  return os.str();
}

GateCircuit parse_inline_circuit(const std::string& text, int n) {
  std::string lines = text;
  std::replace(lines.begin(), lines.end(), ';', '\n');
  return parse_circuit_text(lines, n);
}

}  // namespace nmrq
