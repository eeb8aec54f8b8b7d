#include "nmrq/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <tuple>

namespace nmrq {

namespace {

constexpr double kAngleEps = 1e-9;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Library choice found by search_variants over the ToffoliPhase slots for the
// default molecule; see default_toffoli_variants().
constexpr std::array<int, kToffoliSlots> kToffoliDefault{1, 1, 1, 2, 1, 4, 1, 2, 1, 1, 1, 1, 1};

double wrap_phase(double phase) {
  double p = std::fmod(phase, 360.0);
  if (p < 0) p += 360.0;
  if (std::abs(p - 360.0) < kAngleEps || std::abs(p) < kAngleEps) p = 0.0;
  return p;
}

class Emitter {
 public:
  Emitter(PulseProgram& program, const SpinSystemConfig& cfg) : program_(program), cfg_(cfg) {}

  void pulse(int spin, double phase_deg, double angle_deg) {
    if (std::abs(angle_deg) < kAngleEps) return;
    if (angle_deg < 0) {
      phase_deg += 180.0;
      angle_deg = -angle_deg;
    }
    program_.ops.emplace_back(
        RfPulse{spin, wrap_phase(phase_deg), angle_deg, cfg_.pulse_90_duration * angle_deg / 90.0});
  }

  void jevol(int i, int j, double fraction) {
    const double jv = cfg_.j(i, j);
    if (jv == 0.0)
      throw Error("gate spans a zero coupling between spins " + std::to_string(i) + " and " + std::to_string(j));
    program_.ops.emplace_back(JEvolution{i, j, fraction, fraction / std::abs(jv)});
  }

  // Z rotation by angle_deg from one of the four composite realizations.
  void zrot(int spin, double angle_deg, int variant) {
    if (std::abs(angle_deg) < kAngleEps) return;
    switch (variant) {
      case 1:  // Y X(a) -Y
        pulse(spin, 90, 90), pulse(spin, 0, angle_deg), pulse(spin, 270, 90);
        break;
      case 2:  // -Y -X(a) Y
        pulse(spin, 270, 90), pulse(spin, 180, angle_deg), pulse(spin, 90, 90);
        break;
      case 3:  // -X Y(a) X
        pulse(spin, 180, 90), pulse(spin, 90, angle_deg), pulse(spin, 0, 90);
        break;
      case 4:  // X -Y(a) -X
        pulse(spin, 0, 90), pulse(spin, 270, angle_deg), pulse(spin, 180, 90);
        break;
      default:
        throw Error("Z rotation variant must be 1..4");
    }
  }

  double j(int a, int b) const { return cfg_.j(a, b); }

 private:
  PulseProgram& program_;
  const SpinSystemConfig& cfg_;
};

int sign_of(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

void emit_cnot(Emitter& em, const Cnot& g) {
  const int c = g.control, t = g.target;
  const double jv = em.j(c, t);
  if (jv == 0.0) throw Error("CNOT spans a zero coupling");
  // The +y/-y target pulses swap roles when the coupling is negative.
  const double y = jv > 0 ? 90.0 : 270.0;
  const double ybar = jv > 0 ? 270.0 : 90.0;
  switch (g.variant) {
    case 1:  // X_t Y_t tau Z_c -Y_t
      em.pulse(t, 0, 90), em.pulse(t, y, 90), em.jevol(c, t, 0.5), em.zrot(c, 90, g.z_variant),
          em.pulse(t, ybar, 90);
      break;
    case 2:  // -X_t -Y_t tau -Z_c Y_t
      em.pulse(t, 180, 90), em.pulse(t, ybar, 90), em.jevol(c, t, 0.5), em.zrot(c, -90, g.z_variant),
          em.pulse(t, y, 90);
      break;
    case 3:  // Y_t tau Z_c -Y_t X_t
      em.pulse(t, y, 90), em.jevol(c, t, 0.5), em.zrot(c, 90, g.z_variant), em.pulse(t, ybar, 90),
          em.pulse(t, 0, 90);
      break;
    case 4:  // -Y_t tau -Z_c Y_t -X_t
      em.pulse(t, ybar, 90), em.jevol(c, t, 0.5), em.zrot(c, -90, g.z_variant), em.pulse(t, y, 90),
          em.pulse(t, 180, 90);
      break;
    default:
      throw Error("CNOT variant must be 1..4");
  }
}

// Controlled phase exp(i phi |11><11|) = Rz_c(phi/2) Rz_t(phi/2) exp(i phi Iz_c Iz_t).
void emit_controlled_v(Emitter& em, const ControlledV& g, bool naive) {
  const double phi = g.sign * g.v_angle_deg;
  const int c = g.control, t = g.target;
  if (em.j(c, t) == 0.0) throw Error("CV spans a zero coupling");
  if (naive) {
    em.zrot(c, phi / 2, g.zc_variant);
    em.zrot(t, phi / 2, g.zt_variant);
    emit_cnot(em, Cnot{c, t, 1, 1});
    em.zrot(t, -phi / 2, g.zt_variant);
    emit_cnot(em, Cnot{c, t, 1, 1});
    return;
  }
  em.zrot(c, phi / 2, g.zc_variant);
  em.zrot(t, phi / 2, g.zt_variant);
  // Free evolution gives exp(-i sgn(J) v Iz Iz); a pi-pulse sandwich on one
  // spin reverses the sign when it disagrees with the requested phase.
  const bool flip = sign_of(em.j(c, t)) == g.sign;
  const int flip_spin = g.flip_variant == 2 ? c : t;
  if (flip) em.pulse(flip_spin, 0, 180);
  em.jevol(c, t, g.v_angle_deg / 360.0);
  if (flip) em.pulse(flip_spin, 180, 180);
}

struct ToffoliRoles {
  int a, b, c;
  int sigma;
};

ToffoliRoles toffoli_roles(const ToffoliPhase& g, const SpinSystemConfig& cfg) {
  std::array<int, 3> s = g.spins;
  std::sort(s.begin(), s.end());
  double best = std::numeric_limits<double>::infinity();
  ToffoliRoles roles{};
  do {
    const double jab = std::abs(cfg.j(s[0], s[1]));
    const double jbc = std::abs(cfg.j(s[1], s[2]));
    const double jac = std::abs(cfg.j(s[0], s[2]));
    if (jab == 0 || jbc == 0 || jac == 0) continue;
    // Two 1/2J CNOTs on (a,b), two 1/4J on (b,c), one 1/4J on (a,c).
    const double duration = 1.0 / jab + 0.5 / jbc + 0.25 / jac;
    if (duration < best - 1e-15) {
      best = duration;
      roles = {s[0], s[1], s[2], 1};
    }
  } while (std::next_permutation(s.begin(), s.end()));
  if (!std::isfinite(best)) throw Error("TOFFPHASE spans a zero coupling");
  // V or V^dagger: choose the one needing a single sign-reversal sandwich.
  roles.sigma = -sign_of(cfg.j(roles.a, roles.c));
  return roles;
}

GateCircuit toffoli_subcircuit(const ToffoliPhase& g, const SpinSystemConfig& cfg) {
  const auto roles = toffoli_roles(g, cfg);
  std::array<int, kToffoliSlots> v = g.variants;
  for (int k = 0; k < kToffoliSlots; ++k)
    if (v[k] == 0) v[k] = kToffoliDefault[k];
  GateCircuit sub;
  sub.n = cfg.n();
  sub.gates = {
      ControlledV{roles.b, roles.c, 90.0, roles.sigma, v[0], v[1], v[2]},
      Cnot{roles.a, roles.b, v[3], v[4]},
      ControlledV{roles.b, roles.c, 90.0, -roles.sigma, v[5], v[6], v[7]},
      Cnot{roles.a, roles.b, v[8], v[9]},
      ControlledV{roles.a, roles.c, 90.0, roles.sigma, v[10], v[11], v[12]},
  };
  return sub;
}

void apply_override(Gate& g, const std::vector<int>& v) {
  const auto slots = variant_slots(g);
  if (v.size() != slots.size())
    throw Error(gate_name(g) + ": expected " + std::to_string(slots.size()) + " variant values");
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] < 1 || v[k] > slots[k]) throw Error(gate_name(g) + ": variant value out of range");
  std::visit(
      [&v](auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Rot>) {
          o.variant = v[0];
        } else if constexpr (std::is_same_v<T, Cnot>) {
          o.variant = v[0], o.z_variant = v[1];
        } else if constexpr (std::is_same_v<T, ControlledV>) {
          o.zc_variant = v[0], o.zt_variant = v[1], o.flip_variant = v[2];
        } else if constexpr (std::is_same_v<T, ToffoliPhase>) {
          std::copy(v.begin(), v.end(), o.variants.begin());
        }
      },
      g);
}

void emit_gate(Emitter& em, const Gate& gate, const SpinSystemConfig& cfg, bool naive) {
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Rot>) {
          if (o.axis == Axis::z) em.zrot(o.spin, o.angle_deg, o.variant);
          else em.pulse(o.spin, o.axis == Axis::x ? 0.0 : 90.0, o.angle_deg);
        } else if constexpr (std::is_same_v<T, Not>) {
          em.pulse(o.spin, 0, 180);
        } else if constexpr (std::is_same_v<T, PseudoHadamard>) {
          em.pulse(o.spin, o.sign > 0 ? 90.0 : 270.0, 90);
        } else if constexpr (std::is_same_v<T, Cnot>) {
          emit_cnot(em, o);
        } else if constexpr (std::is_same_v<T, ControlledV>) {
          emit_controlled_v(em, o, naive);
        } else {
          for (const auto& sub : toffoli_subcircuit(o, cfg).gates) emit_gate(em, sub, cfg, naive);
        }
      },
      gate);
}

// ---------------------------------------------------------------------------
// Rewrite machinery

std::size_t prev_on_wire(const std::vector<PulseOp>& ops, std::size_t k, int spin) {
  for (std::size_t j = k; j-- > 0;)
    if (touches(ops[j], spin)) return j;
  return kNone;
}

struct Combined {
  bool identity = false;
  RfPulse pulse;
};

// Product of two same-axis pulses on one spin (q first, then p).
std::optional<Combined> combine(const RfPulse& q, const RfPulse& p) {
  if (q.spin != p.spin) return std::nullopt;
  const double d = wrap_phase(p.phase_deg - q.phase_deg);
  double sign;
  if (std::abs(d) < kAngleEps) sign = 1.0;
  else if (std::abs(d - 180.0) < kAngleEps) sign = -1.0;
  else return std::nullopt;

  double total = q.angle_deg + sign * p.angle_deg;
  // Rotations are 720-periodic; 360 differs only by a global sign.
  total = std::fmod(total, 360.0);
  if (total > 180.0) total -= 360.0;
  if (total <= -180.0) total += 360.0;
  if (std::abs(total) < kAngleEps) return Combined{true, {}};

  RfPulse r = q;
  const double per_degree = (q.duration_s + p.duration_s) / (q.angle_deg + p.angle_deg);
  if (total < 0) {
    r.phase_deg = wrap_phase(q.phase_deg + 180.0);
    total = -total;
  }
  r.angle_deg = total;
  r.duration_s = per_degree * total;
  return Combined{false, r};
}

// Fuses wire-adjacent pulse pairs; `want_identity` selects cancel vs merge.
bool fuse_adjacent(PulseProgram& program, bool want_identity) {
  auto& ops = program.ops;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto* p = std::get_if<RfPulse>(&ops[k]);
    if (!p) continue;
    const std::size_t j = prev_on_wire(ops, k, p->spin);
    if (j == kNone) continue;
    const auto* q = std::get_if<RfPulse>(&ops[j]);
    if (!q) continue;
    const auto c = combine(*q, *p);
    if (!c || c->identity != want_identity) continue;
    if (c->identity) {
      ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(k));
      ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(j));
    } else {
      ops[j] = c->pulse;
      ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return true;
  }
  return false;
}

bool is_z_rotation(const Eigen::Matrix2cd& u) { return std::abs(u(0, 1)) < 1e-9 && std::abs(u(1, 0)) < 1e-9; }

bool commute_z_once(PulseProgram& program) {
  auto& ops = program.ops;
  for (int s = 0; s < program.n; ++s) {
    std::vector<std::size_t> run;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      if (!touches(ops[k], s)) continue;
      if (std::holds_alternative<RfPulse>(ops[k])) {
        run.push_back(k);
        continue;
      }
      // ops[k] is a coupling barrier on this wire; look for a Z suffix.
      for (std::size_t len = run.size(); len >= 1; --len) {
        Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
        for (std::size_t r = run.size() - len; r < run.size(); ++r) {
          const auto& p = std::get<RfPulse>(ops[run[r]]);
          u = (rf_rotation(p.phase_deg, p.angle_deg) * u).eval();
        }
        if (!is_z_rotation(u)) continue;
        std::vector<PulseOp> moved;
        for (std::size_t r = run.size() - len; r < run.size(); ++r) moved.push_back(ops[run[r]]);
        for (std::size_t r = run.size(); r-- > run.size() - len;)
          ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(run[r]));
        const std::size_t barrier = k - len;
        ops.insert(ops.begin() + static_cast<std::ptrdiff_t>(barrier + 1), moved.begin(), moved.end());
        return true;
      }
      run.clear();
    }
  }
  return false;
}

bool canonical_order_once(PulseProgram& program) {
  auto& ops = program.ops;
  bool changed = false;
  std::size_t k = 0;
  while (k < ops.size()) {
    if (!std::holds_alternative<RfPulse>(ops[k])) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < ops.size() && std::holds_alternative<RfPulse>(ops[end])) ++end;
    auto by_spin = [](const PulseOp& a, const PulseOp& b) {
      return std::get<RfPulse>(a).spin < std::get<RfPulse>(b).spin;
    };
    if (!std::is_sorted(ops.begin() + static_cast<std::ptrdiff_t>(k), ops.begin() + static_cast<std::ptrdiff_t>(end), by_spin)) {
      std::stable_sort(ops.begin() + static_cast<std::ptrdiff_t>(k), ops.begin() + static_cast<std::ptrdiff_t>(end), by_spin);
      changed = true;
    }
    k = end;
  }
  return changed;
}

}  // namespace

std::vector<int> variant_slots(const Gate& g) {
  return std::visit(
      [](const auto& o) -> std::vector<int> {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Rot>) {
          return o.axis == Axis::z ? std::vector<int>{4} : std::vector<int>{};
        } else if constexpr (std::is_same_v<T, Cnot>) {
          return {4, 4};
        } else if constexpr (std::is_same_v<T, ControlledV>) {
          return {4, 4, 2};
        } else if constexpr (std::is_same_v<T, ToffoliPhase>) {
          return {4, 4, 2, 4, 4, 4, 4, 2, 4, 4, 4, 4, 2};
        } else {
          return {};
        }
      },
      g);
}

std::array<int, kToffoliSlots> default_toffoli_variants() { return kToffoliDefault; }

PulseProgram expand(const GateCircuit& circuit, const SpinSystemConfig& cfg, const ExpandOptions& options) {
  circuit.validate();
  if (circuit.n != cfg.n()) throw Error("circuit spin count does not match configuration");
  PulseProgram program;
  program.n = circuit.n;
  Emitter em(program, cfg);
  for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
    Gate g = circuit.gates[k];
    if (auto it = options.overrides.find(k); it != options.overrides.end()) apply_override(g, it->second);
    emit_gate(em, g, cfg, options.naive);
  }
  return program;
}

RewriteRule cancel_inverse_rule() {
  return {"cancel-inverse", true, [](PulseProgram& p) { return fuse_adjacent(p, true); }};
}

RewriteRule merge_rotations_rule() {
  return {"merge-rotations", true, [](PulseProgram& p) { return fuse_adjacent(p, false); }};
}

RewriteRule commute_z_rule() { return {"commute-z", true, commute_z_once}; }

RewriteRule canonical_order_rule() { return {"canonical-order", true, canonical_order_once}; }

std::vector<RewriteRule> default_rules() {
  return {cancel_inverse_rule(), merge_rotations_rule(), commute_z_rule(), canonical_order_rule()};
}

PulseProgram simplify(PulseProgram program, const std::vector<RewriteRule>& passes, int max_iterations) {
  int applied = 0;
  bool changed = true;
  while (changed && applied < max_iterations) {
    changed = false;
    for (const auto& rule : passes) {
      if (!rule.enabled) continue;
      if (rule.apply(program)) {
        changed = true;
        ++applied;
        break;  // restart from the cheapest rule
      }
    }
  }
  return program;
}

PulseProgram absorb_trailing_z(PulseProgram program) {
  auto& ops = program.ops;
  for (int s = 0; s < program.n; ++s) {
    std::vector<std::size_t> tail;
    for (std::size_t k = ops.size(); k-- > 0;) {
      if (!touches(ops[k], s)) continue;
      if (!std::holds_alternative<RfPulse>(ops[k])) break;
      tail.insert(tail.begin(), k);
    }
    for (std::size_t len = tail.size(); len >= 1; --len) {
      Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
      for (std::size_t r = tail.size() - len; r < tail.size(); ++r) {
        const auto& p = std::get<RfPulse>(ops[tail[r]]);
        u = (rf_rotation(p.phase_deg, p.angle_deg) * u).eval();
      }
      if (!is_z_rotation(u)) continue;
      for (std::size_t r = tail.size(); r-- > tail.size() - len;)
        ops.erase(ops.begin() + static_cast<std::ptrdiff_t>(tail[r]));
      break;
    }
  }
  return program;
}

PulseProgram expand_refocusing(const PulseProgram& program, const SpinSystemConfig& cfg) {
  if (program.n > 3) throw Error("explicit refocusing supports at most three spins");
  std::vector<std::pair<int, int>> all;
  for (int a = 0; a < program.n; ++a)
    for (int b = a + 1; b < program.n; ++b)
      if (cfg.j(a, b) != 0.0) all.emplace_back(a, b);
  PulseProgram out;
  out.n = program.n;
  out.source = program.source;
  const double pi_duration = 2.0 * cfg.pulse_90_duration;
  for (const auto& op : program.ops) {
    const auto* je = std::get_if<JEvolution>(&op);
    if (!je) {
      out.ops.push_back(op);
      continue;
    }
    int other = -1;
    for (int s = 0; s < program.n; ++s)
      if (s != je->i && s != je->j) other = s;
    if (other < 0) {
      out.ops.push_back(op);
      continue;
    }
    out.ops.emplace_back(Delay{je->duration_s / 2, all});
    out.ops.emplace_back(RfPulse{other, 0.0, 180.0, pi_duration});
    out.ops.emplace_back(Delay{je->duration_s / 2, all});
    out.ops.emplace_back(RfPulse{other, 180.0, 180.0, pi_duration});
  }
  return out;
}

ComplexMatrix program_unitary(const PulseProgram& program, const SpinSystemConfig& cfg) {
  if (program.n != cfg.n()) throw Error("program spin count does not match configuration");
  const int d = dim_for(program.n);
  ComplexMatrix u = ComplexMatrix::Identity(d, d);
  for (const auto& op : program.ops) u = (op_propagator(op, cfg) * u).eval();
  return u;
}

Equivalence verify_equivalence(const PulseProgram& a, const PulseProgram& b, const SpinSystemConfig& cfg,
                               double tol) {
  if (a.n != b.n) throw Error("verify_equivalence: dimension mismatch");
  const double dev = phase_aligned_deviation(program_unitary(a, cfg), program_unitary(b, cfg));
  return {dev <= tol, dev};
}

Equivalence verify_equivalence(const PulseProgram& a, const GateCircuit& b, const SpinSystemConfig& cfg,
                               double tol) {
  if (a.n != b.n) throw Error("verify_equivalence: dimension mismatch");
  const double dev = phase_aligned_deviation(program_unitary(a, cfg), circuit_unitary(b));
  return {dev <= tol, dev};
}

CostReport cost(const PulseProgram& program) {
  CostReport r;
  for (const auto& op : program.ops) {
    r.total_duration_s += op_duration(op);
    if (const auto* p = std::get_if<RfPulse>(&op)) {
      ++r.rf_pulse_count;
      r.pulse_90_equivalents += std::abs(p->angle_deg) / 90.0;
    } else if (const auto* j = std::get_if<JEvolution>(&op)) {
      if (std::abs(j->fraction - 0.5) < 1e-12) ++r.j_half_count;
      else if (std::abs(j->fraction - 0.25) < 1e-12) ++r.j_quarter_count;
    }
  }
  return r;
}

PulseProgram compile(const GateCircuit& circuit, const SpinSystemConfig& cfg, const CompileOptions& options) {
  PulseProgram p = expand(circuit, cfg, options.expand);
  if (options.simplify) p = simplify(std::move(p));
  if (options.absorb_trailing_z) p = absorb_trailing_z(std::move(p));
  if (options.explicit_refocus) p = expand_refocusing(p, cfg);
  return p;
}

VariantSearchResult search_variants(const GateCircuit& circuit, const SpinSystemConfig& cfg,
                                    std::size_t max_combinations) {
  if (circuit.gates.size() > 12) throw Error("variant search supports at most 12 gates");
  struct Slot {
    std::size_t gate;
    int hi;
  };
  std::vector<Slot> slots;
  std::map<std::size_t, std::size_t> gate_slot_count;
  std::size_t total = 1;
  for (std::size_t g = 0; g < circuit.gates.size(); ++g)
    for (int hi : variant_slots(circuit.gates[g])) {
      slots.push_back({g, hi});
      ++gate_slot_count[g];
      if (total > max_combinations / static_cast<std::size_t>(hi))
        throw Error("variant search space exceeds " + std::to_string(max_combinations) + " combinations");
      total *= static_cast<std::size_t>(hi);
    }

  std::vector<int> digits(slots.size(), 1);
  VariantSearchResult best;
  auto key = [](const CostReport& c) {
    return std::make_tuple(c.rf_pulse_count, c.pulse_90_equivalents, c.total_duration_s);
  };
  bool have_best = false;
  for (std::size_t iter = 0; iter < total; ++iter) {
    ExpandOptions opts;
    for (std::size_t s = 0; s < slots.size(); ++s) opts.overrides[slots[s].gate].push_back(digits[s]);
    const CostReport c = cost(simplify(expand(circuit, cfg, opts)));
    if (!have_best || key(c) < key(best.cost)) {
      best.cost = c;
      best.choice = opts.overrides;
      have_best = true;
    }
    // Mixed-radix increment, last slot fastest: visits vectors in lexicographic order.
    for (std::size_t s = slots.size(); s-- > 0;) {
      if (digits[s] < slots[s].hi) {
        ++digits[s];
        break;
      }
      digits[s] = 1;
    }
  }
  best.evaluated = total;
  return best;
}

}  // namespace nmrq
