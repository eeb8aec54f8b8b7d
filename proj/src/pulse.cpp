#include "nmrq/pulse.hpp"

#include "nmrq/qcore.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace nmrq {

RfPulse normalized(RfPulse p) {
  double phase = std::fmod(p.phase_deg, 360.0);
  if (phase < 0) phase += 360.0;
  if (phase >= 360.0) phase -= 360.0;
  double angle = std::fmod(p.angle_deg, 720.0);
  // R(phi, a + 360) = -R(phi, a); wrap into (-360, 360] keeping the unitary up to sign.
  if (angle > 360.0) angle -= 720.0;
  if (angle <= -360.0) angle += 720.0;
  p.phase_deg = phase;
  p.angle_deg = angle;
  return p;
}

bool touches(const PulseOp& op, int spin) {
  return std::visit(
      [spin](const auto& o) -> bool {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, RfPulse>) {
          return o.spin == spin;
        } else if constexpr (std::is_same_v<T, JEvolution>) {
          return o.i == spin || o.j == spin;
        } else {
          for (const auto& [a, b] : o.couplings)
            if (a == spin || b == spin) return true;
          return false;
        }
      },
      op);
}

double op_duration(const PulseOp& op) {
  return std::visit([](const auto& o) { return o.duration_s; }, op);
}

void write_program(std::ostream& os, const PulseProgram& program) {
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  os << "n " << program.n << '\n';
  if (!program.source.empty()) os << "source " << program.source << '\n';
  for (const auto& op : program.ops) {
    std::visit(
        [&os](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, RfPulse>) {
            os << "PULSE " << o.spin << ' ' << o.phase_deg << ' ' << o.angle_deg << ' '
               << o.duration_s << '\n';
          } else if constexpr (std::is_same_v<T, JEvolution>) {
            os << "JEVOL " << o.i << ' ' << o.j << ' ' << o.fraction << ' ' << o.duration_s
               << '\n';
          } else {
            os << "DELAY " << o.duration_s;
            for (const auto& [a, b] : o.couplings) os << ' ' << a << '-' << b;
            os << '\n';
          }
        },
        op);
  }
  os.precision(old_precision);
}

std::string to_text(const PulseProgram& program) {
  std::ostringstream os;
  write_program(os, program);
  return os.str();
}

PulseProgram parse_program(std::istream& is) {
  PulseProgram program;
  std::string line;
  int line_no = 0;
  auto fail = [&line_no](const std::string& msg) {
    throw Error("pulse program line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "n") {
      if (!(ls >> program.n) || program.n < 1) fail("invalid spin count");
    } else if (kw == "source") {
      std::getline(ls >> std::ws, program.source);
    } else if (kw == "PULSE") {
      RfPulse p;
      if (!(ls >> p.spin >> p.phase_deg >> p.angle_deg >> p.duration_s)) fail("malformed PULSE");
      if (p.spin < 0 || p.spin >= program.n) fail("spin index out of range");
      if (p.duration_s < 0) fail("negative duration");
      program.ops.emplace_back(p);
    } else if (kw == "JEVOL") {
      JEvolution j;
      if (!(ls >> j.i >> j.j >> j.fraction >> j.duration_s)) fail("malformed JEVOL");
      if (j.i == j.j || j.i < 0 || j.j < 0 || j.i >= program.n || j.j >= program.n)
        fail("invalid spin pair");
      if (j.duration_s < 0) fail("negative duration");
      program.ops.emplace_back(j);
    } else if (kw == "DELAY") {
      Delay d;
      if (!(ls >> d.duration_s) || d.duration_s < 0) fail("malformed DELAY");
      std::string pair;
      while (ls >> pair) {
        const auto dash = pair.find('-');
        if (dash == std::string::npos) fail("coupling must be written as i-j");
        try {
          d.couplings.emplace_back(std::stoi(pair.substr(0, dash)), std::stoi(pair.substr(dash + 1)));
        } catch (const std::exception&) {
          fail("invalid coupling '" + pair + "'");
        }
      }
      program.ops.emplace_back(std::move(d));
    } else {
      fail("unknown op '" + kw + "'");
    }
    std::string rest;
    if (kw != "DELAY" && kw != "source" && (ls >> rest)) fail("trailing tokens");
  }
  return program;
}

PulseProgram parse_program_text(const std::string& text) {
  std::istringstream is(text);
  return parse_program(is);
}

}  // namespace nmrq
