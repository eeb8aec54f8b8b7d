// Pulse programs: hard RF pulses, free delays and refocused J evolutions.
#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nmrq {

/// Rotation by angle_deg about the transverse axis at phase_deg
/// (0 = x, 90 = y, 180 = -x, 270 = -y). Coupling evolution during the
/// pulse is neglected; duration_s feeds only the T2 channel and cost.
struct RfPulse {
  int spin = 0;
  double phase_deg = 0.0;
  double angle_deg = 90.0;
  double duration_s = 0.0;
};

/// Free evolution under the listed couplings only.
struct Delay {
  double duration_s = 0.0;
  std::vector<std::pair<int, int>> couplings;
};

/// Evolution of a single coupling for fraction/|J| seconds, all other
/// couplings refocused.
struct JEvolution {
  int i = 0;
  int j = 1;
  double fraction = 0.5;
  double duration_s = 0.0;
};

using PulseOp = std::variant<RfPulse, Delay, JEvolution>;

struct PulseProgram {
  int n = 3;
  std::string source;
  std::vector<PulseOp> ops;

  bool empty() const { return ops.empty(); }
  std::size_t size() const { return ops.size(); }
};

/// Wraps (phase, angle) into phase in [0, 360) and angle in (-360, 360].
RfPulse normalized(RfPulse p);

bool touches(const PulseOp& op, int spin);
double op_duration(const PulseOp& op);

// Line-oriented text format:
//   # comment
//   n 3
//   source <text>
//   PULSE <spin> <phase_deg> <angle_deg> <duration_s>
//   JEVOL <i> <j> <fraction> <duration_s>
//   DELAY <duration_s> [<i>-<j> ...]
// Doubles are written with 17 significant digits so the format round-trips.
void write_program(std::ostream& os, const PulseProgram& program);
std::string to_text(const PulseProgram& program);
PulseProgram parse_program(std::istream& is);
PulseProgram parse_program_text(const std::string& text);

}  // namespace nmrq
