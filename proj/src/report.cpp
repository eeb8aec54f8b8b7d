#include "nmrq/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nmrq {

namespace {

std::string num(double v, int precision = 10) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_manifest(const Manifest& m) {
  // "--" is not allowed inside XML comments.
  std::string text = to_json(m).dump();
  for (std::size_t p = text.find("--"); p != std::string::npos; p = text.find("--")) text.replace(p, 2, "- -");
  return "<!-- manifest " + text + " -->\n<metadata>" + xml_escape(to_json(m).dump()) + "</metadata>\n";
}

}  // namespace

std::string fnv1a64_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

nlohmann::ordered_json to_json(const Manifest& m) {
  return {{"scenario", m.scenario}, {"config_path", m.config_path}, {"config_hash", m.config_hash},
          {"seed", m.seed},         {"output_dir", m.output_dir},   {"formats", m.formats},
          {"version", m.version}};
}

nlohmann::ordered_json to_json(const CostReport& c) {
  return {{"rf_pulse_count", c.rf_pulse_count},
          {"pulse_90_equivalents", c.pulse_90_equivalents},
          {"j_half_count", c.j_half_count},
          {"j_quarter_count", c.j_quarter_count},
          {"total_duration_s", c.total_duration_s}};
}

nlohmann::ordered_json to_json(const FitResult& f) {
  return {{"T_d", f.T_d},         {"a", f.a},
          {"b", f.b},             {"omega", f.omega},
          {"phi", f.phi},         {"residual_norm", f.residual_norm},
          {"converged", f.converged}, {"no_damping", f.no_damping},
          {"message", f.message}};
}

nlohmann::ordered_json matrix_json(const ComplexMatrix& m) {
  nlohmann::ordered_json re = nlohmann::ordered_json::array(), im = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json rr = nlohmann::ordered_json::array(), ii = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) rr.push_back(m(r, c).real()), ii.push_back(m(r, c).imag());
    re.push_back(rr), im.push_back(ii);
  }
  return {{"real", re}, {"imag", im}};
}

std::string manifest_comment(const Manifest& m) {
  std::ostringstream os;
  os << "# scenario: " << m.scenario << "\n"
     << "# config_path: " << m.config_path << "\n"
     << "# config_hash: " << m.config_hash << "\n"
     << "# seed: " << m.seed << "\n"
     << "# output_dir: " << m.output_dir << "\n"
     << "# formats: " << m.formats << "\n"
     << "# version: " << m.version << "\n";
  return os.str();
}

std::string cost_table(const CostReport& c) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "rf_pulse_count" << c.rf_pulse_count << "\n"
     << std::setw(24) << "pulse_90_equivalents" << num(c.pulse_90_equivalents) << "\n"
     << std::setw(24) << "j_half_count" << c.j_half_count << "\n"
     << std::setw(24) << "j_quarter_count" << c.j_quarter_count << "\n"
     << std::setw(24) << "total_duration_s" << num(c.total_duration_s) << "\n";
  return os.str();
}

std::string sweep_csv(const SweepResult& sweep, const Manifest& m) {
  std::ostringstream os;
  os << manifest_comment(m) << "k,d_x0_raw,p_estimate,pulses_cumulative,duration_s\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < sweep.k_values.size(); ++i)
    os << sweep.k_values[i] << "," << sweep.d_x0[i] << "," << sweep.p_estimate[i] << ","
       << sweep.cost[i].rf_pulse_count << "," << sweep.cost[i].total_duration_s << "\n";
  return os.str();
}

std::string matrix_csv(const ComplexMatrix& m, const Manifest& info) {
  std::ostringstream os;
  os << manifest_comment(info) << "row,col,real,imag\n" << std::setprecision(12);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << r << "," << c << "," << m(r, c).real() << "," << m(r, c).imag() << "\n";
  return os.str();
}

std::string spectrum_csv(const std::vector<SpectralLine>& lines, const Manifest& m) {
  std::ostringstream os;
  os << manifest_comment(m) << "spin,frequency_offset_hz,amplitude_real,amplitude_imag,configuration\n"
     << std::setprecision(12);
  for (const auto& l : lines)
    os << l.spin << "," << l.frequency_offset_hz << "," << l.amplitude.real() << "," << l.amplitude.imag() << ","
       << l.others.str() << "\n";
  return os.str();
}

std::string error_table_csv(const std::vector<ErrorRow>& rows, const Manifest& m) {
  std::ostringstream os;
  os << manifest_comment(m) << "k,retention,eps_r_c1,eps_r_compensated,eps_r_best_scale\n" << std::setprecision(12);
  for (const auto& r : rows) os << r.k << "," << r.retention << "," << r.eps_uncompensated << "," << r.eps_compensated << ","
                          << r.eps_best_scale << "\n";
  return os.str();
}

std::string line_plot_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series, const Manifest& m) {
  const double w = 720, h = 440, left = 70, right = 170, top = 40, bottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) x0 = x1 = s.x[i], y0 = y1 = s.y[i], first = false;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << svg_manifest(m) << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  // Axes and ticks.
  os << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = x0 + (x1 - x0) * t / 5, yv = y0 + (y1 - y0) * t / 5;
    os << "<text x=\"" << num(px(xv), 6) << "\" y=\"" << h - bottom + 16 << "\" text-anchor=\"middle\">" << num(xv, 3) << "</text>\n"
       << "<text x=\"" << left - 6 << "\" y=\"" << num(py(yv) + 4, 6) << "\" text-anchor=\"end\">" << num(yv, 3) << "</text>\n";
  }
  if (y0 < 0 && y1 > 0)
    os << "<line x1=\"" << left << "\" y1=\"" << num(py(0), 6) << "\" x2=\"" << w - right << "\" y2=\"" << num(py(0), 6)
       << "\" stroke=\"#bbbbbb\"/>\n";
  os << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << xml_escape(xlabel) << "</text>\n"
     << "<text x=\"16\" y=\"" << (top + h - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (top + h - bottom) / 2 << ")\">" << xml_escape(ylabel) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    if (ser.line && ser.x.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.5\""
         << (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
      for (std::size_t i = 0; i < ser.x.size(); ++i) os << (i ? " " : "") << num(px(ser.x[i]), 6) << "," << num(py(ser.y[i]), 6);
      os << "\"/>\n";
    }
    if (ser.markers)
      for (std::size_t i = 0; i < ser.x.size(); ++i)
        os << "<circle cx=\"" << num(px(ser.x[i]), 6) << "\" cy=\"" << num(py(ser.y[i]), 6) << "\" r=\"3\" fill=\"none\" stroke=\""
           << ser.color << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << w - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << w - right + 34 << "\" y2=\"" << ly << "\" stroke=\""
       << ser.color << "\"" << (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
       << "<text x=\"" << w - right + 40 << "\" y=\"" << ly + 4 << "\">" << xml_escape(ser.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string matrix_bars_svg(const std::string& title, const ComplexMatrix& mat, int n, const Manifest& info) {
  const int d = static_cast<int>(mat.rows());
  const double cell = 52, left = 60, top = 50;
  const double w = left + cell * d + 20, h = top + cell * d + 30;
  const double scale = std::max(mat.cwiseAbs().maxCoeff(), 1e-300);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << svg_manifest(info) << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  for (int i = 0; i < d; ++i) {
    const std::string label = BasisLabel::from_index(static_cast<std::size_t>(i), n).str();
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + cell * (i + 0.5) + 4 << "\" text-anchor=\"end\">" << label << "</text>\n"
       << "<text x=\"" << left + cell * (i + 0.5) << "\" y=\"" << top - 6 << "\" text-anchor=\"middle\">" << label << "</text>\n";
  }
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const Complex v = mat(r, c);
      const double mag = std::abs(v) / scale;
      const double signed_mag = v.real() < 0 ? -mag : mag;
      const double cx = left + cell * c, cy = top + cell * r;
      const double bar = 0.45 * cell * std::abs(signed_mag);
      const double mid = cy + cell / 2;
      os << "<rect x=\"" << cx << "\" y=\"" << cy << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"none\" stroke=\"#dddddd\"/>\n";
      if (bar > 0.25)
        os << "<rect x=\"" << cx + cell * 0.3 << "\" y=\"" << num(signed_mag >= 0 ? mid - bar : mid, 6) << "\" width=\"" << cell * 0.4
           << "\" height=\"" << num(bar, 6) << "\" fill=\"" << (signed_mag >= 0 ? "#1f4e99" : "#b03a2e") << "\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace nmrq
