// Output writers: CSV tables, JSON documents and minimal SVG figures, each
// carrying the run manifest.
#pragma once

#include "nmrq/analysis.hpp"
#include "nmrq/compiler.hpp"
#include "nmrq/grover.hpp"
#include "nmrq/qcore.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nmrq {

inline constexpr const char* kVersion = "1.0.0";

struct Manifest {
  std::string scenario;
  std::string config_path;  // empty when built-in defaults were used
  std::string config_hash;  // FNV-1a 64 of the effective configuration text
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string formats;
  std::string version = kVersion;
};

std::string fnv1a64_hex(const std::string& text);

nlohmann::ordered_json to_json(const Manifest& m);
nlohmann::ordered_json to_json(const CostReport& c);
nlohmann::ordered_json to_json(const FitResult& f);
nlohmann::ordered_json matrix_json(const ComplexMatrix& m);

/// "# key: value" header lines.
std::string manifest_comment(const Manifest& m);

std::string cost_table(const CostReport& c);

/// k, d_x0_raw, p_estimate, pulses_cumulative, duration_s.
std::string sweep_csv(const SweepResult& sweep, const Manifest& m);
std::string matrix_csv(const ComplexMatrix& m, const Manifest& m_info);
std::string spectrum_csv(const std::vector<SpectralLine>& lines, const Manifest& m);
std::string error_table_csv(const std::vector<ErrorRow>& rows, const Manifest& m);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f4e99";
  bool dashed = false;
  bool markers = false;
  bool line = true;
};

std::string line_plot_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series, const Manifest& m);

/// One bar per matrix entry: height |m_ij| with the sign of Re m_ij.
std::string matrix_bars_svg(const std::string& title, const ComplexMatrix& m, int n, const Manifest& m_info);

/// Writes `content` to dir/name, creating dir. Throws on failure.
void write_file(const std::string& dir, const std::string& name, const std::string& content);

}  // namespace nmrq
