#include "nmrq/cli.hpp"
#include "nmrq/config.hpp"
#include "nmrq/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nmrq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nmrq_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "nmrq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

const std::string kData = NMRQ_DATA_DIR;

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  RunConfig c;
  c.error = ErrorModel::stochastic(0.03, 42, 70);
  c.prep_circuits = default_prep_circuits();
  const std::string text = to_text(c);
  const auto back = parse_config_text(text);
  EXPECT_EQ(to_text(back), text);
  EXPECT_EQ(back.error.seed, 42u);
  EXPECT_EQ(back.error.trajectories, 70);
  EXPECT_LT((back.system.j_coupling - c.system.j_coupling).norm(), 1e-15);
}

TEST(Config, ShippedFileMatchesDefaults) {
  const auto c = load_config(kData + "/chfbr2.cfg");
  EXPECT_LT((c.system.j_coupling - SpinSystemConfig::chfbr2().j_coupling).norm(), 1e-15);
  EXPECT_EQ(c.prep_circuits.size(), 3u);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config_text("seed = 3\nbogus = 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config_text("seed = 1\nseed = 2\n"), Error);
  EXPECT_THROW(parse_config_text("j_coupling = 0, 1, 2\n"), Error);
  EXPECT_THROW(parse_config_text("t2 = 1, -1, 1\n"), Error);
  EXPECT_THROW(parse_config_text("rf_mode = sometimes\n"), Error);
  EXPECT_THROW(load_config("/nonexistent/file.cfg"), Error);
}

TEST(Config, LossRebuildsEnsemble) {
  const auto c = parse_config_text("loss_per_90deg = 0.1\n");
  double r = 0.0;
  for (const auto& m : c.system.rf_ensemble) r += m.weight * std::sin(m.scale * std::numbers::pi / 2);
  EXPECT_NEAR(r, 0.9, 1e-12);
}

TEST(Report, ManifestEverywhere) {
  Manifest m{"unit", "", fnv1a64_hex("x"), 7, "out", "all"};
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_NE(manifest_comment(m).find("# version: " + std::string(kVersion)), std::string::npos);
  EXPECT_EQ(to_json(m)["seed"], 7);
  const auto svg = line_plot_svg("t", "x", "y", {{"a", {0, 1}, {1, 2}}}, m);
  EXPECT_NE(svg.find("<metadata>"), std::string::npos);
  EXPECT_NE(svg.find("unit"), std::string::npos);
  const auto csv = matrix_csv(ComplexMatrix::Identity(2, 2), m);
  EXPECT_EQ(csv.rfind("# ", 0), 0u);
}

TEST(Cli, CompileToffoli) {
  const auto dir = scratch("compile");
  std::string out;
  ASSERT_EQ(run({"--out", dir.string(), "compile", kData + "/toffoli.qc"}, &out), 0) << out;
  const auto json = nlohmann::json::parse(slurp(dir / "toffoli.cost.json"));
  EXPECT_EQ(json["cost"]["rf_pulse_count"], 13);
  EXPECT_EQ(json["cost"]["j_half_count"], 2);
  const auto program = parse_program_text(slurp(dir / "toffoli.pulses"));
  EXPECT_EQ(program.size(), 18u);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  std::string err;
  EXPECT_EQ(run({"--bogus"}, nullptr, &err), 1);
  EXPECT_EQ(run({}, nullptr, &err), 1);
  EXPECT_EQ(run({"--out", dir.string(), "compile", (dir / "missing.qc").string()}, nullptr, &err), 1);
  std::ofstream(dir / "bad.qc") << "n 3\nFROB 0\n";
  EXPECT_EQ(run({"--out", dir.string(), "compile", (dir / "bad.qc").string()}, nullptr, &err), 1);
  EXPECT_NE(err.find("line 2"), std::string::npos) << err;
  EXPECT_EQ(run({"--out", dir.string(), "sweep", "--x0", "1012"}, nullptr, &err), 1);
  EXPECT_EQ(run({"--out", dir.string(), "sweep", "--err", "cosmic"}, nullptr, &err), 1);
  EXPECT_EQ(run({"--out", dir.string(), "preset", "paper-fig9"}, nullptr, &err), 1);
}

TEST(Cli, EmptyCircuitCompiles) {
  const auto dir = scratch("empty");
  std::ofstream(dir / "empty.qc") << "# no gates\n";
  ASSERT_EQ(run({"--out", dir.string(), "compile", (dir / "empty.qc").string()}), 0);
  const auto json = nlohmann::json::parse(slurp(dir / "empty.cost.json"));
  EXPECT_EQ(json["cost"]["rf_pulse_count"], 0);
}

TEST(Cli, RepeatRunsAreByteIdentical) {
  const auto a = scratch("repeat_a"), b = scratch("repeat_b");
  const std::vector<std::string> args = {"sweep", "--x0", "011", "--kmax", "8", "--err", "stochastic"};
  auto with_out = [&](const fs::path& d) {
    std::vector<std::string> v = {"--seed", "5", "--out", d.string()};
    v.insert(v.end(), args.begin(), args.end());
    return v;
  };
  ASSERT_EQ(run(with_out(a)), 0);
  ASSERT_EQ(run(with_out(b)), 0);
  for (const char* name : {"sweep.csv", "sweep.json", "sweep.svg"}) {
    // The output directory itself is recorded in the manifest; strip it.
    auto ta = slurp(a / name), tb = slurp(b / name);
    for (auto* t : {&ta, &tb}) {
      for (const auto& d : {a.string(), b.string()})
        for (std::size_t pos; (pos = t->find(d)) != std::string::npos;) t->replace(pos, d.size(), "DIR");
    }
    EXPECT_FALSE(ta.empty()) << name;
    EXPECT_EQ(ta, tb) << name;
  }
  const auto csv = slurp(a / "sweep.csv");
  EXPECT_NE(csv.find("# seed: 5"), std::string::npos);
  EXPECT_NE(csv.find("k,d_x0_raw,p_estimate"), std::string::npos);
}

TEST(Cli, SpectrumAndTomographyOutputs) {
  const auto dir = scratch("spec");
  ASSERT_EQ(run({"--out", dir.string(), "--format", "csv", "spectrum", "--scenario", "eigen", "--x0", "101"}), 0);
  bool any = false;
  for (const auto& e : fs::directory_iterator(dir)) any = any || e.path().extension() == ".csv";
  EXPECT_TRUE(any);
  ASSERT_EQ(run({"--out", dir.string(), "--format", "json", "tomo", "--scenario", "mixed"}), 0);
}
