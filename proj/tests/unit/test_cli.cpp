#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"
#include "renormesh/errors.hpp"

using namespace renormesh;
using namespace renormesh::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("renormesh_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "renormesh");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallDetect = R"({
  "name": "small",
  "n_start": 32,
  "t_end": 0.2,
  "integrator": {"method": "rk4", "dt_fixed": 0.01}
})";

}  // namespace

TEST(Output, HeaderIsExact) {
  EXPECT_STREQ(kTraceHeader,
               "t,N,eig1_re,eig1_im,eig2_re,eig2_im,detB,digits1,digits2,E1_full,E2_full,"
               "E1_red,E2_red,refine,switch");
}

TEST(Output, SeventeenSignificantDigits) {
  EXPECT_EQ(format_real(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(format_real(-2.5e-300), "-2.5000000000000000e-300");
  EXPECT_EQ(format_real(0.0), "0.0000000000000000e+00");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Output, TraceRowsFollowHeader) {
  TraceRecord r;
  r.t = 0.5;
  r.n_current = 64;
  r.eig1 = {1.0, 0.0};
  r.digits1 = 12;
  r.refinement_event = true;
  std::ostringstream ss;
  write_trace(ss, std::vector<TraceRecord>{r});
  std::istringstream in(ss.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, kTraceHeader);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.substr(0, 27), "5.0000000000000000e-01,64,1");
  EXPECT_EQ(row.substr(row.size() - 4), ",1,0");
}

TEST(Config, SyntaxErrorReportsLine) {
  try {
    parse_document("{\n  \"nu\": 0.0,\n  \"n_start\" 32\n}", "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownKeyReportsLine) {
  const std::string text = "{\n  \"nu\": 0.0,\n  \"n_strat\": 32\n}";
  try {
    build_config(parse_document(text, "c.json"), text, "c.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("n_strat (line 3)"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsEmptyAndInvalid) {
  EXPECT_THROW(parse_document("  \n", "e.json"), ConfigError);
  EXPECT_THROW(parse_document("[1, 2]", "a.json"), ConfigError);
  EXPECT_THROW(build_config(json{{"n_start", 48}}), ConfigError);
  EXPECT_THROW(build_config(json{{"nu", "small"}}), ConfigError);
  EXPECT_THROW(build_config(json{{"tol", 1e-17}}), ConfigError);
  EXPECT_THROW(build_config(json{{"case", "III"}}), ConfigError);
  EXPECT_THROW(build_config(json{{"model", {{"a1", 1.0}, {"a2", 0.1}}}}), ConfigError);
  EXPECT_THROW(build_config(json{{"sweep", {{"n", {64}}, {"tol", {1e-6}}}}}), ConfigError);
}

TEST(Config, DefaultsAndFields) {
  const RunConfig c = build_config(json{{"name", "x"},
                                        {"nu", 0.01},
                                        {"n_start", 32},
                                        {"n_final", 256},
                                        {"tol", 1e-6},
                                        {"model", "galerkin"},
                                        {"case", "II"},
                                        {"integrator", {{"method", "rk4"}, {"dt_fixed", 1e-4}}}});
  EXPECT_EQ(c.experiment.nu, 0.01);
  EXPECT_EQ(c.experiment.n_start, 32);
  EXPECT_EQ(c.experiment.n_final, 256);
  EXPECT_EQ(c.experiment.tol, 1e-6);
  EXPECT_EQ(c.experiment.model.kind(), ModelKind::Kind::galerkin);
  EXPECT_EQ(c.experiment.algorithm_case, AlgorithmCase::II);
  EXPECT_EQ(c.experiment.integrator.method, StepMethod::fixed_rk4);
  EXPECT_EQ(c.experiment.integrator.dt_fixed, 1e-4);
  EXPECT_EQ(build_config(json{{"n_start", 64}}).experiment.n_final, 64);
}

TEST(Config, SweepMembers) {
  const RunConfig c = build_config(json{{"name", "s"}, {"sweep", {{"n", {128, 256}}}}});
  const ExperimentConfig e = sweep_member(c, 256);
  EXPECT_EQ(e.n_start, 256);
  EXPECT_EQ(e.n_final, 256);
  EXPECT_EQ(sweep_label(c, 256), "s_N256");
  const RunConfig t = build_config(json{{"name", "s"}, {"sweep", {{"tol", {1e-16, 1e-6}}}}});
  EXPECT_EQ(sweep_member(t, 1e-6).tol, 1e-6);
  EXPECT_EQ(sweep_label(t, 1e-6), "s_tol1e-06");
}

TEST(Presets, AllFamiliesParseAndValidate) {
  const auto names = preset_names();
  for (const char* required :
       {"a1-inviscid", "a1-inviscid-sweep", "a1-viscous", "a2-inviscid", "a3-inviscid",
        "a4-inviscid", "a5-inviscid", "a6-inviscid", "a1-inviscid-galerkin",
        "a3-inviscid-galerkin", "nu-1e-6-compare"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), required), names.end()) << required;
  }
  for (const auto& name : names) {
    const auto path = find_preset(name);
    const std::string text = read_file(path);
    EXPECT_NO_THROW(build_config(parse_document(text, path.string()), text, path.string())) << name;
    EXPECT_EQ(build_config(parse_document(text, name)).name, name);
  }
  EXPECT_THROW(find_preset("no-such-preset"), ConfigError);
}

TEST(Presets, SweepResolutions) {
  const RunConfig c = build_config(parse_document(read_file(find_preset("a1-inviscid-sweep")), "p"));
  EXPECT_EQ(c.sweep.parameter, Sweep::Parameter::n);
  EXPECT_EQ(c.sweep.values, (std::vector<double>{128, 256, 512, 1024, 2048}));
}

TEST(Cli, UsageErrorsExitTwo) {
  TempDir dir;
  EXPECT_EQ(invoke({}).code, kExitConfig);
  EXPECT_EQ(invoke({"detect"}).code, kExitConfig);
  EXPECT_EQ(invoke({"bogus"}).code, kExitConfig);
  EXPECT_EQ(invoke({"detect", "--config", dir.write("empty.json", "").string()}).code, kExitConfig);
  EXPECT_EQ(invoke({"detect", "--config", (dir.path() / "missing.json").string()}).code, kExitConfig);
  EXPECT_EQ(invoke({"detect", "--preset", "no-such-preset"}).code, kExitConfig);
  EXPECT_EQ(invoke({"detect", "--config", dir.write("c.json", kSmallDetect).string(),
                 "--fixed-step", "-1", "--out", dir.path().string()})
                .code,
            kExitConfig);
  EXPECT_FALSE(fs::exists(dir.path() / "small.manifest.json"));
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST(Cli, OracleAtTimeZero) {
  TempDir dir;
  const Outcome o = invoke({"oracle", "0", "--out", dir.path().string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_EQ(o.out, "0.0000000000000000e+00,5.0000000000000000e-01\n");
  const std::string csv = slurp(dir.path() / "oracle.oracle.csv");
  EXPECT_EQ(csv.substr(0, 10), "t,E1,u0,u1");
  const json m = json::parse(slurp(dir.path() / "oracle.manifest.json"));
  EXPECT_EQ(m["summary"]["energies"][0]["E1"], 0.5);
  EXPECT_EQ(m["exit_status"], 0);
}

TEST(Cli, DetectWritesTraceAndManifest) {
  TempDir dir;
  const auto cfg = dir.write("c.json", kSmallDetect);
  const Outcome o = invoke({"detect", "--config", cfg.string(), "--out", dir.path().string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const std::string csv = slurp(dir.path() / "small.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kTraceHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 21);
  EXPECT_EQ(csv.find("nan"), std::string::npos);

  const json m = json::parse(slurp(dir.path() / "small.manifest.json"));
  EXPECT_EQ(m["command"], "detect");
  EXPECT_EQ(m["exit_status"], 0);
  EXPECT_EQ(m["config"]["n_start"], 32);
  EXPECT_EQ(m["runs"][0]["config"]["integrator"]["method"], "rk4");
  EXPECT_NEAR(m["summary"]["t_final"].get<double>(), 0.2, 1e-15);
  EXPECT_NEAR(m["summary"]["final_E1"].get<double>(), 0.5, 1e-10);
  EXPECT_TRUE(m.contains("wall_seconds"));
}

TEST(Cli, FixedStepRunsAreByteIdentical) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"name": "det", "n_start": 32, "n_final": 128,
    "tol": 1e-10, "t_end": 0.9, "record_stride": 3})");
  std::string first;
  for (const char* sub : {"a", "b"}) {
    const auto out = dir.path() / sub;
    ASSERT_EQ(invoke({"refine", "--config", cfg.string(), "--fixed-step", "0.005", "--out",
                   out.string()})
                  .code,
              kExitOk);
    const std::string csv = slurp(out / "det.csv");
    if (first.empty()) {
      first = csv;
    } else {
      EXPECT_EQ(csv, first);
    }
  }
  EXPECT_NE(first.find(",1,0\n"), std::string::npos);
}

TEST(Cli, EnvironmentOverridesOut) {
  TempDir dir;
  const auto cfg = dir.write("c.json", kSmallDetect);
  const auto env_dir = dir.path() / "env";
  ::setenv("RENORMESH_OUT", env_dir.c_str(), 1);
  const Outcome o =
      invoke({"detect", "--config", cfg.string(), "--out", (dir.path() / "flag").string()});
  ::unsetenv("RENORMESH_OUT");
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_TRUE(fs::exists(env_dir / "small.csv"));
  EXPECT_FALSE(fs::exists(dir.path() / "flag" / "small.csv"));
}

TEST(Cli, ConfigOverridesPreset) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"name": "over", "n_start": 16, "t_end": 0.05})");
  const Outcome o = invoke({"detect", "--preset", "a1-inviscid", "--config", cfg.string(), "--out",
                         dir.path().string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const json m = json::parse(slurp(dir.path() / "over.manifest.json"));
  EXPECT_EQ(m["runs"][0]["config"]["n_start"], 16);
  EXPECT_EQ(m["config"]["description"], json::parse(read_file(find_preset("a1-inviscid")))["description"]);
}

TEST(Cli, CheckFailureExitsFour) {
  TempDir dir;
  const auto pass = dir.write("p.json", R"({"name": "p", "n_start": 32, "t_end": 0.3,
    "check": {"energy_drift": 1e-8, "eig1_dev": 1e-6}})");
  EXPECT_EQ(invoke({"detect", "--config", pass.string(), "--out", dir.path().string(), "--check"}).code,
            kExitOk);
  const auto fail = dir.write("f.json", R"({"name": "f", "n_start": 32, "t_end": 0.3,
    "check": {"energy_drift": 1e-8, "turning_point": [5, 6]}})");
  const Outcome o = invoke({"detect", "--config", fail.string(), "--out", dir.path().string(), "--check"});
  EXPECT_EQ(o.code, kExitCheck);
  EXPECT_NE(o.err.find("[FAIL] turning_point"), std::string::npos) << o.err;
  const json m = json::parse(slurp(dir.path() / "f.manifest.json"));
  EXPECT_EQ(m["exit_status"], kExitCheck);
  // Without --check the block is ignored.
  EXPECT_EQ(invoke({"detect", "--config", fail.string(), "--out", dir.path().string()}).code, kExitOk);
}

TEST(Cli, NumericalFailureExitsThree) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"name": "blow", "n_start": 256, "t_end": 1.0})");
  const Outcome o =
      invoke({"detect", "--config", cfg.string(), "--fixed-step", "0.05", "--out", dir.path().string()});
  EXPECT_EQ(o.code, kExitNumerical) << o.err;
  const json m = json::parse(slurp(dir.path() / "blow.manifest.json"));
  EXPECT_EQ(m["exit_status"], kExitNumerical);
  EXPECT_TRUE(m["runs"][0].contains("error"));
}

TEST(Cli, SweepRunsInParallel) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"name": "sw", "t_end": 0.2,
    "integrator": {"method": "rk4", "dt_fixed": 0.01}, "sweep": {"n": [16, 32, 64]}})");
  const Outcome o = invoke({"detect", "--config", cfg.string(), "--parallel", "3", "--out",
                         dir.path().string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  for (const char* f : {"sw_N16.csv", "sw_N32.csv", "sw_N64.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  const json m = json::parse(slurp(dir.path() / "sw.manifest.json"));
  EXPECT_EQ(m["runs"].size(), 3u);
  EXPECT_EQ(m["runs"][2]["summary"]["final_N"], 64);
  EXPECT_GT(m["summary"]["sweep_field_diff"].get<double>(), 0.0);
  EXPECT_LT(m["summary"]["sweep_field_diff"].get<double>(), 1e-4);
}

TEST(Cli, CalibratePrintsTolerance) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"name": "cal", "n_start": 32, "n_final": 256,
    "tol": 1e-6, "target_digits": 5, "check": {"max_tol": 1e-6}})");
  const Outcome o = invoke({"calibrate", "--config", cfg.string(), "--out", dir.path().string(), "--check"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const double tol = std::stod(o.out);
  EXPECT_LE(tol, 1e-6);
  EXPECT_GE(tol, 1e-16);
  EXPECT_EQ(invoke({"calibrate", "--config", cfg.string(), "--out", dir.path().string(), "17"}).code,
            kExitConfig);
}

#ifdef RENORMESH_BINARY
TEST(Binary, ExitCodes) {
  TempDir dir;
  const std::string bin = RENORMESH_BINARY;
  const std::string quiet = " > /dev/null 2>&1";
  auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  EXPECT_EQ(status(std::system((bin + " oracle 0 --out " + dir.path().string() + quiet).c_str())), 0);
  const auto empty = dir.write("empty.json", "");
  EXPECT_EQ(status(std::system((bin + " detect --config " + empty.string() + quiet).c_str())), 2);
}
#endif
