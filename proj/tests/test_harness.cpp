#include "coco/error.hpp"
#include "coco/harness.hpp"
#include "coco/report_io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace coco;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("coco_harness_test_" + name);
  fs::remove_all(p);
  return p;
}

CliResult cli(const std::string& args, const fs::path& dir) {
  const fs::path err_file = dir.string() + ".stderr";
  const std::string cmd = std::string(COCO_CLI_PATH) + " " + args + " 2> " + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(err_file);
  std::stringstream ss;
  ss << f.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

nlohmann::json verify_with(const std::string& args, const std::string& name, int* code = nullptr) {
  const auto dir = scratch(name);
  const auto r = cli("verify " + args + " --out " + dir.string(), dir);
  if (code) *code = r.code;
  return nlohmann::json::parse(slurp(dir / "verify.json"));
}

const nlohmann::json* find_check(const nlohmann::json& v, const std::string& name) {
  for (const auto& c : v.at("checks")) {
    if (c.at("name") == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST(Run, TenRoundsAndByteIdenticalRerun) {
  const auto a = scratch("run_a");
  const auto b = scratch("run_b");
  const std::string args = "run --family ocs_random --dim 2 --T 10 --seed 3 --policy proj_ogd";
  ASSERT_EQ(cli(args + " --out " + a.string(), a).code, 0);
  ASSERT_EQ(cli(args + " --out " + b.string(), b).code, 0);
  const auto body = slurp(a / "trace.csv");
  const auto rows = lines(body);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "t,x0,x1,y0,y1,b0,b1,cost,violation,dist,eta,ccv_running,policy_tag");
  EXPECT_EQ(body, slurp(b / "trace.csv"));
  const auto m = nlohmann::json::parse(slurp(a / "metrics.json"));
  EXPECT_TRUE(m.contains("metadata"));
  EXPECT_TRUE(m.contains("movement_cost"));
}

TEST(Run, InvalidFamilyIsConfigError) {
  const auto dir = scratch("bad_family");
  const auto r = cli("run --family no_such --T 10 --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("family"), std::string::npos) << r.err;
}

TEST(Run, InvalidParameterNamesField) {
  const auto dir = scratch("bad_param");
  fs::create_directories(dir);
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"family": "nested_balls", "d": 2, "T": 10, "params": {"shrink": 3}})";
  const auto r = cli("run --config " + cfg.string() + " --out " + (dir / "out").string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("shrink"), std::string::npos) << r.err;
}

TEST(Run, MultipleRunsGetSubdirectories) {
  const auto dir = scratch("multi");
  ASSERT_EQ(cli("run --family nested_balls --dim 2 --T 10 --T 20 --seed 1 --out " + dir.string(), dir).code, 0);
  EXPECT_EQ(lines(slurp(dir / "T10_seed1" / "trace.csv")).size(), 11u);
  EXPECT_EQ(lines(slurp(dir / "T20_seed1" / "trace.csv")).size(), 21u);
}

TEST(Sweep, SingleHorizonRejected) {
  const auto dir = scratch("sweep_one");
  const auto r = cli("sweep --family worst_case_d1 --dim 1 --T 100 --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'T'"), std::string::npos) << r.err;
}

TEST(Sweep, WritesTableAndSummary) {
  const auto dir = scratch("sweep");
  ASSERT_EQ(cli("sweep --family worst_case_d1 --dim 1 --T 50 --T 100 --T 200 --policy proj_ogd --out " + dir.string(),
                dir)
                .code,
            0);
  const auto rows = lines(slurp(dir / "sweep.csv"));
  ASSERT_GE(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("T,policy,median_ccv,median_regret,median_M_T", 0), 0u);
  const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_FALSE(s.empty());
}

TEST(Verify, NestedBallsMovementCheck) {
  int code = -1;
  const auto v = verify_with("--family nested_balls --dim 3 --T 200 --seed 0", "verify_balls", &code);
  const auto* c = find_check(v, "M_T <= d^{3/2}*D");
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->at("pass").get<bool>());
  EXPECT_EQ(code, v.at("all_pass").get<bool>() ? 0 : 1);
}

TEST(Verify, OcsSelfExpanded) {
  const auto v = verify_with("--family ocs_random --dim 2 --T 200 --seed 1", "verify_ocs");
  const auto* c = find_check(v, "reverse curve self-expanded");
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->at("pass").get<bool>());
}

TEST(Verify, RotatingHasMovementBound) {
  const auto v = verify_with("--family rotating_polytope --dim 2 --T 200 --seed 2", "verify_rot");
  EXPECT_NE(find_check(v, "M_T <= movement_bound(c*)"), nullptr);
}

TEST(Verify, ChecksArePureFunctionOfRun) {
  const auto v1 = verify_with("--family ocs_random --dim 3 --T 100 --seed 4", "verify_p1");
  const auto v2 = verify_with("--family ocs_random --dim 3 --T 100 --seed 4", "verify_p2");
  EXPECT_EQ(v1.at("checks").dump(), v2.at("checks").dump());
}

// ---------------------------------------------------------------------------
// In-process

TEST(Format, SeventeenSignificantDigits) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(1.0), "1");
  EXPECT_EQ(std::stod(io::format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Config, RejectsUnknownAndBadTypes) {
  auto expect_field = [](const nlohmann::json& j, const std::string& field) {
    try {
      config_from_json(j);
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_field({{"d", 2}}, "family");
  expect_field({{"family", "ocs_random"}, {"bogus", 1}}, "bogus");
  expect_field({{"family", "ocs_random"}, {"T", "ten"}}, "T");
  expect_field({{"family", "ocs_random"}, {"seed", 1}, {"seeds", {1, 2}}}, "seeds");
  expect_field({{"family", "ocs_random"}, {"metrics", {{"width_dirs", "x"}}}}, "metrics.width_dirs");
}

TEST(Config, RoundTrip) {
  const auto cfg = config_from_json({{"family", "nested_boxes"},
                                     {"d", 3},
                                     {"T", {10, 20, 40}},
                                     {"seeds", {1, 2}},
                                     {"policy", "sinha"},
                                     {"params", {{"shrink", 0.3}}}});
  const auto again = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_to_json(cfg).dump(), config_to_json(again).dump());
  EXPECT_EQ(again.Ts, (std::vector<int>{10, 20, 40}));
  EXPECT_EQ(again.generator.params.at("shrink"), 0.3);
}

TEST(Commands, InProcessExitCodes) {
  std::ostringstream err;
  ExperimentConfig cfg;
  cfg.generator.family = "ocs_random";
  cfg.generator.d = 2;
  cfg.Ts = {20};
  cfg.out = scratch("inproc").string();
  cfg.plots = false;
  EXPECT_EQ(cmd_run(cfg, err), 0) << err.str();
  cfg.policy = "nope";
  EXPECT_EQ(cmd_run(cfg, err), 2);
  cfg.policy = "proj_ogd";
  cfg.Ts = {10, 20};
  EXPECT_EQ(cmd_sweep(cfg, err), 2);
}

TEST(Verify, NonProjectionTraceOnlyGetsGeneralChecks) {
  int code = -1;
  const auto v = verify_with("--family ocs_random --dim 2 --T 200 --seed 1 --policy sinha", "verify_sinha", &code);
  EXPECT_EQ(code, 0);
  EXPECT_NE(find_check(v, "CCV <= G*M_T"), nullptr);
  EXPECT_EQ(find_check(v, "reverse curve self-expanded"), nullptr);
  EXPECT_EQ(find_check(v, "M_T <= movement_bound(c*)"), nullptr);
}
