#pragma once

#include "coco/instances.hpp"
#include "coco/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace coco {

struct ExperimentConfig {
  GeneratorSpec generator;
  std::string policy = "proj_ogd";
  // Extra policies compared by sweep.
  std::vector<std::string> policies;
  std::vector<double> x1;
  std::vector<std::uint64_t> seeds{0};
  std::vector<int> Ts{100};
  std::string out = "coco_out";
  MetricsOptions metrics;
  bool plots = true;
  // verify: cap on the number of rounds given a width-decrement check.
  int decrement_rounds = 200;
};

// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

std::unique_ptr<Policy> make_configured_policy(const ExperimentConfig& cfg, const std::string& name);

// Exit codes: 0 success, 1 a verify check failed, 2 configuration error,
// 3 numerical failure.
int cmd_run(const ExperimentConfig& cfg, std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& err);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& err);

// One verify pass over a finished run; shared with cmd_verify.
std::vector<BoundCheck> verify_checks(const ExperimentConfig& cfg, const Instance& inst, const Trace& trace);

// Worker count: hardware concurrency capped by COCO_THREADS.
unsigned worker_count();

int cli_main(int argc, char** argv);

}  // namespace coco
