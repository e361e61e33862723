#pragma once

#include "coco/algorithms.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace coco {

struct GeneratorSpec {
  std::string family;
  int d = 2;
  int T = 100;
  std::uint64_t seed = 0;
  // Family knobs; unknown keys are rejected.
  std::map<std::string, double> params;
  // monotone_2d only: per-round rotation increments (T - 1 entries).
  std::vector<double> schedule;
};

struct BallsParams {
  double D = 2.0;
  double G = 1.0;
  // Random affine costs instead of the zero cost.
  bool affine_costs = false;
  // Distance of the common center from the origin, in units of D/2. Values
  // above 1 put the origin outside X, so x_1 lands on the boundary.
  double center_offset = 1.5;
};

Instance gen_nested_balls(int d, int T, double shrink, std::uint64_t seed, const BallsParams& p = {});
Instance gen_nested_boxes(int d, int T, double shrink, std::uint64_t seed, const BallsParams& p = {});
Instance gen_worst_case_d1(double a, double c, int T, std::uint64_t seed);

struct OcsParams {
  double D = 2.0;
  double center_offset = 1.5;
};
Instance gen_ocs_random(int d, int T, std::uint64_t seed, const OcsParams& p = {});

struct MonotoneParams {
  double D = 2.0;
  double G = 1.0;
};
// Throws MonotonicityUnattainableError if 32 reseeded attempts all fail.
Instance gen_monotone_2d(int T, const std::vector<double>& angle_steps, std::uint64_t seed,
                         const MonotoneParams& p = {});
// Constant increments adding up to `total`.
std::vector<double> constant_schedule(int T, double total);

struct RotatingParams {
  double D = 2.0;
  double G = 1.0;
  // Slab half-width in units of D.
  double half_width = 0.01;
};
Instance gen_rotating_polytope(int d, int T, double rotation_step, std::uint64_t seed, const RotatingParams& p = {});

// Dispatch on spec.family, with parameter validation. Throws ConfigError
// naming the offending field.
Instance generate(const GeneratorSpec& spec);

const std::vector<std::string>& known_families();

nlohmann::json instance_to_json(const GeneratorSpec& spec, const Instance& inst);
GeneratorSpec spec_from_json(const nlohmann::json& j);

}  // namespace coco
