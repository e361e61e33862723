#include "coco/instances.hpp"

#include "coco/error.hpp"
#include "coco/metrics.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace coco {
namespace {

constexpr std::uint64_t kReseed = 0x9E3779B97F4A7C15ULL;

Vector random_direction(int d, Rng& rng) { return sample_unit_sphere(d, rng); }

// Uniform point in the ball of the given radius.
Vector uniform_in_ball(int d, double radius, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return random_direction(d, rng) * (radius * std::pow(unit(rng), 1.0 / d));
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("invalid '" + field + "': " + what);
}

void check_common(int d, int T) {
  require(T >= 1, "T", "must be >= 1");
  require(d >= 1, "d", "must be >= 1");
}

InstanceMeta meta_for(const std::string& family, int d, int T, std::uint64_t seed, std::map<std::string, double> params) {
  return InstanceMeta{family, d, T, seed, std::move(params)};
}

ScalarConvexFunction random_cost(int d, double G, bool affine, Rng& rng) {
  if (!affine) return ScalarConvexFunction::zero(d);
  return ScalarConvexFunction::affine(uniform_in_ball(d, G, rng), 0.0);
}

}  // namespace

Instance gen_nested_balls(int d, int T, double shrink, std::uint64_t seed, const BallsParams& p) {
  check_common(d, T);
  require(d >= 2, "d", "nested_balls needs d >= 2");
  require(shrink > 0.0 && shrink < 1.0, "shrink", "must lie in (0, 1)");
  require(p.D > 0.0, "D", "must be positive");
  Rng rng(seed);
  const double R = p.D / 2.0;
  const Vector o = random_direction(d, rng) * (p.center_offset * R);
  std::vector<Round> rounds;
  rounds.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const double r = R * (1.0 - shrink * t / T);
    auto set = ConvexSet::ball(o, r);
    rounds.push_back({random_cost(d, p.G, p.affine_costs, rng), ScalarConvexFunction::set_margin(set), set});
  }
  const double G = p.affine_costs ? std::max(1.0, p.G) : 1.0;
  return Instance(ConvexSet::ball(o, R), p.D, G, std::move(rounds), o,
                  meta_for("nested_balls", d, T, seed,
                           {{"shrink", shrink}, {"D", p.D}, {"G", p.G}, {"affine", p.affine_costs ? 1.0 : 0.0},
                            {"center_offset", p.center_offset}}));
}

Instance gen_nested_boxes(int d, int T, double shrink, std::uint64_t seed, const BallsParams& p) {
  check_common(d, T);
  require(d >= 2, "d", "nested_boxes needs d >= 2");
  require(shrink > 0.0 && shrink < 1.0, "shrink", "must lie in (0, 1)");
  require(p.D > 0.0, "D", "must be positive");
  Rng rng(seed);
  // A cube whose diagonal is D.
  const double h = p.D / (2.0 * std::sqrt(static_cast<double>(d)));
  const Vector o = random_direction(d, rng) * (p.center_offset * p.D / 2.0);
  std::vector<Round> rounds;
  rounds.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const double ht = h * (1.0 - shrink * t / T);
    auto set = ConvexSet::box(o.array() - ht, o.array() + ht);
    rounds.push_back({random_cost(d, p.G, p.affine_costs, rng), ScalarConvexFunction::set_margin(set), set});
  }
  const double G = p.affine_costs ? std::max(1.0, p.G) : 1.0;
  return Instance(ConvexSet::box(o.array() - h, o.array() + h), p.D, G, std::move(rounds), o,
                  meta_for("nested_boxes", d, T, seed,
                           {{"shrink", shrink}, {"D", p.D}, {"G", p.G}, {"affine", p.affine_costs ? 1.0 : 0.0},
                            {"center_offset", p.center_offset}}));
}

Instance gen_worst_case_d1(double a, double c, int T, std::uint64_t seed) {
  check_common(1, T);
  require(a > 2.0, "a", "must exceed 2");
  require(c > 0.0, "c", "must be positive");
  const Vector lo = Vector::Constant(1, 1.0);
  const Vector hi = Vector::Constant(1, a);
  const double slope = 2.0 * c * a;  // |f'| on [1, a]
  auto cost = ScalarConvexFunction::scaled_square(c, slope);
  // g(x) = a/2 - x, so {g <= 0} within X is [a/2, a].
  auto g = ScalarConvexFunction::affine(Vector::Constant(1, -1.0), a / 2.0);
  auto set = ConvexSet::box(Vector::Constant(1, a / 2.0), hi);
  std::vector<Round> rounds(static_cast<std::size_t>(T), Round{cost, g, set});
  return Instance(ConvexSet::box(lo, hi), a - 1.0, std::max(1.0, slope), std::move(rounds),
                  Vector::Constant(1, a / 2.0), meta_for("worst_case_d1", 1, T, seed, {{"a", a}, {"c", c}}));
}

Instance gen_ocs_random(int d, int T, std::uint64_t seed, const OcsParams& p) {
  check_common(d, T);
  require(d >= 2, "d", "ocs_random needs d >= 2");
  require(p.D > 0.0, "D", "must be positive");
  Rng rng(seed);
  const double h = p.D / (2.0 * std::sqrt(static_cast<double>(d)));
  const Vector o = random_direction(d, rng) * (p.center_offset * p.D / 2.0);
  std::vector<Round> rounds;
  rounds.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const Vector pt = o + uniform_in_ball(d, p.D / 4.0, rng);
    Vector n = random_direction(d, rng);
    // Orient so the witness stays feasible; redraw when it would sit on
    // the boundary.
    double side = n.dot(pt - o);
    while (std::abs(side) < 1e-9 * p.D) {
      n = random_direction(d, rng);
      side = n.dot(pt - o);
    }
    if (side < 0.0) n = -n;
    auto set = ConvexSet::halfspace(n, n.dot(pt));
    rounds.push_back({ScalarConvexFunction::zero(d), ScalarConvexFunction::set_margin(set), set});
  }
  return Instance(ConvexSet::box(o.array() - h, o.array() + h), p.D, 1.0, std::move(rounds), o,
                  meta_for("ocs_random", d, T, seed, {{"D", p.D}, {"center_offset", p.center_offset}}));
}

std::vector<double> constant_schedule(int T, double total) {
  if (T <= 1) return {};
  return std::vector<double>(static_cast<std::size_t>(T - 1), total / (T - 1));
}

Instance gen_monotone_2d(int T, const std::vector<double>& angle_steps, std::uint64_t seed, const MonotoneParams& p) {
  check_common(2, T);
  require(static_cast<int>(angle_steps.size()) == std::max(0, T - 1), "schedule", "needs T - 1 entries");
  double total = 0.0;
  for (std::size_t i = 0; i < angle_steps.size(); ++i) {
    require(angle_steps[i] >= 0.0 && std::isfinite(angle_steps[i]), "schedule", "entries must be >= 0");
    require(i == 0 || angle_steps[i] >= angle_steps[i - 1], "schedule", "must be non-decreasing");
    total += angle_steps[i];
  }
  require(total <= std::numbers::pi + 1e-12, "schedule", "total rotation must not exceed pi");

  const double h = p.D / (2.0 * std::sqrt(2.0));
  const Vector zero = Vector::Zero(2);
  std::uniform_real_distribution<double> angle0(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> depth(0.5, 1.0);

  for (int attempt = 0; attempt < 32; ++attempt) {
    Rng rng(seed + kReseed * static_cast<std::uint64_t>(attempt));
    double phi = angle0(rng);
    std::vector<Round> rounds;
    rounds.reserve(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
      if (t > 1) phi += angle_steps[static_cast<std::size_t>(t - 2)];
      const Vector n = (Vector(2) << std::cos(phi), std::sin(phi)).finished();
      auto set = ConvexSet::halfspace(n, 0.25 * p.D * depth(rng));
      // A constant pull toward the cutting boundary forces a projection
      // every round.
      rounds.push_back({ScalarConvexFunction::affine(-p.G * n, 0.0), ScalarConvexFunction::set_margin(set), set});
    }
    Instance inst(ConvexSet::box(-Vector::Constant(2, h), Vector::Constant(2, h)), p.D, std::max(1.0, p.G),
                  std::move(rounds), zero,
                  meta_for("monotone_2d", 2, T, seed,
                           {{"D", p.D}, {"G", p.G}, {"total_angle", total}, {"attempt", attempt}}));
    ProjectionOgd ogd;
    const Trace tr = run_policy(inst, ogd, seed);
    if (!tr.valid) continue;
    const auto hp = projection_hyperplanes(tr);
    if (monotonicity_check(hp).monotone) return inst;
  }
  throw MonotonicityUnattainableError("monotone_2d: no monotone instance after 32 attempts");
}

Instance gen_rotating_polytope(int d, int T, double rotation_step, std::uint64_t seed, const RotatingParams& p) {
  check_common(d, T);
  require(d >= 2, "d", "rotating_polytope needs d >= 2");
  require(p.half_width > 0.0, "half_width", "must be positive");
  require(std::isfinite(rotation_step), "rotation_step", "must be finite");
  Rng rng(seed);
  std::uniform_real_distribution<double> angle0(0.0, 2.0 * std::numbers::pi);
  const double phi0 = angle0(rng);
  const double h = p.D / (2.0 * std::sqrt(static_cast<double>(d)));
  const double w = p.half_width * p.D;
  std::vector<Round> rounds;
  rounds.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const double phi = phi0 + (t - 1) * rotation_step;
    Vector n = Vector::Zero(d);
    Vector along = Vector::Zero(d);
    n[0] = std::cos(phi);
    n[1] = std::sin(phi);
    along[0] = -std::sin(phi);
    along[1] = std::cos(phi);
    auto slab = ConvexSet::polytope({{n, w}, {-n, w}});
    rounds.push_back({ScalarConvexFunction::affine(-p.G * along, 0.0), ScalarConvexFunction::set_margin(slab), slab});
  }
  return Instance(ConvexSet::box(-Vector::Constant(d, h), Vector::Constant(d, h)), p.D, std::max(1.0, p.G),
                  std::move(rounds), Vector::Zero(d),
                  meta_for("rotating_polytope", d, T, seed,
                           {{"D", p.D}, {"G", p.G}, {"half_width", p.half_width}, {"rotation_step", rotation_step}}));
}

const std::vector<std::string>& known_families() {
  static const std::vector<std::string> names{"nested_balls", "nested_boxes",      "worst_case_d1",
                                              "ocs_random",   "monotone_2d",       "rotating_polytope"};
  return names;
}

Instance generate(const GeneratorSpec& spec) {
  const auto& P = spec.params;
  auto allowed = [&](std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : P) {
      require(ok.count(k) > 0, "params." + k, "not a parameter of " + spec.family);
      require(std::isfinite(v), "params." + k, "must be finite");
    }
  };
  auto get = [&](const char* key, double fallback) {
    auto it = P.find(key);
    return it == P.end() ? fallback : it->second;
  };

  const auto& f = spec.family;
  if (f == "nested_balls" || f == "nested_boxes") {
    allowed({"shrink", "D", "G", "affine", "center_offset"});
    BallsParams bp;
    bp.D = get("D", bp.D);
    bp.G = get("G", bp.G);
    bp.affine_costs = get("affine", 0.0) != 0.0;
    bp.center_offset = get("center_offset", bp.center_offset);
    const double shrink = get("shrink", 0.5);
    return f == "nested_balls" ? gen_nested_balls(spec.d, spec.T, shrink, spec.seed, bp)
                               : gen_nested_boxes(spec.d, spec.T, shrink, spec.seed, bp);
  }
  if (f == "worst_case_d1") {
    allowed({"a", "c"});
    require(spec.d == 1, "d", "worst_case_d1 is one-dimensional");
    return gen_worst_case_d1(get("a", 4.0), get("c", 10.0), spec.T, spec.seed);
  }
  if (f == "ocs_random") {
    allowed({"D", "center_offset"});
    OcsParams op;
    op.D = get("D", op.D);
    op.center_offset = get("center_offset", op.center_offset);
    return gen_ocs_random(spec.d, spec.T, spec.seed, op);
  }
  if (f == "monotone_2d") {
    allowed({"D", "G", "total_angle"});
    require(spec.d == 2, "d", "monotone_2d is two-dimensional");
    MonotoneParams mp;
    mp.D = get("D", mp.D);
    mp.G = get("G", mp.G);
    const auto steps = spec.schedule.empty() ? constant_schedule(spec.T, get("total_angle", std::numbers::pi / 2.0))
                                             : spec.schedule;
    return gen_monotone_2d(spec.T, steps, spec.seed, mp);
  }
  if (f == "rotating_polytope") {
    allowed({"D", "G", "half_width", "rotation_step"});
    RotatingParams rp;
    rp.D = get("D", rp.D);
    rp.G = get("G", rp.G);
    rp.half_width = get("half_width", rp.half_width);
    return gen_rotating_polytope(spec.d, spec.T, get("rotation_step", 0.01), spec.seed, rp);
  }
  throw ConfigError("invalid 'family': unknown family '" + f + "'");
}

nlohmann::json instance_to_json(const GeneratorSpec& spec, const Instance& inst) {
  nlohmann::json j;
  j["family"] = spec.family;
  j["d"] = spec.d;
  j["T"] = spec.T;
  j["seed"] = spec.seed;
  j["params"] = inst.meta().params;
  if (!spec.schedule.empty()) {
    j["schedule"] = spec.schedule;
  } else if (spec.family == "monotone_2d") {
    // The effective schedule, so that reloading does not re-derive it from a
    // rounded total.
    auto it = spec.params.find("total_angle");
    j["schedule"] = constant_schedule(spec.T, it == spec.params.end() ? std::numbers::pi / 2.0 : it->second);
  }
  j["witness"] = std::vector<double>(inst.witness().data(), inst.witness().data() + inst.witness().size());
  j["D"] = inst.D();
  j["G"] = inst.G();
  return j;
}

GeneratorSpec spec_from_json(const nlohmann::json& j) {
  GeneratorSpec s;
  try {
    s.family = j.at("family").get<std::string>();
    s.d = j.value("d", s.d);
    s.T = j.value("T", s.T);
    s.seed = j.value("seed", s.seed);
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) {
        // Recorded by monotone_2d; not an input.
        if (k == "attempt") continue;
        s.params[k] = v.get<double>();
      }
    }
    if (j.contains("schedule")) s.schedule = j.at("schedule").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("instance json: ") + e.what());
  }
  return s;
}

}  // namespace coco
