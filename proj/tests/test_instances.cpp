#include "coco/error.hpp"
#include "coco/instances.hpp"
#include "coco/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace coco;
using coco::testing::vec;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Instance> sample_family_instances() {
  std::vector<Instance> out;
  for (std::uint64_t s = 0; s < 3; ++s) {
    out.push_back(gen_nested_balls(2 + static_cast<int>(s), 60, 0.5, s));
    BallsParams affine;
    affine.affine_costs = true;
    affine.G = 3.0;
    out.push_back(gen_nested_balls(3, 60, 0.3, s, affine));
    out.push_back(gen_nested_boxes(2 + static_cast<int>(s), 60, 0.6, s, affine));
    out.push_back(gen_worst_case_d1(4.0 + static_cast<double>(s), 10.0, 60, s));
    out.push_back(gen_ocs_random(2 + static_cast<int>(s), 60, s));
    out.push_back(gen_monotone_2d(60, constant_schedule(60, kPi / 2), s));
    out.push_back(gen_rotating_polytope(2 + static_cast<int>(s), 60, 0.05, s));
  }
  return out;
}

}  // namespace

TEST(NestedBalls, RadiiSchedule) {
  const auto inst = gen_nested_balls(2, 4, 0.5, 3);
  const double R = inst.D() / 2;
  const double expected[] = {0.875, 0.75, 0.625, 0.5};
  const auto* X = inst.admissible().get_if<Ball>();
  ASSERT_NE(X, nullptr);
  EXPECT_DOUBLE_EQ(X->radius, R);
  for (int t = 1; t <= 4; ++t) {
    const auto* b = inst.round(t).set.get_if<Ball>();
    ASSERT_NE(b, nullptr);
    EXPECT_NEAR(b->radius, expected[t - 1] * R, 1e-15);
    EXPECT_EQ(b->center, X->center);
  }
  EXPECT_EQ(inst.witness(), X->center);
}

TEST(NestedBoxes, HalfWidthSchedule) {
  const auto inst = gen_nested_boxes(3, 4, 0.5, 4);
  const auto* X = inst.admissible().get_if<Box>();
  ASSERT_NE(X, nullptr);
  const double h = 0.5 * (X->hi[0] - X->lo[0]);
  EXPECT_NEAR((X->hi - X->lo).norm(), inst.D(), 1e-12);
  const double expected[] = {0.875, 0.75, 0.625, 0.5};
  for (int t = 1; t <= 4; ++t) {
    const auto* b = inst.round(t).set.get_if<Box>();
    ASSERT_NE(b, nullptr);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(0.5 * (b->hi[i] - b->lo[i]), expected[t - 1] * h, 1e-12);
  }
}

TEST(NestedBalls, InvalidShrink) {
  EXPECT_THROW(gen_nested_balls(2, 10, 1.0, 0), ConfigError);
  EXPECT_THROW(gen_nested_balls(2, 10, 0.0, 0), ConfigError);
  EXPECT_THROW(gen_nested_balls(1, 10, 0.5, 0), ConfigError);
}

TEST(WorstCase, Parameters) {
  const auto inst = gen_worst_case_d1(4.0, 10.0, 50, 0);
  const auto* X = inst.admissible().get_if<Box>();
  ASSERT_NE(X, nullptr);
  EXPECT_EQ(X->lo[0], 1.0);
  EXPECT_EQ(X->hi[0], 4.0);
  EXPECT_EQ(inst.D(), 3.0);
  const auto& g = inst.round(1).g;
  EXPECT_DOUBLE_EQ(eval(g, vec({3.0})), -1.0);
  EXPECT_DOUBLE_EQ(eval(g, vec({1.5})), 0.5);
  const auto* S = inst.round(1).set.get_if<Box>();
  ASSERT_NE(S, nullptr);
  EXPECT_EQ(S->lo[0], 2.0);
  EXPECT_EQ(S->hi[0], 4.0);
}

TEST(WorstCase, ProjectionOgdFeasibleAfterFirstRound) {
  const auto inst = gen_worst_case_d1(4.0, 10.0, 50, 0);
  ProjectionOgd p;
  const Trace tr = run_policy(inst, p);
  ASSERT_TRUE(tr.valid);
  for (std::size_t i = 1; i < tr.records.size(); ++i) EXPECT_EQ(tr.records[i].violation, 0.0) << i;
}

TEST(WorstCase, Validation) {
  EXPECT_THROW(gen_worst_case_d1(2.0, 1.0, 10, 0), ConfigError);
  EXPECT_THROW(gen_worst_case_d1(4.0, 0.0, 10, 0), ConfigError);
}

TEST(OcsRandom, WitnessFeasibleEveryRound) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = gen_ocs_random(3, 200, s);
    for (const auto& r : inst.rounds()) {
      EXPECT_LE(eval(r.g, inst.witness()), 0.0);
      EXPECT_EQ(eval(r.f, inst.witness()), 0.0);
    }
  }
}

TEST(OcsRandom, DeterministicInSeed) {
  const auto a = gen_ocs_random(2, 50, 7);
  const auto b = gen_ocs_random(2, 50, 7);
  const auto c = gen_ocs_random(2, 50, 8);
  for (int t = 1; t <= 50; ++t) {
    const auto* ha = a.round(t).set.get_if<Halfspace>();
    const auto* hb = b.round(t).set.get_if<Halfspace>();
    ASSERT_TRUE(ha && hb);
    EXPECT_EQ(ha->normal, hb->normal);
    EXPECT_EQ(ha->offset, hb->offset);
  }
  EXPECT_NE(a.round(1).set.get_if<Halfspace>()->normal, c.round(1).set.get_if<Halfspace>()->normal);
}

TEST(OcsRandom, SingleRound) {
  const auto inst = gen_ocs_random(2, 1, 0);
  EXPECT_EQ(inst.T(), 1);
  ProjectionOgd p;
  EXPECT_EQ(run_policy(inst, p).records.size(), 1u);
}

TEST(Monotone, FiveDegreeSteps) {
  const int T = 20;
  const std::vector<double> steps(T - 1, 5.0 * kPi / 180.0);
  const auto inst = gen_monotone_2d(T, steps, 0);
  ProjectionOgd p;
  const Trace tr = run_policy(inst, p);
  const auto m = monotonicity_check(projection_hyperplanes(tr));
  EXPECT_TRUE(m.monotone);
  ASSERT_FALSE(m.theta.empty());
  // 19 increments of 5 degrees.
  EXPECT_NEAR(m.theta.back().second, 95.0 * kPi / 180.0, 1e-6);
}

TEST(Monotone, ZeroRotation) {
  const auto inst = gen_monotone_2d(30, std::vector<double>(29, 0.0), 1);
  ProjectionOgd p;
  const auto m = monotonicity_check(projection_hyperplanes(run_policy(inst, p)));
  EXPECT_TRUE(m.monotone);
  for (const auto& [t, th] : m.theta) EXPECT_NEAR(th, 0.0, 1e-9);
}

TEST(Monotone, ScheduleValidation) {
  std::vector<double> decreasing{0.2, 0.1, 0.05};
  EXPECT_THROW(gen_monotone_2d(4, decreasing, 0), ConfigError);
  EXPECT_THROW(gen_monotone_2d(4, {0.1, 0.1}, 0), ConfigError);
  EXPECT_THROW(gen_monotone_2d(4, {-0.1, 0.1, 0.1}, 0), ConfigError);
  EXPECT_THROW(gen_monotone_2d(3, {2.0, 2.0}, 0), ConfigError);
}

TEST(Rotating, SmallCone) {
  const auto inst = gen_rotating_polytope(2, 200, 0.3, 0);
  ProjectionOgd p;
  const Trace tr = run_policy(inst, p);
  const auto cs = run_c_star(tr, inst);
  ASSERT_TRUE(cs.c_star.has_value());
  EXPECT_LT(*cs.c_star, 0.2);
}

TEST(Rotating, ZeroStepIsFixedSlab) {
  const auto inst = gen_rotating_polytope(3, 10, 0.0, 2);
  const auto* first = inst.round(1).set.get_if<Polytope>();
  ASSERT_NE(first, nullptr);
  for (int t = 2; t <= 10; ++t) {
    const auto* p = inst.round(t).set.get_if<Polytope>();
    ASSERT_NE(p, nullptr);
    ASSERT_EQ(p->faces.size(), first->faces.size());
    for (std::size_t k = 0; k < p->faces.size(); ++k) {
      EXPECT_EQ(p->faces[k].normal, first->faces[k].normal);
      EXPECT_EQ(p->faces[k].offset, first->faces[k].offset);
    }
  }
  EXPECT_EQ(inst.witness(), Vector::Zero(3));
}

// ---------------------------------------------------------------------------
// Properties

TEST(InstanceProperties, AssumptionsHold) {
  Rng rng(21);
  for (const auto& inst : sample_family_instances()) {
    const auto& fam = inst.meta().family;
    const int d = inst.dim();
    // Sampled widths of X stay below D.
    for (int k = 0; k < 200; ++k) {
      const Vector u = sample_unit_sphere(d, rng);
      const double w = support(inst.admissible(), u) + support(inst.admissible(), -u);
      EXPECT_LE(w, inst.D() * (1 + 1e-12)) << fam;
    }
    // Subgradients at points of X stay below G.
    for (int k = 0; k < 20; ++k) {
      const Vector x = project(inst.admissible(), coco::testing::gaussian(d, rng, inst.D()));
      for (int t = 1; t <= inst.T(); t += 7) {
        const auto& r = inst.round(t);
        EXPECT_LE(subgradient(r.f, x).norm(), inst.G() * (1 + 1e-12)) << fam;
        EXPECT_LE(subgradient(r.g, x).norm(), inst.G() * (1 + 1e-12)) << fam;
      }
    }
    EXPECT_TRUE(contains(inst.admissible(), inst.witness(), 1e-12)) << fam;
  }
}

TEST(InstanceProperties, NestedPointsStayNested) {
  Rng rng(22);
  for (const auto& inst : sample_family_instances()) {
    std::vector<Vector> inside;
    replay_sets(inst, [&](int, const ConvexSet& prev, const ConvexSet& cur) {
      std::erase_if(inside, [&](const Vector& p) { return !contains(cur, p, 1e-9); });
      for (int k = 0; k < 5; ++k) {
        const Vector q = project(cur, coco::testing::gaussian(inst.dim(), rng, inst.D()));
        EXPECT_TRUE(contains(prev, q, 1e-7)) << inst.meta().family;
        inside.push_back(q);
      }
      EXPECT_TRUE(contains(cur, inst.witness(), 1e-9)) << inst.meta().family;
    });
  }
}

TEST(InstanceProperties, SerializationRoundTrip) {
  for (const auto& fam : known_families()) {
    GeneratorSpec spec;
    spec.family = fam;
    spec.d = fam == "worst_case_d1" ? 1 : 2;
    spec.T = 40;
    spec.seed = 5;
    const auto a = generate(spec);
    const auto j1 = instance_to_json(spec, a);
    const auto b = generate(spec_from_json(j1));
    EXPECT_EQ(j1.dump(), instance_to_json(spec_from_json(j1), b).dump()) << fam;
    ProjectionOgd p1;
    ProjectionOgd p2;
    const Trace ta = run_policy(a, p1);
    const Trace tb = run_policy(b, p2);
    ASSERT_EQ(ta.records.size(), tb.records.size());
    for (std::size_t i = 0; i < ta.records.size(); ++i) EXPECT_EQ(ta.records[i].x, tb.records[i].x) << fam;
    EXPECT_EQ(ta.ccv(), tb.ccv());
  }
}

TEST(Generate, ErrorsNameTheField) {
  auto expect_field = [](const GeneratorSpec& s, const std::string& field) {
    try {
      generate(s);
      ADD_FAILURE() << "no error for " << field;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  GeneratorSpec s;
  s.family = "no_such_family";
  expect_field(s, "family");
  s.family = "nested_balls";
  s.T = 0;
  expect_field(s, "T");
  s.T = 10;
  s.params["shrink"] = 2.0;
  expect_field(s, "shrink");
  s.params = {{"bogus", 1.0}};
  expect_field(s, "bogus");
  s.params.clear();
  s.family = "worst_case_d1";
  s.d = 2;
  expect_field(s, "d");
  s.family = "monotone_2d";
  s.schedule = {0.1};
  expect_field(s, "schedule");
}

TEST(Generate, SpecFromJsonRejectsMissingFamily) {
  EXPECT_THROW(spec_from_json(nlohmann::json::object({{"d", 2}})), ConfigError);
}
