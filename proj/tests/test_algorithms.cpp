#include "coco/algorithms.hpp"
#include "coco/error.hpp"
#include "coco/instances.hpp"
#include "coco/numeric.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace coco;
using coco::testing::vec;

namespace {

Round ocs_round(ConvexSet set) {
  const int d = set.dim();
  return Round{ScalarConvexFunction::zero(d), ScalarConvexFunction::set_margin(set), set};
}

// OCS on X = Box[-200, 10] x [-1, 1] with S_t = {x_1 <= -1.5 t}: starting at
// the origin every round violates by exactly 1.5.
Instance shifting_halfspaces(int T) {
  std::vector<Round> rounds;
  for (int t = 1; t <= T; ++t) rounds.push_back(ocs_round(ConvexSet::halfspace(vec({1, 0}), -1.5 * t)));
  const double D = std::hypot(210.0, 2.0);
  return Instance(ConvexSet::box(vec({-200, -1}), vec({10, 1})), D, 1.0, std::move(rounds), vec({-190, 0}));
}

void expect_bitwise_equal(const Trace& a, const Trace& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    const auto& s = b.records[i];
    EXPECT_EQ(r.x, s.x);
    EXPECT_EQ(r.y, s.y);
    EXPECT_EQ(r.b, s.b);
    EXPECT_EQ(r.cost, s.cost);
    EXPECT_EQ(r.violation, s.violation);
    EXPECT_EQ(r.eta, s.eta);
    EXPECT_EQ(r.ccv_running, s.ccv_running);
  }
  EXPECT_EQ(a.final_x, b.final_x);
}

}  // namespace

TEST(Instance, ValidatesWitnessAndDiameter) {
  const auto X = ConvexSet::ball(vec({0, 0}), 1);
  std::vector<Round> rounds{ocs_round(ConvexSet::ball(vec({0, 0}), 0.5))};
  EXPECT_NO_THROW(Instance(X, 2.0, 1.0, rounds, vec({0, 0})));
  EXPECT_THROW(Instance(X, 2.0, 1.0, rounds, vec({0.9, 0})), EmptySetError);
  EXPECT_THROW(Instance(X, 1.5, 1.0, rounds, vec({0, 0})), std::invalid_argument);
  std::vector<Round> wrong_dim{ocs_round(ConvexSet::ball(vec({0, 0, 0}), 0.5))};
  EXPECT_THROW(Instance(X, 2.0, 1.0, wrong_dim, vec({0, 0})), std::invalid_argument);
}

TEST(ProjectionOgd, StepSize) {
  EXPECT_DOUBLE_EQ(ProjectionOgd::step_size(4.0, 2.0, 1), 2.0);
  EXPECT_DOUBLE_EQ(ProjectionOgd::step_size(4.0, 2.0, 4), 1.0);
}

TEST(ProjectionOgd, OcsFixedPointInsideSet) {
  const auto ball = ConvexSet::ball(vec({0, 0}), 1);
  Instance inst(ball, 2.0, 1.0, {ocs_round(ball)}, vec({0, 0}));
  ProjectionOgd p(vec({1, 0}));
  p.reset(inst);
  const auto S = ConvexSet::intersection({ball}, vec({0, 0}));
  const auto out = p.step(StepInput{1, inst.round(1), S, S, vec({1, 0})});
  EXPECT_EQ(out.y, vec({1, 0}));
  EXPECT_EQ(out.x_next, vec({1, 0}));
}

TEST(ProjectionOgd, WorstCaseOneStep) {
  // Hand simulation: eta_1 = 3, gradient 30 pushes far left, clamp to 1, project to 2.
  std::vector<Round> rounds{Round{ScalarConvexFunction::scaled_square(10.0, 80.0),
                                  ScalarConvexFunction::affine(vec({-1}), 2.0), ConvexSet::box(vec({2}), vec({4}))}};
  Instance inst(ConvexSet::box(vec({1}), vec({4})), 3.0, 1.0, rounds, vec({2}));
  ProjectionOgd p(vec({1.5}));
  const Trace tr = run_policy(inst, p);
  ASSERT_EQ(tr.records.size(), 1u);
  EXPECT_DOUBLE_EQ(tr.records[0].eta, 3.0);
  EXPECT_DOUBLE_EQ(tr.records[0].y[0], 1.0);
  EXPECT_DOUBLE_EQ(tr.final_x[0], 2.0);
  EXPECT_DOUBLE_EQ(tr.records[0].violation, 0.5);

  // The generated instance certifies G = 2ca = 80, which gives the same iterate.
  ProjectionOgd q(vec({1.5}));
  const Trace gen = run_policy(gen_worst_case_d1(4.0, 10.0, 5, 0), q);
  EXPECT_DOUBLE_EQ(gen.records[1].x[0], 2.0);
}

TEST(ProjectionOgd, DefaultStartIsProjectedOrigin) {
  const auto X = ConvexSet::box(vec({1, 1}), vec({2, 2}));
  Instance inst(X, 2.0, 1.0, {ocs_round(X)}, vec({1.5, 1.5}));
  EXPECT_EQ(ProjectionOgd().initial_point(inst), vec({1, 1}));
  EXPECT_EQ(Sinha().initial_point(inst), vec({1, 1}));
}

TEST(Sinha, Parameters) {
  EXPECT_DOUBLE_EQ(Sinha::lambda_for(100), 0.05);
  EXPECT_DOUBLE_EQ(Sinha::beta_for(1.0, 2.0), 0.25);
  auto inst = gen_nested_balls(2, 100, 0.5, 0);
  Sinha s;
  s.reset(inst);
  EXPECT_DOUBLE_EQ(s.lambda(), 0.05);
  EXPECT_DOUBLE_EQ(s.beta(), Sinha::beta_for(inst.G(), inst.D()));
  EXPECT_DOUBLE_EQ(s.V(), 1.0);
  EXPECT_DOUBLE_EQ(s.phi_prime(0.0), 0.05);
}

TEST(Sinha, NoSignalFixedPoint) {
  const auto X = ConvexSet::ball(vec({0, 0}), 1);
  std::vector<Round> rounds(20, ocs_round(X));
  Instance inst(X, 2.0, 1.0, rounds, vec({0, 0}));
  Sinha s;
  const Trace tr = run_policy(inst, s);
  for (const auto& r : tr.records) {
    EXPECT_EQ(r.x, Vector::Zero(2));
    EXPECT_EQ(r.grad, Vector::Zero(2));
    EXPECT_EQ(r.ccv_running, 0.0);
  }
  EXPECT_DOUBLE_EQ(s.internal_ccv(), 0.0);
  EXPECT_DOUBLE_EQ(s.phi_prime(s.internal_ccv()), s.lambda());
}

TEST(Sinha, StronglyConvexModeUsesCurvatureSteps) {
  auto inst = gen_worst_case_d1(4.0, 10.0, 50, 0);
  Sinha s(SinhaMode::strongly_convex);
  const Trace tr = run_policy(inst, s);
  ASSERT_EQ(tr.records.size(), 50u);
  // beta = 1, V = 8 G^2 ln(T e) / alpha with alpha = 2c = 20; H_t = V * 20.
  const double V = 8.0 * inst.G() * inst.G() * std::log(50.0 * std::exp(1.0)) / 20.0;
  EXPECT_NEAR(tr.records[0].eta, 1.0 / (V * 20.0), 1e-15);
  EXPECT_NEAR(tr.records[9].eta, 1.0 / (10.0 * V * 20.0), 1e-15);
}

TEST(Switch, Threshold) {
  EXPECT_NEAR(Switch::threshold_for(10000), 100.0 * std::log(10000.0), 1e-9);
  EXPECT_NEAR(Switch::threshold_for(10000), 921.034, 1e-3);
}

TEST(Switch, NeverBindingMatchesProjectionOgd) {
  for (auto inst : {gen_worst_case_d1(4.0, 10.0, 300, 1), gen_nested_balls(3, 300, 0.5, 2)}) {
    ProjectionOgd p;
    Switch s;
    const Trace a = run_policy(inst, p);
    const Trace b = run_policy(inst, s);
    EXPECT_FALSE(b.switch_time.has_value());
    expect_bitwise_equal(a, b);
    for (const auto& r : b.records) EXPECT_EQ(r.policy_tag, "proj_ogd");
  }
}

TEST(Switch, FlipsOnceAfterThreshold) {
  // CCV(t) = 1.5 t; the threshold 10 ln 100 = 46.05 is first exceeded by
  // CCV(31) = 46.5, so round 32 is the first one played by the baseline.
  const int T = 100;
  Switch s;
  const Trace tr = run_policy(shifting_halfspaces(T), s);
  ASSERT_TRUE(tr.switch_time.has_value());
  EXPECT_EQ(*tr.switch_time, 32);
  for (const auto& r : tr.records) {
    EXPECT_EQ(r.policy_tag, r.t >= 32 ? "sinha" : "proj_ogd") << r.t;
    if (r.t <= 31) EXPECT_DOUBLE_EQ(r.violation, 1.5);
  }
  EXPECT_DOUBLE_EQ(tr.records[30].ccv_running, 46.5);
  // Reported CCV keeps the pre-switch violations.
  EXPECT_GT(tr.ccv(), 46.5);
}

TEST(RunPolicy, SingleRound) {
  auto inst = gen_nested_balls(2, 1, 0.5, 3);
  ProjectionOgd p;
  const Trace tr = run_policy(inst, p);
  ASSERT_EQ(tr.records.size(), 1u);
  const auto& r = tr.records[0];
  EXPECT_EQ(r.ccv_running, positive_part(eval(inst.round(1).g, r.x)));
  EXPECT_TRUE(tr.valid);
}

TEST(RunPolicy, OcsProjectionOgdKeepsY) {
  auto inst = gen_ocs_random(2, 200, 4);
  ProjectionOgd p;
  const Trace tr = run_policy(inst, p);
  for (const auto& r : tr.records) EXPECT_EQ(r.y, r.x) << r.t;
}

TEST(RunPolicy, Deterministic) {
  for (const char* name : {"proj_ogd", "sinha", "switch"}) {
    auto inst = gen_ocs_random(3, 150, 5);
    auto p1 = make_policy(name);
    auto p2 = make_policy(name);
    expect_bitwise_equal(run_policy(inst, *p1, 7), run_policy(inst, *p2, 7));
  }
}

TEST(RunPolicy, NonConvergenceMarksTraceInvalid) {
  // Two tangent disks meet in a single point, where Dykstra converges sublinearly.
  const auto X = ConvexSet::box(vec({-2, -2}), vec({2, 2}));
  const auto a = ConvexSet::ball(vec({-1, 0}), 1);
  const auto b = ConvexSet::ball(vec({1, 0}), 1);
  std::vector<Round> rounds{ocs_round(a), ocs_round(b), ocs_round(b)};
  Instance inst(X, 4.0 * std::sqrt(2.0), 1.0, rounds, vec({0, 0}));
  ProjectionOgd p(vec({0, 1.5}));
  const Trace tr = run_policy(inst, p);
  EXPECT_FALSE(tr.valid);
  EXPECT_LT(tr.records.size(), 3u);
  EXPECT_NE(tr.error.find("no convergence"), std::string::npos);
}

TEST(MakePolicy, KnownAndUnknownNames) {
  EXPECT_EQ(make_policy("proj_ogd")->name(), "proj_ogd");
  EXPECT_EQ(make_policy("sinha")->name(), "sinha");
  EXPECT_EQ(make_policy("switch")->name(), "switch");
  EXPECT_THROW(make_policy("nope"), ConfigError);
}

// ---------------------------------------------------------------------------
// Trace invariants over generated instances

namespace {

std::vector<Instance> sample_instances() {
  std::vector<Instance> out;
  out.push_back(gen_nested_balls(2, 120, 0.6, 1));
  out.push_back(gen_nested_balls(3, 120, 0.6, 2, BallsParams{2.0, 1.0, true, 1.5}));
  out.push_back(gen_nested_boxes(3, 120, 0.6, 3));
  out.push_back(gen_ocs_random(2, 120, 4));
  out.push_back(gen_ocs_random(3, 120, 5));
  out.push_back(gen_worst_case_d1(4.0, 10.0, 120, 6));
  out.push_back(gen_monotone_2d(120, constant_schedule(120, 1.0), 7));
  out.push_back(gen_rotating_polytope(2, 120, 0.05, 8));
  return out;
}

}  // namespace

TEST(TraceInvariants, AllPoliciesAllFamilies) {
  for (const auto& inst : sample_instances()) {
    for (const char* name : {"proj_ogd", "sinha", "switch"}) {
      auto p = make_policy(name);
      const Trace tr = run_policy(inst, *p);
      ASSERT_TRUE(tr.valid) << inst.meta().family << " " << name << ": " << tr.error;
      ASSERT_EQ(static_cast<int>(tr.records.size()), inst.T());
      CompensatedSum sum;
      int flips = 0;
      for (std::size_t i = 0; i < tr.records.size(); ++i) {
        const auto& r = tr.records[i];
        EXPECT_EQ(r.t, static_cast<int>(i) + 1);
        EXPECT_LE(r.violation, inst.G() * r.dist + 1e-7) << inst.meta().family << " " << name << " t=" << r.t;
        sum.add(r.violation);
        EXPECT_EQ(r.ccv_running, sum.value());
        if (i > 0) {
          EXPECT_GE(r.ccv_running, tr.records[i - 1].ccv_running);
          flips += r.policy_tag != tr.records[i - 1].policy_tag;
        }
      }
      EXPECT_LE(flips, 1);
    }
  }
}

TEST(TraceInvariants, ProjectionOgdFeasibilityLagAndNestedness) {
  for (const auto& inst : sample_instances()) {
    ProjectionOgd p;
    const Trace tr = run_policy(inst, p);
    Rng rng(9);
    replay_sets(inst, [&](int t, const ConvexSet& prev, const ConvexSet& cur) {
      const auto i = static_cast<std::size_t>(t - 1);
      EXPECT_LE(distance(cur, tr.next_x(i)), 1e-7) << inst.meta().family << " t=" << t;
      EXPECT_LE(distance(cur, inst.witness()), 1e-7) << inst.meta().family << " t=" << t;
      if (t % 20 == 0) {
        for (int k = 0; k < 200; ++k) {
          const Vector z = project(cur, inst.witness() + coco::testing::gaussian(inst.dim(), rng, inst.D()));
          EXPECT_LE(distance(prev, z), 1e-7) << inst.meta().family << " t=" << t;
        }
      }
    });
  }
}

TEST(TraceInvariants, SinhaGradientBound) {
  for (const auto& inst : sample_instances()) {
    Sinha s;
    s.reset(inst);
    const double beta = s.beta();
    const double lambda = s.lambda();
    const Trace tr = run_policy(inst, s);
    for (const auto& r : tr.records) {
      // The internal counter is the beta-scaled CCV.
      const double phi = lambda * std::exp(lambda * beta * r.ccv_running);
      EXPECT_LE(r.grad.norm(), beta * inst.G() * (1.0 + phi) * (1 + 1e-12) + 1e-9) << inst.meta().family;
    }
  }
}
