#pragma once

#include "coco/algorithms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coco {

double regret(const Trace& trace, const Instance& inst, const Vector& comparator);

// Minimizer of sum_t f_t over S_T.
Vector best_fixed_comparator(const Instance& inst);

// Objective used by best_fixed_comparator, exposed for tests.
double cumulative_cost(const Instance& inst, const Vector& x);

double movement_cost(const Trace& trace);

// True when every round was played by the projection policy; the movement
// and curve bounds only speak about such traces.
bool projection_only(const Trace& trace);

struct WidthEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

WidthEstimate mean_width_mc(const ConvexSet& set, int n_dirs, Rng& rng);
// Same estimator on a caller-supplied direction sample, so that a sequence
// of sets can be compared direction by direction.
WidthEstimate mean_width_on(const ConvexSet& set, std::span<const Vector> dirs);
std::vector<Vector> sample_directions(int d, int n, Rng& rng);

struct ConeEstimate {
  double c = 0.0;
  bool valid = false;
};

// min over sampled boundary points z of S of w . (z - m) / |z - m|, where
// w points from m toward S. Boundary points are projections of uniform
// points on the sphere of radius `radius` around m.
ConeEstimate cone_c_estimate(const Vector& m, const ConvexSet& set, const Vector& w, int n_samples, Rng& rng,
                             double radius);

// Closed form for a ball, vertex minimum for a polygon or a box. Empty when
// no exact rule applies.
std::optional<double> cone_c_exact(const Vector& m, const ConvexSet& set, const Vector& w);

// Range of the canonical-direction estimate over a grid of directions w.
struct ConeDirectionSearch {
  double min_c = 0.0;
  double max_c = 0.0;
  Vector argmax_w;
};
ConeDirectionSearch cone_direction_search(const Vector& m, const ConvexSet& set, int n_samples, Rng& rng,
                                          double radius);

struct CStarResult {
  std::optional<double> c_star;
  std::vector<std::pair<int, double>> per_round;
};

struct CStarOptions {
  int n_samples = 10000;
  // Use the closed forms when the set allows it; sampling otherwise.
  bool exact_when_available = true;
  std::uint64_t seed = 1;
};

CStarResult run_c_star(const Trace& trace, const Instance& inst, const CStarOptions& opts = {});

double movement_bound(double c_star, int d, double D);

struct WidthDecrement {
  bool skipped = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double stderr_ = 0.0;
  bool pass = false;
};

WidthDecrement width_decrement_check(const ConvexSet& prev_set, const ConvexSet& set, const Vector& x,
                                     const Vector& b, double c, int n_dirs, Rng& rng);
WidthDecrement width_decrement_on(const ConvexSet& prev_set, const ConvexSet& set, const Vector& x, const Vector& b,
                                  double c, std::span<const Vector> dirs);

struct Hyperplane {
  int t = 0;
  Vector normal;
};

std::vector<Hyperplane> projection_hyperplanes(const Trace& trace);

struct Monotonicity {
  std::vector<std::pair<int, double>> theta;
  bool monotone = true;
  std::optional<int> t_orth;
};

Monotonicity monotonicity_check(std::span<const Hyperplane> normals);

class PolylineCurve {
 public:
  PolylineCurve() = default;
  // Drops points closer than 1e-12 to their predecessor.
  explicit PolylineCurve(std::span<const Vector> points);
  const std::vector<Vector>& points() const { return points_; }

 private:
  std::vector<Vector> points_;
};

bool self_expanded_check(const PolylineCurve& curve, double tol);
double curve_length(const PolylineCurve& curve);

// The curve x_{T+1}, x_T, ..., x_1.
PolylineCurve reversed_iterate_curve(const Trace& trace);

struct PowerLaw {
  double exponent = 0.0;
  double r_squared = 0.0;
};

PowerLaw fit_power_law(std::span<const std::pair<double, double>> samples);

struct BoundCheck {
  std::string name;
  double observed = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct MetricsOptions {
  bool regret = true;
  bool c_star = true;
  bool widths = true;
  bool monotonicity = true;
  int width_dirs = 2000;
  int width_points = 50;
  CStarOptions c_star_opts;
  std::uint64_t seed = 1;
};

struct WidthPoint {
  int t = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct MetricsReport {
  double regret = 0.0;
  Vector comparator;
  std::vector<std::pair<int, double>> ccv_curve;
  double movement_cost = 0.0;
  std::optional<double> c_star;
  std::vector<std::pair<int, double>> c_star_per_round;
  std::vector<WidthPoint> width_curve;
  std::vector<std::pair<int, double>> theta_curve;
  std::optional<bool> monotone;
  std::optional<int> t_orth;
  std::vector<BoundCheck> bounds;
};

MetricsReport compute_metrics(const Trace& trace, const Instance& inst, const MetricsOptions& opts = {});

}  // namespace coco
