#include "coco/metrics.hpp"

#include "coco/error.hpp"
#include "coco/numeric.hpp"
#include "coco/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace coco {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sum of the costs of every round in closed form where possible.
class CostAggregate {
 public:
  explicit CostAggregate(const Instance& inst) : lin_(Vector::Zero(inst.dim())), quad_center_(Vector::Zero(inst.dim())) {
    for (const auto& r : inst.rounds()) add(r.f);
  }

  bool all_zero() const { return all_zero_; }
  bool linear_only() const { return other_.empty() && quad_ == 0.0 && square_ == 0.0; }
  bool strongly_convex(int d) const { return other_.empty() && (quad_ > 0.0 || (d == 1 && square_ > 0.0)); }
  double curvature() const { return 2.0 * (quad_ + square_); }
  const Vector& linear() const { return lin_; }
  std::size_t n_other() const { return other_.size(); }

  double value(const Vector& x) const {
    double v = lin_.dot(x) + constant_ + quad_ * x.squaredNorm() - 2.0 * quad_center_.dot(x) + square_ * x[0] * x[0];
    for (const auto* f : other_) v += eval(*f, x);
    return v;
  }

  Vector gradient(const Vector& x) const {
    Vector g = lin_ + 2.0 * quad_ * x - 2.0 * quad_center_;
    g[0] += 2.0 * square_ * x[0];
    for (const auto* f : other_) g += subgradient(*f, x);
    return g;
  }

 private:
  void add(const ScalarConvexFunction& f) {
    if (f.get_if<Zero>()) return;
    all_zero_ = false;
    if (const auto* a = f.get_if<Affine>()) {
      lin_ += a->a;
      constant_ += a->b;
    } else if (const auto* q = f.get_if<Quadratic>()) {
      quad_ += q->c;
      quad_center_ += q->c * q->center;
      constant_ += q->c * q->center.squaredNorm();
    } else if (const auto* s = f.get_if<ScaledSquare>()) {
      square_ += s->c;
    } else {
      other_.push_back(&f);
    }
  }

  bool all_zero_ = true;
  Vector lin_;
  double constant_ = 0.0;
  double quad_ = 0.0;
  Vector quad_center_;
  double square_ = 0.0;
  std::vector<const ScalarConvexFunction*> other_;
};

// Corners of a box, or of a bounded polygon. Empty when the set has no
// cheap vertex description.
std::optional<std::vector<Vector>> vertices_of(const ConvexSet& set) {
  if (const auto* n = set.get_if<NestedIntersection>(); n && n->members.size() == 1) {
    return vertices_of(n->members.front());
  }
  if (const auto* b = set.get_if<Box>()) {
    const auto d = b->lo.size();
    if (d > 12) return std::nullopt;
    std::vector<Vector> out;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
      Vector v(d);
      for (Eigen::Index i = 0; i < d; ++i) v[i] = (mask >> i) & 1u ? b->hi[i] : b->lo[i];
      out.push_back(std::move(v));
    }
    return out;
  }
  if (const auto* p = set.get_if<Polytope>(); p && p->polygon && p->polygon->bounded()) {
    return std::vector<Vector>(p->polygon->vertices.begin(), p->polygon->vertices.end());
  }
  if (set.dim() != 2) return std::nullopt;
  auto faces = polyhedral_faces(set);
  if (!faces) return std::nullopt;
  try {
    return polytope::polygon_vertices(*faces);
  } catch (const UnboundedError&) {
    return std::nullopt;
  }
}

// Support function evaluator that caches vertices when it can.
class SupportOracle {
 public:
  explicit SupportOracle(const ConvexSet& set) : set_(set), vertices_(vertices_of(set)) {}
  double operator()(const Vector& u) const {
    if (!vertices_) return support(set_, u);
    double best = -kInf;
    for (const auto& v : *vertices_) best = std::max(best, u.dot(v));
    return best;
  }

 private:
  const ConvexSet& set_;
  std::optional<std::vector<Vector>> vertices_;
};

std::vector<double> widths_on(const ConvexSet& set, std::span<const Vector> dirs) {
  SupportOracle h(set);
  std::vector<double> out;
  out.reserve(dirs.size());
  for (const auto& u : dirs) out.push_back(h(u) + h(-u));
  return out;
}

WidthEstimate summarize(const std::vector<double>& vals) {
  const auto n = static_cast<double>(vals.size());
  CompensatedSum s;
  for (double v : vals) s.add(v);
  const double mean = s.value() / n;
  CompensatedSum sq;
  for (double v : vals) sq.add((v - mean) * (v - mean));
  const double var = vals.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

std::vector<Vector> boundary_samples(const Vector& m, const ConvexSet& set, int n_samples, Rng& rng, double radius) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const Vector z = project(set, m + radius * sample_unit_sphere(static_cast<int>(m.size()), rng));
    if ((z - m).norm() > 1e-12) out.push_back(z);
  }
  return out;
}

double cone_min(const Vector& m, std::span<const Vector> pts, const Vector& w) {
  double c = kInf;
  for (const auto& z : pts) {
    const Vector v = z - m;
    c = std::min(c, w.dot(v) / v.norm());
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Regret

double cumulative_cost(const Instance& inst, const Vector& x) { return CostAggregate(inst).value(x); }

double regret(const Trace& trace, const Instance& inst, const Vector& comparator) {
  const ConvexSet S = final_set(inst);
  if (!contains(S, comparator, 1e-7)) throw InfeasibleComparatorError("regret: comparator outside S_T");
  CompensatedSum total;
  for (const auto& rec : trace.records) {
    total.add(rec.cost);
    total.add(-eval(inst.round(rec.t).f, comparator));
  }
  return total.value();
}

Vector best_fixed_comparator(const Instance& inst) {
  const CostAggregate F(inst);
  if (F.all_zero()) return inst.witness();
  const ConvexSet S = final_set(inst);
  const int d = inst.dim();
  const double T = inst.T();

  Vector best = project(S, inst.witness());
  double best_val = F.value(best);
  auto offer = [&](const Vector& z) {
    const double v = F.value(z);
    if (v < best_val) {
      best_val = v;
      best = z;
    }
  };

  // Projected subgradient on the averaged objective.
  {
    Vector x = best;
    for (int k = 1; k <= 5000; ++k) {
      const Vector g = F.gradient(x) / T;
      const double step = inst.D() / (inst.G() * std::sqrt(static_cast<double>(k)));
      x = project(S, x - step * g);
      offer(x);
    }
  }

  // Closed-form shapes converge much faster by other means.
  if (F.linear_only() && F.linear().norm() > 0.0) {
    const Vector dir = F.linear() / F.linear().norm();
    offer(project(S, inst.witness() - 1e3 * inst.D() * dir));
  }
  if (F.strongly_convex(d)) {
    const double step = T / (F.curvature());
    Vector x = best;
    for (int k = 0; k < 5000; ++k) {
      const Vector next = project(S, x - step * F.gradient(x) / T);
      const double moved = (next - x).norm();
      x = next;
      if (moved <= 1e-15 * (1.0 + x.norm())) break;
    }
    offer(x);
  }

  if (d <= 2 && F.n_other() == 0) {
    // Grid over the bounding box of S_T at spacing D/2000.
    const double h = inst.D() / 2000.0;
    Vector lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      const Vector e = Vector::Unit(d, i);
      hi[i] = support(S, e);
      lo[i] = -support(S, -e);
    }
    std::vector<int> count(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) count[static_cast<std::size_t>(i)] = static_cast<int>(std::floor((hi[i] - lo[i]) / h)) + 1;
    const auto faces = polyhedral_faces(S);
    auto inside = [&](const Vector& z) {
      return faces ? polytope::satisfies(*faces, z, 1e-12) : contains(S, z, 1e-12);
    };
    Vector z(d);
    const int ny = d == 2 ? count[1] : 1;
    for (int i = 0; i < count[0]; ++i) {
      z[0] = std::min(hi[0], lo[0] + i * h);
      for (int j = 0; j < ny; ++j) {
        if (d == 2) z[1] = std::min(hi[1], lo[1] + j * h);
        if (inside(z)) offer(z);
      }
    }
  }
  return best;
}

double movement_cost(const Trace& trace) {
  CompensatedSum s;
  for (const auto& rec : trace.records) s.add(rec.dist);
  return s.value();
}

// ---------------------------------------------------------------------------
// Mean width

std::vector<Vector> sample_directions(int d, int n, Rng& rng) {
  std::vector<Vector> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) dirs.push_back(sample_unit_sphere(d, rng));
  return dirs;
}

WidthEstimate mean_width_on(const ConvexSet& set, std::span<const Vector> dirs) {
  if (dirs.empty()) throw std::invalid_argument("mean_width: no directions");
  return summarize(widths_on(set, dirs));
}

WidthEstimate mean_width_mc(const ConvexSet& set, int n_dirs, Rng& rng) {
  if (n_dirs < 100) throw std::invalid_argument("mean_width_mc: n_dirs must be >= 100");
  const auto dirs = sample_directions(set.dim(), n_dirs, rng);
  return mean_width_on(set, dirs);
}

// ---------------------------------------------------------------------------
// Cone angle-width

ConeEstimate cone_c_estimate(const Vector& m, const ConvexSet& set, const Vector& w, int n_samples, Rng& rng,
                             double radius) {
  if (contains(set, m)) throw DegenerateConfigurationError("cone_c_estimate: m lies in the set");
  if (n_samples < 1) throw std::invalid_argument("cone_c_estimate: n_samples must be >= 1");
  const Vector wu = w / w.norm();
  const auto pts = boundary_samples(m, set, n_samples, rng, radius);
  if (pts.empty()) throw DegenerateConfigurationError("cone_c_estimate: no usable boundary sample");
  const double c = cone_min(m, pts, wu);
  return {c, c > 0.0};
}

std::optional<double> cone_c_exact(const Vector& m, const ConvexSet& set, const Vector& w) {
  const Vector wu = w / w.norm();
  const ConvexSet* s = &set;
  if (const auto* n = set.get_if<NestedIntersection>(); n && n->members.size() == 1) s = &n->members.front();
  if (const auto* b = s->get_if<Ball>()) {
    const Vector v = b->center - m;
    const double dist = v.norm();
    if (dist <= b->radius) throw DegenerateConfigurationError("cone_c_exact: m lies in the ball");
    const double half = std::asin(b->radius / dist);
    const double off = std::acos(std::clamp(wu.dot(v) / dist, -1.0, 1.0));
    return std::cos(std::min(std::numbers::pi, half + off));
  }
  if (auto verts = vertices_of(*s)) {
    return cone_min(m, *verts, wu);
  }
  return std::nullopt;
}

ConeDirectionSearch cone_direction_search(const Vector& m, const ConvexSet& set, int n_samples, Rng& rng,
                                          double radius) {
  const int d = static_cast<int>(m.size());
  const auto pts = boundary_samples(m, set, n_samples, rng, radius);
  if (pts.empty()) throw DegenerateConfigurationError("cone_direction_search: no usable boundary sample");
  std::vector<Vector> ws;
  if (d == 2) {
    for (int k = 0; k < 256; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 256.0;
      ws.push_back((Vector(2) << std::cos(a), std::sin(a)).finished());
    }
  } else {
    ws = sample_directions(d, 2048, rng);
  }
  ConeDirectionSearch out{kInf, -kInf, Vector()};
  for (const auto& w : ws) {
    const double c = cone_min(m, pts, w);
    out.min_c = std::min(out.min_c, c);
    if (c > out.max_c) {
      out.max_c = c;
      out.argmax_w = w;
    }
  }
  return out;
}

CStarResult run_c_star(const Trace& trace, const Instance& inst, const CStarOptions& opts) {
  CStarResult out;
  Rng rng(opts.seed);
  std::size_t i = 0;
  replay_sets(inst, [&](int t, const ConvexSet&, const ConvexSet& S) {
    if (i >= trace.records.size()) return;
    const auto& rec = trace.records[i++];
    if (rec.t != t || rec.dist <= kMembershipTol) return;
    const Vector m = 0.5 * (rec.x + rec.b);
    const Vector w = (rec.b - rec.x) / rec.dist;
    std::optional<double> c;
    if (opts.exact_when_available) c = cone_c_exact(m, S, w);
    if (!c) c = cone_c_estimate(m, S, w, opts.n_samples, rng, 2.0 * inst.D()).c;
    out.per_round.emplace_back(t, *c);
    out.c_star = out.c_star ? std::min(*out.c_star, *c) : *c;
  });
  return out;
}

double movement_bound(double c_star, int d, double D) {
  if (!(c_star > 0.0) || c_star > 1.0) throw std::invalid_argument("movement_bound: c_star must lie in (0, 1]");
  if (d < 2) throw std::invalid_argument("movement_bound: d must be >= 2");
  return 2.0 * unit_sphere_measure(d) * (d - 1) / unit_sphere_measure(d - 1) * std::pow(1.0 / c_star, d) * D;
}

// ---------------------------------------------------------------------------
// Width decrement

WidthDecrement width_decrement_on(const ConvexSet& prev_set, const ConvexSet& set, const Vector& x, const Vector& b,
                                  double c, std::span<const Vector> dirs) {
  const int d = set.dim();
  if (d < 2) throw std::invalid_argument("width_decrement_check: d must be >= 2");
  WidthDecrement out;
  const double gap = (x - b).norm();
  // x must sit on the boundary of S_{t-1} and outside S_t.
  if (gap <= kMembershipTol || distance(prev_set, x) > 1e-7) {
    out.skipped = true;
    return out;
  }
  const Vector probe = x + 1e-3 * (x - b);
  if (distance(prev_set, probe) <= 1e-12) {
    out.skipped = true;
    return out;
  }
  const auto before = widths_on(prev_set, dirs);
  const auto after = widths_on(set, dirs);
  std::vector<double> diff(before.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = after[k] - before[k];
  const auto s = summarize(diff);
  out.lhs = s.estimate;
  out.stderr_ = s.stderr_;
  out.rhs = -unit_sphere_measure(d - 1) * gap * std::pow(c, d) / (2.0 * unit_sphere_measure(d) * (d - 1));
  out.pass = out.lhs <= out.rhs + 3.0 * out.stderr_;
  return out;
}

WidthDecrement width_decrement_check(const ConvexSet& prev_set, const ConvexSet& set, const Vector& x,
                                     const Vector& b, double c, int n_dirs, Rng& rng) {
  const auto dirs = sample_directions(set.dim(), n_dirs, rng);
  return width_decrement_on(prev_set, set, x, b, c, dirs);
}

// ---------------------------------------------------------------------------
// Projection hyperplanes and monotonicity

bool projection_only(const Trace& trace) {
  return std::all_of(trace.records.begin(), trace.records.end(),
                     [](const RoundRecord& r) { return r.policy_tag == "proj_ogd"; });
}

std::vector<Hyperplane> projection_hyperplanes(const Trace& trace) {
  std::vector<Hyperplane> out;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    if (rec.policy_tag != "proj_ogd") continue;
    const Vector v = rec.y - trace.next_x(i);
    const double n = v.norm();
    if (n > 1e-9) out.push_back({rec.t, v / n});
  }
  return out;
}

Monotonicity monotonicity_check(std::span<const Hyperplane> normals) {
  Monotonicity out;
  if (normals.empty()) return out;
  double cumulative = 0.0;
  double prev_theta = 0.0;
  for (std::size_t k = 0; k < normals.size(); ++k) {
    const Vector& n = normals[k].normal;
    if (n.size() != 2) throw std::invalid_argument("monotonicity_check: normals must be 2-dimensional");
    if (k > 0) {
      const Vector& p = normals[k - 1].normal;
      cumulative += std::atan2(p[0] * n[1] - p[1] * n[0], p.dot(n));
    }
    const double theta = std::min(std::abs(cumulative), std::numbers::pi);
    if (k > 0 && theta < prev_theta - 1e-9) out.monotone = false;
    if (!out.t_orth && theta >= std::numbers::pi - 1e-6) out.t_orth = normals[k].t;
    out.theta.emplace_back(normals[k].t, theta);
    prev_theta = theta;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Curves

PolylineCurve::PolylineCurve(std::span<const Vector> points) {
  for (const auto& p : points) {
    if (!points_.empty() && (p - points_.back()).norm() <= 1e-12) continue;
    points_.push_back(p);
  }
}

bool self_expanded_check(const PolylineCurve& curve, double tol) {
  const auto& pts = curve.points();
  if (pts.size() < 2) return true;
  const auto d = pts.front().size();
  Eigen::MatrixXd P(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) P.col(static_cast<Eigen::Index>(k)) = pts[k];
  // The inner product with a fixed direction is linear along every segment,
  // so over the sampled points of the current segment it is smallest at its
  // start, and over earlier segments it is largest at an endpoint.
  for (Eigen::Index k = 0; k + 1 < P.cols(); ++k) {
    const Vector delta = (P.col(k + 1) - P.col(k)).normalized();
    const double start = delta.dot(P.col(k));
    const double earlier = (delta.transpose() * P.leftCols(k + 1)).maxCoeff();
    if (start - earlier < -tol) return false;
  }
  return true;
}

double curve_length(const PolylineCurve& curve) {
  CompensatedSum s;
  const auto& pts = curve.points();
  for (std::size_t k = 1; k < pts.size(); ++k) s.add((pts[k] - pts[k - 1]).norm());
  return s.value();
}

PolylineCurve reversed_iterate_curve(const Trace& trace) {
  std::vector<Vector> pts;
  pts.reserve(trace.records.size() + 1);
  pts.push_back(trace.final_x);
  for (auto it = trace.records.rbegin(); it != trace.records.rend(); ++it) pts.push_back(it->x);
  return PolylineCurve(pts);
}

// ---------------------------------------------------------------------------
// Power-law fit

PowerLaw fit_power_law(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 3) throw DegenerateInputError("fit_power_law: need at least 3 samples");
  const double n = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : samples) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw DegenerateInputError("fit_power_law: samples must be positive and finite");
    }
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : samples) {
    const double lx = std::log(x) - mx;
    const double ly = std::log(y) - my;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  if (sxx <= 1e-300) throw DegenerateInputError("fit_power_law: all x values are equal");
  PowerLaw out;
  out.exponent = sxy / sxx;
  const double ss_res = std::max(0.0, syy - out.exponent * sxy);
  out.r_squared = syy <= 1e-24 ? 1.0 : 1.0 - ss_res / syy;
  return out;
}

// ---------------------------------------------------------------------------
// Report

MetricsReport compute_metrics(const Trace& trace, const Instance& inst, const MetricsOptions& opts) {
  MetricsReport rep;
  const int d = inst.dim();
  for (const auto& rec : trace.records) rep.ccv_curve.emplace_back(rec.t, rec.ccv_running);
  rep.movement_cost = movement_cost(trace);
  const double ccv = trace.ccv();

  if (opts.regret) {
    rep.comparator = best_fixed_comparator(inst);
    rep.regret = regret(trace, inst, rep.comparator);
  }

  rep.bounds.push_back({"CCV <= G*M_T", ccv, inst.G() * rep.movement_cost + 1e-6,
                        ccv <= inst.G() * rep.movement_cost + 1e-6});
  const auto& fam = inst.meta().family;
  const bool proj = projection_only(trace);
  if (proj && (fam == "nested_balls" || fam == "nested_boxes") && d >= 2) {
    const double b = std::pow(static_cast<double>(d), 1.5) * inst.D();
    rep.bounds.push_back({"M_T <= d^{3/2}*D", rep.movement_cost, b, rep.movement_cost <= b + 1e-6});
  }

  if (opts.c_star && d >= 2) {
    auto cs = run_c_star(trace, inst, opts.c_star_opts);
    rep.c_star_per_round = std::move(cs.per_round);
    rep.c_star = cs.c_star;
    if (proj && rep.c_star && *rep.c_star > 0.0) {
      const double mb = movement_bound(std::min(1.0, *rep.c_star), d, inst.D());
      rep.bounds.push_back({"M_T <= movement_bound(c*)", rep.movement_cost, mb,
                            rep.movement_cost <= mb * (1.0 + 1e-6)});
      rep.bounds.push_back({"CCV <= G*movement_bound(c*)", ccv, inst.G() * mb, ccv <= inst.G() * mb * (1.0 + 1e-6)});
    }
  }

  if (opts.widths && !trace.records.empty()) {
    Rng rng(opts.seed);
    const auto dirs = sample_directions(d, opts.width_dirs, rng);
    const int T = static_cast<int>(trace.records.size());
    const int points = std::max(1, std::min(opts.width_points, T));
    std::vector<int> wanted;
    for (int k = 0; k < points; ++k) {
      const int t = points == 1 ? T : 1 + static_cast<int>(std::llround(static_cast<double>(k) * (T - 1) / (points - 1)));
      if (wanted.empty() || wanted.back() != t) wanted.push_back(t);
    }
    std::size_t next = 0;
    replay_sets(inst, [&](int t, const ConvexSet&, const ConvexSet& S) {
      if (next < wanted.size() && wanted[next] == t) {
        const auto w = mean_width_on(S, dirs);
        rep.width_curve.push_back({t, w.estimate, w.stderr_});
        ++next;
      }
    });
  }

  if (opts.monotonicity && d == 2) {
    const auto hp = projection_hyperplanes(trace);
    if (!hp.empty()) {
      auto mono = monotonicity_check(hp);
      rep.theta_curve = std::move(mono.theta);
      rep.monotone = mono.monotone;
      rep.t_orth = mono.t_orth;
    }
  }
  return rep;
}

}  // namespace coco
