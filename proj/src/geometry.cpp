#include "coco/geometry.hpp"

#include "coco/error.hpp"
#include "coco/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace coco {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(const Vector& v, const char* what) {
  if (v.size() < 1) throw std::invalid_argument(std::string(what) + ": empty vector");
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
}

Vector project_ball(const Ball& b, const Vector& x) {
  const Vector v = x - b.center;
  const double n = v.norm();
  if (n <= b.radius) return x;
  return b.center + v * (b.radius / n);
}

Vector project_box(const Box& b, const Vector& x) { return x.cwiseMax(b.lo).cwiseMin(b.hi); }

Vector project_halfspace(const Halfspace& h, const Vector& x) {
  const double margin = h.normal.dot(x) - h.offset;
  if (margin <= 0.0) return x;
  return x - margin * h.normal;
}

bool all_polyhedral(const std::vector<ConvexSet>& members) {
  return std::all_of(members.begin(), members.end(), [](const ConvexSet& s) { return s.is_polyhedral(); });
}

std::vector<Halfspace> faces_of(const ConvexSet& s) {
  return std::visit(overloaded{
                        [](const Box& b) { return polytope::box_faces(b); },
                        [](const Halfspace& h) { return std::vector<Halfspace>{h}; },
                        [](const Polytope& p) { return p.faces; },
                        [](const auto&) -> std::vector<Halfspace> {
                          throw std::logic_error("faces_of: set is not polyhedral");
                        },
                    },
                    s.variant());
}

std::vector<Halfspace> gather_faces(const std::vector<ConvexSet>& members) {
  std::vector<Halfspace> faces;
  for (const auto& m : members) {
    auto f = faces_of(m);
    faces.insert(faces.end(), f.begin(), f.end());
  }
  return faces;
}


// One ball plus polyhedral faces. The level v is attainable iff the part of
// the polyhedron with u . z >= v comes within the radius of the center, and
// that distance is non-decreasing in v, so bisect on v. Every projection
// stays at the scale of the set, unlike a far-point formulation.
double support_ball_faces(const Ball& ball, std::span<const Halfspace> faces, const Vector& u, const Vector& witness) {
  const double un = u.norm();
  const double cap = u.dot(ball.center) + ball.radius * un;
  if (faces.empty()) return cap;
  std::vector<Halfspace> cut(faces.begin(), faces.end());
  cut.push_back(Halfspace{-u / un, 0.0});
  auto attainable = [&](double v) {
    cut.back().offset = -v / un;
    try {
      return (polytope::project(cut, ball.center) - ball.center).norm() <= ball.radius;
    } catch (const EmptySetError&) {
      return false;
    }
  };
  if (attainable(cap)) return cap;
  double lo = u.dot(witness);
  double hi = cap;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (attainable(mid) ? lo : hi) = mid;
  }
  return lo;
}

// Projection onto one ball intersected with a polyhedron. For a multiplier
// mu on the ball constraint the minimizer over the polyhedron is the
// projection of (x + mu c) / (1 + mu); its distance to c is non-increasing
// in mu, so bisect for the mu that puts it on the sphere. Empty when the
// polyhedron only touches the ball, so the caller can fall back.
std::optional<Vector> project_ball_faces(const Ball& ball, std::span<const Halfspace> faces, const Vector& x) {
  auto at = [&](double mu) { return polytope::project(faces, (x + mu * ball.center) / (1.0 + mu)); };
  auto inside = [&](const Vector& z) { return (z - ball.center).norm() <= ball.radius; };
  Vector z = at(0.0);
  if (inside(z)) return z;
  double lo = 0.0;
  double hi = 1.0;
  while (!inside(z = at(hi))) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e15) return std::nullopt;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (Vector zm = at(mid); inside(zm)) {
      hi = mid;
      z = std::move(zm);
    } else {
      lo = mid;
    }
  }
  return z;
}

double support_mixed(const NestedIntersection& n, const Vector& u) {
  std::vector<const Ball*> balls;
  std::vector<Halfspace> faces;
  bool other = false;
  for (const auto& m : n.members) {
    if (const auto* b = m.get_if<Ball>()) {
      balls.push_back(b);
    } else if (m.is_polyhedral()) {
      auto f = faces_of(m);
      faces.insert(faces.end(), f.begin(), f.end());
    } else {
      other = true;
    }
  }
  if (!other && balls.size() == 1) return support_ball_faces(*balls.front(), faces, u, n.witness);

  // General fallback: the projection of a far point along u maximizes
  // u.z - |z - w|^2 / (2 reach); the gap to the true support is at most
  // scale^2 / reach.
  double scale = 1.0;
  for (const auto* b : balls) scale = std::max(scale, b->radius + (b->center - n.witness).norm());
  const double reach = 1e6 * scale;
  const Vector far = n.witness + reach * u / u.norm();
  const Vector z = dykstra_project(n.members, far, 1e-12 * reach, 100000);
  return u.dot(z);
}

// One ball plus polyhedral members, the shape the generators produce.
std::optional<Vector> project_single_ball(const NestedIntersection& n, const Vector& x) {
  const Ball* ball = nullptr;
  std::vector<Halfspace> faces;
  for (const auto& m : n.members) {
    if (const auto* b = m.get_if<Ball>()) {
      if (ball) return std::nullopt;
      ball = b;
    } else if (m.is_polyhedral()) {
      auto f = faces_of(m);
      faces.insert(faces.end(), f.begin(), f.end());
    } else {
      return std::nullopt;
    }
  }
  if (!ball || faces.empty()) return std::nullopt;
  return project_ball_faces(*ball, faces, x);
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

ConvexSet ConvexSet::ball(Vector center, double radius) {
  require_finite(center, "Ball center");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("Ball radius must be positive");
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::box(Vector lo, Vector hi) {
  require_finite(lo, "Box lo");
  require_finite(hi, "Box hi");
  if (lo.size() != hi.size()) throw std::invalid_argument("Box: dimension mismatch");
  if ((lo.array() > hi.array()).any()) throw std::invalid_argument("Box: lo must not exceed hi");
  return ConvexSet(Box{std::move(lo), std::move(hi)});
}

ConvexSet ConvexSet::halfspace(Vector normal, double offset) {
  require_finite(normal, "Halfspace normal");
  if (std::abs(normal.norm() - 1.0) > 1e-12) throw std::invalid_argument("Halfspace normal must have unit norm");
  if (!std::isfinite(offset)) throw std::invalid_argument("Halfspace offset must be finite");
  return ConvexSet(Halfspace{std::move(normal), offset});
}

ConvexSet ConvexSet::halfspace_normalized(const Vector& normal, double offset) {
  const double n = normal.norm();
  if (!(n > 0.0)) throw std::invalid_argument("Halfspace normal must be non-zero");
  return halfspace(normal / n, offset / n);
}

bool PolygonCache::bounded() const {
  return std::all_of(edge_face.begin(), edge_face.end(), [](long l) { return l >= 0; });
}

ConvexSet ConvexSet::polytope(std::vector<Halfspace> faces, std::shared_ptr<const PolygonCache> polygon) {
  if (faces.empty()) throw std::invalid_argument("Polytope needs at least one face");
  const auto d = faces.front().normal.size();
  for (const auto& f : faces) {
    require_finite(f.normal, "Polytope face");
    if (f.normal.size() != d) throw std::invalid_argument("Polytope: dimension mismatch");
    if (std::abs(f.normal.norm() - 1.0) > 1e-12) throw std::invalid_argument("Polytope face normal must be unit");
  }
  if (polygon && d != 2) throw std::invalid_argument("Polytope: a polygon cache needs d = 2");
  return ConvexSet(Polytope{std::move(faces), std::move(polygon)});
}

ConvexSet ConvexSet::intersection(std::vector<ConvexSet> members, Vector witness) {
  if (members.empty()) throw std::invalid_argument("NestedIntersection needs at least one member");
  require_finite(witness, "NestedIntersection witness");
  for (const auto& m : members) {
    if (m.dim() != witness.size()) throw std::invalid_argument("NestedIntersection: dimension mismatch");
    if (!contains(m, witness, kMembershipTol)) {
      throw EmptySetError("NestedIntersection: witness lies outside member " + m.kind());
    }
  }
  return ConvexSet(NestedIntersection{std::move(members), std::move(witness)});
}

int ConvexSet::dim() const {
  return std::visit(overloaded{
                        [](const Ball& b) { return static_cast<int>(b.center.size()); },
                        [](const Box& b) { return static_cast<int>(b.lo.size()); },
                        [](const Halfspace& h) { return static_cast<int>(h.normal.size()); },
                        [](const Polytope& p) { return static_cast<int>(p.faces.front().normal.size()); },
                        [](const NestedIntersection& n) { return static_cast<int>(n.witness.size()); },
                    },
                    *v_);
}

std::string ConvexSet::kind() const {
  static constexpr const char* names[] = {"ball", "box", "halfspace", "polytope", "intersection"};
  return names[v_->index()];
}

bool ConvexSet::is_polyhedral() const {
  return std::holds_alternative<Box>(*v_) || std::holds_alternative<Halfspace>(*v_) ||
         std::holds_alternative<Polytope>(*v_);
}

// ---------------------------------------------------------------------------
// Projection

Vector dykstra_project(std::span<const ConvexSet> members, const Vector& x, double tol, int max_iter) {
  if (members.empty()) throw std::invalid_argument("dykstra_project: no members");
  if (!(tol > 0.0)) throw std::invalid_argument("dykstra_project: tol must be positive");
  if (members.size() == 1) return project(members.front(), x);

  const auto k = members.size();
  std::vector<Vector> corrections(k, Vector::Zero(x.size()));
  Vector cur = x;
  double residual = 0.0;
  for (int cycle = 0; cycle < max_iter; ++cycle) {
    double change = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const Vector shifted = cur + corrections[i];
      const Vector next = project(members[i], shifted);
      const Vector corr = shifted - next;
      change += (corr - corrections[i]).squaredNorm();
      corrections[i] = corr;
      cur = next;
    }
    residual = std::sqrt(change);
    if (residual <= tol) {
      bool feasible = true;
      for (const auto& m : members) {
        if ((project(m, cur) - cur).norm() > tol) {
          feasible = false;
          break;
        }
      }
      if (feasible) return cur;
    }
  }
  std::ostringstream msg;
  msg << "dykstra_project: no convergence after " << max_iter << " cycles (residual " << residual << ")";
  throw NonConvergenceError(msg.str(), residual);
}

Vector project(const ConvexSet& set, const Vector& x, const ProjectionOptions& opts) {
  if (x.size() != set.dim()) throw std::invalid_argument("project: dimension mismatch");
  return std::visit(overloaded{
                        [&](const Ball& b) { return project_ball(b, x); },
                        [&](const Box& b) { return project_box(b, x); },
                        [&](const Halfspace& h) { return project_halfspace(h, x); },
                        [&](const Polytope& p) { return polytope::project(p.faces, x); },
                        [&](const NestedIntersection& n) -> Vector {
                          if (n.members.size() == 1) return project(n.members.front(), x, opts);
                          if (all_polyhedral(n.members)) return polytope::project(gather_faces(n.members), x);
                          if (const auto z = project_single_ball(n, x)) return *z;
                          return dykstra_project(n.members, x, opts.tol, opts.max_iter);
                        },
                    },
                    set.variant());
}

double distance(const ConvexSet& set, const Vector& x, const ProjectionOptions& opts) {
  return (x - project(set, x, opts)).norm();
}

bool contains(const ConvexSet& set, const Vector& x, double tol) {
  return std::visit(overloaded{
                        [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
                        [&](const Box& b) { return (x - project_box(b, x)).norm() <= tol; },
                        [&](const Halfspace& h) { return h.normal.dot(x) - h.offset <= tol; },
                        [&](const auto&) { return distance(set, x) <= tol; },
                    },
                    set.variant());
}

// ---------------------------------------------------------------------------
// Support function

double support(const ConvexSet& set, const Vector& u) {
  if (u.size() != set.dim()) throw std::invalid_argument("support: dimension mismatch");
  return std::visit(
      overloaded{
          [&](const Ball& b) { return u.dot(b.center) + b.radius * u.norm(); },
          [&](const Box& b) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < u.size(); ++i) s += std::max(u[i] * b.lo[i], u[i] * b.hi[i]);
            return s;
          },
          [&](const Halfspace& h) -> double {
            const double along = u.dot(h.normal);
            if (along > 0.0 && (u - along * h.normal).norm() <= 1e-12 * u.norm()) return along * h.offset;
            throw UnboundedError("support: halfspace is unbounded in the requested direction");
          },
          [&](const Polytope& p) {
            if (p.polygon && p.polygon->bounded()) {
              double best = -std::numeric_limits<double>::infinity();
              for (const auto& v : p.polygon->vertices) best = std::max(best, u[0] * v[0] + u[1] * v[1]);
              return best;
            }
            return polytope::support(p.faces, u);
          },
          [&](const NestedIntersection& n) -> double {
            if (n.members.size() == 1) return support(n.members.front(), u);
            if (all_polyhedral(n.members)) return polytope::support(gather_faces(n.members), u);
            return support_mixed(n, u);
          },
      },
      set.variant());
}

std::optional<std::vector<Halfspace>> polyhedral_faces(const ConvexSet& set) {
  if (set.is_polyhedral()) return faces_of(set);
  if (const auto* n = set.get_if<NestedIntersection>()) {
    if (all_polyhedral(n->members)) return gather_faces(n->members);
  }
  return std::nullopt;
}

double directional_width(const ConvexSet& set, const Vector& u) { return support(set, u) + support(set, -u); }

// ---------------------------------------------------------------------------
// Sphere helpers

double unit_sphere_measure(int d) {
  if (d < 1) throw std::invalid_argument("unit_sphere_measure: d must be >= 1");
  if (d == 1) return 2.0;
  const double half = 0.5 * d;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

Vector sample_unit_sphere(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("sample_unit_sphere: d must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(d);
  double n = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = gauss(rng);
    n = v.norm();
  } while (!(n > 0.0));
  return v / n;
}

// ---------------------------------------------------------------------------
// Nested intersections

namespace {

bool ball_subset(const Ball& inner, const Ball& outer) {
  return (inner.center - outer.center).norm() + inner.radius <= outer.radius;
}

// True when `inner` is certainly contained in `outer`; false means "unknown".
bool known_subset(const ConvexSet& inner, const ConvexSet& outer) {
  if (const auto* bo = outer.get_if<Ball>()) {
    if (const auto* bi = inner.get_if<Ball>()) return ball_subset(*bi, *bo);
    if (const auto* xi = inner.get_if<Box>()) {
      Vector far(xi->lo.size());
      for (Eigen::Index i = 0; i < far.size(); ++i) {
        far[i] = std::max(std::abs(xi->lo[i] - bo->center[i]), std::abs(xi->hi[i] - bo->center[i]));
      }
      return far.norm() <= bo->radius;
    }
    return false;
  }
  if (outer.is_polyhedral()) {
    if (!(inner.get_if<Ball>() || inner.get_if<Box>())) return false;
    for (const auto& f : faces_of(outer)) {
      if (support(inner, f.normal) > f.offset) return false;
    }
    return true;
  }
  return false;
}

std::vector<ConvexSet> flatten(const ConvexSet& s) {
  if (const auto* n = s.get_if<NestedIntersection>()) return n->members;
  return {s};
}

}  // namespace

ConvexSet restrict_to(const ConvexSet& current, const ConvexSet& revealed, const Vector& witness) {
  std::vector<ConvexSet> members = flatten(current);
  for (const auto& incoming : flatten(revealed)) {
    bool redundant = false;
    for (const auto& m : members) {
      if (known_subset(m, incoming)) {
        redundant = true;
        break;
      }
    }
    if (redundant) continue;
    std::erase_if(members, [&](const ConvexSet& m) { return known_subset(incoming, m); });

    // Box ∩ Box stays a box.
    if (const auto* nb = incoming.get_if<Box>()) {
      auto it = std::find_if(members.begin(), members.end(), [](const ConvexSet& m) { return m.get_if<Box>(); });
      if (it != members.end()) {
        const auto* ob = it->get_if<Box>();
        *it = ConvexSet::box(ob->lo.cwiseMax(nb->lo), ob->hi.cwiseMin(nb->hi));
        continue;
      }
    }
    members.push_back(incoming);
  }

  // Fold every polyhedral member into one face list unless it is a lone box.
  const auto n_poly = std::count_if(members.begin(), members.end(), [](const ConvexSet& m) { return m.is_polyhedral(); });
  const bool lone_box = n_poly == 1 && std::any_of(members.begin(), members.end(), [](const ConvexSet& m) { return m.get_if<Box>(); });
  const bool lone_polygon = n_poly == 1 && std::any_of(members.begin(), members.end(), [](const ConvexSet& m) {
    const auto* p = m.get_if<Polytope>();
    return p && (p->polygon || p->faces.front().normal.size() != 2);
  });
  if (n_poly >= 1 && !lone_box && !lone_polygon) {
    // At d = 2 an existing polygon is clipped by the new faces only.
    const Polytope* base = nullptr;
    std::vector<Halfspace> faces;
    std::vector<ConvexSet> rest;
    for (auto& m : members) {
      if (const auto* p = m.get_if<Polytope>(); p && p->polygon && !base) {
        base = p;
        continue;
      }
      if (m.is_polyhedral()) {
        auto f = faces_of(m);
        faces.insert(faces.end(), f.begin(), f.end());
      }
    }
    ConvexSet folded = [&] {
      if (witness.size() == 2) {
        auto pruned = base ? polytope::add_faces(base->faces, *base->polygon, faces) : polytope::build_polygon(faces);
        return ConvexSet::polytope(std::move(pruned.faces),
                                   std::make_shared<const PolygonCache>(std::move(pruned.polygon)));
      }
      // Identical normals: keep the tighter offset.
      std::vector<Halfspace> unique;
      for (auto& f : faces) {
        auto it = std::find_if(unique.begin(), unique.end(),
                               [&](const Halfspace& g) { return (g.normal - f.normal).norm() <= 1e-15; });
        if (it == unique.end()) {
          unique.push_back(std::move(f));
        } else {
          it->offset = std::min(it->offset, f.offset);
        }
      }
      return ConvexSet::polytope(std::move(unique));
    }();
    for (auto& m : members) {
      if (!m.is_polyhedral()) rest.push_back(std::move(m));
    }
    rest.push_back(std::move(folded));
    members = std::move(rest);
  }
  return ConvexSet::intersection(std::move(members), witness);
}

}  // namespace coco
