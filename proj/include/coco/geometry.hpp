#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace coco {

using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Distance below which a point counts as a member of a set. Absorbs the
// error of iterative projections.
inline constexpr double kMembershipTol = 1e-8;

struct ProjectionOptions {
  double tol = 1e-9;
  int max_iter = 10000;
};

struct Ball {
  Vector center;
  double radius;
};

struct Box {
  Vector lo;
  Vector hi;
};

// {x : normal . x <= offset}, normal of unit length.
struct Halfspace {
  Vector normal;
  double offset;
};

// Counter-clockwise vertices of a d = 2 polytope. edge_face[i] is the face
// carrying the edge that starts at vertices[i], or -1 on the artificial
// bounding square of an unbounded polygon.
struct PolygonCache {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<long> edge_face;
  bool bounded() const;
};

struct Polytope {
  std::vector<Halfspace> faces;
  std::shared_ptr<const PolygonCache> polygon;
};

class ConvexSet;

// Intersection of convex members, with a point known to lie in all of them.
struct NestedIntersection {
  std::vector<ConvexSet> members;
  Vector witness;
};

class ConvexSet {
 public:
  using Variant = std::variant<Ball, Box, Halfspace, Polytope, NestedIntersection>;

  static ConvexSet ball(Vector center, double radius);
  static ConvexSet box(Vector lo, Vector hi);
  // Requires a unit normal (within 1e-12).
  static ConvexSet halfspace(Vector normal, double offset);
  // Scales `normal` and `offset` so the stored normal has unit length.
  static ConvexSet halfspace_normalized(const Vector& normal, double offset);
  static ConvexSet polytope(std::vector<Halfspace> faces, std::shared_ptr<const PolygonCache> polygon = nullptr);
  // Throws EmptySetError unless `witness` lies in every member.
  static ConvexSet intersection(std::vector<ConvexSet> members, Vector witness);

  int dim() const;
  const Variant& variant() const { return *v_; }
  std::string kind() const;
  // Box, Halfspace or Polytope.
  bool is_polyhedral() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(v_.get());
  }

 private:
  // Sets are immutable, so copies share one representation.
  explicit ConvexSet(Variant v) : v_(std::make_shared<const Variant>(std::move(v))) {}
  std::shared_ptr<const Variant> v_;
};

Vector project(const ConvexSet& set, const Vector& x, const ProjectionOptions& opts = {});

// Dykstra's cyclic projections onto the intersection of `members`. Returns
// the projection of x onto the intersection (not merely a feasible point).
// Throws NonConvergenceError after max_iter full cycles.
Vector dykstra_project(std::span<const ConvexSet> members, const Vector& x, double tol = 1e-9,
                       int max_iter = 10000);

double distance(const ConvexSet& set, const Vector& x, const ProjectionOptions& opts = {});
bool contains(const ConvexSet& set, const Vector& x, double tol = kMembershipTol);

// max over z in set of u . z. Throws UnboundedError if the maximum diverges.
double support(const ConvexSet& set, const Vector& u);
// Length of the orthogonal projection of the set onto the line spanned by u.
double directional_width(const ConvexSet& set, const Vector& u);

// Surface measure of the unit sphere in R^d; 2 for d = 1 (counting measure).
double unit_sphere_measure(int d);
Vector sample_unit_sphere(int d, Rng& rng);

// Face list of a Box, Halfspace, Polytope or an intersection of those.
// Empty when any member is curved.
std::optional<std::vector<Halfspace>> polyhedral_faces(const ConvexSet& set);

// current ∩ revealed as a NestedIntersection, with redundant members dropped
// and polyhedral members folded into a single face list.
ConvexSet restrict_to(const ConvexSet& current, const ConvexSet& revealed, const Vector& witness);

}  // namespace coco
