#include "coco/polytope.hpp"

#include "coco/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

namespace coco::polytope {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double face_scale(std::span<const Halfspace> faces) {
  double s = 1.0;
  for (const auto& f : faces) s = std::max(s, std::abs(f.offset));
  return s;
}

double violation(const Halfspace& f, const Vector& z) { return f.normal.dot(z) - f.offset; }

}  // namespace

bool satisfies(std::span<const Halfspace> faces, const Vector& x, double tol) {
  for (const auto& f : faces) {
    if (violation(f, x) > tol) return false;
  }
  return true;
}

std::vector<Halfspace> box_faces(const Box& box) {
  const auto d = box.lo.size();
  std::vector<Halfspace> faces;
  faces.reserve(2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector e = Vector::Zero(d);
    e[i] = 1.0;
    faces.push_back({e, box.hi[i]});
    faces.push_back({-e, -box.lo[i]});
  }
  return faces;
}

Vector project(std::span<const Halfspace> faces, const Vector& x) {
  const double base_tol = 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>());
  auto tol_for = [&](const Halfspace& f) { return base_tol + 1e-13 * std::abs(f.offset); };

  bool feasible = true;
  for (const auto& f : faces) {
    if (violation(f, x) > tol_for(f)) {
      feasible = false;
      break;
    }
  }
  if (feasible) return x;

  const Eigen::Index d = x.size();
  Vector z = x;
  std::vector<std::size_t> active;
  std::vector<double> mult;

  const std::size_t max_iter = 50 * (faces.size() + static_cast<std::size_t>(d)) + 100;
  std::size_t iter = 0;

  while (true) {
    // Step 1: most violated constraint.
    std::size_t p = faces.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const double v = violation(faces[i], z);
      if (v > tol_for(faces[i]) && v > worst) {
        worst = v;
        p = i;
      }
    }
    if (p == faces.size()) return z;

    double up = 0.0;
    // Step 2: raise the multiplier of p until p is tight or an active
    // multiplier hits zero.
    while (true) {
      if (++iter > max_iter) {
        throw NonConvergenceError("polytope projection: active-set iteration limit", worst);
      }
      const Vector& ap = faces[p].normal;
      const auto k = static_cast<Eigen::Index>(active.size());
      Vector r(k);
      Vector s = -ap;
      if (k > 0) {
        Eigen::MatrixXd n(d, k);
        for (Eigen::Index j = 0; j < k; ++j) n.col(j) = faces[active[j]].normal;
        r = (n.transpose() * n).ldlt().solve(n.transpose() * ap);
        s = -(ap - n * r);
      }
      const double s2 = s.squaredNorm();
      const double full = s2 > 1e-24 ? violation(faces[p], z) / s2 : kInf;
      double partial = kInf;
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (r[j] > 1e-14) {
          const double step = mult[j] / r[j];
          if (step < partial) {
            partial = step;
            drop = j;
          }
        }
      }
      const double step = std::min(full, partial);
      if (step == kInf) throw EmptySetError("polytope projection: faces are inconsistent");

      for (Eigen::Index j = 0; j < k; ++j) mult[j] -= step * r[j];
      up += step;
      if (full != kInf) z += step * s;

      if (full <= partial) {
        active.push_back(p);
        mult.push_back(up);
        break;
      }
      active.erase(active.begin() + drop);
      mult.erase(mult.begin() + drop);
    }
  }
}

double support_vertex_enumeration(std::span<const Halfspace> faces_in, const Vector& u) {
  const auto d = static_cast<int>(u.size());
  if (d < 1 || d > 3) throw std::invalid_argument("vertex enumeration needs 1 <= d <= 3");
  const double scale = face_scale(faces_in);
  const double far = 1e9 * scale;

  std::vector<Halfspace> faces(faces_in.begin(), faces_in.end());
  const auto n_real = faces.size();
  Box bound{Vector::Constant(d, -far), Vector::Constant(d, far)};
  for (auto& f : box_faces(bound)) faces.push_back(std::move(f));

  const double feas_tol = 1e-9 * scale;
  double best = -kInf;
  bool best_on_bound = false;
  const auto m = faces.size();

  auto consider = [&](const Vector& z, bool uses_bound) {
    if (!satisfies(faces, z, feas_tol)) return;
    const double val = u.dot(z);
    if (best == -kInf || val > best + 1e-12 * (1.0 + std::abs(best))) {
      best = val;
      best_on_bound = uses_bound;
    } else if (val >= best - 1e-12 * (1.0 + std::abs(best)) && !uses_bound) {
      best_on_bound = false;
    }
  };

  std::vector<std::size_t> idx(static_cast<std::size_t>(d));
  // Enumerate index combinations i0 < i1 < ... of size d.
  std::function<void(std::size_t, int)> rec = [&](std::size_t start, int depth) {
    if (depth == d) {
      Eigen::MatrixXd a(d, d);
      Vector b(d);
      bool uses_bound = false;
      for (int r = 0; r < d; ++r) {
        a.row(r) = faces[idx[r]].normal.transpose();
        b[r] = faces[idx[r]].offset;
        uses_bound = uses_bound || idx[r] >= n_real;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < d) return;
      consider(lu.solve(b), uses_bound);
      return;
    }
    for (std::size_t i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);

  if (best == -kInf) throw EmptySetError("support: polytope has no vertex");
  if (best_on_bound) throw UnboundedError("support: polytope unbounded in the requested direction");
  return best;
}

double support_simplex(std::span<const Halfspace> faces, const Vector& u) {
  // A feasible anchor lets the tableau start from the slack basis:
  // z = x0 + w_pos - w_neg, A w <= b - A x0 with a non-negative right side.
  // Compact (Tucker) tableau: rows are basic variables, columns nonbasic.
  const Vector x0 = project(faces, Vector::Zero(u.size()));
  const int d = static_cast<int>(u.size());
  const int m = static_cast<int>(faces.size());
  const int n = 2 * d;
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(m + 1, n + 1);
  // Variable labels: 0..n-1 structural, n..n+m-1 slacks.
  std::vector<int> row_var(static_cast<std::size_t>(m));
  std::vector<int> col_var(static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    const auto& f = faces[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
      tab(i, j) = f.normal[j];
      tab(i, d + j) = -f.normal[j];
    }
    tab(i, n) = std::max(0.0, f.offset - f.normal.dot(x0));
    row_var[static_cast<std::size_t>(i)] = n + i;
  }
  for (int j = 0; j < d; ++j) {
    tab(m, j) = -u[j];
    tab(m, d + j) = u[j];
  }
  for (int j = 0; j < n; ++j) col_var[static_cast<std::size_t>(j)] = j;

  const int max_pivots = 50 * (m + n) + 100;
  for (int it = 0; it < max_pivots; ++it) {
    // Bland: entering column with the smallest label among improving ones.
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (tab(m, j) < -1e-12 && (enter < 0 || col_var[static_cast<std::size_t>(j)] < col_var[static_cast<std::size_t>(enter)])) {
        enter = j;
      }
    }
    if (enter < 0) return u.dot(x0) + tab(m, n);

    int leave = -1;
    double best_ratio = kInf;
    for (int i = 0; i < m; ++i) {
      if (tab(i, enter) > 1e-12) {
        const double ratio = tab(i, n) / tab(i, enter);
        if (ratio < best_ratio - 1e-15 ||
            (ratio <= best_ratio + 1e-15 && leave >= 0 &&
             row_var[static_cast<std::size_t>(i)] < row_var[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw UnboundedError("support: polytope unbounded in the requested direction");

    const double piv = tab(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i == leave || tab(i, enter) == 0.0) continue;
      const double factor = tab(i, enter) / piv;
      for (int j = 0; j <= n; ++j) {
        if (j != enter) tab(i, j) -= factor * tab(leave, j);
      }
      tab(i, enter) = -factor;
    }
    for (int j = 0; j <= n; ++j) {
      if (j != enter) tab(leave, j) /= piv;
    }
    tab(leave, enter) = 1.0 / piv;
    std::swap(row_var[static_cast<std::size_t>(leave)], col_var[static_cast<std::size_t>(enter)]);
  }
  throw NonConvergenceError("support: simplex pivot limit", 0.0);
}

double support(std::span<const Halfspace> faces, const Vector& u) {
  // The simplex beats enumeration at every size measured (d <= 3, 4 to 100
  // faces); enumeration stays as a cross-check.
  return support_simplex(faces, u);
}

namespace {

using Point = Eigen::Vector2d;

// Face lookup over an existing list followed by appended faces.
struct FaceList {
  std::span<const Halfspace> base;
  std::span<const Halfspace> extra;
  const Halfspace& operator[](std::size_t k) const { return k < base.size() ? base[k] : extra[k - base.size()]; }
  std::size_t size() const { return base.size() + extra.size(); }
};

double excess(const Halfspace& f, const Point& z) { return f.normal[0] * z[0] + f.normal[1] * z[1] - f.offset; }

// Intersection of the boundary lines of two faces; falls back to the
// interpolated point when they are nearly parallel.
Point meet(const Halfspace& f, const Halfspace& g, const Point& fallback) {
  const double det = f.normal[0] * g.normal[1] - f.normal[1] * g.normal[0];
  if (std::abs(det) < 1e-9) return fallback;
  return Point((f.offset * g.normal[1] - g.offset * f.normal[1]) / det,
               (f.normal[0] * g.offset - g.normal[0] * f.offset) / det);
}

// Clips a labeled polygon by one face whose index is `label`. `next` is
// scratch space reused across calls.
void clip_once(PolygonCache& poly, PolygonCache& next, const FaceList& faces, long label, double eps) {
  const auto& f = faces[static_cast<std::size_t>(label)];
  const std::size_t n = poly.vertices.size();
  next.vertices.clear();
  next.edge_face.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly.vertices[i];
    const Point& b = poly.vertices[(i + 1) % n];
    const long la = poly.edge_face[i];
    const double fa = excess(f, a);
    const double fb = excess(f, b);
    auto cut = [&] {
      const double s = fa / (fa - fb);
      const Point lerp = a + s * (b - a);
      return la >= 0 ? meet(faces[static_cast<std::size_t>(la)], f, lerp) : lerp;
    };
    if (fa <= 0.0) {
      next.vertices.push_back(a);
      next.edge_face.push_back(la);
      if (fb > 0.0) {
        next.vertices.push_back(cut());
        next.edge_face.push_back(label);
      }
    } else if (fb <= 0.0) {
      next.vertices.push_back(cut());
      next.edge_face.push_back(la);
    }
  }
  // Drop zero-length edges; the surviving vertex keeps the label of the
  // edge that follows it.
  poly.vertices.clear();
  poly.edge_face.clear();
  const std::size_t m = next.vertices.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (m > 1 && (next.vertices[i] - next.vertices[(i + 1) % m]).norm() <= eps) continue;
    poly.vertices.push_back(next.vertices[i]);
    poly.edge_face.push_back(next.edge_face[i]);
  }
}

PolygonCache bounding_square(double far) {
  return PolygonCache{{Point(-far, -far), Point(far, -far), Point(far, far), Point(-far, far)}, {-1, -1, -1, -1}};
}

// Keeps the faces that carry an edge and renumbers the labels.
PrunedPolygon compact(const FaceList& faces, PolygonCache poly) {
  if (poly.vertices.empty()) throw EmptySetError("polygon: faces have an empty intersection");
  std::vector<long> remap(faces.size(), -1);
  PrunedPolygon out;
  const std::size_t n = poly.vertices.size();
  out.faces.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long l = poly.edge_face[i];
    if (l < 0 || remap[static_cast<std::size_t>(l)] >= 0) continue;
    remap[static_cast<std::size_t>(l)] = static_cast<long>(out.faces.size());
    out.faces.push_back(faces[static_cast<std::size_t>(l)]);
  }
  for (auto& l : poly.edge_face) {
    if (l >= 0) l = remap[static_cast<std::size_t>(l)];
  }
  out.polygon = std::move(poly);
  return out;
}

}  // namespace

PrunedPolygon build_polygon(std::span<const Halfspace> faces) {
  const double scale = face_scale(faces);
  const double eps = 1e-12 * scale;
  const FaceList list{faces, {}};
  PolygonCache poly = bounding_square(1e6 * scale);
  PolygonCache scratch;
  for (std::size_t k = 0; k < faces.size() && !poly.vertices.empty(); ++k) {
    clip_once(poly, scratch, list, static_cast<long>(k), eps);
  }
  return compact(list, std::move(poly));
}

PrunedPolygon add_faces(std::span<const Halfspace> faces, const PolygonCache& polygon,
                        std::span<const Halfspace> extra) {
  const FaceList list{faces, extra};
  const double eps = 1e-12 * std::max(face_scale(faces), face_scale(extra));
  std::optional<PolygonCache> poly;
  PolygonCache scratch;
  for (std::size_t k = faces.size(); k < list.size(); ++k) {
    const PolygonCache& cur = poly ? *poly : polygon;
    if (cur.vertices.empty()) break;
    // Faces that cut nothing leave the polygon alone.
    const bool cuts = std::any_of(cur.vertices.begin(), cur.vertices.end(),
                                  [&](const Point& v) { return excess(list[k], v) > 0.0; });
    if (!cuts) continue;
    if (!poly) poly = polygon;
    clip_once(*poly, scratch, list, static_cast<long>(k), eps);
  }
  if (!poly) return PrunedPolygon{std::vector<Halfspace>(faces.begin(), faces.end()), polygon};
  return compact(list, std::move(*poly));
}

std::vector<Vector> polygon_vertices(std::span<const Halfspace> faces) {
  auto p = build_polygon(faces);
  if (!p.polygon.bounded()) throw UnboundedError("polygon_vertices: polygon is unbounded");
  return std::vector<Vector>(p.polygon.vertices.begin(), p.polygon.vertices.end());
}

std::vector<Halfspace> prune_redundant_2d(std::span<const Halfspace> faces) { return build_polygon(faces).faces; }

}  // namespace coco::polytope
