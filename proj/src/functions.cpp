#include "coco/functions.hpp"

#include <cmath>
#include <stdexcept>

namespace coco {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_lipschitz(double l) {
  if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("Lipschitz bound must be finite and >= 0");
}

}  // namespace

ScalarConvexFunction ScalarConvexFunction::affine(Vector a, double b) {
  if (a.size() < 1 || !a.allFinite() || !std::isfinite(b)) throw std::invalid_argument("Affine: bad coefficients");
  const double l = a.norm();
  return {Affine{std::move(a), b}, l};
}

ScalarConvexFunction ScalarConvexFunction::quadratic(double c, Vector center, double lipschitz) {
  if (!(c > 0.0)) throw std::invalid_argument("Quadratic: scale must be positive");
  if (center.size() < 1 || !center.allFinite()) throw std::invalid_argument("Quadratic: bad center");
  require_lipschitz(lipschitz);
  return {Quadratic{c, std::move(center)}, lipschitz};
}

ScalarConvexFunction ScalarConvexFunction::scaled_square(double c, double lipschitz) {
  if (!(c > 0.0)) throw std::invalid_argument("ScaledSquare: scale must be positive");
  require_lipschitz(lipschitz);
  return {ScaledSquare{c}, lipschitz};
}

ScalarConvexFunction ScalarConvexFunction::zero(int dim) {
  if (dim < 1) throw std::invalid_argument("Zero: dim must be >= 1");
  return {Zero{dim}, 0.0};
}

ScalarConvexFunction ScalarConvexFunction::set_margin(ConvexSet set) { return {SetMargin{std::move(set)}, 1.0}; }

int ScalarConvexFunction::dim() const {
  return std::visit(overloaded{
                        [](const Affine& f) { return static_cast<int>(f.a.size()); },
                        [](const Quadratic& f) { return static_cast<int>(f.center.size()); },
                        [](const ScaledSquare&) { return 1; },
                        [](const Zero& f) { return f.dim; },
                        [](const SetMargin& f) { return f.set.dim(); },
                    },
                    v_);
}

std::string ScalarConvexFunction::kind() const {
  static constexpr const char* names[] = {"affine", "quadratic", "scaled_square", "zero", "set_margin"};
  return names[v_.index()];
}

bool ScalarConvexFunction::is_smooth() const { return !std::holds_alternative<SetMargin>(v_); }

double eval(const ScalarConvexFunction& f, const Vector& x) {
  return std::visit(overloaded{
                        [&](const Affine& g) { return g.a.dot(x) + g.b; },
                        [&](const Quadratic& g) { return g.c * (x - g.center).squaredNorm(); },
                        [&](const ScaledSquare& g) { return g.c * x[0] * x[0]; },
                        [&](const Zero&) { return 0.0; },
                        [&](const SetMargin& g) { return distance(g.set, x); },
                    },
                    f.variant());
}

Vector subgradient(const ScalarConvexFunction& f, const Vector& x) {
  return std::visit(overloaded{
                        [&](const Affine& g) -> Vector { return g.a; },
                        [&](const Quadratic& g) -> Vector { return 2.0 * g.c * (x - g.center); },
                        [&](const ScaledSquare& g) -> Vector {
                          Vector out = Vector::Zero(x.size());
                          out[0] = 2.0 * g.c * x[0];
                          return out;
                        },
                        [&](const Zero&) -> Vector { return Vector::Zero(x.size()); },
                        [&](const SetMargin& g) -> Vector {
                          const Vector gap = x - project(g.set, x);
                          const double dist = gap.norm();
                          if (dist > 1e-10) return gap / dist;
                          return Vector::Zero(x.size());
                        },
                    },
                    f.variant());
}

double check_gradient(const ScalarConvexFunction& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradient: h must be positive");
  const Vector g = subgradient(f, x);
  double worst = 0.0;
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fd = (eval(f, xp) - eval(f, xm)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]));
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return worst;
}

double strong_convexity(const ScalarConvexFunction& f) {
  return std::visit(overloaded{
                        [](const Quadratic& g) { return 2.0 * g.c; },
                        [](const ScaledSquare& g) { return 2.0 * g.c; },
                        [](const auto&) { return 0.0; },
                    },
                    f.variant());
}

}  // namespace coco
