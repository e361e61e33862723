#pragma once

#include "coco/geometry.hpp"

namespace coco {

// a . x + b
struct Affine {
  Vector a;
  double b;
};

// c |x - center|^2
struct Quadratic {
  double c;
  Vector center;
};

// c x_1^2, the one-dimensional hard cost.
struct ScaledSquare {
  double c;
};

struct Zero {
  int dim;
};

// dist(x, set)
struct SetMargin {
  ConvexSet set;
};

class ScalarConvexFunction {
 public:
  using Variant = std::variant<Affine, Quadratic, ScaledSquare, Zero, SetMargin>;

  static ScalarConvexFunction affine(Vector a, double b);
  // The Lipschitz bound of a quadratic depends on the region it is evaluated
  // on, so the caller certifies it.
  static ScalarConvexFunction quadratic(double c, Vector center, double lipschitz);
  static ScalarConvexFunction scaled_square(double c, double lipschitz);
  static ScalarConvexFunction zero(int dim);
  static ScalarConvexFunction set_margin(ConvexSet set);

  const Variant& variant() const { return v_; }
  double lipschitz_bound() const { return lipschitz_; }
  int dim() const;
  std::string kind() const;
  bool is_smooth() const;

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

 private:
  ScalarConvexFunction(Variant v, double lipschitz) : v_(std::move(v)), lipschitz_(lipschitz) {}
  Variant v_;
  double lipschitz_;
};

double eval(const ScalarConvexFunction& f, const Vector& x);
Vector subgradient(const ScalarConvexFunction& f, const Vector& x);

inline double positive_part(double z) { return z > 0.0 ? z : 0.0; }

// Largest coordinate gap between a central difference with step h and the
// reported subgradient.
double check_gradient(const ScalarConvexFunction& f, const Vector& x, double h);

// Modulus of strong convexity (0 for the non-strongly-convex variants).
double strong_convexity(const ScalarConvexFunction& f);

}  // namespace coco
