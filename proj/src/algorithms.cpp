#include "coco/algorithms.hpp"

#include "coco/error.hpp"
#include "coco/numeric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace coco {

Instance::Instance(ConvexSet admissible, double D, double G, std::vector<Round> rounds, Vector witness,
                   InstanceMeta meta)
    : admissible_(std::move(admissible)),
      D_(D),
      G_(G),
      rounds_(std::move(rounds)),
      witness_(std::move(witness)),
      meta_(std::move(meta)) {
  if (!(D_ > 0.0) || !std::isfinite(D_)) throw std::invalid_argument("Instance: D must be positive");
  if (!(G_ > 0.0) || !std::isfinite(G_)) throw std::invalid_argument("Instance: G must be positive");
  if (rounds_.empty()) throw std::invalid_argument("Instance: T must be >= 1");
  const int d = admissible_.dim();
  if (witness_.size() != d) throw std::invalid_argument("Instance: witness dimension mismatch");
  if (!contains(admissible_, witness_, kMembershipTol)) throw EmptySetError("Instance: witness outside X");
  for (std::size_t i = 0; i < rounds_.size(); ++i) {
    const auto& r = rounds_[i];
    if (r.set.dim() != d || r.f.dim() != d || r.g.dim() != d) {
      throw std::invalid_argument("Instance: dimension mismatch in round " + std::to_string(i + 1));
    }
    if (!contains(r.set, witness_, kMembershipTol)) {
      throw EmptySetError("Instance: witness violates the constraint of round " + std::to_string(i + 1));
    }
  }
  // Widths are lower bounds on the diameter, so this only catches D that
  // is certainly too small.
  Rng rng(0x5eedULL);
  for (int k = 0; k < 64 + 2 * d; ++k) {
    Vector u;
    if (k < d) {
      u = Vector::Unit(d, k);
    } else if (k < 2 * d && d > 1) {
      u = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
      if (k > d) u[k - d - 1] = -u[k - d - 1];
    } else {
      u = sample_unit_sphere(d, rng);
    }
    const double w = directional_width(admissible_, u);
    if (w > D_ * (1.0 + 1e-9) + 1e-12) {
      std::ostringstream msg;
      msg << "Instance: width " << w << " of X exceeds D = " << D_;
      throw std::invalid_argument(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Projection-based OGD

std::map<std::string, double> ProjectionOgd::params() const { return {{"D", D_}, {"G", G_}}; }

Vector ProjectionOgd::initial_point(const Instance& inst) const {
  if (x1_) {
    if (x1_->size() != inst.dim()) throw std::invalid_argument("proj_ogd: x1 dimension mismatch");
    return project(inst.admissible(), *x1_);
  }
  return project(inst.admissible(), Vector::Zero(inst.dim()));
}

void ProjectionOgd::reset(const Instance& inst) {
  D_ = inst.D();
  G_ = inst.G();
}

StepOutput ProjectionOgd::step(const StepInput& in) {
  StepOutput out;
  out.eta = step_size(D_, G_, in.t);
  out.grad = subgradient(in.round.f, in.x);
  out.y = project(in.prev_set, in.x - out.eta * out.grad);
  out.x_next = project(in.set, out.y);
  out.tag = "proj_ogd";
  return out;
}

// ---------------------------------------------------------------------------
// Potential-based baseline

std::map<std::string, double> Sinha::params() const {
  return {{"mode", mode_ == SinhaMode::convex ? 0.0 : 1.0}, {"beta", beta_}, {"V", V_}, {"lambda", lambda_},
          {"alpha", alpha_}};
}

Vector Sinha::initial_point(const Instance& inst) const {
  return project(inst.admissible(), Vector::Zero(inst.dim()));
}

double Sinha::phi_prime(double z) const {
  if (mode_ == SinhaMode::convex) return lambda_ * std::exp(lambda_ * z);
  return 2.0 * z;
}

void Sinha::reset(const Instance& inst) {
  X_ = &inst.admissible();
  D_ = inst.D();
  ccv_ = 0.0;
  grad_sq_sum_ = 0.0;
  curvature_sum_ = 0.0;
  const double G = inst.G();
  const int T = inst.T();
  if (mode_ == SinhaMode::convex) {
    beta_ = beta_for(G, D_);
    V_ = 1.0;
    lambda_ = lambda_for(T);
  } else {
    if (!(alpha_ > 0.0)) alpha_ = strong_convexity(inst.round(1).f);
    if (!(alpha_ > 0.0)) throw ConfigError("sinha strongly_convex mode needs a strongly convex cost");
    beta_ = 1.0;
    V_ = 8.0 * G * G * std::log(T * std::numbers::e) / alpha_;
    lambda_ = 0.0;
  }
}

StepOutput Sinha::step(const StepInput& in) {
  const double gx = eval(in.round.g, in.x);
  ccv_ += beta_ * positive_part(gx);

  Vector grad = V_ * beta_ * subgradient(in.round.f, in.x);
  if (gx > 0.0) grad += phi_prime(ccv_) * beta_ * subgradient(in.round.g, in.x);

  StepOutput out;
  out.grad = grad;
  out.tag = "sinha";
  double eta = 0.0;
  if (mode_ == SinhaMode::convex) {
    grad_sq_sum_ += grad.squaredNorm();
    if (grad_sq_sum_ > 0.0) eta = std::sqrt(2.0) * D_ / (2.0 * std::sqrt(grad_sq_sum_));
  } else {
    curvature_sum_ += V_ * beta_ * strong_convexity(in.round.f);
    if (curvature_sum_ > 0.0) eta = 1.0 / curvature_sum_;
  }
  out.eta = eta;
  if (eta == 0.0) {
    out.y = in.x;
    out.x_next = in.x;
    return out;
  }
  out.y = in.x - eta * grad;
  out.x_next = project(*X_, out.y);
  return out;
}

// ---------------------------------------------------------------------------
// Switch

double Switch::threshold_for(int T) {
  const double t = static_cast<double>(T);
  return std::sqrt(t) * std::log(t);
}

std::map<std::string, double> Switch::params() const {
  auto p = ogd_.params();
  p["threshold"] = threshold_;
  if (switch_time_) p["t_min"] = *switch_time_;
  return p;
}

void Switch::reset(const Instance& inst) {
  inst_ = &inst;
  ogd_.reset(inst);
  threshold_ = threshold_for(inst.T());
  ccv_ = 0.0;
  switch_time_.reset();
}

StepOutput Switch::step(const StepInput& in) {
  if (!switch_time_ && ccv_ > threshold_) {
    switch_time_ = in.t;
    sinha_ = Sinha(SinhaMode::convex);
    sinha_.reset(*inst_);
  }
  ccv_ += positive_part(eval(in.round.g, in.x));
  return switch_time_ ? sinha_.step(in) : ogd_.step(in);
}

std::unique_ptr<Policy> make_policy(const std::string& name) {
  if (name == "proj_ogd") return std::make_unique<ProjectionOgd>();
  if (name == "sinha") return std::make_unique<Sinha>(SinhaMode::convex);
  if (name == "sinha_sc") return std::make_unique<Sinha>(SinhaMode::strongly_convex);
  if (name == "switch") return std::make_unique<Switch>();
  throw ConfigError("policy: unknown policy '" + name + "'");
}

// ---------------------------------------------------------------------------
// Runner

Trace run_policy(const Instance& inst, Policy& policy, std::uint64_t seed) {
  Trace trace;
  trace.policy = policy.name();
  trace.seed = seed;
  trace.instance = inst.meta();
  trace.D = inst.D();
  trace.G = inst.G();
  trace.records.reserve(static_cast<std::size_t>(inst.T()));

  policy.reset(inst);
  ConvexSet prev = ConvexSet::intersection({inst.admissible()}, inst.witness());
  Vector x = policy.initial_point(inst);
  CompensatedSum ccv;
  try {
    for (int t = 1; t <= inst.T(); ++t) {
      const Round& r = inst.round(t);
      ConvexSet cur = restrict_to(prev, r.set, inst.witness());

      RoundRecord rec;
      rec.t = t;
      rec.x = x;
      rec.cost = eval(r.f, x);
      rec.violation = positive_part(eval(r.g, x));
      rec.b = project(cur, x);
      rec.dist = (x - rec.b).norm();

      StepOutput out = policy.step(StepInput{t, r, prev, cur, x});
      ccv.add(rec.violation);
      rec.y = std::move(out.y);
      rec.grad = std::move(out.grad);
      rec.eta = out.eta;
      rec.ccv_running = ccv.value();
      rec.policy_tag = std::move(out.tag);
      trace.records.push_back(std::move(rec));

      x = std::move(out.x_next);
      prev = std::move(cur);
    }
  } catch (const NonConvergenceError& e) {
    trace.valid = false;
    trace.error = e.what();
  }
  trace.final_x = x;
  trace.switch_time = policy.switch_time();
  trace.policy_params = policy.params();
  return trace;
}

void replay_sets(const Instance& inst,
                 const std::function<void(int, const ConvexSet&, const ConvexSet&)>& visit) {
  ConvexSet prev = ConvexSet::intersection({inst.admissible()}, inst.witness());
  for (int t = 1; t <= inst.T(); ++t) {
    ConvexSet cur = restrict_to(prev, inst.round(t).set, inst.witness());
    visit(t, prev, cur);
    prev = std::move(cur);
  }
}

ConvexSet final_set(const Instance& inst) {
  ConvexSet cur = ConvexSet::intersection({inst.admissible()}, inst.witness());
  for (int t = 1; t <= inst.T(); ++t) cur = restrict_to(cur, inst.round(t).set, inst.witness());
  return cur;
}

}  // namespace coco
