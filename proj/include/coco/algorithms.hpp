#pragma once

#include "coco/functions.hpp"
#include "coco/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coco {

struct Round {
  ScalarConvexFunction f;
  ScalarConvexFunction g;
  // {g <= 0}
  ConvexSet set;
};

struct InstanceMeta {
  std::string family;
  int d = 0;
  int T = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
};

class Instance {
 public:
  // Checks that the witness lies in X and in every constraint set, that
  // the dimensions agree, and that sampled widths of X stay below D.
  Instance(ConvexSet admissible, double D, double G, std::vector<Round> rounds, Vector witness,
           InstanceMeta meta = {});

  const ConvexSet& admissible() const { return admissible_; }
  double D() const { return D_; }
  double G() const { return G_; }
  int T() const { return static_cast<int>(rounds_.size()); }
  int dim() const { return admissible_.dim(); }
  // 1-based, as in the protocol.
  const Round& round(int t) const { return rounds_.at(static_cast<std::size_t>(t - 1)); }
  const std::vector<Round>& rounds() const { return rounds_; }
  const Vector& witness() const { return witness_; }
  const InstanceMeta& meta() const { return meta_; }

 private:
  ConvexSet admissible_;
  double D_;
  double G_;
  std::vector<Round> rounds_;
  Vector witness_;
  InstanceMeta meta_;
};

struct RoundRecord {
  int t = 0;
  Vector x;
  Vector y;
  Vector b;
  double cost = 0.0;
  double violation = 0.0;
  double dist = 0.0;
  Vector grad;
  double eta = 0.0;
  double ccv_running = 0.0;
  std::string policy_tag;
};

struct Trace {
  std::vector<RoundRecord> records;
  // x_{T+1}, needed for the last projection hyperplane.
  Vector final_x;
  std::optional<int> switch_time;
  bool valid = true;
  std::string error;
  std::string policy;
  std::map<std::string, double> policy_params;
  std::uint64_t seed = 0;
  InstanceMeta instance;
  double D = 0.0;
  double G = 0.0;

  double ccv() const { return records.empty() ? 0.0 : records.back().ccv_running; }
  // x_{t+1} for t = 1..T.
  const Vector& next_x(std::size_t index) const {
    return index + 1 < records.size() ? records[index + 1].x : final_x;
  }
};

struct StepInput {
  int t;
  const Round& round;
  const ConvexSet& prev_set;  // S_{t-1}
  const ConvexSet& set;       // S_t
  const Vector& x;
};

struct StepOutput {
  Vector x_next;
  Vector y;
  Vector grad;
  double eta = 0.0;
  std::string tag;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::map<std::string, double> params() const = 0;
  virtual Vector initial_point(const Instance& inst) const = 0;
  virtual void reset(const Instance& inst) = 0;
  virtual StepOutput step(const StepInput& in) = 0;
  virtual std::optional<int> switch_time() const { return std::nullopt; }
};

class ProjectionOgd : public Policy {
 public:
  // x1 defaults to the projection of the origin onto X.
  explicit ProjectionOgd(std::optional<Vector> x1 = std::nullopt) : x1_(std::move(x1)) {}
  std::string name() const override { return "proj_ogd"; }
  std::map<std::string, double> params() const override;
  Vector initial_point(const Instance& inst) const override;
  void reset(const Instance& inst) override;
  StepOutput step(const StepInput& in) override;

  static double step_size(double D, double G, int t) { return D / (G * std::sqrt(static_cast<double>(t))); }

 private:
  std::optional<Vector> x1_;
  double D_ = 0.0;
  double G_ = 0.0;
};

enum class SinhaMode { convex, strongly_convex };

class Sinha : public Policy {
 public:
  // alpha is the strong-convexity modulus used by strongly_convex mode;
  // 0 means "read it off the first cost".
  explicit Sinha(SinhaMode mode = SinhaMode::convex, double alpha = 0.0) : mode_(mode), alpha_(alpha) {}
  std::string name() const override { return "sinha"; }
  std::map<std::string, double> params() const override;
  Vector initial_point(const Instance& inst) const override;
  void reset(const Instance& inst) override;
  StepOutput step(const StepInput& in) override;

  double beta() const { return beta_; }
  double V() const { return V_; }
  double lambda() const { return lambda_; }
  double internal_ccv() const { return ccv_; }
  double phi_prime(double z) const;

  static double lambda_for(int T) { return 1.0 / (2.0 * std::sqrt(static_cast<double>(T))); }
  static double beta_for(double G, double D) { return 1.0 / (2.0 * G * D); }

 private:
  SinhaMode mode_;
  double alpha_;
  const ConvexSet* X_ = nullptr;
  double D_ = 0.0;
  double beta_ = 0.0;
  double V_ = 1.0;
  double lambda_ = 0.0;
  double ccv_ = 0.0;
  double grad_sq_sum_ = 0.0;
  double curvature_sum_ = 0.0;
};

class Switch : public Policy {
 public:
  explicit Switch(std::optional<Vector> x1 = std::nullopt) : ogd_(std::move(x1)) {}
  std::string name() const override { return "switch"; }
  std::map<std::string, double> params() const override;
  Vector initial_point(const Instance& inst) const override { return ogd_.initial_point(inst); }
  void reset(const Instance& inst) override;
  StepOutput step(const StepInput& in) override;
  std::optional<int> switch_time() const override { return switch_time_; }

  static double threshold_for(int T);

 private:
  ProjectionOgd ogd_;
  Sinha sinha_;
  const Instance* inst_ = nullptr;
  double threshold_ = 0.0;
  double ccv_ = 0.0;
  std::optional<int> switch_time_;
};

std::unique_ptr<Policy> make_policy(const std::string& name);

// Plays the protocol: commit x_t, reveal (f_t, g_t, G_t), update S_t, step.
// A NonConvergenceError stops the run and marks the partial trace invalid.
Trace run_policy(const Instance& inst, Policy& policy, std::uint64_t seed = 0);

// Calls visit(t, S_{t-1}, S_t) for t = 1..T with S_0 = X.
void replay_sets(const Instance& inst,
                 const std::function<void(int, const ConvexSet&, const ConvexSet&)>& visit);

ConvexSet final_set(const Instance& inst);

}  // namespace coco
