#include "coco/harness.hpp"

#include "coco/error.hpp"
#include "coco/report_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace coco {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kPolicies{"proj_ogd", "sinha", "sinha_sc", "switch"};

void validate(const ExperimentConfig& c) {
  const auto& fams = known_families();
  if (std::find(fams.begin(), fams.end(), c.generator.family) == fams.end()) {
    throw ConfigError("invalid 'family': unknown family '" + c.generator.family + "'");
  }
  if (!kPolicies.count(c.policy)) throw ConfigError("invalid 'policy': unknown policy '" + c.policy + "'");
  for (const auto& p : c.policies) {
    if (!kPolicies.count(p)) throw ConfigError("invalid 'policies': unknown policy '" + p + "'");
  }
  if (c.seeds.empty()) throw ConfigError("invalid 'seeds': need at least one seed");
  if (c.Ts.empty()) throw ConfigError("invalid 'T': need at least one horizon");
  for (int T : c.Ts) {
    if (T < 1) throw ConfigError("invalid 'T': horizons must be >= 1");
  }
  if (c.generator.d < 1) throw ConfigError("invalid 'd': must be >= 1");
  if (c.out.empty()) throw ConfigError("invalid 'out': empty output directory");
  if (c.metrics.width_dirs < 100) throw ConfigError("invalid 'metrics.width_dirs': must be >= 100");
  if (c.metrics.c_star_opts.n_samples < 1) throw ConfigError("invalid 'metrics.c_star_samples': must be >= 1");
  if (!c.x1.empty() && static_cast<int>(c.x1.size()) != c.generator.d) {
    throw ConfigError("invalid 'x1': length must equal d");
  }
}

template <class T>
T field(const json& j, const char* name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("invalid '") + name + "': wrong type");
  }
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

GeneratorSpec spec_for(const ExperimentConfig& cfg, int T, std::uint64_t seed) {
  GeneratorSpec s = cfg.generator;
  s.T = T;
  s.seed = seed;
  if (!s.schedule.empty() && static_cast<int>(s.schedule.size()) != T - 1) {
    throw ConfigError("invalid 'schedule': needs T - 1 entries for T = " + std::to_string(T));
  }
  return s;
}

// Maps library exceptions onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return 2;
  } catch (const NonConvergenceError& e) {
    err << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return 3;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void ensure_dir(const fs::path& dir) {
  fs::create_directories(dir);
  if (!fs::is_directory(dir)) throw ConfigError("invalid 'out': not a directory: " + dir.string());
}

void write_run_outputs(const ExperimentConfig& cfg, const GeneratorSpec& spec, const Instance& inst, const Trace& trace,
                       const MetricsReport* rep, const fs::path& dir) {
  ensure_dir(dir);
  io::write_file_atomic(dir / "trace.csv", io::trace_csv(trace, inst.dim()));
  json m = rep ? io::metrics_json(*rep) : json::object();
  m["trace"] = io::trace_summary_json(trace);
  m["instance"] = instance_to_json(spec, inst);
  m["metadata"] = {{"generated_at", timestamp()}, {"command", "run"}};
  io::write_file_atomic(dir / "metrics.json", m.dump(2) + "\n");
  if (!rep) return;
  if (!rep->width_curve.empty()) io::write_file_atomic(dir / "widths.csv", io::widths_csv(*rep));
  if (!rep->theta_curve.empty()) io::write_file_atomic(dir / "theta.csv", io::theta_csv(*rep));
  if (!cfg.plots) return;
  io::Series ccv{"CCV", {}};
  for (const auto& [t, v] : rep->ccv_curve) ccv.points.emplace_back(t, v);
  io::write_file_atomic(dir / "ccv.svg", io::svg_line_chart("CCV(t), " + trace.policy, "t", "CCV", {ccv}));
  if (!rep->theta_curve.empty()) {
    io::Series th{"theta", {}};
    for (const auto& [t, v] : rep->theta_curve) th.points.emplace_back(t, v);
    io::write_file_atomic(dir / "theta.svg", io::svg_line_chart("theta_t", "t", "theta (rad)", {th}));
  }
  if (!rep->width_curve.empty()) {
    io::Series w{"W(S_t)", {}};
    for (const auto& p : rep->width_curve) w.points.emplace_back(p.t, p.estimate);
    io::write_file_atomic(dir / "width.svg", io::svg_line_chart("mean width of S_t", "t", "width", {w}));
  }
}

template <class Job>
void run_pool(std::size_t n_jobs, Job&& job) {
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(1, n_jobs)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_jobs; i = next++) job(i);
  };
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COCO_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  static const std::set<std::string> known{"family", "d",       "T",       "seed",    "seeds",  "params",
                                           "schedule", "policy", "policies", "x1",     "out",    "metrics",
                                           "plots",  "decrement_rounds"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown field '" + k + "'");
  }
  if (!j.contains("family")) throw ConfigError("missing field 'family'");
  c.generator.family = field<std::string>(j.at("family"), "family");
  if (j.contains("d")) c.generator.d = field<int>(j.at("d"), "d");
  if (j.contains("T")) {
    const auto& t = j.at("T");
    c.Ts = t.is_array() ? field<std::vector<int>>(t, "T") : std::vector<int>{field<int>(t, "T")};
  }
  if (j.contains("seed") && j.contains("seeds")) throw ConfigError("invalid 'seeds': give either 'seed' or 'seeds'");
  if (j.contains("seed")) c.seeds = {field<std::uint64_t>(j.at("seed"), "seed")};
  if (j.contains("seeds")) c.seeds = field<std::vector<std::uint64_t>>(j.at("seeds"), "seeds");
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("invalid 'params': must be an object");
    for (const auto& [k, v] : j.at("params").items()) {
      c.generator.params[k] = v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : field<double>(v, ("params." + k).c_str());
    }
  }
  if (j.contains("schedule")) c.generator.schedule = field<std::vector<double>>(j.at("schedule"), "schedule");
  if (j.contains("policy")) c.policy = field<std::string>(j.at("policy"), "policy");
  if (j.contains("policies")) c.policies = field<std::vector<std::string>>(j.at("policies"), "policies");
  if (j.contains("x1")) c.x1 = field<std::vector<double>>(j.at("x1"), "x1");
  if (j.contains("out")) c.out = field<std::string>(j.at("out"), "out");
  if (j.contains("plots")) c.plots = field<bool>(j.at("plots"), "plots");
  if (j.contains("decrement_rounds")) c.decrement_rounds = field<int>(j.at("decrement_rounds"), "decrement_rounds");
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    if (!m.is_object()) throw ConfigError("invalid 'metrics': must be an object");
    static const std::set<std::string> mk{"regret", "c_star", "widths", "monotonicity", "width_dirs", "width_points",
                                          "c_star_samples"};
    for (const auto& [k, v] : m.items()) {
      if (!mk.count(k)) throw ConfigError("unknown field 'metrics." + k + "'");
    }
    auto& o = c.metrics;
    if (m.contains("regret")) o.regret = field<bool>(m.at("regret"), "metrics.regret");
    if (m.contains("c_star")) o.c_star = field<bool>(m.at("c_star"), "metrics.c_star");
    if (m.contains("widths")) o.widths = field<bool>(m.at("widths"), "metrics.widths");
    if (m.contains("monotonicity")) o.monotonicity = field<bool>(m.at("monotonicity"), "metrics.monotonicity");
    if (m.contains("width_dirs")) o.width_dirs = field<int>(m.at("width_dirs"), "metrics.width_dirs");
    if (m.contains("width_points")) o.width_points = field<int>(m.at("width_points"), "metrics.width_points");
    if (m.contains("c_star_samples")) o.c_star_opts.n_samples = field<int>(m.at("c_star_samples"), "metrics.c_star_samples");
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("invalid 'config': cannot open " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid 'config': ") + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["family"] = c.generator.family;
  j["d"] = c.generator.d;
  j["T"] = c.Ts;
  j["seeds"] = c.seeds;
  j["params"] = c.generator.params;
  if (!c.generator.schedule.empty()) j["schedule"] = c.generator.schedule;
  j["policy"] = c.policy;
  if (!c.policies.empty()) j["policies"] = c.policies;
  if (!c.x1.empty()) j["x1"] = c.x1;
  j["out"] = c.out;
  j["plots"] = c.plots;
  j["decrement_rounds"] = c.decrement_rounds;
  j["metrics"] = {{"regret", c.metrics.regret},         {"c_star", c.metrics.c_star},
                  {"widths", c.metrics.widths},         {"monotonicity", c.metrics.monotonicity},
                  {"width_dirs", c.metrics.width_dirs}, {"width_points", c.metrics.width_points},
                  {"c_star_samples", c.metrics.c_star_opts.n_samples}};
  return j;
}

std::unique_ptr<Policy> make_configured_policy(const ExperimentConfig& cfg, const std::string& name) {
  std::optional<Vector> x1;
  if (!cfg.x1.empty()) x1 = Eigen::Map<const Vector>(cfg.x1.data(), static_cast<Eigen::Index>(cfg.x1.size()));
  if (name == "proj_ogd") return std::make_unique<ProjectionOgd>(x1);
  if (name == "switch") return std::make_unique<Switch>(x1);
  return make_policy(name);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_run(const ExperimentConfig& cfg, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    const bool many = cfg.Ts.size() * cfg.seeds.size() > 1;
    for (int T : cfg.Ts) {
      for (auto seed : cfg.seeds) {
        const auto spec = spec_for(cfg, T, seed);
        const Instance inst = generate(spec);
        auto policy = make_configured_policy(cfg, cfg.policy);
        const Trace trace = run_policy(inst, *policy, seed);
        const fs::path dir = many ? fs::path(cfg.out) / ("T" + std::to_string(T) + "_seed" + std::to_string(seed))
                                  : fs::path(cfg.out);
        if (!trace.valid) {
          write_run_outputs(cfg, spec, inst, trace, nullptr, dir);
          err << "numerical failure: " << trace.error << " (partial trace of " << trace.records.size()
              << " rounds written to " << dir.string() << ")\n";
          return 3;
        }
        const MetricsReport rep = compute_metrics(trace, inst, cfg.metrics);
        write_run_outputs(cfg, spec, inst, trace, &rep, dir);
      }
    }
    return 0;
  });
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    std::vector<int> Ts = cfg.Ts;
    std::sort(Ts.begin(), Ts.end());
    Ts.erase(std::unique(Ts.begin(), Ts.end()), Ts.end());
    if (Ts.size() < 3) throw ConfigError("invalid 'T': a sweep needs at least 3 distinct horizons");
    const auto policies = cfg.policies.empty() ? std::vector<std::string>{cfg.policy} : cfg.policies;

    struct Job {
      std::string policy;
      int T;
      std::uint64_t seed;
    };
    struct Result {
      bool valid = false;
      std::string error;
      double ccv = 0.0, regret = 0.0, movement = 0.0;
      std::optional<int> switch_time;
    };
    std::vector<Job> jobs;
    for (const auto& p : policies) {
      for (int T : Ts) {
        for (auto s : cfg.seeds) jobs.push_back({p, T, s});
      }
    }
    std::vector<Result> results(jobs.size());
    std::mutex err_mu;
    std::string first_config_error;
    run_pool(jobs.size(), [&](std::size_t i) {
      const Job& job = jobs[i];
      Result& r = results[i];
      try {
        const auto spec = spec_for(cfg, job.T, job.seed);
        const Instance inst = generate(spec);
        auto policy = make_configured_policy(cfg, job.policy);
        const Trace trace = run_policy(inst, *policy, job.seed);
        r.valid = trace.valid;
        r.error = trace.error;
        r.ccv = trace.ccv();
        r.movement = movement_cost(trace);
        r.switch_time = trace.switch_time;
        if (trace.valid && cfg.metrics.regret) r.regret = regret(trace, inst, best_fixed_comparator(inst));
      } catch (const ConfigError& e) {
        std::lock_guard lock(err_mu);
        if (first_config_error.empty()) first_config_error = e.what();
      } catch (const std::exception& e) {
        r.valid = false;
        r.error = e.what();
      }
    });
    if (!first_config_error.empty()) throw ConfigError(first_config_error);

    const fs::path out(cfg.out);
    ensure_dir(out / "runs");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& [p, T, s] = jobs[i];
      const auto& r = results[i];
      json rj{{"policy", p}, {"T", T}, {"seed", s}, {"valid", r.valid}, {"ccv", r.ccv}, {"regret", r.regret},
              {"movement_cost", r.movement}};
      if (!r.valid) rj["error"] = r.error;
      rj["switch_time"] = r.switch_time ? json(*r.switch_time) : json(nullptr);
      io::write_file_atomic(out / "runs" / (p + "_T" + std::to_string(T) + "_seed" + std::to_string(s) + ".json"),
                            rj.dump(2) + "\n");
    }

    std::ostringstream csv;
    csv << "T,policy,median_ccv,median_regret,median_M_T,mean_ccv,mean_regret,mean_M_T\n";
    json summary;
    summary["policies"] = json::object();
    bool any_invalid = false;
    for (const auto& p : policies) {
      std::vector<std::pair<double, double>> ccv_T, ccv_log, reg_T, mov_T;
      json rows = json::array();
      for (int T : Ts) {
        std::vector<double> c, g, m;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
          if (jobs[i].policy != p || jobs[i].T != T) continue;
          if (!results[i].valid) {
            any_invalid = true;
            continue;
          }
          c.push_back(results[i].ccv);
          g.push_back(results[i].regret);
          m.push_back(results[i].movement);
        }
        const double mc = median(c), mg = median(g), mm = median(m);
        csv << T << ',' << p << ',' << io::format_double(mc) << ',' << io::format_double(mg) << ','
            << io::format_double(mm) << ',' << io::format_double(mean(c)) << ',' << io::format_double(mean(g)) << ','
            << io::format_double(mean(m)) << '\n';
        rows.push_back({{"T", T}, {"median_ccv", mc}, {"median_regret", mg}, {"median_M_T", mm}, {"mean_ccv", mean(c)},
                        {"mean_regret", mean(g)}, {"mean_M_T", mean(m)}, {"n_valid", c.size()}});
        const double t = T;
        ccv_T.emplace_back(t, mc);
        ccv_log.emplace_back(std::sqrt(t) * std::log(t), mc);
        reg_T.emplace_back(t, mg);
        mov_T.emplace_back(t, mm);
      }
      auto fit = [](const std::vector<std::pair<double, double>>& s) -> json {
        try {
          const auto f = fit_power_law(s);
          return {{"exponent", f.exponent}, {"r_squared", f.r_squared}};
        } catch (const DegenerateInputError& e) {
          return {{"exponent", nullptr}, {"r_squared", nullptr}, {"reason", e.what()}};
        }
      };
      summary["policies"][p] = {{"rows", rows},
                                {"ccv_vs_T", fit(ccv_T)},
                                {"ccv_vs_sqrtT_lnT", fit(ccv_log)},
                                {"regret_vs_T", fit(reg_T)},
                                {"M_T_vs_T", fit(mov_T)}};
    }
    summary["config"] = config_to_json(cfg);
    summary["metadata"] = {{"generated_at", timestamp()}, {"command", "sweep"}};
    io::write_file_atomic(out / "sweep.csv", csv.str());
    io::write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
    if (any_invalid) {
      err << "numerical failure: some runs did not converge (see runs/)\n";
      return 3;
    }
    return 0;
  });
}

std::vector<BoundCheck> verify_checks(const ExperimentConfig& cfg, const Instance& inst, const Trace& trace) {
  std::vector<BoundCheck> checks;
  const int d = inst.dim();
  const double D = inst.D(), G = inst.G();
  const double M = movement_cost(trace);
  const double ccv = trace.ccv();
  const auto& fam = inst.meta().family;

  checks.push_back({"CCV <= G*M_T", ccv, G * M + 1e-6, ccv <= G * M + 1e-6});
  if (trace.policy == "switch") {
    int flips = 0;
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
      flips += trace.records[i].policy_tag != trace.records[i - 1].policy_tag;
    }
    checks.push_back({"policy_tag flips at most once", static_cast<double>(flips), 1.0, flips <= 1});
  }
  // The remaining bounds are about projection iterates.
  if (!projection_only(trace)) return checks;

  if ((fam == "nested_balls" || fam == "nested_boxes") && d >= 2) {
    const double b = std::pow(static_cast<double>(d), 1.5) * D;
    checks.push_back({"M_T <= d^{3/2}*D", M, b, M <= b + 1e-6});
  }

  CStarResult cs;
  if (d >= 2 && cfg.metrics.c_star) {
    cs = run_c_star(trace, inst, cfg.metrics.c_star_opts);
    if (cs.c_star && *cs.c_star > 0.0) {
      const double mb = movement_bound(std::min(1.0, *cs.c_star), d, D);
      checks.push_back({"M_T <= movement_bound(c*)", M, mb, M <= mb * (1.0 + 1e-6)});
      checks.push_back({"CCV <= G*movement_bound(c*)", ccv, G * mb, ccv <= G * mb * (1.0 + 1e-6)});
    }
  }

  if (fam == "ocs_random") {
    const auto curve = reversed_iterate_curve(trace);
    const bool ok = self_expanded_check(curve, 1e-7);
    checks.push_back({"reverse curve self-expanded", ok ? 1.0 : 0.0, 1.0, ok});
    const double len = curve_length(curve);
    checks.push_back({"curve_length <= 10*D", len, 10.0 * D, len <= 10.0 * D});
  }
  if (fam == "monotone_2d") {
    const auto mono = monotonicity_check(projection_hyperplanes(trace));
    checks.push_back({"theta_t monotone", mono.monotone ? 1.0 : 0.0, 1.0, mono.monotone});
    checks.push_back({"CCV <= 20*G*D", ccv, 20.0 * G * D, ccv <= 20.0 * G * D});
  }

  // Width decrement on a subsample of the infeasible rounds.
  if (d >= 2 && cfg.metrics.widths && !cs.per_round.empty() &&
      (fam == "nested_balls" || fam == "nested_boxes" || fam == "ocs_random")) {
    std::map<int, double> c_at(cs.per_round.begin(), cs.per_round.end());
    const std::size_t n = cs.per_round.size();
    const std::size_t want = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, cfg.decrement_rounds)));
    std::set<int> chosen;
    for (std::size_t k = 0; k < want; ++k) chosen.insert(cs.per_round[k * n / want].first);
    Rng rng(cfg.metrics.seed);
    const auto dirs = sample_directions(d, cfg.metrics.width_dirs, rng);
    int tested = 0, passed = 0;
    replay_sets(inst, [&](int t, const ConvexSet& prev, const ConvexSet& cur) {
      if (!chosen.count(t)) return;
      const auto& rec = trace.records[static_cast<std::size_t>(t - 1)];
      const auto wd = width_decrement_on(prev, cur, rec.x, rec.b, c_at[t], dirs);
      if (wd.skipped) return;
      ++tested;
      passed += wd.pass;
    });
    if (tested > 0) {
      const double rate = static_cast<double>(passed) / tested;
      checks.push_back({"width decrement pass rate", rate, 0.95, rate >= 0.95});
    }
  }
  return checks;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& err) {
  return guarded(err, [&] {
    validate(cfg);
    json arr = json::array();
    bool all = true;
    for (int T : cfg.Ts) {
      for (auto seed : cfg.seeds) {
        const auto spec = spec_for(cfg, T, seed);
        const Instance inst = generate(spec);
        auto policy = make_configured_policy(cfg, cfg.policy);
        const Trace trace = run_policy(inst, *policy, seed);
        if (!trace.valid) {
          err << "numerical failure: " << trace.error << '\n';
          return 3;
        }
        for (const auto& c : verify_checks(cfg, inst, trace)) {
          all = all && c.pass;
          arr.push_back({{"name", c.name}, {"observed", c.observed}, {"bound", c.bound}, {"pass", c.pass},
                         {"T", T}, {"seed", seed}});
        }
      }
    }
    const fs::path out(cfg.out);
    ensure_dir(out);
    json j{{"checks", arr}, {"all_pass", all}, {"config", config_to_json(cfg)}};
    io::write_file_atomic(out / "verify.json", j.dump(2) + "\n");
    return all ? 0 : 1;
  });
}

// ---------------------------------------------------------------------------
// CLI

int cli_main(int argc, char** argv) {
  CLI::App app{"coco: constrained online convex optimization experiments"};
  app.require_subcommand(1);

  std::string config_path, policy, family, out;
  std::vector<int> Ts;
  std::vector<std::uint64_t> seeds;
  int dim = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--T", Ts, "horizon(s); repeat for a sweep");
    sub->add_option("--seed", seeds, "seed(s)");
    sub->add_option("--policy", policy, "proj_ogd | sinha | sinha_sc | switch");
    sub->add_option("--family", family, "instance family");
    sub->add_option("--dim", dim, "dimension d");
    sub->add_option("--out", out, "output directory");
  };
  auto* run = app.add_subcommand("run", "run one experiment per (T, seed)");
  auto* sweep = app.add_subcommand("sweep", "sweep horizons and fit growth exponents");
  auto* verify = app.add_subcommand("verify", "check bounds on finished runs");
  for (auto* s : {run, sweep, verify}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ExperimentConfig cfg;
  const int rc = guarded(std::cerr, [&] {
    json j;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ConfigError("invalid 'config': cannot open " + config_path);
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid 'config': ") + e.what());
      }
    } else {
      j = json::object();
    }
    if (!family.empty()) j["family"] = family;
    if (!j.contains("family")) throw ConfigError("missing field 'family' (use --config or --family)");
    if (dim > 0) j["d"] = dim;
    if (!Ts.empty()) j["T"] = Ts;
    if (!seeds.empty()) {
      j.erase("seed");
      j["seeds"] = seeds;
    }
    if (!policy.empty()) j["policy"] = policy;
    if (!out.empty()) j["out"] = out;
    cfg = config_from_json(j);
    return 0;
  });
  if (rc != 0) return rc;

  if (run->parsed()) return cmd_run(cfg, std::cerr);
  if (sweep->parsed()) return cmd_sweep(cfg, std::cerr);
  return cmd_verify(cfg, std::cerr);
}

}  // namespace coco
