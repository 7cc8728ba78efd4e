#include "harness.hpp"

#include "error.hpp"
#include "lod.hpp"
#include "rb.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

namespace sdwave {

CoefficientLaw parse_law(const std::string& name) {
  if (name == "uniform") return CoefficientLaw::uniform;
  if (name == "loguniform" || name == "log-uniform") return CoefficientLaw::log_uniform;
  throw Error(ErrorCode::config, "unknown coefficient law '" + name + "' (expected uniform|loguniform)");
}

std::string law_name(CoefficientLaw law) { return law == CoefficientLaw::uniform ? "uniform" : "loguniform"; }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Uniform in [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementations.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

CoefficientField random_field(const Mesh& mesh, double lo, double hi, std::uint64_t seed, CoefficientLaw law,
                              int block) {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw Error(ErrorCode::invalid_argument, "random_field: need 0 < lo < hi");
  require(block >= 0, "random_field: block must be >= 0");
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    const double u = unit(rng);
    if (law == CoefficientLaw::uniform) return lo + u * (hi - lo);
    return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
  };

  const int n = mesh.n;
  std::vector<double> values(static_cast<std::size_t>(mesh.num_elements()));
  if (block == 0) {
    for (double& v : values) v = draw();
  } else {
    const int blocks = (n + block - 1) / block;
    std::vector<double> cell(static_cast<std::size_t>(blocks * blocks));
    for (double& v : cell) v = draw();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double v = cell[static_cast<std::size_t>(i / block + (j / block) * blocks)];
        values[static_cast<std::size_t>(2 * (i + j * n))] = v;
        values[static_cast<std::size_t>(2 * (i + j * n) + 1)] = v;
      }
  }
  return CoefficientField(n, std::move(values));
}

ExperimentKind parse_experiment(const std::string& name) {
  if (name == "exp-k") return ExperimentKind::exp_k;
  if (name == "exp-H") return ExperimentKind::exp_H;
  if (name == "exp-rb") return ExperimentKind::exp_rb;
  throw Error(ErrorCode::config, "unknown experiment '" + name + "' (expected exp-k|exp-H|exp-rb)");
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::exp_k:
      return "exp-k";
    case ExperimentKind::exp_H:
      return "exp-H";
    case ExperimentKind::exp_rb:
      break;
  }
  return "exp-rb";
}

int ExperimentConfig::steps() const { return static_cast<int>(std::lround(T / tau)); }

void validate(const ExperimentConfig& c) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::config, "invalid config: " + what);
  };
  check(c.q >= 1, "q must be >= 1");
  check(c.p >= c.q, "p must be >= q");
  check(c.p <= 12, "p must be <= 12");
  check(c.tau > 0.0, "tau must be > 0");
  check(c.T > 0.0, "T must be > 0");
  check(c.steps() >= 2, "T / tau must give at least 2 steps");
  check(std::abs(c.steps() * c.tau - c.T) <= 1e-9 * c.T, "T must be a multiple of tau");
  check(c.lo > 0.0, "contrast-lo must be > 0");
  check(c.hi > c.lo, "contrast-hi must exceed contrast-lo");
  check(c.block >= 0, "block must be >= 0");
  check(c.kmin >= 1 && c.kmax >= c.kmin, "need 1 <= kmin <= kmax");
  check(c.k >= 0, "k must be >= 0");
  if (c.kind == ExperimentKind::exp_H) check(c.q >= 2, "exp-H sweeps q = 2..q, so q must be >= 2");
  if (c.kind == ExperimentKind::exp_rb) {
    check(!c.M.empty(), "M list must not be empty");
    for (int m : c.M) check(m >= 1, "M entries must be >= 1");
  }
  check(c.scale == "desk" || c.scale == "paper", "scale must be desk or paper");
}

namespace {

void apply_preset(ExperimentConfig& c) {
  const bool paper = c.scale == "paper";
  switch (c.kind) {
    case ExperimentKind::exp_k:
      c.p = paper ? 7 : 6;
      c.q = 4;
      c.kmin = 2;
      c.kmax = paper ? 7 : 6;
      break;
    case ExperimentKind::exp_H:
      c.p = paper ? 8 : 6;
      c.q = paper ? 6 : 5;
      break;
    case ExperimentKind::exp_rb:
      c.p = paper ? 8 : 6;
      c.q = 5;
      break;
  }
  c.tau = 0.02;
  c.T = 1.0;
}

std::vector<int> parse_int_list(const nlohmann::json& value) {
  std::vector<int> out;
  if (value.is_array()) {
    for (const auto& v : value) out.push_back(v.get<int>());
  } else if (value.is_number_integer()) {
    out.push_back(value.get<int>());
  } else if (value.is_string()) {
    std::stringstream ss(value.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw Error(ErrorCode::config, "bad integer list entry '" + item + "'");
      out.push_back(v);
    }
  } else {
    throw Error(ErrorCode::config, "M must be a list of integers");
  }
  return out;
}

}  // namespace

ExperimentConfig resolve_config(ExperimentKind kind, const nlohmann::json& overrides) {
  if (!overrides.is_null() && !overrides.is_object()) throw Error(ErrorCode::config, "config must be a JSON object");
  ExperimentConfig c;
  c.kind = kind;
  try {
    if (overrides.contains("scale")) c.scale = overrides.at("scale").get<std::string>();
    if (c.scale != "desk" && c.scale != "paper") throw Error(ErrorCode::config, "scale must be desk or paper");
    apply_preset(c);
    for (const auto& [key, value] : overrides.items()) {
      if (key == "scale") continue;
      if (key == "p") c.p = value.get<int>();
      else if (key == "q") c.q = value.get<int>();
      else if (key == "kmax") c.kmax = value.get<int>();
      else if (key == "kmin") c.kmin = value.get<int>();
      else if (key == "k") c.k = value.get<int>();
      else if (key == "tau") c.tau = value.get<double>();
      else if (key == "T") c.T = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "contrast-lo") c.lo = value.get<double>();
      else if (key == "contrast-hi") c.hi = value.get<double>();
      else if (key == "law") c.law = parse_law(value.get<std::string>());
      else if (key == "block") c.block = value.get<int>();
      else if (key == "M") c.M = parse_int_list(value);
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "svg") c.svg = value.get<bool>();
      else if (key == "cache") c.cache = value.get<std::string>();
      else throw Error(ErrorCode::config, "unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("config type error: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::config, "config: bad integer list");
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return nlohmann::json{{"experiment", experiment_name(c.kind)},
                        {"scale", c.scale},
                        {"p", c.p},
                        {"q", c.q},
                        {"kmin", c.kmin},
                        {"kmax", c.kmax},
                        {"k", c.k},
                        {"tau", c.tau},
                        {"T", c.T},
                        {"seed", c.seed},
                        {"contrast-lo", c.lo},
                        {"contrast-hi", c.hi},
                        {"law", law_name(c.law)},
                        {"block", c.block},
                        {"M", c.M},
                        {"out", c.out},
                        {"svg", c.svg},
                        {"cache", c.cache}};
}

Problem make_random_problem(int p, int q, std::uint64_t seed, double lo, double hi, CoefficientLaw law, int block) {
  require(q >= 1 && p >= q, "make_random_problem: need p >= q >= 1");
  NestedMeshPair pair = refine(build_uniform_mesh(1 << q), 1 << (p - q));
  CoefficientField A = random_field(pair.fine, lo, hi, splitmix64(seed), law, block);
  CoefficientField B = random_field(pair.fine, lo, hi, splitmix64(seed ^ 0x5bd1e995ull), law, block);
  return make_problem(std::move(pair), std::move(A), std::move(B));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Corrector and transient construction through the cache.
class CorrectorSource {
 public:
  CorrectorSource(const ExperimentConfig& config, int q, const Problem& problem)
      : config_(config), q_(q), problem_(problem), cache_(config.cache) {}

  CorrectorSet correctors(int k, FormChoice form) {
    const CacheKey key = make_key(k, form);
    if (auto hit = cache_.load_correctors(key, problem_)) return std::move(*hit);
    CorrectorSet set = build_corrector_set(problem_, CorrectorConfig{k, config_.tau, form});
    cache_.store_correctors(key, set);
    return set;
  }

  TransientCorrectors transient(const CorrectorSet& set, int horizon) {
    const CacheKey key = make_key(set.config.k, set.config.form);
    if (auto hit = cache_.load_transient(key, horizon, 1e-12)) return std::move(*hit);
    TransientCorrectors t = compute_all_transient_correctors(problem_, set, horizon, 1e-12);
    cache_.store_transient(key, t);
    return t;
  }

  int hits() const { return cache_.hits(); }
  int misses() const { return cache_.misses(); }

 private:
  CacheKey make_key(int k, FormChoice form) const {
    return CacheKey{config_.p, q_,        config_.seed, config_.lo, config_.hi, law_name(config_.law),
                    config_.block, config_.tau, k,      form};
  }

  const ExperimentConfig& config_;
  int q_;
  const Problem& problem_;
  CorrectorCache cache_;
};

ErrorRow make_row(double param, const TrajectoryError& e, double runtime, std::string method) {
  return ErrorRow{param, e.rel_h1_final, e.rel_l2h1, runtime, std::move(method)};
}

ErrorReport begin_report(const ExperimentConfig& config, std::string param_name) {
  validate(config);
  ErrorReport report;
  report.kind = config.kind;
  report.param_name = std::move(param_name);
  report.config = to_json(config);
  return report;
}

}  // namespace

ErrorReport run_exp_k(const ExperimentConfig& config) {
  const auto t_start = Clock::now();
  ErrorReport report = begin_report(config, "k");
  const Problem problem = make_random_problem(config.p, config.q, config.seed, config.lo, config.hi, config.law, config.block);
  CorrectorSource source(config, config.q, problem);
  const TimeGrid grid{config.tau, config.steps()};
  const SourceFunction f = constant_source(1.0);
  const Vector zero = Vector::Zero(problem.coarse_dofs());

  const CorrectorSet ideal_set = source.correctors(saturation_layers(problem.pair.coarse), FormChoice::a_plus_tau_b);
  const Trajectory ideal = ideal_gfem_solve(problem, ideal_set, f, grid, zero, zero);

  for (int k = config.kmin; k <= config.kmax; ++k) {
    const auto t0 = Clock::now();
    const CorrectorSet set = source.correctors(k, FormChoice::a_plus_tau_b);
    const TransientCorrectors transient = source.transient(set, grid.steps);
    const Trajectory traj = localized_gfem_solve(problem, set, transient, f, grid, zero, zero);
    report.rows.push_back(make_row(k, relative_error(problem.forms, ideal, traj), seconds_since(t0), "gfem"));
  }
  report.cache_hits = source.hits();
  report.cache_misses = source.misses();
  report.wall_clock_s = seconds_since(t_start);
  return report;
}

ErrorReport run_exp_H(const ExperimentConfig& config) {
  const auto t_start = Clock::now();
  ErrorReport report = begin_report(config, "H");
  const TimeGrid grid{config.tau, config.steps()};
  const SourceFunction f = constant_source(1.0);
  int hits = 0, misses = 0;

  Trajectory reference;
  for (int q = 2; q <= config.q; ++q) {
    const Problem problem = make_random_problem(config.p, q, config.seed, config.lo, config.hi, config.law, config.block);
    if (reference.states.empty()) {
      const Vector zero_fine = Vector::Zero(problem.fine_dofs());
      reference = fine_fem_solve(problem, f, zero_fine, zero_fine, grid);
    }
    CorrectorSource source(config, q, problem);
    const Vector zero = Vector::Zero(problem.coarse_dofs());
    const int k = config.k > 0 ? config.k : q;
    const double H = 1.0 / problem.pair.coarse.n;

    auto t0 = Clock::now();
    const CorrectorSet set = source.correctors(k, FormChoice::a_plus_tau_b);
    const TransientCorrectors transient = source.transient(set, grid.steps);
    const Trajectory gfem = localized_gfem_solve(problem, set, transient, f, grid, zero, zero);
    report.rows.push_back(make_row(H, relative_error(problem.forms, reference, gfem), seconds_since(t0), "gfem"));

    t0 = Clock::now();
    const Trajectory fem = galerkin_solve(problem, problem.P, f, grid, zero, zero, "fem_coarse");
    report.rows.push_back(make_row(H, relative_error(problem.forms, reference, fem), seconds_since(t0), "fem_coarse"));

    t0 = Clock::now();
    const CorrectorSet set_a = source.correctors(k, FormChoice::a_only);
    const Trajectory lod_a = galerkin_solve(problem, set_a.Q, f, grid, zero, zero, "lod_a");
    report.rows.push_back(make_row(H, relative_error(problem.forms, reference, lod_a), seconds_since(t0), "lod_a"));

    t0 = Clock::now();
    const CorrectorSet set_b = source.correctors(k, FormChoice::b_only);
    const Trajectory lod_b = galerkin_solve(problem, set_b.Q, f, grid, zero, zero, "lod_b");
    report.rows.push_back(make_row(H, relative_error(problem.forms, reference, lod_b), seconds_since(t0), "lod_b"));

    hits += source.hits();
    misses += source.misses();
  }
  report.cache_hits = hits;
  report.cache_misses = misses;
  report.wall_clock_s = seconds_since(t_start);
  return report;
}

ErrorReport run_exp_rb(const ExperimentConfig& config) {
  const auto t_start = Clock::now();
  ErrorReport report = begin_report(config, "M");
  const Problem problem = make_random_problem(config.p, config.q, config.seed, config.lo, config.hi, config.law, config.block);
  CorrectorSource source(config, config.q, problem);
  const TimeGrid grid{config.tau, config.steps()};
  const SourceFunction f = constant_source(1.0);
  const Vector zero = Vector::Zero(problem.coarse_dofs());
  const int k = config.k > 0 ? config.k : config.q;

  const CorrectorSet set = source.correctors(k, FormChoice::a_plus_tau_b);
  const TransientCorrectors transient = source.transient(set, grid.steps);
  const Trajectory localized = localized_gfem_solve(problem, set, transient, f, grid, zero, zero);

  for (int M : config.M) {
    const auto t0 = Clock::now();
    const Trajectory rb = rb_gfem_solve(problem, set, transient, f, grid, zero, zero, M);
    report.rows.push_back(make_row(M, relative_error(problem.forms, localized, rb), seconds_since(t0), "gfem_rb"));
  }

  const auto t0 = Clock::now();
  const RbTransient automatic = rb_extend(problem, transient, 0);
  int m_auto = 0;
  for (const ReducedBasis& b : automatic.bases) m_auto = std::max(m_auto, b.m_selected);
  Trajectory rb = localized_gfem_solve(problem, set, automatic.transient, f, grid, zero, zero);
  report.rows.push_back(make_row(m_auto, relative_error(problem.forms, localized, rb), seconds_since(t0), "gfem_rb_auto"));

  report.cache_hits = source.hits();
  report.cache_misses = source.misses();
  report.wall_clock_s = seconds_since(t_start);
  return report;
}

ErrorReport run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::exp_k:
      return run_exp_k(config);
    case ExperimentKind::exp_H:
      return run_exp_H(config);
    case ExperimentKind::exp_rb:
      break;
  }
  return run_exp_rb(config);
}

}  // namespace sdwave
