#pragma once

// Experiment drivers: random coefficients, the localization, coarse-mesh and
// reduced-basis studies, and their error reports.

#include "assembly.hpp"
#include "cache.hpp"
#include "evolution.hpp"
#include "mesh.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sdwave {

enum class CoefficientLaw { uniform, log_uniform };

CoefficientLaw parse_law(const std::string& name);
std::string law_name(CoefficientLaw law);

/// i.i.d. values in [lo, hi] per granularity cell: block = 0 gives one value
/// per element, block = b gives one value per b x b block of cells.
CoefficientField random_field(const Mesh& mesh, double lo, double hi, std::uint64_t seed, CoefficientLaw law,
                              int block);

enum class ExperimentKind { exp_k, exp_H, exp_rb };

ExperimentKind parse_experiment(const std::string& name);
std::string experiment_name(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::exp_k;
  std::string scale = "desk";
  /// h = 2^-p
  int p = 6;
  /// H = 2^-q; for exp-H the finest coarse level of the sweep q = 2..q.
  int q = 4;
  int kmin = 2;
  int kmax = 6;
  /// 0: k = ceil(log2(1/H)).
  int k = 0;
  double tau = 0.02;
  double T = 1.0;
  std::uint64_t seed = 1;
  double lo = 0.1;
  double hi = 1000.0;
  CoefficientLaw law = CoefficientLaw::log_uniform;
  int block = 0;
  std::vector<int> M{1, 5, 10, 15, 50};
  std::string out = "out";
  bool svg = false;
  /// Empty disables the corrector cache.
  std::string cache;

  int steps() const;
  int coarse_n() const { return 1 << q; }
  int ratio() const { return 1 << (p - q); }
};

void validate(const ExperimentConfig& config);

/// Preset for the kind and scale, then every key of `overrides` applied.
/// Keys: p q kmax kmin k tau T seed contrast-lo contrast-hi law block M
/// scale out svg cache.
ExperimentConfig resolve_config(ExperimentKind kind, const nlohmann::json& overrides);

nlohmann::json to_json(const ExperimentConfig& config);

struct ErrorRow {
  double param = 0.0;
  double rel_h1_final = 0.0;
  double rel_l2h1 = 0.0;
  double runtime_s = 0.0;
  std::string method;
};

struct ErrorReport {
  ExperimentKind kind = ExperimentKind::exp_k;
  std::string param_name;
  std::vector<ErrorRow> rows;
  double wall_clock_s = 0.0;
  int cache_hits = 0;
  int cache_misses = 0;
  nlohmann::json config;
};

/// Two independent fields A, B on the fine mesh from one seed.
Problem make_random_problem(int p, int q, std::uint64_t seed, double lo, double hi, CoefficientLaw law, int block);

ErrorReport run_exp_k(const ExperimentConfig& config);
ErrorReport run_exp_H(const ExperimentConfig& config);
ErrorReport run_exp_rb(const ExperimentConfig& config);
ErrorReport run_experiment(const ExperimentConfig& config);

/// param,rel_h1_final,rel_l2h1,runtime_s,method
std::string report_csv(const ErrorReport& report);
/// Log-scale line plot, one polyline per method.
std::string report_svg(const ErrorReport& report);
nlohmann::json report_meta(const ErrorReport& report);

/// Writes <out>/<experiment>.csv, <experiment>_meta.json and optionally
/// <experiment>.svg. Returns the written paths.
std::vector<std::string> emit(const ErrorReport& report, const std::string& out_dir, bool svg);

}  // namespace sdwave
