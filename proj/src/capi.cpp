#include "sdwave/sdwave.h"

#include "error.hpp"
#include "evolution.hpp"
#include "harness.hpp"
#include "lod.hpp"
#include "rb.hpp"

#include <fstream>
#include <mutex>
#include <optional>
#include <string>

struct sdw_problem {
  sdwave::Problem problem;
};

struct sdw_correctors {
  sdwave::CorrectorSet set;
  mutable std::mutex mutex;
  mutable std::optional<sdwave::TransientCorrectors> transient;
};

struct sdw_trajectory {
  sdwave::Trajectory trajectory;
};

struct sdw_report {
  sdwave::ErrorReport report;
  std::string config_json;
  std::string out;
  bool svg = false;
};

namespace {

thread_local std::string last_error;

sdw_status code_of(sdwave::ErrorCode code) {
  switch (code) {
    case sdwave::ErrorCode::invalid_argument: return SDW_INVALID_ARGUMENT;
    case sdwave::ErrorCode::singular_system: return SDW_SINGULAR_SYSTEM;
    case sdwave::ErrorCode::degenerate_constraint: return SDW_DEGENERATE_CONSTRAINT;
    case sdwave::ErrorCode::empty_basis: return SDW_EMPTY_BASIS;
    case sdwave::ErrorCode::io: return SDW_IO;
    case sdwave::ErrorCode::config: return SDW_CONFIG;
  }
  return SDW_INTERNAL;
}

template <class F>
sdw_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SDW_OK;
  } catch (const sdwave::Error& e) {
    last_error = e.what();
    return code_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return SDW_INTERNAL;
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw sdwave::Error(sdwave::ErrorCode::invalid_argument, std::string(what) + " is null");
}

sdwave::FormChoice form_of(sdw_form form) {
  switch (form) {
    case SDW_FORM_A_PLUS_TAU_B: return sdwave::FormChoice::a_plus_tau_b;
    case SDW_FORM_A_ONLY: return sdwave::FormChoice::a_only;
    case SDW_FORM_B_ONLY: return sdwave::FormChoice::b_only;
  }
  throw sdwave::Error(sdwave::ErrorCode::invalid_argument, "unknown corrector form");
}

const sdwave::TransientCorrectors& transient_for(const sdw_problem* p, const sdw_correctors* c, int steps) {
  std::lock_guard lock(c->mutex);
  if (!c->transient || c->transient->horizon != steps)
    c->transient = sdwave::compute_all_transient_correctors(p->problem, c->set, steps);
  return *c->transient;
}

}  // namespace

extern "C" {

const char* sdw_version(void) { return "0.1.0"; }

const char* sdw_last_error(void) { return last_error.c_str(); }

const char* sdw_status_name(sdw_status status) {
  switch (status) {
    case SDW_OK: return "ok";
    case SDW_INVALID_ARGUMENT: return "invalid argument";
    case SDW_SINGULAR_SYSTEM: return "singular system";
    case SDW_DEGENERATE_CONSTRAINT: return "degenerate constraint";
    case SDW_EMPTY_BASIS: return "empty basis";
    case SDW_IO: return "i/o error";
    case SDW_CONFIG: return "configuration error";
    case SDW_INTERNAL: return "internal error";
  }
  return "unknown status";
}

sdw_status sdw_problem_create(int p, int q, uint64_t seed, double lo, double hi, const char* law, int block,
                              sdw_problem** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const auto l = law ? sdwave::parse_law(law) : sdwave::CoefficientLaw::log_uniform;
    *out = new sdw_problem{sdwave::make_random_problem(p, q, seed, lo, hi, l, block)};
  });
}

sdw_status sdw_problem_create_fields(int p, int q, const double* A, const double* B, size_t count,
                                     sdw_problem** out) {
  return guarded([&] {
    need(out, "out");
    need(A, "A");
    need(B, "B");
    *out = nullptr;
    sdwave::require(q >= 1 && p >= q && p <= 12, "need 1 <= q <= p <= 12");
    const int n = 1 << p;
    sdwave::require(count == static_cast<size_t>(2 * n * n), "field length must be 2 * 4^p");
    sdwave::CoefficientField a(n, std::vector<double>(A, A + count));
    sdwave::CoefficientField b(n, std::vector<double>(B, B + count));
    auto pair = sdwave::refine(sdwave::build_uniform_mesh(1 << q), 1 << (p - q));
    *out = new sdw_problem{sdwave::make_problem(std::move(pair), std::move(a), std::move(b))};
  });
}

void sdw_problem_destroy(sdw_problem* problem) { delete problem; }

sdw_status sdw_problem_sizes(const sdw_problem* problem, int* fine_dofs, int* coarse_dofs) {
  return guarded([&] {
    need(problem, "problem");
    if (fine_dofs) *fine_dofs = problem->problem.fine_dofs();
    if (coarse_dofs) *coarse_dofs = problem->problem.coarse_dofs();
  });
}

sdw_status sdw_problem_saturation(const sdw_problem* problem, int* k) {
  return guarded([&] {
    need(problem, "problem");
    need(k, "k");
    *k = sdwave::saturation_layers(problem->problem.pair.coarse);
  });
}

sdw_status sdw_correctors_build(const sdw_problem* problem, int k, double tau, sdw_form form,
                                sdw_correctors** out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    *out = nullptr;
    auto c = std::make_unique<sdw_correctors>();
    c->set = sdwave::build_corrector_set(problem->problem, sdwave::CorrectorConfig{k, tau, form_of(form)});
    *out = c.release();
  });
}

void sdw_correctors_destroy(sdw_correctors* correctors) { delete correctors; }

sdw_status sdw_fine_solve(const sdw_problem* problem, double f, double tau, int steps, sdw_trajectory** out) {
  return guarded([&] {
    need(problem, "problem");
    need(out, "out");
    *out = nullptr;
    const sdwave::Vector zero = sdwave::Vector::Zero(problem->problem.fine_dofs());
    *out = new sdw_trajectory{sdwave::fine_fem_solve(problem->problem, sdwave::constant_source(f), zero, zero,
                                                     sdwave::TimeGrid{tau, steps})};
  });
}

sdw_status sdw_lod_solve(const sdw_problem* problem, const sdw_correctors* correctors, double f, int steps, int rb_m,
                         sdw_trajectory** out) {
  return guarded([&] {
    need(problem, "problem");
    need(correctors, "correctors");
    need(out, "out");
    *out = nullptr;
    const sdwave::TimeGrid grid{correctors->set.config.tau, steps};
    sdwave::validate(grid);
    const sdwave::Vector zero = sdwave::Vector::Zero(problem->problem.coarse_dofs());
    const auto& transient = transient_for(problem, correctors, steps);
    const auto source = sdwave::constant_source(f);
    if (rb_m < 0)
      *out = new sdw_trajectory{
          sdwave::localized_gfem_solve(problem->problem, correctors->set, transient, source, grid, zero, zero)};
    else
      *out = new sdw_trajectory{
          sdwave::rb_gfem_solve(problem->problem, correctors->set, transient, source, grid, zero, zero, rb_m)};
  });
}

sdw_status sdw_ideal_solve(const sdw_problem* problem, const sdw_correctors* correctors, double f, int steps,
                           sdw_trajectory** out) {
  return guarded([&] {
    need(problem, "problem");
    need(correctors, "correctors");
    need(out, "out");
    *out = nullptr;
    const sdwave::Vector zero = sdwave::Vector::Zero(problem->problem.coarse_dofs());
    *out = new sdw_trajectory{sdwave::ideal_gfem_solve(problem->problem, correctors->set, sdwave::constant_source(f),
                                                       sdwave::TimeGrid{correctors->set.config.tau, steps}, zero,
                                                       zero)};
  });
}

void sdw_trajectory_destroy(sdw_trajectory* trajectory) { delete trajectory; }

sdw_status sdw_trajectory_size(const sdw_trajectory* trajectory, int* steps, int* dofs) {
  return guarded([&] {
    need(trajectory, "trajectory");
    const auto& t = trajectory->trajectory;
    if (steps) *steps = static_cast<int>(t.states.size()) - 1;
    if (dofs) *dofs = t.states.empty() ? 0 : static_cast<int>(t.states.front().size());
  });
}

sdw_status sdw_trajectory_state(const sdw_trajectory* trajectory, int n, double* out, size_t len) {
  return guarded([&] {
    need(trajectory, "trajectory");
    need(out, "out");
    const auto& states = trajectory->trajectory.states;
    sdwave::require(n >= 0 && static_cast<size_t>(n) < states.size(), "step index out of range");
    const auto& u = states[static_cast<size_t>(n)];
    sdwave::require(len == static_cast<size_t>(u.size()), "buffer length must equal the dof count");
    std::copy(u.data(), u.data() + u.size(), out);
  });
}

sdw_status sdw_trajectory_norms(const sdw_problem* problem, const sdw_trajectory* trajectory, int n, double* l2,
                                double* h1) {
  return guarded([&] {
    need(problem, "problem");
    need(trajectory, "trajectory");
    const auto& states = trajectory->trajectory.states;
    sdwave::require(n >= 0 && static_cast<size_t>(n) < states.size(), "step index out of range");
    sdwave::require(states[static_cast<size_t>(n)].size() == problem->problem.fine_dofs(),
                    "trajectory does not belong to this problem");
    const auto r = sdwave::norms(problem->problem.forms, states[static_cast<size_t>(n)]);
    if (l2) *l2 = r.l2;
    if (h1) *h1 = r.h1;
  });
}

sdw_status sdw_relative_error(const sdw_problem* problem, const sdw_trajectory* reference,
                              const sdw_trajectory* approx, double* rel_h1_final, double* rel_l2h1) {
  return guarded([&] {
    need(problem, "problem");
    need(reference, "reference");
    need(approx, "approx");
    const auto e = sdwave::relative_error(problem->problem.forms, reference->trajectory, approx->trajectory);
    if (rel_h1_final) *rel_h1_final = e.rel_h1_final;
    if (rel_l2h1) *rel_l2h1 = e.rel_l2h1;
  });
}

sdw_status sdw_trajectory_write_csv(const sdw_problem* problem, const sdw_trajectory* trajectory, const char* path) {
  return guarded([&] {
    need(problem, "problem");
    need(trajectory, "trajectory");
    need(path, "path");
    std::ofstream os(path);
    if (!os) throw sdwave::Error(sdwave::ErrorCode::io, std::string("cannot open ") + path);
    sdwave::write_trajectory_csv(os, problem->problem.forms, trajectory->trajectory);
    if (!os) throw sdwave::Error(sdwave::ErrorCode::io, std::string("write failed: ") + path);
  });
}

sdw_status sdw_experiment_run(const char* experiment, const char* config_json, sdw_report** out) {
  return guarded([&] {
    need(experiment, "experiment");
    need(out, "out");
    *out = nullptr;
    const auto kind = sdwave::parse_experiment(experiment);
    nlohmann::json overrides = nlohmann::json::object();
    if (config_json && *config_json) {
      try {
        overrides = nlohmann::json::parse(config_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw sdwave::Error(sdwave::ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
      }
    }
    const auto config = sdwave::resolve_config(kind, overrides);
    auto r = std::make_unique<sdw_report>();
    r->report = sdwave::run_experiment(config);
    r->config_json = sdwave::to_json(config).dump();
    r->out = config.out;
    r->svg = config.svg;
    *out = r.release();
  });
}

void sdw_report_destroy(sdw_report* report) { delete report; }

sdw_status sdw_report_rows(const sdw_report* report, size_t* count) {
  return guarded([&] {
    need(report, "report");
    need(count, "count");
    *count = report->report.rows.size();
  });
}

sdw_status sdw_report_row(const sdw_report* report, size_t i, double* param, double* rel_h1_final, double* rel_l2h1,
                          double* runtime_s, const char** method) {
  return guarded([&] {
    need(report, "report");
    sdwave::require(i < report->report.rows.size(), "row index out of range");
    const auto& r = report->report.rows[i];
    if (param) *param = r.param;
    if (rel_h1_final) *rel_h1_final = r.rel_h1_final;
    if (rel_l2h1) *rel_l2h1 = r.rel_l2h1;
    if (runtime_s) *runtime_s = r.runtime_s;
    if (method) *method = r.method.c_str();
  });
}

sdw_status sdw_report_stats(const sdw_report* report, double* wall_clock_s, int* cache_hits, int* cache_misses) {
  return guarded([&] {
    need(report, "report");
    if (wall_clock_s) *wall_clock_s = report->report.wall_clock_s;
    if (cache_hits) *cache_hits = report->report.cache_hits;
    if (cache_misses) *cache_misses = report->report.cache_misses;
  });
}

const char* sdw_report_config(const sdw_report* report) { return report ? report->config_json.c_str() : ""; }

sdw_status sdw_report_write(const sdw_report* report, const char* out_dir, int svg) {
  return guarded([&] {
    need(report, "report");
    sdwave::emit(report->report, out_dir ? std::string(out_dir) : report->out, svg < 0 ? report->svg : svg != 0);
  });
}

}  // extern "C"
