#include <sdwave/sdwave.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Options {
  std::string config_file;
  std::optional<int> p, q, kmin, kmax, k, block;
  std::optional<double> tau, T, lo, hi;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> law, M, scale, out, cache;
  bool svg = false;
};

void add_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_file, "JSON file with the same keys as the flags")->check(CLI::ExistingFile);
  cmd->add_option("--p", o.p, "fine mesh exponent, h = 2^-p");
  cmd->add_option("--q", o.q, "coarse mesh exponent, H = 2^-q (exp-H: finest level)");
  cmd->add_option("--kmin", o.kmin, "smallest patch size (exp-k)");
  cmd->add_option("--kmax", o.kmax, "largest patch size (exp-k)");
  cmd->add_option("--k", o.k, "patch size; 0 picks ceil(log2(1/H))");
  cmd->add_option("--tau", o.tau, "time step");
  cmd->add_option("--T", o.T, "final time");
  cmd->add_option("--seed", o.seed, "coefficient seed");
  cmd->add_option("--contrast-lo", o.lo, "lower coefficient bound");
  cmd->add_option("--contrast-hi", o.hi, "upper coefficient bound");
  cmd->add_option("--law", o.law, "uniform|loguniform")->check(CLI::IsMember({"uniform", "loguniform"}));
  cmd->add_option("--block", o.block, "coefficient block size in fine cells, 0 = per element");
  cmd->add_option("--M", o.M, "comma separated reduced basis sizes (exp-rb)");
  cmd->add_option("--scale", o.scale, "desk|paper preset")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--cache", o.cache, "corrector cache directory");
  cmd->add_flag("--svg", o.svg, "also write an SVG plot");
}

nlohmann::json merged_config(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    j = nlohmann::json::parse(in);
    if (!j.is_object()) throw std::runtime_error(o.config_file + ": expected a JSON object");
  }
  auto set = [&j](const char* key, const auto& value) {
    if (value) j[key] = *value;
  };
  set("p", o.p);
  set("q", o.q);
  set("kmin", o.kmin);
  set("kmax", o.kmax);
  set("k", o.k);
  set("tau", o.tau);
  set("T", o.T);
  set("seed", o.seed);
  set("contrast-lo", o.lo);
  set("contrast-hi", o.hi);
  set("law", o.law);
  set("block", o.block);
  set("M", o.M);
  set("scale", o.scale);
  set("out", o.out);
  set("cache", o.cache);
  if (o.svg) j["svg"] = true;
  return j;
}

int fail(sdw_status status) {
  std::fprintf(stderr, "sdwave: %s: %s\n", sdw_status_name(status), sdw_last_error());
  return 1;
}

int run(const std::string& experiment, const Options& o) {
  nlohmann::json config;
  try {
    config = merged_config(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sdwave: configuration error: %s\n", e.what());
    return 2;
  }
  sdw_report* report = nullptr;
  if (sdw_status s = sdw_experiment_run(experiment.c_str(), config.dump().c_str(), &report); s != SDW_OK) {
    const int rc = fail(s);
    return s == SDW_CONFIG ? 2 : rc;
  }
  size_t rows = 0;
  sdw_report_rows(report, &rows);
  std::printf("%-14s %12s %14s %14s %10s\n", "method", "param", "rel_h1_final", "rel_l2h1", "runtime_s");
  for (size_t i = 0; i < rows; ++i) {
    double param, h1, l2h1, runtime;
    const char* method = nullptr;
    sdw_report_row(report, i, &param, &h1, &l2h1, &runtime, &method);
    std::printf("%-14s %12g %14.6e %14.6e %10.3f\n", method, param, h1, l2h1, runtime);
  }
  double wall = 0;
  int hits = 0, misses = 0;
  sdw_report_stats(report, &wall, &hits, &misses);
  std::printf("wall clock %.2f s, corrector cache %d hits / %d misses\n", wall, hits, misses);
  const sdw_status s = sdw_report_write(report, nullptr, -1);
  if (s == SDW_OK) {
    const auto resolved = nlohmann::json::parse(sdw_report_config(report));
    std::printf("wrote %s/%s.csv\n", resolved["out"].get<std::string>().c_str(), experiment.c_str());
  }
  sdw_report_destroy(report);
  return s == SDW_OK ? 0 : fail(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale experiments for the strongly damped wave equation"};
  app.set_version_flag("--version", std::string(sdw_version()));
  app.require_subcommand(1);

  Options k_opts, h_opts, rb_opts;
  CLI::App* exp_k = app.add_subcommand("exp-k", "error of the localized method against the ideal one over k");
  CLI::App* exp_h = app.add_subcommand("exp-H", "error against fine FEM over coarse mesh sizes");
  CLI::App* exp_rb = app.add_subcommand("exp-rb", "reduced basis gap over M");
  add_options(exp_k, k_opts);
  add_options(exp_h, h_opts);
  add_options(exp_rb, rb_opts);

  CLI11_PARSE(app, argc, argv);

  if (exp_k->parsed()) return run("exp-k", k_opts);
  if (exp_h->parsed()) return run("exp-H", h_opts);
  return run("exp-rb", rb_opts);
}
