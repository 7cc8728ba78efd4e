#include "harness.hpp"
#include "error.hpp"

#include <doctest.h>

#include <map>
#include <sstream>
#include <vector>

using namespace sdwave;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

// Drops the runtime_s column.
std::string without_runtime(const std::string& csv) {
  std::string out;
  for (const std::string& line : lines_of(csv)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    REQUIRE(cols.size() == 5);
    out += cols[0] + "," + cols[1] + "," + cols[2] + "," + cols[4] + "\n";
  }
  return out;
}

// Tags open and close in order; self-closing and declarations are skipped.
bool balanced_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const std::size_t j = s.find('>', i);
    if (j == std::string::npos) return false;
    const std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!' || tag.back() == '/') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
  }
  return stack.empty();
}

ExperimentConfig tiny_exp_k() {
  return resolve_config(ExperimentKind::exp_k,
                        json{{"p", 4}, {"q", 2}, {"kmin", 1}, {"kmax", 2}, {"T", 0.1}, {"seed", 3}});
}

}  // namespace

TEST_CASE("random field is deterministic and in range") {
  const Mesh mesh = build_uniform_mesh(8);
  for (CoefficientLaw law : {CoefficientLaw::uniform, CoefficientLaw::log_uniform}) {
    const CoefficientField a = random_field(mesh, 0.5, 50.0, 7, law, 0);
    const CoefficientField b = random_field(mesh, 0.5, 50.0, 7, law, 0);
    const CoefficientField c = random_field(mesh, 0.5, 50.0, 8, law, 0);
    CHECK(a.values() == b.values());
    CHECK(a.values() != c.values());
    for (double v : a.values()) {
      CHECK(v >= 0.5);
      CHECK(v <= 50.0);
    }
  }
  CHECK_THROWS_AS(random_field(mesh, 2.0, 2.0, 1, CoefficientLaw::uniform, 0), Error);
  CHECK_THROWS_AS(random_field(mesh, 0.0, 2.0, 1, CoefficientLaw::log_uniform, 0), Error);
}

TEST_CASE("blocked random field is constant on blocks") {
  const NestedMeshPair pair = refine(build_uniform_mesh(2), 4);
  const Mesh& mesh = pair.fine;
  const CoefficientField a = random_field(mesh, 1.0, 10.0, 1, CoefficientLaw::uniform, 4);
  const int cells = mesh.n * mesh.n;
  REQUIRE(static_cast<int>(a.size()) == 2 * cells);
  // Both triangles of every cell in the same 4 x 4 block share one value.
  std::map<std::pair<int, int>, double> seen;
  for (int e = 0; e < 2 * cells; ++e) {
    const int cell = e / 2;
    const std::pair<int, int> block{(cell % mesh.n) / 4, (cell / mesh.n) / 4};
    auto [it, fresh] = seen.emplace(block, a[static_cast<std::size_t>(e)]);
    if (!fresh) CHECK(it->second == a[static_cast<std::size_t>(e)]);
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("law and experiment names") {
  CHECK(parse_law("uniform") == CoefficientLaw::uniform);
  CHECK(parse_law("log-uniform") == CoefficientLaw::log_uniform);
  CHECK(parse_law(law_name(CoefficientLaw::log_uniform)) == CoefficientLaw::log_uniform);
  CHECK_THROWS_AS(parse_law("gaussian"), Error);
  for (ExperimentKind k : {ExperimentKind::exp_k, ExperimentKind::exp_H, ExperimentKind::exp_rb})
    CHECK(parse_experiment(experiment_name(k)) == k);
  CHECK_THROWS_AS(parse_experiment("exp-z"), Error);
}

TEST_CASE("config presets and overrides") {
  const ExperimentConfig desk = resolve_config(ExperimentKind::exp_k, json::object());
  CHECK(desk.p == 6);
  CHECK(desk.kmax == 6);
  CHECK(desk.steps() == 50);
  const ExperimentConfig paper = resolve_config(ExperimentKind::exp_H, json{{"scale", "paper"}});
  CHECK(paper.p == 8);
  CHECK(paper.q == 6);
  const ExperimentConfig over = resolve_config(ExperimentKind::exp_rb, json{{"scale", "paper"}, {"p", 7}, {"M", "2,4"}});
  CHECK(over.p == 7);
  CHECK(over.M == std::vector<int>{2, 4});
  CHECK(resolve_config(ExperimentKind::exp_rb, json{{"M", 3}}).M == std::vector<int>{3});
  CHECK(resolve_config(ExperimentKind::exp_k, json{{"contrast-lo", 1.0}, {"contrast-hi", 1e4}}).hi == 1e4);

  const auto rejects = [](const json& j) {
    try {
      resolve_config(ExperimentKind::exp_k, j);
    } catch (const Error& e) {
      return e.code() == ErrorCode::config;
    }
    return false;
  };
  CHECK(rejects(json{{"bogus", 1}}));
  CHECK(rejects(json{{"tau", -1.0}}));
  CHECK(rejects(json{{"tau", 0.03}}));
  CHECK(rejects(json{{"p", 13}}));
  CHECK(rejects(json{{"scale", "huge"}}));
  CHECK(rejects(json{{"p", "six"}}));
  CHECK(rejects(json{{"contrast-lo", 5.0}, {"contrast-hi", 1.0}}));
}

TEST_CASE("config survives a json round trip") {
  const ExperimentConfig c = resolve_config(ExperimentKind::exp_rb, json{{"seed", 9}, {"block", 2}});
  json j = to_json(c);
  j.erase("experiment");
  const ExperimentConfig back = resolve_config(ExperimentKind::exp_rb, j);
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("csv and svg output") {
  ErrorReport empty;
  empty.param_name = "k";
  CHECK(lines_of(report_csv(empty)) == std::vector<std::string>{"param,rel_h1_final,rel_l2h1,runtime_s,method"});
  CHECK(balanced_xml(report_svg(empty)));

  ErrorReport r;
  r.param_name = "k";
  r.rows = {{1, 0.5, 0.4, 0.1, "gfem"}, {2, 0.05, 0.04, 0.2, "gfem"}, {3, 0.005, 0.004, 0.3, "a<b&c"}};
  CHECK(lines_of(report_csv(r)).size() == 4);
  const std::string svg = report_svg(r);
  CHECK(balanced_xml(svg));
  CHECK(svg.find("a&lt;b&amp;c") != std::string::npos);
  const json meta = report_meta(r);
  CHECK(meta.at("rows") == 3);
  CHECK(meta.contains("wall_clock_s"));
}

TEST_CASE("experiment runs are deterministic apart from timings") {
  const ExperimentConfig c = tiny_exp_k();
  const ErrorReport a = run_experiment(c);
  const ErrorReport b = run_experiment(c);
  REQUIRE(a.rows.size() == 2);
  CHECK(without_runtime(report_csv(a)) == without_runtime(report_csv(b)));
  CHECK(a.rows[1].rel_l2h1 < a.rows[0].rel_l2h1);
  for (const ErrorRow& row : a.rows) CHECK(row.method == "gfem");
}
