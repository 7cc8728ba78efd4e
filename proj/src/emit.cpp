#include "cache.hpp"
#include "error.hpp"
#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

namespace sdwave {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string report_csv(const ErrorReport& report) {
  std::string out = "param,rel_h1_final,rel_l2h1,runtime_s,method\n";
  for (const ErrorRow& r : report.rows) {
    out += fmt("%.17g", r.param) + ',' + fmt("%.17g", r.rel_h1_final) + ',' + fmt("%.17g", r.rel_l2h1) + ',' +
           fmt("%.6f", r.runtime_s) + ',' + r.method + '\n';
  }
  return out;
}

std::string report_svg(const ErrorReport& report) {
  const double width = 640, height = 420, left = 80, right = 150, top = 30, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  const bool log_x = report.kind == ExperimentKind::exp_H;
  const double floor_y = 1e-16;

  std::vector<std::string> methods;
  std::map<std::string, std::vector<const ErrorRow*>> series;
  for (const ErrorRow& r : report.rows) {
    if (!series.count(r.method)) methods.push_back(r.method);
    series[r.method].push_back(&r);
  }

  auto xv = [&](double p) { return log_x ? std::log10(std::max(p, 1e-300)) : p; };
  auto yv = [&](double e) { return std::log10(std::max(e, floor_y)); };
  double x0 = 0, x1 = 1, y0 = -1, y1 = 0;
  if (!report.rows.empty()) {
    x0 = x1 = xv(report.rows.front().param);
    y0 = y1 = yv(report.rows.front().rel_h1_final);
    for (const ErrorRow& r : report.rows) {
      x0 = std::min(x0, xv(r.param));
      x1 = std::max(x1, xv(r.param));
      y0 = std::min(y0, yv(r.rel_h1_final));
      y1 = std::max(y1, yv(r.rel_h1_final));
    }
  }
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1) y1 = y0 + 1;
  auto px = [&](double x) { return left + (xv(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double e) { return top + (y1 - yv(e)) / (y1 - y0) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d) {
    const double y = top + (y1 - d) / (y1 - y0) * ph;
    s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
      << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" font-size=\"11\" text-anchor=\"end\">1e" << d
      << "</text>\n";
  }
  std::vector<double> ticks;
  for (const ErrorRow& r : report.rows)
    if (std::find(ticks.begin(), ticks.end(), r.param) == ticks.end()) ticks.push_back(r.param);
  for (double t : ticks)
    s << "<text x=\"" << px(t) << "\" y=\"" << top + ph + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << fmt("%g", t) << "</text>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" font-size=\"13\" text-anchor=\"middle\">"
    << xml_escape(report.param_name) << "</text>\n";
  s << "<text x=\"20\" y=\"" << top + ph / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << top + ph / 2 << ")\">relative H1 error at T</text>\n";

  for (std::size_t m = 0; m < methods.size(); ++m) {
    const char* color = colors[m % std::size(colors)];
    std::vector<const ErrorRow*> rows = series[methods[m]];
    std::stable_sort(rows.begin(), rows.end(), [](const ErrorRow* a, const ErrorRow* b) { return a->param < b->param; });
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const ErrorRow* r : rows) s << px(r->param) << ',' << py(r->rel_h1_final) << ' ';
    s << "\"/>\n";
    for (const ErrorRow* r : rows)
      s << "<circle cx=\"" << px(r->param) << "\" cy=\"" << py(r->rel_h1_final) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(m);
    s << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\" font-size=\"12\">" << xml_escape(methods[m])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

nlohmann::json report_meta(const ErrorReport& report) {
  return nlohmann::json{{"experiment", experiment_name(report.kind)},
                        {"param", report.param_name},
                        {"rows", report.rows.size()},
                        {"wall_clock_s", report.wall_clock_s},
                        {"cache_hits", report.cache_hits},
                        {"cache_misses", report.cache_misses},
                        {"config", report.config}};
}

std::vector<std::string> emit(const ErrorReport& report, const std::string& out_dir, bool svg) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string stem = experiment_name(report.kind);
  std::vector<std::string> written;
  auto put = [&](const fs::path& path, const std::string& bytes) {
    atomic_write(path, bytes);
    written.push_back(path.string());
  };
  put(dir / (stem + ".csv"), report_csv(report));
  put(dir / (stem + "_meta.json"), report_meta(report).dump(2) + "\n");
  if (svg) put(dir / (stem + ".svg"), report_svg(report));
  return written;
}

}  // namespace sdwave
