#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neuromap/capture.hpp"
#include "neuromap/metrics.hpp"
#include "neuromap/navigate.hpp"
#include "neuromap/world.hpp"

namespace neuromap {

// ---------------------------------------------------------------------------
// SVG

/// World -> drawing coordinates. y is flipped so the minimum corner of the
/// bounds lands at the bottom-left of the drawing viewport.
struct SvgTransform {
  EnvBounds bounds;
  double scale = 40.0;  // px per metre
  double margin = 20.0;

  static SvgTransform fit(const EnvBounds& b, double max_px = 900.0) {
    SvgTransform t;
    t.bounds = b;
    t.scale = std::min(60.0, max_px / std::max(b.width(), b.height()));
    return t;
  }

  double px(double x) const { return margin + (x - bounds.x_min) * scale; }
  double py(double y) const { return margin + (bounds.y_max - y) * scale; }
  double width() const { return 2 * margin + bounds.width() * scale; }
  double height() const { return 2 * margin + bounds.height() * scale; }
};

namespace svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '-': out += (out.size() && out.back() == '-') ? "&#45;" : "-"; break;  // no "--" inside comments
      default: out += c;
    }
  }
  return out;
}

}  // namespace svg

/// SVG document with the environment drawn underneath. Occupied cells are
/// merged into horizontal runs.
class SvgPlot {
 public:
  SvgPlot(const OccupancyGrid& grid, const std::string& provenance = {}) : t_(SvgTransform::fit(grid.bounds())) {
    body_ += "<!-- " + svg::escape(provenance) + " -->\n";
    const auto& b = t_.bounds;
    body_ += "<rect class=\"bounds\" x=\"" + svg::num(t_.px(b.x_min)) + "\" y=\"" + svg::num(t_.py(b.y_max)) +
             "\" width=\"" + svg::num(b.width() * t_.scale) + "\" height=\"" + svg::num(b.height() * t_.scale) +
             "\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>\n";
    const double res = grid.resolution();
    for (int j = 0; j < grid.height(); ++j) {
      int i = 0;
      while (i < grid.width()) {
        if (!grid.occupied(i, j)) {
          ++i;
          continue;
        }
        int end = i;
        while (end < grid.width() && grid.occupied(end, j)) ++end;
        const double x0 = grid.origin_x() + i * res;
        const double y1 = grid.origin_y() + (j + 1) * res;
        body_ += "<rect class=\"obstacle\" x=\"" + svg::num(t_.px(x0)) + "\" y=\"" + svg::num(t_.py(y1)) +
                 "\" width=\"" + svg::num((end - i) * res * t_.scale) + "\" height=\"" + svg::num(res * t_.scale) +
                 "\" fill=\"#555555\"/>\n";
        i = end;
      }
    }
  }

  const SvgTransform& transform() const { return t_; }

  void marker(const std::string& cls, double x, double y, double radius_px, const std::string& colour) {
    body_ += "<circle class=\"" + cls + "\" cx=\"" + svg::num(t_.px(x)) + "\" cy=\"" + svg::num(t_.py(y)) + "\" r=\"" +
             svg::num(radius_px) + "\" fill=\"" + colour + "\"/>\n";
  }

  void polyline(const std::string& cls, const std::vector<std::pair<double, double>>& pts, const std::string& colour) {
    if (pts.empty()) return;
    body_ += "<polyline class=\"" + cls + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k) body_ += ' ';
      body_ += svg::num(t_.px(pts[k].first)) + "," + svg::num(t_.py(pts[k].second));
    }
    body_ += "\"/>\n";
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg::num(t_.width()) + "\" height=\"" +
           svg::num(t_.height()) + "\" viewBox=\"0 0 " + svg::num(t_.width()) + " " + svg::num(t_.height()) + "\">\n" +
           body_ + "</svg>\n";
  }

 private:
  SvgTransform t_;
  std::string body_;
};

/// Sample positions in red over the map.
inline std::string coverage_svg(const EnvironmentSpec& env, const Dataset& d, const std::string& provenance = {}) {
  SvgPlot plot(env.grid, provenance);
  for (const Sample& s : d.samples) plot.marker("sample", s.pose.x(), s.pose.y(), 1.5, "red");
  return plot.str();
}

/// Ground-truth route in green, estimated route in blue, waypoints in red.
inline std::string route_svg(const EnvironmentSpec& env, const RouteTrace& trace, const std::vector<Waypoint>& waypoints,
                             const std::string& provenance = {}) {
  SvgPlot plot(env.grid, provenance);
  std::vector<std::pair<double, double>> truth, est;
  for (const auto& t : trace) {
    truth.emplace_back(t.truth.x(), t.truth.y());
    if (t.event == NavEvent::kEstimate) est.emplace_back(t.estimate.pose.x(), t.estimate.pose.y());
  }
  plot.polyline("truth", truth, "green");
  plot.polyline("estimate", est, "blue");
  for (const auto& w : waypoints) plot.marker("waypoint", w.x, w.y, 6.0, "red");
  return plot.str();
}

// ---------------------------------------------------------------------------
// Coverage summary

struct CoverageSummary {
  std::size_t free_cells = 0;     // coarse cells containing any free space
  std::size_t covered_cells = 0;  // of those, cells holding at least one sample
  double cell_size = 1.0;
  double fraction() const { return free_cells ? static_cast<double>(covered_cells) / static_cast<double>(free_cells) : 0.0; }
};

/// Histogram of sample positions over coarse cells of `cell_size` metres.
inline CoverageSummary coverage(const EnvironmentSpec& env, const Dataset& d, double cell_size = 1.0) {
  const auto& b = env.bounds;
  const int nx = std::max(1, static_cast<int>(std::ceil(b.width() / cell_size - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(b.height() / cell_size - 1e-9)));
  std::vector<char> has_free(static_cast<std::size_t>(nx * ny), 0), has_sample(static_cast<std::size_t>(nx * ny), 0);
  auto coarse = [&](double x, double y) {
    const int cx = std::clamp(static_cast<int>((x - b.x_min) / cell_size), 0, nx - 1);
    const int cy = std::clamp(static_cast<int>((y - b.y_min) / cell_size), 0, ny - 1);
    return static_cast<std::size_t>(cy * nx + cx);
  };
  const auto& g = env.grid;
  for (int j = 0; j < g.height(); ++j)
    for (int i = 0; i < g.width(); ++i)
      if (!g.occupied(i, j))
        has_free[coarse(g.origin_x() + (i + 0.5) * g.resolution(), g.origin_y() + (j + 0.5) * g.resolution())] = 1;
  for (const Sample& s : d.samples) has_sample[coarse(s.pose.x(), s.pose.y())] = 1;
  CoverageSummary c;
  c.cell_size = cell_size;
  for (std::size_t k = 0; k < has_free.size(); ++k) {
    c.free_cells += has_free[k] != 0;
    c.covered_cells += (has_free[k] != 0 && has_sample[k] != 0);
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON reports

inline nlohmann::ordered_json metrics_to_json(const Metrics& m, const std::string& estimator, const std::string& provenance = {}) {
  nlohmann::ordered_json j;
  if (!provenance.empty()) j["provenance"] = provenance;
  j["estimator"] = estimator;
  j["n"] = m.per_sample.size();
  j["mean_pos_err"] = m.mean_pos_err;
  j["mean_theta_err"] = m.mean_theta_err;
  j["median_pos_err"] = m.median_pos_err;
  j["median_theta_err"] = m.median_theta_err;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& e : m.per_sample) per.push_back({e.pos, e.theta});
  j["per_sample"] = per;
  return j;
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  try {
    Metrics m;
    m.mean_pos_err = j.at("mean_pos_err").get<double>();
    m.mean_theta_err = j.at("mean_theta_err").get<double>();
    m.median_pos_err = j.at("median_pos_err").get<double>();
    m.median_theta_err = j.at("median_theta_err").get<double>();
    for (const auto& e : j.at("per_sample")) m.per_sample.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("metrics JSON: ") + e.what());
  }
}

struct TableRow {
  std::string label;
  Metrics metrics;
};

/// Plain-text results table: mean and median position (m) / orientation (deg) error.
inline std::string render_table(const std::vector<TableRow>& rows) {
  std::size_t w = 9;
  for (const auto& r : rows) w = std::max(w, r.label.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %10s  %10s  %10s  %10s  %8s\n", static_cast<int>(w), "Estimator", "P (m)",
                "theta (deg)", "med P (m)", "med theta", "n");
  out += buf;
  out += std::string(w + 60, '-') + "\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %10.4f  %10.3f  %10.4f  %10.3f  %8zu\n", static_cast<int>(w), r.label.c_str(),
                  r.metrics.mean_pos_err, r.metrics.mean_theta_err, r.metrics.median_pos_err,
                  r.metrics.median_theta_err, r.metrics.per_sample.size());
    out += buf;
  }
  return out;
}

inline nlohmann::ordered_json nav_report_to_json(const NavResult& r, const std::vector<Waypoint>& wps,
                                                 const std::string& provenance = {}) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  if (!provenance.empty()) j["provenance"] = provenance;
  j["status"] = to_string(r.status);
  if (!r.message.empty()) j["message"] = r.message;
  j["success"] = r.report.success;
  j["ticks"] = r.report.ticks;
  j["mean_closest_true_dist"] = r.report.mean_closest_true_dist;
  j["mean_closest_est_dist"] = r.report.mean_closest_est_dist;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.report.waypoints.size(); ++i) {
    const auto& o = r.report.waypoints[i];
    per.push_back({{"x", wps[i].x},
                   {"y", wps[i].y},
                   {"reached", o.reached},
                   {"closest_true_dist", finite_or_null(o.closest_true_dist)},
                   {"closest_est_dist", finite_or_null(o.closest_est_dist)}});
  }
  j["waypoints"] = per;
  return j;
}

}  // namespace neuromap
