#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/metrics.hpp"
#include "sloshfree/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace sloshfree {

namespace detail {

/// Shortest round-trippable decimal representation.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline Eigen::Vector4d quaternion_wxyz(const Mat3& R) {
  Eigen::Quaterniond q(R);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical sign for stable output
  return {q.w(), q.x(), q.y(), q.z()};
}

inline nlohmann::json to_json_array(const VecX& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace detail

/// Per-step trace of a run as CSV, one row per control instant.
inline void write_run_csv(const std::filesystem::path& path, const RunLog& log, int n) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  out << "t";
  for (int i = 0; i < n; ++i) out << ",q" << i;
  for (int i = 0; i < n; ++i) out << ",qd" << i;
  for (int i = 0; i < n; ++i) out << ",qdd" << i;
  for (int i = 0; i < 6; ++i) out << ",d" << i;
  out << ",pex,pey,pez,prx,pry,prz,e_p,e_sf,qew,qex,qey,qez,qrw,qrx,qry,qrz,degenerate\n";
  for (const StepRecord& s : log.steps) {
    out << detail::fmt(s.t);
    for (int i = 0; i < n; ++i) out << ',' << detail::fmt(s.state.q(i));
    for (int i = 0; i < n; ++i) out << ',' << detail::fmt(s.state.qd(i));
    for (int i = 0; i < n; ++i) out << ',' << detail::fmt(s.state.qdd(i));
    for (int i = 0; i < 6; ++i) out << ',' << detail::fmt(s.slack(i));
    for (int i = 0; i < 3; ++i) out << ',' << detail::fmt(s.ee.p(i));
    for (int i = 0; i < 3; ++i) out << ',' << detail::fmt(s.p_ref(i));
    out << ',' << detail::fmt(s.e_p) << ',' << detail::fmt(s.e_sf);
    const Eigen::Vector4d qe = detail::quaternion_wxyz(s.ee.R);
    const Eigen::Vector4d qr = detail::quaternion_wxyz(s.R_ref);
    for (int i = 0; i < 4; ++i) out << ',' << detail::fmt(qe(i));
    for (int i = 0; i < 4; ++i) out << ',' << detail::fmt(qr(i));
    out << ',' << (s.ref_degenerate || s.esf_degenerate ? 1 : 0) << '\n';
  }
}

/// Metrics summary of one run, including a provenance block that restates the
/// exact controller parameters the run used.
inline nlohmann::json metrics_json(const RunMetrics& m, const ExperimentConfig& cfg) {
  const double rad_to_deg = 180.0 / std::numbers::pi;
  nlohmann::json j;
  j["E_p"] = m.E_p;
  j["E_sf"] = m.E_sf;
  j["max_e_sf"] = m.max_e_sf;
  j["max_e_sf_deg"] = m.max_e_sf * rad_to_deg;
  j["Sl"] = m.Sl;
  j["infeasible"] = m.infeasible;
  j["mode"] = mode_name(cfg.mode);
  j["T"] = cfg.trajectory.duration();
  j["trajectory"] = cfg.trajectory.kind();
  j["eps_sf_deg"] = cfg.eps_sf_deg;
  j["within_eps_sf"] = m.max_e_sf * rad_to_deg <= cfg.eps_sf_deg;
  j["timing"] = {{"mean_step_us", m.mean_step_us}, {"p99_step_us", m.p99_step_us}};
  j["provenance"] = {
      {"k_task", detail::to_json_array(cfg.gains.k_task)},
      {"k_vel", detail::to_json_array(cfg.gains.k_vel)},
      {"w_q", detail::to_json_array(cfg.weights.w_q)},
      {"w_qd", detail::to_json_array(cfg.weights.w_qd)},
      {"w_qdd", detail::to_json_array(cfg.weights.w_qdd)},
      {"w_slack", detail::to_json_array(cfg.weights.w_slack)},
      {"dt", cfg.dt},
      {"psi", cfg.flatness.psi},
      {"slack_tol", cfg.slack_tol},
      {"transient", cfg.transient},
  };
  return j;
}

inline void write_metrics_json(const std::filesystem::path& path, const RunMetrics& m,
                               const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  out << metrics_json(m, cfg).dump(2) << '\n';
}

/// One row of a sweep result table.
struct SweepRow {
  double T = 0.0;
  std::string mode;
  RunMetrics metrics;
  bool ok = true;
  std::string error;  // non-empty when ok == false
};

inline void write_sweep_csv(const std::filesystem::path& path,
                            const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  out << "T,mode,E_p,E_sf,max_e_sf,Sl,infeasible,status\n";
  for (const SweepRow& r : rows) {
    out << detail::fmt(r.T) << ',' << r.mode << ',';
    if (r.ok) {
      out << detail::fmt(r.metrics.E_p) << ',' << detail::fmt(r.metrics.E_sf) << ','
          << detail::fmt(r.metrics.max_e_sf) << ',' << detail::fmt(r.metrics.Sl) << ','
          << (r.metrics.infeasible ? 1 : 0) << ",ok\n";
    } else {
      out << "nan,nan,nan,nan,1,failed\n";
    }
  }
}

/// Minimal self-contained SVG line plot: one polyline per series over a
/// shared linear axis pair, with optional shaded x-intervals (used to mark
/// the navigation times whose runs needed slack).
struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

inline void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           const std::vector<SvgSeries>& series,
                           const std::vector<std::pair<double, double>>& shaded_x = {}) {
  constexpr double W = 720, H = 480;
  constexpr double ml = 80, mr = 30, mt = 50, mb = 60;  // margins
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const SvgSeries& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (first) {
        x_min = x_max = x;
        y_min = y_max = y;
        first = false;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  if (x_max - x_min < 1e-12) x_max = x_min + 1.0;
  if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
  y_min = std::min(y_min, 0.0);  // anchor metric plots at zero
  const double y_pad = 0.05 * (y_max - y_min);
  y_max += y_pad;
  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y_min) / (y_max - y_min) * (H - mt - mb); };

  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  for (const auto& [a, b] : shaded_x) {
    const double x0 = px(std::max(a, x_min)), x1 = px(std::min(b, x_max));
    if (x1 > x0)
      out << "<rect x='" << x0 << "' y='" << mt << "' width='" << x1 - x0 << "' height='"
          << H - mt - mb << "' fill='#fdd' opacity='0.6'/>\n";
  }
  // axes and ticks
  out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", xv);
    out << "<text x='" << px(xv) << "' y='" << H - mb + 20
        << "' font-size='12' text-anchor='middle'>" << buf << "</text>\n";
    out << "<line x1='" << px(xv) << "' y1='" << H - mb << "' x2='" << px(xv) << "' y2='"
        << H - mb + 5 << "' stroke='black'/>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", yv);
    out << "<text x='" << ml - 10 << "' y='" << py(yv) + 4
        << "' font-size='12' text-anchor='end'>" << buf << "</text>\n";
    out << "<line x1='" << ml - 5 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='" << py(yv)
        << "' stroke='black'/>\n";
  }
  out << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 15
      << "' font-size='14' text-anchor='middle'>" << x_label << "</text>\n";
  out << "<text x='20' y='" << (mt + H - mb) / 2
      << "' font-size='14' text-anchor='middle' transform='rotate(-90 20 "
      << (mt + H - mb) / 2 << ")'>" << y_label << "</text>\n";
  out << "<text x='" << W / 2 << "' y='25' font-size='16' text-anchor='middle'>" << title
      << "</text>\n";
  double legend_y = mt + 10;
  for (const SvgSeries& s : series) {
    out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='2' points='";
    for (const auto& [x, y] : s.points)
      if (std::isfinite(x) && std::isfinite(y)) out << px(x) << ',' << py(y) << ' ';
    out << "'/>\n";
    for (const auto& [x, y] : s.points)
      if (std::isfinite(x) && std::isfinite(y))
        out << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3' fill='" << s.color
            << "'/>\n";
    out << "<line x1='" << W - mr - 150 << "' y1='" << legend_y << "' x2='" << W - mr - 120
        << "' y2='" << legend_y << "' stroke='" << s.color << "' stroke-width='2'/>\n";
    out << "<text x='" << W - mr - 114 << "' y='" << legend_y + 4 << "' font-size='12'>"
        << s.name << "</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
}

}  // namespace sloshfree
