#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/config.hpp"
#include "sloshfree/metrics.hpp"
#include "sloshfree/report.hpp"
#include "sloshfree/simulation.hpp"
#include "sloshfree/validate.hpp"

#include <atomic>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace sloshfree {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRunFailure = 2;
inline constexpr int kExitValidationFailure = 3;

/// Execute one closed-loop run described by a config file and write
/// run.csv + metrics.json into the output directory.
inline int cmd_run(const std::filesystem::path& config_path,
                   const std::filesystem::path& out_dir,
                   std::optional<ControlMode> mode_override = {},
                   std::optional<double> time_override = {}) {
  try {
    const ExperimentConfig cfg = load_experiment(config_path, mode_override, time_override);
    const RunLog log = run_experiment(cfg);
    const RunMetrics m = aggregate(log, cfg.transient, cfg.slack_tol);
    std::filesystem::create_directories(out_dir);
    write_run_csv(out_dir / "run.csv", log, cfg.model.n());
    write_metrics_json(out_dir / "metrics.json", m, cfg);
    std::cout << "run " << cfg.trajectory.kind() << " T=" << cfg.trajectory.duration()
              << " mode=" << mode_name(cfg.mode) << ": E_p=" << m.E_p << " E_sf=" << m.E_sf
              << " max_e_sf=" << m.max_e_sf * 180.0 / std::numbers::pi
              << " deg, Sl=" << m.Sl << (m.infeasible ? " [slack active]" : "") << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRunFailure;
  }
}

/// Run the same config over a grid of navigation times and modes; partial
/// failures are recorded per row and do not abort the sweep.
inline int cmd_sweep(const std::filesystem::path& config_path,
                     const std::filesystem::path& out_dir, std::vector<double> times,
                     const std::vector<ControlMode>& modes, unsigned workers) {
  try {
    if (times.empty()) throw Error("sweep: at least one navigation time is required");
    if (modes.empty()) throw Error("sweep: at least one mode is required");
    std::sort(times.begin(), times.end());
    load_experiment(config_path);  // fail fast on a bad config before spawning work

    struct Job {
      double T;
      ControlMode mode;
    };
    std::vector<Job> jobs;
    for (double T : times)
      for (ControlMode mode : modes) jobs.push_back({T, mode});

    std::vector<SweepRow> rows(jobs.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned pool = std::max(1u, workers == 0 ? hw : workers);
    std::atomic<size_t> next{0};
    auto work = [&]() {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        SweepRow row;
        row.T = jobs[i].T;
        row.mode = mode_name(jobs[i].mode);
        try {
          const ExperimentConfig cfg = load_experiment(config_path, jobs[i].mode, jobs[i].T);
          row.metrics = aggregate(run_experiment(cfg), cfg.transient, cfg.slack_tol);
          row.ok = true;
        } catch (const Error& e) {
          row.ok = false;
          row.error = e.what();
        }
        rows[i] = row;
      }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 0; w + 1 < pool && w + 1 < jobs.size(); ++w) threads.emplace_back(work);
    work();
    for (std::thread& th : threads) th.join();

    std::filesystem::create_directories(out_dir);
    write_sweep_csv(out_dir / "sweep.csv", rows);

    // Per-metric plots, one series per mode; shade the T values whose
    // slosh-free run needed slack.
    std::vector<std::pair<double, double>> shaded;
    for (const SweepRow& r : rows)
      if (r.mode == "slosh_free" && r.ok && r.metrics.infeasible)
        shaded.push_back({r.T - 0.02 * (times.back() - times.front() + 1e-9),
                          r.T + 0.02 * (times.back() - times.front() + 1e-9)});
    const char* colors[2] = {"#1f77b4", "#d62728"};
    struct MetricDef {
      const char* file;
      const char* label;
      double (*get)(const RunMetrics&);
    };
    const MetricDef defs[] = {
        {"E_p.svg", "E_p [m s]", [](const RunMetrics& m) { return m.E_p; }},
        {"E_sf.svg", "E_sf [rad s]", [](const RunMetrics& m) { return m.E_sf; }},
        {"max_e_sf.svg", "max e_sf [rad]", [](const RunMetrics& m) { return m.max_e_sf; }},
        {"Sl.svg", "Sl", [](const RunMetrics& m) { return m.Sl; }},
    };
    for (const MetricDef& def : defs) {
      std::vector<SvgSeries> series;
      int ci = 0;
      for (ControlMode mode : modes) {
        SvgSeries s;
        s.name = mode_name(mode);
        s.color = colors[ci++ % 2];
        for (const SweepRow& r : rows)
          if (r.ok && r.mode == s.name) s.points.push_back({r.T, def.get(r.metrics)});
        series.push_back(std::move(s));
      }
      write_svg_plot(out_dir / def.file, std::string("navigation-time sweep: ") + def.label,
                     "T [s]", def.label, series, shaded);
    }

    int failures = 0;
    for (const SweepRow& r : rows) {
      if (!r.ok) {
        ++failures;
        std::cerr << "sweep row T=" << r.T << " mode=" << r.mode << " failed: " << r.error
                  << "\n";
      }
    }
    std::cout << "sweep complete: " << rows.size() - static_cast<size_t>(failures) << "/"
              << rows.size() << " runs ok, results in " << out_dir.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "sweep failed: " << e.what() << "\n";
    return kExitRunFailure;
  }
}

/// Load a model file and run the numerical self-checks against it.
inline int cmd_validate(const std::filesystem::path& model_path) {
  KinematicModel model;
  try {
    model = load_model(read_file(model_path));
  } catch (const Error& e) {
    std::cerr << "validate: cannot load model: " << e.what() << "\n";
    return kExitValidationFailure;
  }
  const std::vector<CheckResult> checks = run_self_checks(model);
  bool all = true;
  for (const CheckResult& c : checks) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.detail << "\n";
    all = all && c.pass;
  }
  std::cout << (all ? "all checks passed" : "validation FAILED") << "\n";
  return all ? kExitOk : kExitValidationFailure;
}

}  // namespace sloshfree
