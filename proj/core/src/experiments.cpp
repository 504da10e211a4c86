// SPDX-License-Identifier: Apache-2.0
#include "robocal/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace robocal {

SimCalibration calibrate_simulated(const Scenario& scenario, std::uint64_t seed, bool refine,
                                   bool allow_partial) {
  SimConfig sim = scenario.sim;
  sim.seed = seed;

  SimCalibration out;
  out.run = run_script(scenario.script, sim);
  out.session = session_from_run(out.run, scenario.session);

  SolveConfig cfg;
  cfg.classify = scenario.session.classify;
  cfg.allow_partial = allow_partial;
  out.result = calibrate(out.session, cfg);
  if (refine) {
    RefineConfig rcfg;
    rcfg.classify = scenario.session.classify;
    out.result = refine_nonlinear(out.session, out.result, rcfg);
  }
  return out;
}

double axis_angle_error(const Rotation& r_a, const Rotation& r_b, int axis) {
  Vec3 e = Vec3::Zero();
  e[axis] = 1.0;
  return angle_between(r_a * e, r_b * e);
}

std::vector<TrialStats> monte_carlo(const Scenario& scenario, const MonteCarloOptions& options) {
  if (options.trials < 1) {
    throw Error("monte_carlo needs at least one trial");
  }
  std::vector<TrialStats> trials(static_cast<size_t>(options.trials));

  auto run_trial = [&](int i) {
    TrialStats stats;
    stats.trial = i;
    try {
      SimCalibration cal =
          calibrate_simulated(scenario, options.seed + static_cast<std::uint64_t>(i),
                              options.refine, false);
      const Pose& x_true = scenario.sim.x_true;
      stats.pos_error_m = (cal.result.x.translation - x_true.translation).norm();
      stats.angle_error_x_rad = axis_angle_error(cal.result.x.rotation, x_true.rotation, 0);
      stats.angle_error_y_rad = axis_angle_error(cal.result.x.rotation, x_true.rotation, 1);
      stats.angle_error_z_rad = axis_angle_error(cal.result.x.rotation, x_true.rotation, 2);
      stats.rotation_residual_rad = cal.result.rotation_residual_rad;
      stats.translation_residual_m = cal.result.translation_residual_m;
      stats.ok = true;
    } catch (const std::exception& e) {
      stats.ok = false;
      stats.error = e.what();
    }
    trials[static_cast<size_t>(i)] = stats;
  };

  unsigned jobs = options.jobs > 0 ? static_cast<unsigned>(options.jobs)
                                   : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(options.trials));

  if (jobs <= 1) {
    for (int i = 0; i < options.trials; ++i) run_trial(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < options.trials; i = next.fetch_add(1)) {
          run_trial(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  return trials;
}

namespace {

SummaryStat stat_of(std::vector<double> values) {
  SummaryStat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  size_t n = values.size();
  s.median = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

}  // namespace

MonteCarloSummary summarize(const std::vector<TrialStats>& trials) {
  MonteCarloSummary s;
  s.trials = static_cast<int>(trials.size());
  std::vector<double> pos, ax, ay, az;
  for (const TrialStats& t : trials) {
    if (!t.ok) {
      ++s.failures;
      continue;
    }
    pos.push_back(t.pos_error_m);
    ax.push_back(t.angle_error_x_rad);
    ay.push_back(t.angle_error_y_rad);
    az.push_back(t.angle_error_z_rad);
  }
  s.pos_error_m = stat_of(pos);
  s.angle_error_x_rad = stat_of(ax);
  s.angle_error_y_rad = stat_of(ay);
  s.angle_error_z_rad = stat_of(az);
  return s;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialStats>& trials) {
  out << "trial,ok,pos_error_m,angle_error_x_rad,angle_error_y_rad,angle_error_z_rad,"
         "rotation_residual_rad,translation_residual_m\n";
  char buf[256];
  for (const TrialStats& t : trials) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", t.trial,
                  t.ok ? 1 : 0, t.pos_error_m, t.angle_error_x_rad, t.angle_error_y_rad,
                  t.angle_error_z_rad, t.rotation_residual_rad, t.translation_residual_m);
    out << buf;
  }
}

std::vector<TrialStats> read_trials_csv(std::istream& in, const std::string& origin) {
  std::vector<TrialStats> trials;
  std::string line_text;
  int line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (line_text.empty() || line_text[0] == '#') continue;
    if (trials.empty() && line_text.rfind("trial,", 0) == 0) continue;
    std::istringstream ss(line_text);
    TrialStats t;
    char comma;
    int ok = 0;
    if (!(ss >> t.trial >> comma >> ok >> comma >> t.pos_error_m >> comma >>
          t.angle_error_x_rad >> comma >> t.angle_error_y_rad >> comma >> t.angle_error_z_rad >>
          comma >> t.rotation_residual_rad >> comma >> t.translation_residual_m)) {
      throw ParseError(origin, line, "malformed trial row");
    }
    t.ok = ok != 0;
    trials.push_back(t);
  }
  return trials;
}

std::string summary_text(const std::string& label, const MonteCarloSummary& s) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-28s %-8s %-13s %-13s %-13s %-13s\n", "method", "stat",
                "pos_error_m", "angle_x_rad", "angle_y_rad", "angle_z_rad");
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-28s %-8s %-13.6f %-13.6f %-13.6f %-13.6f\n", label.c_str(),
                "average", s.pos_error_m.mean, s.angle_error_x_rad.mean, s.angle_error_y_rad.mean,
                s.angle_error_z_rad.mean);
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-28s %-8s %-13.6f %-13.6f %-13.6f %-13.6f\n", label.c_str(),
                "median", s.pos_error_m.median, s.angle_error_x_rad.median,
                s.angle_error_y_rad.median, s.angle_error_z_rad.median);
  out << buf;
  std::snprintf(buf, sizeof(buf), "trials: %d, failures: %d\n", s.trials, s.failures);
  out << buf;
  return out.str();
}

void write_correction_csv(std::ostream& out, const std::vector<CorrectionRecord>& records) {
  out << "time_s,uncorrected_error_m,corrected_error_m,correction_angle_rad\n";
  char buf[192];
  for (const CorrectionRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.4f,%.9g,%.9g,%.9g\n", r.timestamp, r.uncorrected_error_m,
                  r.corrected_error_m, r.correction_angle_rad);
    out << buf;
  }
}

}  // namespace robocal
