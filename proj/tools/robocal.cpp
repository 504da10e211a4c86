// SPDX-License-Identifier: Apache-2.0
//
// robocal CLI: simulated and file-based extrinsic calibration, Monte-Carlo
// studies, the head-shake online-correction experiment, and summary reports.
//
// Exit codes: 0 all requested artifacts written, 1 usage/scenario errors,
// 2 input parse failures, 3 insufficient motion.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "robocal/experiments.hpp"
#include "robocal/pose_log.hpp"
#include "robocal/result_io.hpp"

namespace fs = std::filesystem;
using namespace robocal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitInsufficientMotion = 3;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed,
                           const Scenario* scenario) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("ROBOCAL_SEED")) {
    try {
      size_t used = 0;
      unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing");
      return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
      throw Error(std::string("ROBOCAL_SEED is not a valid seed: '") + env + "'");
    }
  }
  return scenario ? scenario->sim.seed : 1;
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

Vec3 parse_vec3_flag(const std::string& text) {
  Vec3 v;
  char c1, c2;
  std::istringstream ss(text);
  if (!(ss >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',') {
    throw Error("expected x,y,z but got '" + text + "'");
  }
  return v;
}

int cmd_calibrate_sim(const std::string& scenario_arg, std::optional<std::uint64_t> seed,
                      const std::string& out, bool no_refine, bool allow_partial) {
  Scenario scenario = load_scenario(scenario_arg);
  std::uint64_t s = resolve_seed(seed, &scenario);
  SimCalibration cal = calibrate_simulated(scenario, s, !no_refine, allow_partial);

  fs::path dir = prepare_out_dir(out);
  write_result_file((dir / "result.json").string(), cal.result);

  std::vector<PosePairSample> samples;
  samples.reserve(cal.run.observations.size());
  for (const Observation& o : cal.run.observations) samples.push_back(o.sample);
  {
    std::ofstream f(dir / "pose_log.csv");
    write_pose_log_csv(f, samples);
    if (!f) throw Error("failed writing pose_log.csv");
  }
  if (!cal.session.floor_observations.empty()) {
    std::ofstream f(dir / "floor.csv");
    write_floor_csv(f, cal.session.floor_observations);
    if (!f) throw Error("failed writing floor.csv");
  }

  std::cout << "scenario: " << scenario.name << " (seed " << s << ")\n"
            << result_summary(cal.result) << "wrote " << (dir / "result.json").string() << "\n";
  return kExitOk;
}

int cmd_calibrate_file(const std::string& log_path, const std::string& floor_path,
                       const std::string& head_to_foot, double head_height,
                       const std::string& out, bool no_refine, bool allow_partial) {
  std::vector<PosePairSample> samples = read_pose_log_file(log_path);
  if (samples.size() < 2) {
    throw Error("pose log '" + log_path + "' holds fewer than two samples");
  }

  CalibrationSession session;
  session.transitions = segment_transitions(samples);
  if (!floor_path.empty()) {
    session.floor_observations = read_floor_csv_file(floor_path);
    session.kinematics = RobotKinematics(parse_vec3_flag(head_to_foot), head_height);
  }

  SolveConfig cfg;
  cfg.allow_partial = allow_partial;
  CalibrationResult result = calibrate(session, cfg);
  if (!no_refine) {
    result = refine_nonlinear(session, result);
  }

  fs::path dir = prepare_out_dir(out);
  write_result_file((dir / "result.json").string(), result);
  std::cout << "transitions: " << session.transitions.size() << ", floor observations: "
            << session.floor_observations.size() << "\n"
            << result_summary(result) << "wrote " << (dir / "result.json").string() << "\n";
  return kExitOk;
}

int cmd_monte_carlo(const std::string& scenario_arg, std::optional<std::uint64_t> seed,
                    int trials, int jobs, const std::string& out, bool no_refine) {
  Scenario scenario = load_scenario(scenario_arg);
  MonteCarloOptions options;
  options.trials = trials;
  options.seed = resolve_seed(seed, &scenario);
  options.jobs = jobs;
  options.refine = !no_refine;

  std::vector<TrialStats> stats = monte_carlo(scenario, options);
  MonteCarloSummary summary = summarize(stats);

  fs::path dir = prepare_out_dir(out);
  {
    std::ofstream f(dir / "trials.csv");
    write_trials_csv(f, stats);
    if (!f) throw Error("failed writing trials.csv");
  }
  std::string text = summary_text(scenario.name, summary);
  write_text_file(dir / "summary.txt", text);
  std::cout << text << "wrote " << (dir / "trials.csv").string() << "\n";
  return summary.failures == 0 ? kExitOk : kExitError;
}

int cmd_shake(const std::string& scenario_arg, std::optional<std::uint64_t> seed,
              const std::string& out, bool no_correction) {
  Scenario scenario = load_scenario(scenario_arg);
  SimConfig sim = scenario.sim;
  sim.seed = resolve_seed(seed, &scenario);

  std::vector<CorrectionRecord> records =
      shake_experiment(sim, scenario.shake, scenario.correction, !no_correction);

  fs::path dir = prepare_out_dir(out);
  {
    std::ofstream f(dir / "shake.csv");
    write_correction_csv(f, records);
    if (!f) throw Error("failed writing shake.csv");
  }

  double max_unc = 0.0, max_corr = 0.0;
  for (const CorrectionRecord& r : records) {
    max_unc = std::max(max_unc, r.uncorrected_error_m);
    max_corr = std::max(max_corr, r.corrected_error_m);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "steps: %zu\nmax uncorrected error: %.4f m\nmax corrected error:   %.4f m\n",
                records.size(), max_unc, max_corr);
  std::cout << buf << "wrote " << (dir / "shake.csv").string() << "\n";
  return kExitOk;
}

int cmd_report(const std::string& trials_path, const std::string& label) {
  std::ifstream in(trials_path);
  if (!in) throw Error("cannot open '" + trials_path + "'");
  std::vector<TrialStats> stats = read_trials_csv(in, trials_path);
  std::cout << summary_text(label.empty() ? trials_path : label, summarize(stats));
  return kExitOk;
}

int cmd_scenario(const std::string& name, const std::string& out) {
  Scenario scenario = builtin_scenario(name);
  std::string text = scenario_to_json(scenario);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robot / SLAM-device extrinsic calibration toolkit"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string scenario_arg = "two-way-rotation";
  std::string out = ".";
  bool no_refine = false;
  bool allow_partial = false;

  auto* sim = app.add_subcommand("calibrate-sim", "Simulate a scenario and calibrate");
  sim->add_option("--scenario", scenario_arg, "Built-in scenario name or JSON file");
  sim->add_option("--seed", seed, "Simulation seed (falls back to ROBOCAL_SEED)");
  sim->add_option("--out", out, "Output directory");
  sim->add_flag("--no-refine", no_refine, "Skip the nonlinear refinement");
  sim->add_flag("--allow-partial", allow_partial, "Accept under-constrained sessions");

  std::string log_path, floor_path;
  std::string head_to_foot = "0,0,-1.1";
  double head_height = 1.1;
  auto* file = app.add_subcommand("calibrate-file", "Calibrate from a recorded pose log");
  file->add_option("--log", log_path, "Pose log (CSV or JSON-lines)")->required();
  file->add_option("--floor", floor_path, "Floor observation CSV (nx,ny,nz,height_m)");
  file->add_option("--head-to-foot", head_to_foot, "Head->foot vector x,y,z (m), head frame");
  file->add_option("--head-height", head_height, "Head joint height above floor (m)");
  file->add_option("--out", out, "Output directory");
  file->add_flag("--no-refine", no_refine, "Skip the nonlinear refinement");
  file->add_flag("--allow-partial", allow_partial, "Accept under-constrained sessions");

  int trials = 5;
  int jobs = 0;
  auto* mc = app.add_subcommand("monte-carlo", "Repeated simulated calibrations with statistics");
  mc->add_option("--scenario", scenario_arg, "Built-in scenario name or JSON file");
  mc->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  mc->add_option("--seed", seed, "Base seed; trial i uses seed+i");
  mc->add_option("--jobs", jobs, "Worker threads (0 = auto)");
  mc->add_option("--out", out, "Output directory");
  mc->add_flag("--no-refine", no_refine, "Skip the nonlinear refinement");

  bool no_correction = false;
  auto* shake = app.add_subcommand("shake", "Head-shake experiment error series");
  shake->add_option("--scenario", scenario_arg, "Built-in scenario name or JSON file");
  shake->add_option("--seed", seed, "Simulation seed");
  shake->add_option("--out", out, "Output directory");
  shake->add_flag("--no-correction", no_correction, "Disable the online correction");

  std::string trials_csv, label;
  auto* report = app.add_subcommand("report", "Summarize a per-trial CSV");
  report->add_option("--trials-csv", trials_csv, "trials.csv from monte-carlo")->required();
  report->add_option("--label", label, "Method label for the table");

  std::string scen_name, scen_out;
  auto* scen = app.add_subcommand("scenario", "Print or write a built-in scenario as JSON");
  scen->add_option("name", scen_name, "Built-in scenario name")->required();
  scen->add_option("--out", scen_out, "Write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(sim)) {
      return cmd_calibrate_sim(scenario_arg, seed, out, no_refine, allow_partial);
    }
    if (app.got_subcommand(file)) {
      return cmd_calibrate_file(log_path, floor_path, head_to_foot, head_height, out, no_refine,
                                allow_partial);
    }
    if (app.got_subcommand(mc)) {
      return cmd_monte_carlo(scenario_arg, seed, trials, jobs, out, no_refine);
    }
    if (app.got_subcommand(shake)) {
      return cmd_shake(scenario_arg, seed, out, no_correction);
    }
    if (app.got_subcommand(report)) {
      return cmd_report(trials_csv, label);
    }
    if (app.got_subcommand(scen)) {
      return cmd_scenario(scen_name, scen_out);
    }
  } catch (const InsufficientMotionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInsufficientMotion;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
