// starnoma: run, sweep and bench STAR-RIS assisted NOMA sum-rate experiments

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "starnoma/experiments.hpp"

namespace fs = std::filesystem;
using namespace starnoma;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  int trials = 20;
  std::string baselines = "proposed";
  std::string out;
  double tol = 1e-3;
  int jobs = 1;
  bool force_exhaustive = false;
};

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Baseline> parse_baselines(const std::string& s)
{
  if (s == "all") return all_baselines();
  std::vector<Baseline> out;
  for (const auto& name : split_list(s)) out.push_back(parse_baseline(name));
  return out;
}

std::vector<double> parse_values(const std::string& s)
{
  std::vector<double> out;
  for (const auto& v : split_list(s)) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size()) throw UsageError("not a number in --values: " + v);
    out.push_back(x);
  }
  return out;
}

ScenarioConfig load(const Common& c)
{
  ScenarioConfig cfg = c.config.empty() ? ScenarioConfig{} : load_config(c.config);
  cfg.rng_seed = c.seed;
  return cfg;
}

TrialOptions trial_options(const Common& c)
{
  if (!(c.tol > 0.0)) throw UsageError("--tol must be positive");
  TrialOptions t;
  t.baseline.orchestrator.inner_tol = c.tol;
  t.baseline.orchestrator.outer_tol = c.tol;
  t.baseline.force_exhaustive = c.force_exhaustive;
  return t;
}

void write_file(const Common& c, const std::string& name, const std::string& text)
{
  if (c.out.empty()) return;
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name);
  if (!f) throw UsageError("cannot write to " + (fs::path(c.out) / name).string());
  f << text;
}

void report_violations(const std::vector<TrialResult>& trials)
{
  for (const auto& t : trials) {
    if (!t.error.empty())
      std::cerr << "trial " << to_string(t.baseline) << " seed " << t.seed << " failed: " << t.error << "\n";
    for (const auto& v : t.violations)
      std::cerr << "check failed: " << to_string(t.baseline) << " seed " << t.seed << ": " << v << "\n";
  }
}

int emit_sweep(const Common& c, const SweepResult& r)
{
  std::ostringstream csv, jsonl, amp;
  write_csv(csv, r);
  write_jsonl(jsonl, r.trials);
  std::cout << csv.str();
  write_file(c, "summary.csv", csv.str());
  write_file(c, "trials.jsonl", jsonl.str());
  AmplitudeReport a = amplitude_report(r.trials);
  if (a.trials > 0) {
    write_amplitude_csv(amp, a);
    write_file(c, "amplitudes.csv", amp.str());
  }
  report_violations(r.trials);
  return r.all_checks_passed() ? 0 : 1;
}

void add_common(CLI::App* app, Common& c, bool with_trials)
{
  app->add_option("--config", c.config, "scenario configuration (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master seed; trial t uses seed + t");
  if (with_trials) app->add_option("--trials", c.trials, "trials per point")->check(CLI::PositiveNumber);
  app->add_option("--baselines", c.baselines, "comma-separated schemes, or \"all\"");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--tol", c.tol, "relative tolerance of the inner and outer loops");
  app->add_option("--jobs", c.jobs, "parallel trials")->check(CLI::PositiveNumber);
  app->add_flag("--force-exhaustive", c.force_exhaustive, "allow exhaustive order search above 1000 orders");
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"STAR-RIS assisted NOMA sum-rate simulator"};
  app.require_subcommand(1);

  Common run_c, sweep_c, bench_c;
  std::string param;
  std::string values;

  CLI::App* run = app.add_subcommand("run", "single trial, printed as JSON");
  add_common(run, run_c, false);

  CLI::App* sw = app.add_subcommand("sweep", "Monte-Carlo sweep over one parameter");
  add_common(sw, sweep_c, true);
  sw->add_option("--param", param, "M, N_T, P_max, R_min, K_c, radius, kappa or noise_power_dbm")->required();
  sw->add_option("--values", values, "comma-separated parameter values")->required();

  CLI::App* bench = app.add_subcommand("bench", "baseline comparison at one point");
  add_common(bench, bench_c, true);
  bench_c.baselines = "all";

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ScenarioConfig cfg = load(run_c);
      std::vector<Baseline> bs = parse_baselines(run_c.baselines);
      std::vector<TrialResult> trials(bs.size());
      TrialOptions opt = trial_options(run_c);
      parallel_for(bs.size(), run_c.jobs, [&](std::size_t i) { trials[i] = run_trial(cfg, bs[i], run_c.seed, opt); });
      std::ostringstream jsonl;
      write_jsonl(jsonl, trials);
      std::cout << jsonl.str();
      write_file(run_c, "trials.jsonl", jsonl.str());
      report_violations(trials);
      for (const auto& t : trials)
        if (!t.error.empty() || !t.checks_passed) return 1;
      return 0;
    }
    if (sw->parsed()) {
      ScenarioConfig cfg = load(sweep_c);
      SweepSpec spec;
      spec.param = param;
      spec.values = parse_values(values);
      spec.trials = sweep_c.trials;
      spec.baselines = parse_baselines(sweep_c.baselines);
      spec.seed = sweep_c.seed;
      spec.jobs = sweep_c.jobs;
      ScenarioConfig probe = cfg;
      set_parameter(probe, spec.param, spec.values.front());
      return emit_sweep(sweep_c, sweep(cfg, spec, trial_options(sweep_c)));
    }
    if (bench->parsed()) {
      ScenarioConfig cfg = load(bench_c);
      SweepSpec spec;
      spec.param = "";
      spec.values = {0.0};
      spec.trials = bench_c.trials;
      spec.baselines = parse_baselines(bench_c.baselines);
      spec.seed = bench_c.seed;
      spec.jobs = bench_c.jobs;
      return emit_sweep(bench_c, sweep(cfg, spec, trial_options(bench_c)));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
