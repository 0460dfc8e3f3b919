#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "starnoma/orchestrator.hpp"

namespace starnoma {

// ---------------------------------------------------------------- verification

struct CheckTolerances {
  double power = 1e-6;       // W above P_max
  double amplitude = 1e-8;   // |beta_t + beta_r - 1|
  double rho_sum = 1e-12;    // |sum rho - 1| per cluster
  double rate = 1e-6;        // below R_min
  double eigenvalue = 1e-7;  // below zero
  double replay = 1e-9;      // stored vs recomputed sum rate
};

struct Verification {
  std::vector<std::string> violations;  // invariant failures
  bool qos_met = true;                  // every user at or above R_min (reported, not an invariant)
  bool sic_ok = true;
  double replay_rate = 0.0;

  bool passed() const { return violations.empty(); }
};

// Per-user rates recomputed from the stored decision variables only
inline RVec replay_rates(const Scenario& sc, const ChannelSet& ch, const Solution& s, RisKind kind)
{
  if (s.oma) {
    const int K = sc.layout.num_users();
    RVec r(K);
    for (int u = 0; u < K; ++u) {
      CVec h = combined_channel(ch, s.slot_coeffs.at(u), u);
      r(u) = log2_1p(std::norm(h.dot(s.state.w[u].conjugate())) / sc.noise_power) / K;
    }
    return r;
  }
  Problem p = Problem::from_scenario(sc, ch, kind);
  return achievable_rates(state_rates(p, s.state), s.state.order, p.layout);
}

inline RisKind ris_kind_of(Baseline b)
{
  if (b == Baseline::ris_noma_split || b == Baseline::ris_oma) return RisKind::split;
  if (b == Baseline::ris_noma_double) return RisKind::double_;
  return RisKind::star;
}

inline Verification verify_solution(const Scenario& sc, const ChannelSet& ch, Baseline b, const Solution& s,
                                    const CheckTolerances& tol = {})
{
  Verification v;
  const Layout& l = sc.layout;
  const RisKind kind = ris_kind_of(b);
  const RisVariant var = RisVariant::make(kind, sc.num_elements);
  auto fail = [&](const std::string& m) { v.violations.push_back(m); };

  // transmit power
  if (s.oma) {
    for (const auto& w : s.state.w)
      if (w.squaredNorm() > sc.p_max + tol.power) fail("slot beam exceeds the power budget");
  } else {
    double total = 0.0;
    for (const auto& w : s.state.w) total += w.squaredNorm();
    if (total > sc.p_max + tol.power) fail("sum of beam powers exceeds the power budget");
  }

  // RIS coefficients
  std::vector<const StarCoefficients*> cs;
  if (s.oma)
    for (const auto& c : s.slot_coeffs) cs.push_back(&c);
  else
    cs.push_back(&s.state.coeffs);
  for (const auto* c : cs) {
    try {
      check_coefficients(*c, var, tol.amplitude);
    } catch (const ConstraintError& e) {
      fail(std::string("RIS coefficients: ") + e.what());
    }
  }

  // power coefficients
  if (!s.oma) {
    for (int c = 0; c < l.num_clusters(); ++c) {
      double sum = 0.0;
      for (int u : l.users[c]) {
        if (s.state.rho(u) < -tol.rho_sum) fail("negative power coefficient");
        sum += s.state.rho(u);
      }
      if (std::abs(sum - 1.0) > tol.rho_sum) fail("power coefficients of a cluster do not sum to one");
    }
  }

  if (s.log.min_eigenvalue < -tol.eigenvalue) fail("a returned PSD block has a negative eigenvalue");

  RVec r = replay_rates(sc, ch, s, kind);
  v.replay_rate = r.sum();
  if (std::abs(v.replay_rate - s.rate) > tol.replay * std::max(1.0, std::abs(s.rate)))
    fail("stored sum rate does not match the replay");
  if (std::abs(s.user_rates.sum() - s.rate) > tol.replay * std::max(1.0, std::abs(s.rate)))
    fail("sum rate differs from the sum of per-user rates");
  v.qos_met = r.minCoeff() >= sc.config.r_min - tol.rate;

  if (!s.oma) {
    Problem p = Problem::from_scenario(sc, ch, kind);
    RateReport rep = state_rates(p, s.state);
    v.sic_ok = verify_sic(rep).empty();
    // the decoding rule guarantees SIC only for its own order
    if (s.order_fixed_point && !v.sic_ok && (b != Baseline::combined_gain_order && b != Baseline::random_order &&
                                              b != Baseline::exhaustive_order))
      fail("SIC condition violated at the final decoding order");
  }
  return v;
}

// ---------------------------------------------------------------- trials

struct TrialResult {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  Baseline baseline = Baseline::proposed;
  double sum_rate = 0.0;
  RVec user_rates;
  RVec rho;
  std::vector<CVec> w;
  std::vector<StarCoefficients> coeffs;  // one entry, or one per slot for OMA
  DecodingOrder order;
  std::vector<double> outer_trace;
  int outer_iterations = 0;
  int inner_passes = 0;
  double wall_time = 0.0;
  bool feasible = false;  // completed with every user at R_min or above
  bool checks_passed = false;
  bool sic_ok = true;
  std::vector<std::string> violations;
  std::string error;  // set when the pipeline threw
  RunLog log;
};

struct TrialOptions {
  BaselineOptions baseline;
  CheckTolerances checks;
};

inline TrialResult run_trial(const ScenarioConfig& cfg, Baseline b, std::uint64_t seed, const TrialOptions& opt = {})
{
  TrialResult t;
  t.config = cfg;
  t.seed = seed;
  t.baseline = b;
  auto t0 = std::chrono::steady_clock::now();
  try {
    Scenario sc = make_scenario(cfg);
    ChannelSet ch = generate_channels(sc, seed);
    Solution s = run_baseline(sc, ch, b, seed, opt.baseline);
    Verification v = verify_solution(sc, ch, b, s, opt.checks);
    t.sum_rate = s.rate;
    t.user_rates = s.user_rates;
    t.rho = s.state.rho;
    t.w = s.state.w;
    t.coeffs = s.oma ? s.slot_coeffs : std::vector<StarCoefficients>{s.state.coeffs};
    t.order = s.state.order;
    t.outer_trace = s.outer_trace;
    t.outer_iterations = s.outer_iterations;
    t.inner_passes = s.inner_passes;
    t.feasible = v.qos_met;
    t.sic_ok = v.sic_ok;
    t.checks_passed = v.passed();
    t.violations = v.violations;
    t.log = std::move(s.log);
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  t.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

// Sum rate recomputed from the stored variables of a trial
inline double replay(const TrialResult& t)
{
  Scenario sc = make_scenario(t.config);
  ChannelSet ch = generate_channels(sc, t.seed);
  Solution s;
  s.state.rho = t.rho;
  s.state.w = t.w;
  s.state.order = t.order;
  s.state.coeffs = t.coeffs.at(0);
  s.oma = t.baseline == Baseline::ris_oma;
  if (s.oma) s.slot_coeffs = t.coeffs;
  return replay_rates(sc, ch, s, ris_kind_of(t.baseline)).sum();
}

// ---------------------------------------------------------------- JSON

inline nlohmann::json to_json_vec(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline RVec from_json_vec(const nlohmann::json& j)
{
  std::vector<double> x = j.get<std::vector<double>>();
  return Eigen::Map<RVec>(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline nlohmann::json to_json(const TrialResult& t)
{
  nlohmann::json j;
  j["config"] = t.config;
  j["seed"] = t.seed;
  j["baseline"] = to_string(t.baseline);
  j["sum_rate"] = t.sum_rate;
  j["user_rates"] = to_json_vec(t.user_rates);
  j["rho"] = to_json_vec(t.rho);
  nlohmann::json w = nlohmann::json::array();
  for (const auto& v : t.w) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      re.push_back(v(i).real());
      im.push_back(v(i).imag());
    }
    w.push_back({{"re", re}, {"im", im}});
  }
  j["w"] = w;
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : t.coeffs)
    cs.push_back({{"beta_t", to_json_vec(c.beta_t)},
                  {"beta_r", to_json_vec(c.beta_r)},
                  {"theta_t", to_json_vec(c.theta_t)},
                  {"theta_r", to_json_vec(c.theta_r)}});
  j["coefficients"] = cs;
  j["order"] = t.order.perm;
  j["outer_trace"] = t.outer_trace;
  j["outer_iterations"] = t.outer_iterations;
  j["inner_passes"] = t.inner_passes;
  j["wall_time"] = t.wall_time;
  j["feasible"] = t.feasible;
  j["checks_passed"] = t.checks_passed;
  j["sic_ok"] = t.sic_ok;
  j["violations"] = t.violations;
  j["error"] = t.error;
  return j;
}

inline TrialResult trial_from_json(const nlohmann::json& j)
{
  TrialResult t;
  t.config = j.at("config").get<ScenarioConfig>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.baseline = parse_baseline(j.at("baseline").get<std::string>());
  t.sum_rate = j.at("sum_rate").get<double>();
  t.user_rates = from_json_vec(j.at("user_rates"));
  t.rho = from_json_vec(j.at("rho"));
  for (const auto& v : j.at("w")) {
    RVec re = from_json_vec(v.at("re")), im = from_json_vec(v.at("im"));
    CVec x(re.size());
    for (Eigen::Index i = 0; i < re.size(); ++i) x(i) = cplx(re(i), im(i));
    t.w.push_back(x);
  }
  for (const auto& c : j.at("coefficients")) {
    StarCoefficients s;
    s.beta_t = from_json_vec(c.at("beta_t"));
    s.beta_r = from_json_vec(c.at("beta_r"));
    s.theta_t = from_json_vec(c.at("theta_t"));
    s.theta_r = from_json_vec(c.at("theta_r"));
    t.coeffs.push_back(s);
  }
  t.order.perm = j.at("order").get<std::vector<std::vector<int>>>();
  t.outer_trace = j.at("outer_trace").get<std::vector<double>>();
  t.outer_iterations = j.at("outer_iterations").get<int>();
  t.inner_passes = j.at("inner_passes").get<int>();
  t.wall_time = j.at("wall_time").get<double>();
  t.feasible = j.at("feasible").get<bool>();
  t.checks_passed = j.at("checks_passed").get<bool>();
  t.sic_ok = j.at("sic_ok").get<bool>();
  t.violations = j.at("violations").get<std::vector<std::string>>();
  t.error = j.at("error").get<std::string>();
  return t;
}

// ---------------------------------------------------------------- parallel runner

// Runs f(i) for i in [0, n) on up to `jobs` threads; results land by index
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f)
{
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, jobs < 1 ? 1 : jobs));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex m;
  for (std::size_t k = 0; k < workers; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------- sweeps

struct SweepSpec {
  std::string param;            // empty for a single point
  std::vector<double> values;   // one entry per point
  int trials = 20;
  std::vector<Baseline> baselines;
  std::uint64_t seed = 1;       // trial t uses seed + t
  int jobs = 1;
};

struct SweepRow {
  std::string param;
  double value = 0.0;
  Baseline baseline = Baseline::proposed;
  double mean_rate = 0.0;
  double stderr_rate = 0.0;
  int n = 0;  // completed trials
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<TrialResult> trials;  // ordered by (value, baseline, seed)

  bool all_checks_passed() const
  {
    for (const auto& t : trials)
      if (t.error.empty() && !t.checks_passed) return false;
    return true;
  }
};

inline void check_spec(const SweepSpec& s)
{
  if (s.values.empty()) throw UsageError("sweep needs at least one value");
  if (s.trials < 1) throw UsageError("sweep needs at least one trial per point");
}

inline SweepRow summarize(const std::string& param, double value, Baseline b, const std::vector<double>& rates)
{
  SweepRow r;
  r.param = param;
  r.value = value;
  r.baseline = b;
  r.n = static_cast<int>(rates.size());
  if (r.n == 0) return r;
  double sum = 0.0;
  for (double x : rates) sum += x;
  r.mean_rate = sum / r.n;
  if (r.n > 1) {
    double ss = 0.0;
    for (double x : rates) ss += (x - r.mean_rate) * (x - r.mean_rate);
    r.stderr_rate = std::sqrt(ss / (r.n - 1) / r.n);
  }
  return r;
}

inline SweepResult sweep(const ScenarioConfig& base, const SweepSpec& spec, const TrialOptions& opt = {})
{
  check_spec(spec);
  SweepResult out;
  if (spec.baselines.empty()) return out;
  struct Job {
    double value;
    Baseline b;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double v : spec.values)
    for (Baseline b : spec.baselines)
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({v, b, spec.seed + static_cast<std::uint64_t>(t)});
  out.trials.resize(jobs.size());
  parallel_for(jobs.size(), spec.jobs, [&](std::size_t i) {
    ScenarioConfig cfg = base;
    if (!spec.param.empty()) set_parameter(cfg, spec.param, jobs[i].value);
    out.trials[i] = run_trial(cfg, jobs[i].b, jobs[i].seed, opt);
  });
  std::size_t i = 0;
  for (double v : spec.values)
    for (Baseline b : spec.baselines) {
      std::vector<double> rates;
      for (int t = 0; t < spec.trials; ++t, ++i)
        if (out.trials[i].error.empty()) rates.push_back(out.trials[i].sum_rate);
      out.rows.push_back(summarize(spec.param, v, b, rates));
    }
  return out;
}

inline std::string format_number(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline void write_csv(std::ostream& os, const SweepResult& r)
{
  os << "param,value,baseline,mean_rate,stderr,n\n";
  for (const auto& row : r.rows)
    os << row.param << ',' << format_number(row.value) << ',' << to_string(row.baseline) << ','
       << format_number(row.mean_rate) << ',' << format_number(row.stderr_rate) << ',' << row.n << '\n';
}

inline void write_jsonl(std::ostream& os, const std::vector<TrialResult>& trials)
{
  for (const auto& t : trials) os << to_json(t).dump() << '\n';
}

// ---------------------------------------------------------------- amplitude report

struct AmplitudeReport {
  RVec mean_beta_t, mean_beta_r;  // per element
  double mean_t = 0.0, mean_r = 0.0;
  int trials = 0;
};

// Per-element mean amplitudes over the STAR-RIS trials
inline AmplitudeReport amplitude_report(const std::vector<TrialResult>& results)
{
  AmplitudeReport a;
  for (const auto& t : results) {
    if (!t.error.empty() || ris_kind_of(t.baseline) != RisKind::star || t.coeffs.empty()) continue;
    const auto& c = t.coeffs[0];
    if (a.trials == 0) {
      a.mean_beta_t = RVec::Zero(c.size());
      a.mean_beta_r = RVec::Zero(c.size());
    }
    if (c.size() != a.mean_beta_t.size()) throw UsageError("amplitude report mixes RIS sizes");
    a.mean_beta_t += c.beta_t;
    a.mean_beta_r += c.beta_r;
    ++a.trials;
  }
  if (a.trials == 0) return a;
  a.mean_beta_t /= a.trials;
  a.mean_beta_r /= a.trials;
  a.mean_t = a.mean_beta_t.mean();
  a.mean_r = a.mean_beta_r.mean();
  return a;
}

inline void write_amplitude_csv(std::ostream& os, const AmplitudeReport& a)
{
  os << "element,beta_t,beta_r\n";
  for (Eigen::Index m = 0; m < a.mean_beta_t.size(); ++m)
    os << m << ',' << format_number(a.mean_beta_t(m)) << ',' << format_number(a.mean_beta_r(m)) << '\n';
  os << "mean," << format_number(a.mean_t) << ',' << format_number(a.mean_r) << '\n';
}

}  // namespace starnoma
