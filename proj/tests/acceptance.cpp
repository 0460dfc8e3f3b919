// Acceptance suite: one PASS/FAIL line per criterion, details indented below it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "starnoma/experiments.hpp"

using namespace starnoma;

namespace {

const std::string kConfigDir = STARNOMA_CONFIG_DIR;
constexpr int kSeeds = 20;
constexpr int kRankSeeds = 50;

int failures = 0;

void verdict(int id, bool pass, const std::string& what)
{
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class... A>
void detail(const char* fmt, A... a)
{
  std::printf("    ");
  std::printf(fmt, a...);
  std::printf("\n");
}

struct Stats {
  double mean = 0.0, se = 0.0;
  int n = 0;
};

Stats stats(const std::vector<double>& x)
{
  Stats s;
  s.n = static_cast<int>(x.size());
  if (s.n == 0) return s;
  for (double v : x) s.mean += v;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / (s.n - 1) / s.n);
  }
  return s;
}

// ---------------------------------------------------------------- trial cache

struct Run {
  Solution sol;
  Verification ver;
  std::string error;
  double seconds = 0.0;
};

struct Key {
  std::string config;
  Baseline baseline;
  std::uint64_t seed;
  bool operator<(const Key& o) const
  {
    return std::tie(config, baseline, seed) < std::tie(o.config, o.baseline, o.seed);
  }
};

std::map<std::string, ScenarioConfig> configs;
std::map<Key, Run> runs;

Run execute(const ScenarioConfig& cfg, Baseline b, std::uint64_t seed)
{
  Run r;
  auto t0 = std::chrono::steady_clock::now();
  try {
    Scenario sc = make_scenario(cfg);
    ChannelSet ch = generate_channels(sc, seed);
    r.sol = run_baseline(sc, ch, b, seed);
    r.ver = verify_solution(sc, ch, b, r.sol);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Runs every missing (config, baseline, seed) in parallel
void ensure(const std::vector<Key>& keys)
{
  std::vector<Key> todo;
  for (const auto& k : keys)
    if (!runs.count(k) && std::find_if(todo.begin(), todo.end(), [&](const Key& t) {
                            return !(t < k) && !(k < t);
                          }) == todo.end())
      todo.push_back(k);
  std::vector<Run> out(todo.size());
  const int jobs = std::max(1u, std::thread::hardware_concurrency());
  parallel_for(todo.size(), jobs, [&](std::size_t i) {
    out[i] = execute(configs.at(todo[i].config), todo[i].baseline, todo[i].seed);
  });
  for (std::size_t i = 0; i < todo.size(); ++i) runs.emplace(todo[i], std::move(out[i]));
}

std::vector<Key> keys(const std::string& config, Baseline b, int n)
{
  std::vector<Key> k;
  for (int s = 1; s <= n; ++s) k.push_back({config, b, static_cast<std::uint64_t>(s)});
  return k;
}

const Run& get(const std::string& config, Baseline b, int seed)
{
  return runs.at({config, b, static_cast<std::uint64_t>(seed)});
}

std::vector<double> rates(const std::string& config, Baseline b, int n)
{
  std::vector<double> r;
  for (int s = 1; s <= n; ++s) {
    const Run& x = get(config, b, s);
    if (x.error.empty()) r.push_back(x.sol.rate);
  }
  return r;
}

std::string with(const std::string& base, const std::string& param, double v)
{
  char name[96];
  std::snprintf(name, sizeof name, "%s/%s=%g", base.c_str(), param.c_str(), v);
  if (!configs.count(name)) {
    ScenarioConfig c = configs.at(base);
    set_parameter(c, param, v);
    configs[name] = c;
  }
  return name;
}

// ---------------------------------------------------------------- criteria 1-3

void criterion_power_oracle()
{
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> lg(0.0, 3.0);
  const double r = std::exp2(0.1) - 1.0;
  int checked = 0, bad = 0;
  double worst = -INFINITY;
  while (checked < 100) {
    const int K = 2 + checked % 2;
    std::vector<double> g(K);
    for (auto& x : g) x = std::pow(10.0, lg(rng));
    std::sort(g.begin(), g.end());
    RVec gam = Eigen::Map<RVec>(g.data(), K);
    RVec rv = RVec::Constant(K, r);
    if (!check_feasibility(gam, rv).feasible) continue;
    double grid = oracle::simplex_grid_best(g, std::vector<double>(K, r), 1e-3);
    if (!std::isfinite(grid)) continue;
    double closed = cluster_objective(optimal_power(gam, rv), gam);
    worst = std::max(worst, grid - closed);
    if (closed < grid - 1e-3) ++bad;
    ++checked;
  }
  verdict(1, bad == 0, "closed-form power allocation within 1e-3 of the simplex grid on 100 instances");
  detail("instances %d, below grid by more than 1e-3: %d, largest grid advantage %.3e", checked, bad, worst);
}

void criterion_feasibility()
{
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> lg(-1.0, 3.0), ur(0.0, 3.0);
  std::uniform_int_distribution<int> kd(1, 5);
  int disagree = 0;
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const int K = kd(rng);
    std::vector<double> g(K), r(K);
    for (int k = 0; k < K; ++k) {
      g[k] = std::pow(10.0, lg(rng));
      r[k] = ur(rng) * (t % 2 ? 1.0 : 0.1);
    }
    // backward recursion written out independently: rho_k = r_k (sum_{n>k} rho_n + 1/g_k)
    double later = 0.0;
    for (int k = K - 1; k >= 0; --k) later += r[k] * (later + 1.0 / g[k]);
    RVec gam = Eigen::Map<RVec>(g.data(), K), rv = Eigen::Map<RVec>(r.data(), K);
    Feasibility f = check_feasibility(gam, rv);
    double lib = min_power_coefficients(gam, rv).sum();
    worst = std::max({worst, std::abs(f.load - later) / std::max(1.0, later),
                      std::abs(f.load - lib) / std::max(1.0, lib)});
    bool by_power = later <= 1.0;
    bool solvable = true;
    try {
      optimal_power(gam, rv);
    } catch (const InfeasibleError&) {
      solvable = false;
    }
    if (f.feasible != by_power || f.feasible != solvable) ++disagree;
  }
  verdict(2, disagree == 0 && worst <= 1e-12, "load test agrees with the minimum-power construction on 1e4 instances");
  detail("disagreements %d, largest relative |L - sum rho_min| %.3e", disagree, worst);
}

void criterion_sic()
{
  std::mt19937_64 rng(303);
  std::exponential_distribution<double> ex(1.0);
  std::uniform_int_distribution<int> kd(1, 4), cd(1, 4);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> sizes(cd(rng));
    for (auto& k : sizes) k = kd(rng);
    Layout l = Layout::from_sizes(sizes);
    BeamGains g;
    g.noise = std::exp(ex(rng) - 1.0);
    g.power.resize(l.num_users(), l.num_clusters());
    for (int u = 0; u < l.num_users(); ++u)
      for (int c = 0; c < l.num_clusters(); ++c) g.power(u, c) = ex(rng) * (l.cluster_of[u] == c ? 30.0 : 1.0);
    RVec rho(l.num_users());
    for (int c = 0; c < l.num_clusters(); ++c) {
      double s = 0.0;
      for (int u : l.users[c]) s += (rho(u) = ex(rng));
      for (int u : l.users[c]) rho(u) /= s;
    }
    DecodingOrder o = decoding_order(equivalent_gains(g, l), l);
    violations += static_cast<int>(verify_sic(evaluate_rates(g, rho, o, l)).size());
  }
  verdict(3, violations == 0, "SIC conditions hold under the gain order on 1000 instances");
  detail("violations %d", violations);
}

// ---------------------------------------------------------------- criteria 4-11

void criterion_rank_one()
{
  int sca_solves = 0, sca_bad = 0, relax_runs = 0, relax_bad = 0, trials_bad = 0, errs = 0;
  double sca_worst = 0.0, relax_worst = 0.0;
  for (int s = 1; s <= kRankSeeds; ++s) {
    const Run& r = get("default", Baseline::proposed, s);
    if (!r.error.empty()) {
      ++errs;
      continue;
    }
    bool bad = false;
    for (double x : r.sol.log.sca_residuals) {
      ++sca_solves;
      sca_worst = std::max(sca_worst, x);
      if (x > 1e-4) {
        ++sca_bad;
        bad = true;
      }
    }
    for (double x : r.sol.log.relax_residuals) {
      ++relax_runs;
      relax_worst = std::max(relax_worst, x);
      if (x > 1e-3) {
        ++relax_bad;
        bad = true;
      }
    }
    trials_bad += bad;
  }
  verdict(4, sca_bad == 0 && relax_bad == 0 && errs == 0,
          "beamforming solutions rank-one (1e-4) and passive solutions rank-one (1e-3) on 50 scenarios");
  detail("active solves %d, above 1e-4: %d, worst residual %.3e", sca_solves, sca_bad, sca_worst);
  detail("passive runs %d, above 1e-3: %d, worst residual %.3e", relax_runs, relax_bad, relax_worst);
  detail("scenarios affected %d of %d, errors %d", trials_bad, kRankSeeds, errs);
}

void criterion_monotone(const std::vector<std::string>& antenna_configs)
{
  int sca_runs = 0, sca_drops = 0, slow = 0, chain_steps = 0, chain_drops = 0, outer_bad = 0, errs = 0;
  int max_conv = 0, max_outer = 0;
  std::string first_slow;
  for (const auto& cfg : antenna_configs)
    for (int s = 1; s <= (cfg == "default" ? kRankSeeds : kSeeds); ++s) {
      const Run& r = get(cfg, Baseline::proposed, s);
      if (!r.error.empty()) {
        ++errs;
        continue;
      }
      for (const auto& obj : r.sol.log.sca_objectives) {
        ++sca_runs;
        for (size_t i = 1; i < obj.size(); ++i)
          if (obj[i] < obj[i - 1] - 1e-6) {
            ++sca_drops;
            break;
          }
        int conv = -1;
        for (size_t i = 1; i < obj.size() && conv < 0; ++i)
          if (std::abs(obj[i] - obj[i - 1]) < 1e-3 * std::max(1.0, std::abs(obj[i]))) conv = static_cast<int>(i) + 1;
        if (conv < 0 || conv > 30) {
          ++slow;
          if (first_slow.empty()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s seed %d, %zu solves, last two %.6g %.6g", cfg.c_str(), s, obj.size(),
                          obj.size() > 1 ? obj[obj.size() - 2] : 0.0, obj.empty() ? 0.0 : obj.back());
            first_slow = buf;
          }
        }
        else max_conv = std::max(max_conv, conv);
      }
      for (const auto& c : r.sol.chain) {
        if (!c.qos_met) continue;
        ++chain_steps;
        if (!c.monotone(1e-6)) ++chain_drops;
      }
      for (size_t i = 1; i < r.sol.outer_trace.size(); ++i)
        if (r.sol.outer_trace[i] < r.sol.outer_trace[i - 1] - 1e-6) ++outer_bad;
      if (cfg == "default") {
        max_outer = std::max(max_outer, r.sol.outer_iterations);
        if (r.sol.outer_iterations > 20) ++outer_bad;
      }
    }
  verdict(5, sca_drops == 0 && slow == 0 && chain_drops == 0 && outer_bad == 0 && errs == 0,
          "monotone traces, active loop converged within 30 iterations, outer loop within 20");
  detail("active runs %d, with a drop above 1e-6: %d, not converged by 30: %d, slowest %d", sca_runs, sca_drops,
         slow, max_conv);
  detail("inner passes checked %d (QoS met at pass start), with a drop above 1e-6: %d", chain_steps, chain_drops);
  detail("outer trace drops or overruns %d, most outer iterations %d, errors %d", outer_bad, max_outer, errs);
  if (!first_slow.empty()) detail("first slow active run: %s", first_slow.c_str());
}

bool gap_ok(const std::vector<double>& a, const std::vector<double>& b, Stats* out)
{
  std::vector<double> d;
  for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) d.push_back(a[i] - b[i]);
  *out = stats(d);
  return out->n == kSeeds && out->mean - out->se >= 0.0;
}

void criterion_ordering()
{
  auto dbl = rates("default", Baseline::ris_noma_double, kSeeds);
  auto star = rates("default", Baseline::proposed, kSeeds);
  auto split = rates("default", Baseline::ris_noma_split, kSeeds);
  auto oma = rates("default", Baseline::ris_oma, kSeeds);
  Stats g1, g2, g3;
  bool ok = gap_ok(dbl, star, &g1) & gap_ok(star, split, &g2) & gap_ok(split, oma, &g3);
  verdict(6, ok, "double >= STAR >= split >= OMA, every paired gap positive at one standard error");
  detail("means: double %.4f, STAR %.4f, split %.4f, OMA %.4f", stats(dbl).mean, stats(star).mean,
         stats(split).mean, stats(oma).mean);
  detail("gaps (mean +- se): %.4f +- %.4f, %.4f +- %.4f, %.4f +- %.4f", g1.mean, g1.se, g2.mean, g2.se, g3.mean,
         g3.se);
}

bool increasing(const std::string& label, const std::vector<std::string>& cfgs, std::string* out)
{
  bool ok = true;
  double prev = -INFINITY;
  std::string line = label + ":";
  for (const auto& c : cfgs) {
    Stats s = stats(rates(c, Baseline::proposed, kSeeds));
    char buf[64];
    std::snprintf(buf, sizeof buf, " %.4f", s.mean);
    line += buf;
    if (!(s.mean > prev) || s.n != kSeeds) ok = false;
    prev = s.mean;
  }
  *out = line;
  return ok;
}

void criterion_trends(const std::vector<std::string>& m, const std::vector<std::string>& n,
                      const std::vector<std::string>& p)
{
  std::string la, lb, lc;
  bool a = increasing("M 6, 10, 14", m, &la);
  bool b = increasing("N_T 4, 6, 8", n, &lb);
  bool c = increasing("P_max 25, 30, 35 dBm", p, &lc);
  verdict(7, a && b && c, "proposed mean sum rate increases with M, N_T and P_max");
  for (const auto* l : {&la, &lb, &lc}) detail("%s", l->c_str());
}

void criterion_beam_baselines()
{
  Stats prop = stats(rates("default", Baseline::proposed, kSeeds));
  Stats mrt = stats(rates("default", Baseline::mrt, kSeeds));
  Stats zf = stats(rates("default", Baseline::zf, kSeeds));
  Stats rnd = stats(rates("default", Baseline::random_beams, kSeeds));
  double best = std::max({mrt.mean, zf.mean, rnd.mean});
  bool ok = prop.mean >= mrt.mean && mrt.mean >= rnd.mean && zf.mean >= rnd.mean && prop.mean >= 1.05 * best &&
            prop.n == kSeeds && mrt.n == kSeeds && zf.n == kSeeds && rnd.n == kSeeds;
  verdict(8, ok, "proposed >= MRT >= random, ZF >= random, proposed >= 1.05 x best baseline");
  detail("means: proposed %.4f, MRT %.4f, ZF %.4f, random %.4f, margin over best %.2f%%", prop.mean, mrt.mean,
         zf.mean, rnd.mean, 100.0 * (prop.mean / best - 1.0));
}

void criterion_order_baselines()
{
  Stats g = stats(rates("reduced", Baseline::proposed, kSeeds));
  Stats ex = stats(rates("reduced", Baseline::exhaustive_order, kSeeds));
  Stats rnd = stats(rates("reduced", Baseline::random_order, kSeeds));
  bool ok = g.n == kSeeds && ex.n == kSeeds && rnd.n == kSeeds && g.mean >= 0.95 * ex.mean && g.mean > rnd.mean;
  verdict(9, ok, "gain order >= 95% of exhaustive order search and above random order");
  detail("means: gain order %.4f, exhaustive %.4f (ratio %.4f), random order %.4f", g.mean, ex.mean,
         g.mean / ex.mean, rnd.mean);
}

void amplitude_means(const std::string& cfg, double* bt, double* br)
{
  double t = 0.0, r = 0.0;
  int n = 0;
  for (int s = 1; s <= kSeeds; ++s) {
    const Run& x = get(cfg, Baseline::proposed, s);
    if (!x.error.empty()) continue;
    t += x.sol.state.coeffs.beta_t.mean();
    r += x.sol.state.coeffs.beta_r.mean();
    ++n;
  }
  *bt = n ? t / n : 0.0;
  *br = n ? r / n : 0.0;
}

void criterion_amplitudes()
{
  double t1, r1, t2, r2;
  amplitude_means("default", &t1, &r1);
  amplitude_means("all_reflection", &t2, &r2);
  bool ok = t1 > r1 && r2 > t2;
  verdict(10, ok, "transmission amplitudes dominate with two T-side clusters, reflection with all clusters R-side");
  detail("default geometry: mean beta_t %.4f, beta_r %.4f", t1, r1);
  detail("all R-side: mean beta_t %.4f, beta_r %.4f", t2, r2);
}

void criterion_residuals()
{
  int solutions = 0, structural = 0, qos_checked = 0, qos_miss = 0, order_qos_miss = 0, order_runs = 0, errs = 0;
  std::string first, first_miss;
  for (const auto& [k, r] : runs) {
    if (!r.error.empty()) {
      ++errs;
      if (first.empty()) first = std::string(to_string(k.baseline)) + ": " + r.error;
      continue;
    }
    ++solutions;
    if (!r.ver.passed()) {
      ++structural;
      if (first.empty()) first = std::string(to_string(k.baseline)) + ": " + r.ver.violations.front();
    }
    // the order baselines may pick orders under which the floors cannot be met
    if (k.baseline == Baseline::random_order || k.baseline == Baseline::combined_gain_order) {
      ++order_runs;
      order_qos_miss += !r.ver.qos_met;
      continue;
    }
    ++qos_checked;
    if (!r.ver.qos_met) {
      ++qos_miss;
      if (first_miss.empty())
        first_miss = k.config + " " + to_string(k.baseline) + " seed " + std::to_string(k.seed) + ", lowest rate " +
                     std::to_string(r.sol.user_rates.minCoeff());
    }
  }
  verdict(11, structural == 0 && qos_miss == 0 && errs == 0,
          "power, amplitude, power-split, eigenvalue and QoS re-checks at every reported solution");
  detail("solutions %d, structural violations %d, errors %d", solutions, structural, errs);
  detail("QoS checked on %d, below R_min - 1e-6: %d", qos_checked, qos_miss);
  detail("fixed-order baselines (reported only): %d runs, %d below R_min", order_runs, order_qos_miss);
  if (!first.empty()) detail("first problem: %s", first.c_str());
  if (!first_miss.empty()) detail("first QoS miss: %s", first_miss.c_str());
}

}  // namespace

int main()
{
  auto t0 = std::chrono::steady_clock::now();
  configs["default"] = load_config(kConfigDir + "/table2.json");
  configs["reduced"] = load_config(kConfigDir + "/reduced_2x2.json");
  configs["all_reflection"] = load_config(kConfigDir + "/all_reflection.json");

  criterion_power_oracle();
  criterion_feasibility();
  criterion_sic();

  std::vector<std::string> m{with("default", "M", 6), "default", with("default", "M", 14)};
  std::vector<std::string> n{"default", with("default", "N_T", 6), with("default", "N_T", 8)};
  std::vector<std::string> p{with("default", "P_max", 25), with("default", "P_max", 30), "default"};

  std::vector<Key> all = keys("default", Baseline::proposed, kRankSeeds);
  for (Baseline b : {Baseline::ris_noma_double, Baseline::ris_noma_split, Baseline::ris_oma, Baseline::mrt,
                     Baseline::zf, Baseline::random_beams})
    for (const auto& k : keys("default", b, kSeeds)) all.push_back(k);
  for (Baseline b : {Baseline::proposed, Baseline::exhaustive_order, Baseline::random_order})
    for (const auto& k : keys("reduced", b, kSeeds)) all.push_back(k);
  for (const auto& k : keys("all_reflection", Baseline::proposed, kSeeds)) all.push_back(k);
  for (const auto* group : {&m, &n, &p})
    for (const auto& c : *group)
      for (const auto& k : keys(c, Baseline::proposed, kSeeds)) all.push_back(k);
  ensure(all);

  criterion_rank_one();
  criterion_monotone(n);
  criterion_ordering();
  criterion_trends(m, n, p);
  criterion_beam_baselines();
  criterion_order_baselines();
  criterion_amplitudes();
  criterion_residuals();

  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 11 criteria failed, %zu trials, %.0f s\n", failures, runs.size(), secs);
  return failures == 0 ? 0 : 1;
}
