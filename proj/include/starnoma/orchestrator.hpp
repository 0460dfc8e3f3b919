#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "starnoma/active_beamforming.hpp"
#include "starnoma/tr_beamforming.hpp"

namespace starnoma {

enum class Baseline {
  proposed,
  zf,
  mrt,
  random_beams,
  exhaustive_order,
  combined_gain_order,
  random_order,
  ris_noma_split,
  ris_noma_double,
  ris_oma
};

inline const std::vector<Baseline>& all_baselines()
{
  static const std::vector<Baseline> all{Baseline::proposed,         Baseline::zf,
                                         Baseline::mrt,              Baseline::random_beams,
                                         Baseline::exhaustive_order, Baseline::combined_gain_order,
                                         Baseline::random_order,     Baseline::ris_noma_split,
                                         Baseline::ris_noma_double,  Baseline::ris_oma};
  return all;
}

inline const char* to_string(Baseline b)
{
  switch (b) {
    case Baseline::proposed: return "proposed";
    case Baseline::zf: return "zf";
    case Baseline::mrt: return "mrt";
    case Baseline::random_beams: return "random_beams";
    case Baseline::exhaustive_order: return "exhaustive_order";
    case Baseline::combined_gain_order: return "combined_gain_order";
    case Baseline::random_order: return "random_order";
    case Baseline::ris_noma_split: return "ris_noma_split";
    case Baseline::ris_noma_double: return "ris_noma_double";
    default: return "ris_oma";
  }
}

inline Baseline parse_baseline(const std::string& s)
{
  for (Baseline b : all_baselines())
    if (s == to_string(b)) return b;
  throw UsageError("unknown baseline: " + s);
}

enum class BeamRule { sca, mrt, zf, random };
enum class OrderRule { gamma, combined_gain, fixed };

// ---------------------------------------------------------------- beam rules

// Equal power P_max / C per cluster
inline std::vector<CVec> scale_beams(std::vector<CVec> w, double p_max)
{
  const double per = p_max / static_cast<double>(w.size());
  for (auto& v : w) {
    double n = v.norm();
    if (!(n > 0.0)) throw DomainError("beam direction has zero norm");
    v *= std::sqrt(per) / n;
  }
  return w;
}

// Representative of each cluster: the user in the last decoding slot
inline std::vector<int> representatives(const Layout& l, const DecodingOrder& o)
{
  std::vector<int> r;
  for (int c = 0; c < l.num_clusters(); ++c) r.push_back(o.user(l, c, static_cast<int>(o.perm[c].size()) - 1));
  return r;
}

inline std::vector<CVec> mrt_beams(const std::vector<CVec>& h, const std::vector<int>& rep, double p_max)
{
  std::vector<CVec> w;
  for (int u : rep) w.push_back(h.at(u).conjugate());
  return scale_beams(std::move(w), p_max);
}

// Pseudo-inverse of the stacked representative rows: h_rep(c') w_c = 0 for c' != c
inline std::vector<CVec> zf_beams(const std::vector<CVec>& h, const std::vector<int>& rep, double p_max)
{
  const int C = static_cast<int>(rep.size());
  const int N = static_cast<int>(h.at(rep[0]).size());
  if (C > N) throw UsageError("zero forcing needs at least as many antennas as clusters");
  CMat H(C, N);
  for (int c = 0; c < C; ++c) H.row(c) = h[rep[c]].transpose();
  CMat G = H * H.adjoint();
  Eigen::FullPivLU<CMat> lu(G);
  if (lu.rank() < C) throw UsageError("zero forcing needs linearly independent representative channels");
  CMat W = H.adjoint() * lu.inverse();
  std::vector<CVec> w;
  for (int c = 0; c < C; ++c) w.push_back(W.col(c));
  return scale_beams(std::move(w), p_max);
}

inline std::vector<CVec> random_beam_set(int C, int N, double p_max, std::mt19937_64& rng)
{
  std::vector<CVec> w;
  for (int c = 0; c < C; ++c) w.push_back(complex_gaussian(N, 1, rng).col(0));
  return scale_beams(std::move(w), p_max);
}

// ---------------------------------------------------------------- order rules

// Ascending own-beam gain |h w_c|^2, interference ignored
inline DecodingOrder combined_gain_order(const BeamGains& g, const Layout& l)
{
  RVec own(l.num_users());
  for (int u = 0; u < l.num_users(); ++u) own(u) = g.power(u, l.cluster_of[u]);
  return decoding_order(own, l);
}

inline DecodingOrder random_decoding_order(const Layout& l, std::mt19937_64& rng)
{
  DecodingOrder o = DecodingOrder::identity(l);
  for (auto& p : o.perm) std::shuffle(p.begin(), p.end(), rng);
  return o;
}

// Every joint order, cluster 0 varying slowest
inline std::vector<DecodingOrder> all_orders(const Layout& l)
{
  std::vector<DecodingOrder> out{DecodingOrder::identity(l)};
  for (int c = 0; c < l.num_clusters(); ++c) {
    std::vector<DecodingOrder> next;
    for (const auto& o : out) {
      std::vector<int> p = o.perm[c];
      std::sort(p.begin(), p.end());
      do {
        DecodingOrder q = o;
        q.perm[c] = p;
        next.push_back(q);
      } while (std::next_permutation(p.begin(), p.end()));
    }
    out = std::move(next);
  }
  return out;
}

inline double order_count(const Layout& l)
{
  double n = 1.0;
  for (const auto& us : l.users)
    for (size_t k = 2; k <= us.size(); ++k) n *= static_cast<double>(k);
  return n;
}

// ---------------------------------------------------------------- rates under SIC

// Rate each user can actually be served at: every later decoder must also decode it
inline RVec achievable_rates(const RateReport& r, const DecodingOrder& o, const Layout& l)
{
  RVec out(r.rate.size());
  for (int c = 0; c < l.num_clusters(); ++c) {
    const auto& cr = r.cross[c];
    for (Eigen::Index k = 0; k < cr.rows(); ++k) {
      double v = cr(k, k);
      for (Eigen::Index j = k + 1; j < cr.rows(); ++j) v = std::min(v, cr(j, k));
      out(o.user(l, c, static_cast<int>(k))) = v;
    }
  }
  return out;
}

inline double achievable_sum_rate(const Problem& p, const SystemState& s)
{
  RateReport r = state_rates(p, s);
  return achievable_rates(r, s.order, p.layout).sum();
}

// ---------------------------------------------------------------- power step

struct PowerStep {
  RVec rho;
  bool feasible = true;  // every cluster passed the load test
};

// Closed-form coefficients per cluster; infeasible clusters keep `fallback`
inline PowerStep allocate_power(const Problem& p, const BeamGains& g, const DecodingOrder& o, const RVec& fallback)
{
  const Layout& l = p.layout;
  RVec gam = equivalent_gains(g, l);
  PowerStep out;
  out.rho = fallback;
  const double r = sinr_floor(p.r_min);
  for (int c = 0; c < l.num_clusters(); ++c) {
    RVec gs = slot_gains(gam, o, l, c);
    RVec rs = RVec::Constant(gs.size(), r);
    if (!(gs.minCoeff() > 0.0) || !check_feasibility(gs, rs).feasible) {
      out.feasible = false;
      continue;
    }
    RVec rho = optimal_power(gs, rs);
    for (Eigen::Index k = 0; k < gs.size(); ++k) out.rho(o.user(l, c, static_cast<int>(k))) = rho(k);
  }
  return out;
}

// Theorem-1 coefficients, or the minimum-power split rescaled to sum to one
inline RVec initial_power(const Problem& p, const BeamGains& g, const DecodingOrder& o)
{
  const Layout& l = p.layout;
  RVec gam = equivalent_gains(g, l);
  RVec rho(l.num_users());
  const double r = sinr_floor(p.r_min);
  for (int c = 0; c < l.num_clusters(); ++c) {
    const int K = static_cast<int>(o.perm[c].size());
    RVec gs = slot_gains(gam, o, l, c).cwiseMax(1e-300);
    RVec rs = RVec::Constant(K, r);
    RVec v;
    if (check_feasibility(gs, rs).feasible) {
      v = optimal_power(gs, rs);
    } else {
      v = min_power_coefficients(gs, rs);
      v = v.sum() > 0.0 ? RVec(v / v.sum()) : RVec::Constant(K, 1.0 / K);
    }
    for (int k = 0; k < K; ++k) rho(o.user(l, c, k)) = v(k);
  }
  return rho;
}

// ---------------------------------------------------------------- bookkeeping

struct RunLog {
  std::vector<std::vector<double>> sca_objectives;  // per active-beamforming run
  std::vector<int> sca_iterations;
  std::vector<double> sca_residuals;    // worst rank residual per subproblem solve
  std::vector<double> relax_residuals;  // 1 - lambda_max/Tr at termination, per run
  int sca_runs = 0, sca_failures = 0;
  int relax_runs = 0, relax_solves = 0, relax_failures = 0, relax_not_rank_one = 0;
  int power_skips = 0;
  double min_eigenvalue = 0.0;  // over every returned PSD block

  void merge(const RunLog& o)
  {
    sca_objectives.insert(sca_objectives.end(), o.sca_objectives.begin(), o.sca_objectives.end());
    sca_iterations.insert(sca_iterations.end(), o.sca_iterations.begin(), o.sca_iterations.end());
    sca_residuals.insert(sca_residuals.end(), o.sca_residuals.begin(), o.sca_residuals.end());
    relax_residuals.insert(relax_residuals.end(), o.relax_residuals.begin(), o.relax_residuals.end());
    sca_runs += o.sca_runs;
    sca_failures += o.sca_failures;
    relax_runs += o.relax_runs;
    relax_solves += o.relax_solves;
    relax_failures += o.relax_failures;
    relax_not_rank_one += o.relax_not_rank_one;
    power_skips += o.power_skips;
    min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
  }
};

// QoS shortfall first, sum rate second
struct Score {
  double deficit = 0.0;
  double rate = 0.0;
};

inline Score score(const Problem& p, const SystemState& s)
{
  RateReport r = state_rates(p, s);
  return {qos_deficit(p, r.rate), r.total};
}

inline bool not_worse(const Score& a, const Score& b, double qos_tol = 1e-9)
{
  const bool am = a.deficit <= qos_tol, bm = b.deficit <= qos_tol;
  if (am && bm) return a.rate >= b.rate;
  if (am != bm) return am;
  if (a.deficit < b.deficit - qos_tol) return true;
  return a.deficit <= b.deficit + qos_tol && a.rate >= b.rate;
}

// Sum rate after each block of one inner pass
struct ChainStep {
  double start = 0.0, power = 0.0, active = 0.0, passive = 0.0;
  bool qos_met = true;  // QoS held when the pass started, so the chain must be monotone

  bool monotone(double tol) const { return power >= start - tol && active >= power - tol && passive >= active - tol; }
};

struct OrchestratorOptions {
  double inner_tol = 1e-3;
  int inner_max = 30;
  double outer_tol = 1e-3;
  int outer_max = 20;
  BeamRule beams = BeamRule::sca;
  OrderRule order = OrderRule::gamma;
  bool optimize_passive = true;
  ScaOptions sca;
  RelaxOptions relax;
};

struct InnerResult {
  SystemState state;
  double rate = 0.0;           // sum rate from the per-user own-signal rates
  std::vector<double> trace;   // rate after every pass, starting with the initial state
  std::vector<ChainStep> chain;
  int passes = 0;
  bool power_feasible = true;  // last power step passed the load test
};

inline SystemState with_power(const Problem& p, SystemState s, bool* feasible = nullptr)
{
  PowerStep ps = allocate_power(p, state_gains(p, s), s.order, s.rho);
  if (feasible) *feasible = ps.feasible;
  s.rho = ps.rho;
  return s;
}

// Alternating power -> active -> passive blocks for a fixed decoding order.
// A block result replaces the state only if it is not worse; QoS shortfall ranks before rate.
inline InnerResult inner_loop(const Problem& p, SystemState s, const OrchestratorOptions& opt, RunLog& log,
                              const std::vector<CVec>* fixed_beams = nullptr)
{
  InnerResult res;
  Score cur = score(p, s);
  res.trace.push_back(cur.rate);
  auto offer = [&](SystemState t) {
    SystemState tp = with_power(p, t);
    Score a = score(p, t), b = score(p, tp);
    if (not_worse(b, a)) {
      t = std::move(tp);
      a = b;
    }
    if (not_worse(a, cur)) {
      s = std::move(t);
      cur = a;
    }
  };
  for (int pass = 0; pass < opt.inner_max; ++pass) {
    ChainStep ch;
    ch.start = cur.rate;
    ch.qos_met = cur.deficit <= 1e-9;

    // power allocation
    {
      bool feasible = true;
      SystemState t = with_power(p, s, &feasible);
      if (!feasible) ++log.power_skips;
      res.power_feasible = feasible;
      Score a = score(p, t);
      if (not_worse(a, cur)) {
        s = std::move(t);
        cur = a;
      }
    }
    ch.power = cur.rate;

    // active beamforming
    {
      SystemState t = s;
      if (opt.beams == BeamRule::sca) {
        ScaResult a = sca_active(p, s, opt.sca);
        ++log.sca_runs;
        if (a.status == ScaStatus::solver_failure) ++log.sca_failures;
        log.sca_objectives.push_back(a.objective);
        log.sca_iterations.push_back(a.iterations);
        log.sca_residuals.insert(log.sca_residuals.end(), a.rank_residual.begin(), a.rank_residual.end());
        log.min_eigenvalue = std::min(log.min_eigenvalue, a.min_eigenvalue);
        t.w = a.beams;
      } else if (opt.beams == BeamRule::random) {
        t.w = *fixed_beams;
      } else {
        std::vector<CVec> h = combined_channels(*p.channels, s.coeffs);
        std::vector<int> rep = representatives(p.layout, s.order);
        t.w = opt.beams == BeamRule::mrt ? mrt_beams(h, rep, p.p_max) : zf_beams(h, rep, p.p_max);
      }
      offer(std::move(t));
    }
    ch.active = cur.rate;

    // transmission and reflection beamforming
    if (opt.optimize_passive) {
      RelaxResult rr = sequential_relaxation(p, s, opt.relax);
      ++log.relax_runs;
      log.relax_solves += rr.solves;
      log.relax_failures += rr.failures;
      if (!rr.accepted.empty()) log.relax_residuals.push_back(1.0 - rr.accepted.back().ratio);
      if (!rr.rank_one) ++log.relax_not_rank_one;
      log.min_eigenvalue = std::min(log.min_eigenvalue, rr.min_eigenvalue);
      if (rr.improved) {
        SystemState t = s;
        t.coeffs = rr.coeffs;
        offer(std::move(t));
      }
    }
    ch.passive = cur.rate;
    res.chain.push_back(ch);
    res.trace.push_back(cur.rate);
    ++res.passes;
    if (std::abs(cur.rate - ch.start) <= opt.inner_tol * std::max(1.0, std::abs(cur.rate))) break;
  }
  res.state = std::move(s);
  res.rate = cur.rate;
  return res;
}

// ---------------------------------------------------------------- two-layer loop

struct Solution {
  SystemState state;
  double rate = 0.0;              // achievable sum rate under SIC
  RVec user_rates;                // achievable per-user rates
  std::vector<double> outer_trace;
  std::vector<std::vector<double>> inner_traces;
  std::vector<ChainStep> chain;
  int outer_iterations = 0;
  int inner_passes = 0;
  bool order_fixed_point = false;  // final order is the rule's order at the final state
  bool feasible = true;            // every user meets R_min
  bool oma = false;                // time-shared single-user slots
  std::vector<StarCoefficients> slot_coeffs;  // RIS setting per slot (OMA only)
  RunLog log;
};

inline DecodingOrder next_order(const Problem& p, const SystemState& s, OrderRule rule)
{
  BeamGains g = state_gains(p, s);
  if (rule == OrderRule::combined_gain) return combined_gain_order(g, p.layout);
  if (rule == OrderRule::gamma) return decoding_order(equivalent_gains(g, p.layout), p.layout);
  return s.order;
}

// beta = 1/2 (or variant masks), random phases, equal-power MRT to the strongest user of each cluster
inline SystemState initial_state(const Problem& p, std::uint64_t seed, OrderRule rule = OrderRule::gamma)
{
  const Layout& l = p.layout;
  SystemState s;
  auto rng = substream(seed, stream::init_phase);
  s.coeffs = initial_coefficients(p.variant, rng);
  std::vector<CVec> h = combined_channels(*p.channels, s.coeffs);
  std::vector<int> rep;
  for (const auto& us : l.users) {
    int best = us[0];
    for (int u : us)
      if (h[u].squaredNorm() > h[best].squaredNorm()) best = u;
    rep.push_back(best);
  }
  s.w = mrt_beams(h, rep, p.p_max);
  s.order = rule == OrderRule::fixed ? DecodingOrder::identity(l) : next_order(p, s, rule);
  s.rho = initial_power(p, state_gains(p, s), s.order);
  return s;
}

inline void finalize(const Problem& p, Solution& sol)
{
  RateReport r = state_rates(p, sol.state);
  sol.user_rates = achievable_rates(r, sol.state.order, p.layout);
  sol.rate = sol.user_rates.sum();
  sol.feasible = sol.user_rates.minCoeff() >= p.r_min - 1e-6;
}

inline Solution two_layer(const Problem& p, SystemState s, const OrchestratorOptions& opt,
                          const std::vector<CVec>* fixed_beams = nullptr)
{
  Solution sol;
  if (fixed_beams) s.w = *fixed_beams;
  InnerResult in = inner_loop(p, s, opt, sol.log, fixed_beams);
  sol.inner_traces.push_back(in.trace);
  sol.chain = in.chain;
  sol.inner_passes = in.passes;
  sol.state = in.state;
  double best = achievable_sum_rate(p, sol.state);
  sol.outer_trace.push_back(best);
  sol.outer_iterations = 1;

  for (int it = 1; it < opt.outer_max && opt.order != OrderRule::fixed; ++it) {
    DecodingOrder o = next_order(p, sol.state, opt.order);
    if (o == sol.state.order) break;
    SystemState t = sol.state;
    t.order = o;
    InnerResult cand = inner_loop(p, t, opt, sol.log, fixed_beams);
    sol.inner_traces.push_back(cand.trace);
    sol.chain.insert(sol.chain.end(), cand.chain.begin(), cand.chain.end());
    sol.inner_passes += cand.passes;
    ++sol.outer_iterations;
    double r = achievable_sum_rate(p, cand.state);
    const double prev = best;
    if (r >= best) {
      sol.state = cand.state;
      best = r;
    }
    sol.outer_trace.push_back(best);
    if (std::abs(best - prev) <= opt.outer_tol * std::max(1.0, std::abs(best))) break;
  }

  // bring the order in line with the final beams when that does not cost rate
  if (opt.order != OrderRule::fixed) {
    DecodingOrder o = next_order(p, sol.state, opt.order);
    if (o != sol.state.order) {
      SystemState t = sol.state;
      t.order = o;
      PowerStep ps = allocate_power(p, state_gains(p, t), o, t.rho);
      if (ps.feasible) t.rho = ps.rho;
      double r = achievable_sum_rate(p, t);
      if (r >= best) {
        sol.state = t;
        best = r;
        sol.outer_trace.push_back(best);
      }
    }
    sol.order_fixed_point = next_order(p, sol.state, opt.order) == sol.state.order;
  } else {
    sol.order_fixed_point = true;
  }
  finalize(p, sol);
  return sol;
}

// ---------------------------------------------------------------- baselines

struct BaselineOptions {
  OrchestratorOptions orchestrator;
  bool force_exhaustive = false;
  double exhaustive_limit = 1000.0;
  double exhaustive_tol = 1e-3;  // inner tolerance per candidate order
};

// OMA: equal time shares, each slot serves one user with full-power MRT and its own RIS phases
inline Solution ris_oma(const Scenario& sc, const ChannelSet& ch, std::uint64_t seed, const BaselineOptions& bo)
{
  const Layout& l = sc.layout;
  const int K = l.num_users();
  Solution sol;
  Problem full = Problem::from_scenario(sc, ch, RisKind::split);
  sol.state.order = DecodingOrder::identity(l);
  sol.state.rho = RVec::Ones(K);
  sol.state.w.assign(K, CVec());
  sol.user_rates = RVec::Zero(K);
  OrchestratorOptions opt = bo.orchestrator;
  opt.beams = BeamRule::mrt;
  opt.order = OrderRule::fixed;
  StarCoefficients merged;
  for (int u = 0; u < K; ++u) {
    ChannelSet one;
    one.F = ch.F;
    one.g = {ch.g[u]};
    one.side = {ch.side[u]};
    one.position = {ch.position[u]};
    Problem p = full;
    p.channels = &one;
    p.layout = Layout::from_sizes({1});
    p.r_min = 0.0;
    SystemState s = initial_state(p, seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(u + 1), OrderRule::fixed);
    InnerResult in = inner_loop(p, s, opt, sol.log);
    sol.inner_traces.push_back(in.trace);
    sol.chain.insert(sol.chain.end(), in.chain.begin(), in.chain.end());
    sol.inner_passes += in.passes;
    double snr = state_gains(p, in.state).power(0, 0) / p.noise;
    sol.user_rates(u) = log2_1p(snr) / K;
    sol.state.w[u] = in.state.w[0];
    sol.slot_coeffs.push_back(in.state.coeffs);
    if (u == 0) sol.state.coeffs = in.state.coeffs;
  }
  sol.oma = true;
  sol.rate = sol.user_rates.sum();
  sol.outer_trace = {sol.rate};
  sol.outer_iterations = 1;
  sol.order_fixed_point = true;
  sol.feasible = sol.user_rates.minCoeff() >= sc.config.r_min - 1e-6;
  return sol;
}

inline Solution run_baseline(const Scenario& sc, const ChannelSet& ch, Baseline b, std::uint64_t seed,
                             const BaselineOptions& bo = {})
{
  if (b == Baseline::ris_oma) return ris_oma(sc, ch, seed, bo);
  RisKind kind = b == Baseline::ris_noma_split ? RisKind::split
                 : b == Baseline::ris_noma_double ? RisKind::double_
                                                   : RisKind::star;
  Problem p = Problem::from_scenario(sc, ch, kind);
  OrchestratorOptions opt = bo.orchestrator;
  switch (b) {
    case Baseline::zf: opt.beams = BeamRule::zf; break;
    case Baseline::mrt: opt.beams = BeamRule::mrt; break;
    case Baseline::random_beams: opt.beams = BeamRule::random; break;
    case Baseline::combined_gain_order: opt.order = OrderRule::combined_gain; break;
    case Baseline::random_order:
    case Baseline::exhaustive_order: opt.order = OrderRule::fixed; break;
    default: break;
  }

  if (b == Baseline::random_beams) {
    auto rng = substream(seed, stream::random_beams);
    std::vector<CVec> w = random_beam_set(p.layout.num_clusters(), sc.num_antennas, p.p_max, rng);
    SystemState s = initial_state(p, seed);
    s.w = w;
    s.order = next_order(p, s, OrderRule::gamma);
    s.rho = initial_power(p, state_gains(p, s), s.order);
    return two_layer(p, s, opt, &w);
  }
  if (b == Baseline::zf) {
    SystemState s = initial_state(p, seed);
    s.w = zf_beams(combined_channels(ch, s.coeffs), representatives(p.layout, s.order), p.p_max);
    s.order = next_order(p, s, OrderRule::gamma);
    s.rho = initial_power(p, state_gains(p, s), s.order);
    return two_layer(p, s, opt);
  }
  if (b == Baseline::random_order) {
    SystemState s = initial_state(p, seed, OrderRule::fixed);
    auto rng = substream(seed, stream::random_order);
    s.order = random_decoding_order(p.layout, rng);
    s.rho = initial_power(p, state_gains(p, s), s.order);
    return two_layer(p, s, opt);
  }
  if (b == Baseline::exhaustive_order) {
    if (order_count(p.layout) > bo.exhaustive_limit && !bo.force_exhaustive)
      throw UsageError("exhaustive order search over more than " + std::to_string(bo.exhaustive_limit) +
                       " joint orders needs force");
    opt.inner_tol = bo.exhaustive_tol;
    Solution best;
    bool have = false;
    RunLog log;
    for (const DecodingOrder& o : all_orders(p.layout)) {
      SystemState s = initial_state(p, seed, OrderRule::fixed);
      s.order = o;
      s.rho = initial_power(p, state_gains(p, s), o);
      Solution cand = two_layer(p, s, opt);
      log.merge(cand.log);
      // QoS-feasible orders rank first, then sum rate
      bool better = !have || (cand.feasible != best.feasible ? cand.feasible : cand.rate > best.rate);
      if (better) {
        best = std::move(cand);
        have = true;
      }
    }
    best.log = std::move(log);
    return best;
  }
  if (opt.order == OrderRule::combined_gain) return two_layer(p, initial_state(p, seed, OrderRule::combined_gain), opt);
  return two_layer(p, initial_state(p, seed), opt);
}

}  // namespace starnoma
