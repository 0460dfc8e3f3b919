#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "starnoma/active_beamforming.hpp"
#include "starnoma/orchestrator.hpp"

using namespace starnoma;

namespace {

struct Fixture {
  Scenario scenario;
  ChannelSet channels;
  Problem problem;
};

Fixture make_fixture(ScenarioConfig cfg, std::uint64_t seed)
{
  Fixture f;
  f.scenario = make_scenario(cfg);
  f.channels = generate_channels(f.scenario, seed);
  f.problem = Problem::from_scenario(f.scenario, f.channels);
  return f;
}

ScenarioConfig two_by_two()
{
  ScenarioConfig c;
  c.cluster_centers = {{0.0, 25.0, 0.0}, {0.0, 35.0, 0.0}};
  c.users_per_cluster = {2, 2};
  return c;
}

ScenarioConfig single_user()
{
  ScenarioConfig c;
  c.cluster_centers = {{0.0, 35.0, 0.0}};
  c.users_per_cluster = {1};
  return c;
}

double f(double A, double B) { return std::log(1.0 + 1.0 / (A * B)) / std::log(2.0); }

}  // namespace

TEST(ActiveBeamforming, SlackPointSingleUser)
{
  Layout l = Layout::from_sizes({1});
  BeamGains g;
  g.noise = 1.0;
  g.power = RMat::Ones(1, 1);
  SlackPoint sp = init_slacks(g, RVec::Ones(1), DecodingOrder::identity(l), l);
  EXPECT_EQ(sp.A(0), 1.0);
  EXPECT_EQ(sp.B(0), 1.0);
  EXPECT_FALSE(sp.degenerate);
  EXPECT_NEAR(f(sp.A(0), sp.B(0)), 1.0, 1e-15);
}

TEST(ActiveBeamforming, SlackRateMatchesSinrRate)
{
  Fixture fx = make_fixture(ScenarioConfig{}, 3);
  SystemState s = initial_state(fx.problem, 3);
  BeamGains g = state_gains(fx.problem, s);
  RateReport r = evaluate_rates(g, s.rho, s.order, fx.problem.layout);
  SlackPoint sp = init_slacks(g, s.rho, s.order, fx.problem.layout);
  for (int u = 0; u < fx.problem.layout.num_users(); ++u) EXPECT_NEAR(f(sp.A(u), sp.B(u)), r.rate(u), 1e-10);
}

TEST(ActiveBeamforming, ZeroBeamIsClamped)
{
  Layout l = Layout::from_sizes({1});
  BeamGains g;
  g.power = RMat::Zero(1, 1);
  SlackPoint sp = init_slacks(g, RVec::Ones(1), DecodingOrder::identity(l), l);
  EXPECT_TRUE(sp.degenerate);
  EXPECT_TRUE(std::isfinite(sp.A(0)));
}

TEST(ActiveBeamforming, TaylorAtExpansionPoint)
{
  EXPECT_NEAR(taylor_bound(0.7, 3.0, 0.7, 3.0), f(0.7, 3.0), 1e-15);
}

TEST(ActiveBeamforming, TaylorWorkedExample)
{
  double t = taylor_bound(2.0, 2.0, 1.0, 1.0);
  EXPECT_NEAR(t, 1.0 - 1.0 / std::log(2.0), 1e-12);
  EXPECT_NEAR(t, -0.4427, 1e-4);
  EXPECT_LE(t, std::log2(1.25));
}

TEST(ActiveBeamforming, TaylorUnderEstimates)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ld(-6.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    double A0 = std::exp(ld(rng)), B0 = std::exp(ld(rng)) + 1.0, A = std::exp(ld(rng)), B = std::exp(ld(rng)) + 1.0;
    EXPECT_LE(taylor_bound(A, B, A0, B0), f(A, B) + 1e-12);
  }
  EXPECT_THROW(taylor_plane(0.0, 1.0), DomainError);
}

TEST(ActiveBeamforming, ConstraintCount)
{
  Fixture fx = make_fixture(ScenarioConfig{}, 2);
  SystemState s = initial_state(fx.problem, 2);
  BeamGains g = state_gains(fx.problem, s);
  SlackPoint sp = init_slacks(g, s.rho, s.order, fx.problem.layout);
  RVec floors = qos_floors(fx.problem, evaluate_rates(g, s.rho, s.order, fx.problem.layout));
  ActiveSdp sdp =
      build_active_sdp(fx.problem, combined_channels(fx.channels, s.coeffs), s.rho, s.order, sp, floors);
  const int K = 9;
  const auto& pr = sdp.program;
  EXPECT_EQ(pr.count_constraints("taylor") + pr.count_constraints("qos"), 2 * K);
  EXPECT_EQ(pr.count_constraints("interference"), K);
  EXPECT_EQ(pr.count_blocks("hyperbolic"), K);
  EXPECT_EQ(pr.count_constraints("power"), 1);
  EXPECT_EQ(pr.count_blocks("beam"), 3);
}

TEST(ActiveBeamforming, CurrentPointIsFeasible)
{
  Fixture fx = make_fixture(ScenarioConfig{}, 4);
  const Problem& p = fx.problem;
  SystemState s = initial_state(p, 4);
  BeamGains g = state_gains(p, s);
  RateReport r = evaluate_rates(g, s.rho, s.order, p.layout);
  SlackPoint sp = init_slacks(g, s.rho, s.order, p.layout);
  std::vector<CVec> h = combined_channels(fx.channels, s.coeffs);
  ActiveSdp sdp = build_active_sdp(p, h, s.rho, s.order, sp, qos_floors(p, r));

  conic::SolveResult point;
  point.scalars.assign(sdp.program.scalars().size(), 0.0);
  point.blocks.resize(sdp.program.blocks().size());
  for (int c = 0; c < 3; ++c) point.blocks[sdp.W[c].id] = s.w[c] * s.w[c].adjoint();
  for (int u = 0; u < 9; ++u) {
    point.scalars[sdp.A[u].id] = sp.A(u);
    point.scalars[sdp.B[u].id] = sp.B(u);
    point.scalars[sdp.R[u].id] = r.rate(u);
  }
  // hyperbolic blocks are created in slot order
  int b = 3;
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 3; ++k) {
      int u = s.order.user(p.layout, c, k);
      RMat Z(2, 2);
      Z << sp.A(u), 1.0, 1.0, 1.0 / sp.A(u);
      point.blocks[b++] = Z.cast<cplx>();
    }
  conic::Audit a = conic::audit(sdp.program, point);
  EXPECT_LE(a.max_equality, 1e-9);
  EXPECT_LE(a.max_inequality, 1e-9);
  EXPECT_GE(a.min_eigenvalue, -1e-9);
}

TEST(ActiveBeamforming, SingleUserReachesMrtRate)
{
  Fixture fx = make_fixture(single_user(), 7);
  const Problem& p = fx.problem;
  SystemState s = initial_state(p, 7);
  s.w[0] = CVec::Constant(4, cplx(1e-3, 0.0));
  ScaResult res = sca_active(p, s);
  ASSERT_NE(res.status, ScaStatus::solver_failure);
  CVec h = combined_channel(fx.channels, s.coeffs, 0);
  double bound = oracle::log2p(p.p_max * h.squaredNorm() / p.noise);
  EXPECT_NEAR(res.final_rate, bound, 1e-4 * bound);
  EXPECT_NEAR(res.beams[0].squaredNorm(), p.p_max, 1e-6 * p.p_max);
  EXPECT_LE(res.rank_residual.back(), 1e-6);
}

TEST(ActiveBeamforming, ScaIsMonotone)
{
  for (std::uint64_t seed : {1, 2, 3}) {
    Fixture fx = make_fixture(two_by_two(), seed);
    const Problem& p = fx.problem;
    SystemState s = initial_state(p, seed);
    ScaResult res = sca_active(p, s);
    ASSERT_NE(res.status, ScaStatus::solver_failure) << "seed " << seed;
    EXPECT_LE(res.iterations, 30);
    for (size_t i = 1; i < res.objective.size(); ++i)
      EXPECT_GE(res.objective[i], res.objective[i - 1] - 1e-6 * std::abs(res.objective[i])) << "seed " << seed;
    EXPECT_GE(res.final_rate, res.initial_rate - 1e-6);
    double power = 0.0;
    for (const auto& w : res.beams) power += w.squaredNorm();
    EXPECT_LE(power, p.p_max + 1e-6);
    EXPECT_GE(res.min_eigenvalue, -1e-7);
  }
}

TEST(ActiveBeamforming, SubproblemBoundsTrueRate)
{
  Fixture fx = make_fixture(two_by_two(), 5);
  const Problem& p = fx.problem;
  SystemState s = initial_state(p, 5);
  ScaResult res = sca_active(p, s);
  ASSERT_FALSE(res.objective.empty());
  // the linearised objective never exceeds the rate of the relaxed point
  for (size_t i = 0; i < res.objective.size(); ++i)
    if (res.rank_residual[i] < 1e-6) EXPECT_LE(res.objective[i], res.true_rate[i] + 1e-6);
}
