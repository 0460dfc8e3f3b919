#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "starnoma/scenario.hpp"

using namespace starnoma;

namespace {

Scenario defaults() { return make_scenario(ScenarioConfig{}); }

}  // namespace

TEST(Scenario, PathLossAtOneMetre)
{
  EXPECT_NEAR(path_loss(1.0, 2.2, -30.0), 1.0e-3, 1e-15);
  EXPECT_NEAR(path_loss(1.0, 3.7, -30.0), 1.0e-3, 1e-15);
}

TEST(Scenario, PathLossAtTenMetres)
{
  EXPECT_NEAR(path_loss(10.0, 2.0, -30.0), 1.0e-5, 1e-17);
}

TEST(Scenario, PathLossRejectsBadDistance)
{
  EXPECT_THROW(path_loss(0.0, 2.2, -30.0), DomainError);
  EXPECT_THROW(path_loss(-1.0, 2.2, -30.0), DomainError);
  EXPECT_THROW(path_loss(1.0, 0.0, -30.0), DomainError);
}

TEST(Scenario, RicianPowerRatio)
{
  std::mt19937_64 rng(7);
  const int n = 10000;
  CMat los = CMat::Ones(n, 1);
  CMat x = rician_channel(los, 3.0, 1.0, rng);
  cplx mean = x.mean();
  double los_power = std::norm(mean);
  double nlos_power = (x.array() - mean).abs2().mean();
  EXPECT_NEAR(los_power / nlos_power, std::pow(10.0, 0.3), 0.06);
  EXPECT_NEAR(los_power + nlos_power, 1.0, 0.03);
}

TEST(Scenario, RicianScalesWithPathLoss)
{
  std::mt19937_64 a(3), b(3);
  CMat los = CMat::Ones(4, 2);
  CMat x = rician_channel(los, 3.0, 1.0, a);
  CMat y = rician_channel(los, 3.0, 4.0, b);
  EXPECT_LE((y - 2.0 * x).norm(), 1e-12);
}

TEST(Scenario, PureLineOfSight)
{
  std::mt19937_64 rng(1);
  CMat los = CMat::Constant(3, 1, std::polar(1.0, 0.4));
  CMat x = rician_channel(los, 200.0, 1e-4, rng);
  EXPECT_LE((x - 1e-2 * los).norm(), 1e-10);
}

TEST(Scenario, ChannelShapes)
{
  Scenario s = defaults();
  ChannelSet ch = generate_channels(s, 11);
  EXPECT_EQ(ch.F.rows(), 10);
  EXPECT_EQ(ch.F.cols(), 4);
  ASSERT_EQ(ch.g.size(), 9u);
  for (const auto& g : ch.g) EXPECT_EQ(g.size(), 10);
  EXPECT_EQ(ch.side.size(), 9u);
  EXPECT_EQ(ch.position.size(), 9u);
}

TEST(Scenario, SameSeedSameChannels)
{
  Scenario s = defaults();
  ChannelSet a = generate_channels(s, 42);
  ChannelSet b = generate_channels(s, 42);
  ChannelSet c = generate_channels(s, 43);
  EXPECT_EQ(a.F, b.F);
  for (size_t u = 0; u < a.g.size(); ++u) EXPECT_EQ(a.g[u], b.g[u]);
  EXPECT_NE(a.F, c.F);
}

TEST(Scenario, AddingUsersKeepsOtherDraws)
{
  ScenarioConfig cfg;
  Scenario a = make_scenario(cfg);
  cfg.users_per_cluster = {3, 4, 3};
  Scenario b = make_scenario(cfg);
  ChannelSet ca = generate_channels(a, 5);
  ChannelSet cb = generate_channels(b, 5);
  EXPECT_EQ(ca.F, cb.F);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(ca.g[k], cb.g[k]);
    EXPECT_EQ(ca.g[3 + k], cb.g[3 + k]);
    EXPECT_EQ(ca.g[6 + k], cb.g[7 + k]);
  }
}

TEST(Scenario, UsersInsideTheirDisc)
{
  Scenario s = defaults();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ChannelSet ch = generate_channels(s, seed);
    for (int u = 0; u < s.layout.num_users(); ++u) {
      const Point& c = s.centers[s.layout.cluster_of[u]];
      const Point& p = ch.position[u];
      EXPECT_LE(std::hypot(p[0] - c[0], p[1] - c[1]), 5.0 + 1e-12);
      EXPECT_EQ(p[2], 0.0);
    }
  }
}

TEST(Scenario, AverageBsRisGain)
{
  Scenario s = defaults();
  double acc = 0.0;
  const int n = 400;
  for (int t = 0; t < n; ++t) acc += generate_channels(s, 1000 + t).F.squaredNorm();
  double expected = 1e-3 * std::exp(-2.2 * std::log(30.0));
  EXPECT_NEAR(acc / n / 40.0, expected, 0.05 * expected);
}

TEST(Scenario, SidesFromGeometry)
{
  Scenario s = defaults();
  ASSERT_EQ(s.cluster_side.size(), 3u);
  EXPECT_EQ(s.cluster_side[0], Side::reflection);
  EXPECT_EQ(s.cluster_side[1], Side::transmission);
  EXPECT_EQ(s.cluster_side[2], Side::transmission);
  ChannelSet ch = generate_channels(s, 1);
  for (int u = 0; u < 9; ++u) EXPECT_EQ(ch.side[u], s.cluster_side[u / 3]);
}

TEST(Scenario, MirroredSides)
{
  ScenarioConfig cfg;
  cfg.mirror_sides = true;
  Scenario s = make_scenario(cfg);
  EXPECT_EQ(s.cluster_side[0], Side::transmission);
  EXPECT_EQ(s.cluster_side[1], Side::reflection);
  EXPECT_DOUBLE_EQ(s.centers[0][1], 35.0);
  EXPECT_DOUBLE_EQ(s.centers[1][1], 25.0);
}

TEST(Scenario, ExplicitSides)
{
  ScenarioConfig cfg;
  cfg.cluster_sides = {"R", "R", "R"};
  Scenario s = make_scenario(cfg);
  for (Side side : s.cluster_side) EXPECT_EQ(side, Side::reflection);
}

TEST(Scenario, LinearUnits)
{
  Scenario s = defaults();
  EXPECT_NEAR(s.noise_power, 1e-12, 1e-24);
  EXPECT_NEAR(s.p_max, std::pow(10.0, 0.5), 1e-12);
  EXPECT_NEAR(s.kappa_br, 1.9952623149688795, 1e-12);
}

TEST(Scenario, ValidationErrors)
{
  ScenarioConfig c;
  c.cluster_radius = 0.0;
  EXPECT_THROW(make_scenario(c), UsageError);
  c = {};
  c.users_per_cluster = {3, 3};
  EXPECT_THROW(make_scenario(c), UsageError);
  c = {};
  c.users_per_cluster = {3, 0, 3};
  EXPECT_THROW(make_scenario(c), UsageError);
  c = {};
  c.cluster_sides = {"T", "X", "R"};
  EXPECT_THROW(make_scenario(c), UsageError);
  c = {};
  c.r_min = -0.1;
  EXPECT_THROW(make_scenario(c), UsageError);
}

TEST(Scenario, JsonRoundTrip)
{
  ScenarioConfig c;
  c.num_elements = 14;
  c.cluster_sides = {"T", "R", "T"};
  c.r_min = 0.25;
  nlohmann::json j = c;
  ScenarioConfig d = j.get<ScenarioConfig>();
  EXPECT_EQ(nlohmann::json(d), j);
  EXPECT_EQ(d.num_elements, 14);
  EXPECT_EQ(d.cluster_sides[1], "R");
}

TEST(Scenario, JsonRejectsUnknownKey)
{
  nlohmann::json j = {{"num_elements", 8}, {"num_elemnts", 9}};
  EXPECT_THROW(j.get<ScenarioConfig>(), UsageError);
}

TEST(Scenario, MissingFileIsUsageError)
{
  EXPECT_THROW(load_config("/nonexistent/config.json"), UsageError);
}

TEST(Scenario, SweepParameters)
{
  ScenarioConfig c;
  set_parameter(c, "M", 20);
  set_parameter(c, "K_c", 2);
  set_parameter(c, "P_max", 30);
  EXPECT_EQ(c.num_elements, 20);
  EXPECT_EQ(c.users_per_cluster, (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(c.p_max_dbm, 30.0);
  EXPECT_THROW(set_parameter(c, "bogus", 1), UsageError);
}
