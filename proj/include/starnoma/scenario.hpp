#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "starnoma/common.hpp"

namespace starnoma {

enum class Side { transmission, reflection };

inline const char* to_string(Side s) { return s == Side::transmission ? "T" : "R"; }

using Point = std::array<double, 3>;

// Scenario as written in a configuration file (dB / dBm / metres)
struct ScenarioConfig {
  Point bs_position{0.0, 0.0, 20.0};
  Point ris_position{0.0, 30.0, 20.0};
  std::vector<Point> cluster_centers{{0.0, 25.0, 0.0}, {0.0, 35.0, 0.0}, {5.0, 30.0, 0.0}};
  std::vector<std::string> cluster_sides;  // optional "T"/"R" per cluster
  bool mirror_sides = false;               // reflect clusters through the RIS plane
  double cluster_radius = 5.0;
  int num_antennas = 4;
  int num_elements = 10;
  std::vector<int> users_per_cluster{3, 3, 3};
  double path_loss_exponent_br = 2.2;
  double path_loss_exponent_ru = 2.2;
  double path_loss_ref_db = -30.0;
  double rician_k_br_db = 3.0;
  double rician_k_ru_db = 3.0;
  double noise_power_dbm = -90.0;
  double p_max_dbm = 35.0;
  double r_min = 0.1;
  std::uint64_t rng_seed = 1;
};

// Users grouped by cluster; global user ids run cluster by cluster
struct Layout {
  std::vector<std::vector<int>> users;
  std::vector<int> cluster_of;
  std::vector<int> local_index;

  int num_users() const { return static_cast<int>(cluster_of.size()); }
  int num_clusters() const { return static_cast<int>(users.size()); }

  static Layout from_sizes(const std::vector<int>& sizes)
  {
    Layout l;
    int u = 0;
    for (size_t c = 0; c < sizes.size(); ++c) {
      if (sizes[c] <= 0) throw UsageError("every cluster needs at least one user");
      l.users.emplace_back();
      for (int k = 0; k < sizes[c]; ++k) {
        l.users[c].push_back(u++);
        l.cluster_of.push_back(static_cast<int>(c));
        l.local_index.push_back(k);
      }
    }
    return l;
  }
};

// Linear-unit scenario derived once from a configuration
struct Scenario {
  ScenarioConfig config;
  Layout layout;
  std::vector<Point> centers;
  std::vector<Side> cluster_side;
  double noise_power = 0.0;  // W
  double p_max = 0.0;        // W
  double kappa_br = 0.0;
  double kappa_ru = 0.0;
  int num_antennas = 0;
  int num_elements = 0;
};

inline void validate(const ScenarioConfig& c)
{
  if (c.num_antennas < 1) throw UsageError("num_antennas must be >= 1");
  if (c.num_elements < 1) throw UsageError("num_elements must be >= 1");
  if (c.cluster_centers.empty()) throw UsageError("at least one cluster is required");
  if (c.users_per_cluster.size() != c.cluster_centers.size())
    throw UsageError("users_per_cluster must list one count per cluster");
  for (int k : c.users_per_cluster)
    if (k < 1) throw UsageError("users_per_cluster entries must be >= 1");
  if (!c.cluster_sides.empty() && c.cluster_sides.size() != c.cluster_centers.size())
    throw UsageError("cluster_sides must list one side per cluster");
  for (const auto& s : c.cluster_sides)
    if (s != "T" && s != "R") throw UsageError("cluster_sides entries must be \"T\" or \"R\"");
  if (!(c.cluster_radius > 0.0)) throw UsageError("cluster_radius must be positive");
  if (!(c.path_loss_exponent_br > 0.0) || !(c.path_loss_exponent_ru > 0.0))
    throw UsageError("path-loss exponents must be positive");
  if (c.r_min < 0.0) throw UsageError("r_min must be nonnegative");
}

inline Scenario make_scenario(const ScenarioConfig& cfg)
{
  validate(cfg);
  Scenario s;
  s.config = cfg;
  s.layout = Layout::from_sizes(cfg.users_per_cluster);
  s.noise_power = dbm_to_watts(cfg.noise_power_dbm);
  s.p_max = dbm_to_watts(cfg.p_max_dbm);
  s.kappa_br = db_to_linear(cfg.rician_k_br_db);
  s.kappa_ru = db_to_linear(cfg.rician_k_ru_db);
  s.num_antennas = cfg.num_antennas;
  s.num_elements = cfg.num_elements;
  const double ry = cfg.ris_position[1];
  for (size_t c = 0; c < cfg.cluster_centers.size(); ++c) {
    Point p = cfg.cluster_centers[c];
    Side side;
    if (!cfg.cluster_sides.empty()) side = cfg.cluster_sides[c] == "T" ? Side::transmission : Side::reflection;
    else side = p[1] >= ry ? Side::transmission : Side::reflection;
    if (cfg.mirror_sides) {
      p[1] = 2.0 * ry - p[1];
      side = side == Side::transmission ? Side::reflection : Side::transmission;
    }
    s.centers.push_back(p);
    s.cluster_side.push_back(side);
  }
  return s;
}

// 10^(eps0/10) d^-l
inline double path_loss(double distance, double exponent, double ref_db)
{
  if (!(distance > 0.0)) throw DomainError("path_loss needs a positive distance");
  if (!(exponent > 0.0)) throw DomainError("path_loss needs a positive exponent");
  return db_to_linear(ref_db) * std::pow(distance, -exponent);
}

// Independent generator per (seed, stream tags)
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
{
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

namespace stream {
inline constexpr std::uint64_t placement = 1, bs_ris = 2, ris_user = 3, init_phase = 4, random_beams = 5,
                               random_order = 6;
}

// ULA along x with half-wavelength spacing: [e^{j pi n cos(angle to x)}]
inline CVec steering(int n, const Point& from, const Point& to)
{
  double dx = to[0] - from[0], dy = to[1] - from[1], dz = to[2] - from[2];
  double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (!(d > 0.0)) throw DomainError("steering direction undefined for coincident points");
  double cosx = dx / d;
  CVec a(n);
  for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, kPi * i * cosx);
  return a;
}

inline CMat complex_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  CMat X(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      double re = nd(rng);
      double im = nd(rng);
      X(i, j) = cplx(re, im);
    }
  return X;
}

// sqrt(pl) (sqrt(k/(1+k)) LoS + sqrt(1/(1+k)) CN(0,1))
inline CMat rician_channel(const CMat& los, double kappa_db, double pathloss, std::mt19937_64& rng)
{
  if (!(pathloss >= 0.0)) throw DomainError("path loss must be nonnegative");
  double k = db_to_linear(kappa_db);
  CMat nlos = complex_gaussian(los.rows(), los.cols(), rng);
  return std::sqrt(pathloss) * (std::sqrt(k / (1.0 + k)) * los + std::sqrt(1.0 / (1.0 + k)) * nlos);
}

inline double distance(const Point& a, const Point& b)
{
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct ChannelSet {
  CMat F;                      // BS -> RIS, M x N_T
  std::vector<CVec> g;         // RIS -> user, M each
  std::vector<Side> side;      // per user
  std::vector<Point> position; // per user
};

inline ChannelSet generate_channels(const Scenario& s, std::uint64_t seed)
{
  const auto& cfg = s.config;
  const int M = s.num_elements, N = s.num_antennas;
  ChannelSet ch;

  CMat Flos = steering(M, cfg.ris_position, cfg.bs_position) * steering(N, cfg.bs_position, cfg.ris_position).adjoint();
  double pl_br = path_loss(distance(cfg.bs_position, cfg.ris_position), cfg.path_loss_exponent_br, cfg.path_loss_ref_db);
  auto rng_f = substream(seed, stream::bs_ris);
  ch.F = rician_channel(Flos, cfg.rician_k_br_db, pl_br, rng_f);

  for (int c = 0; c < s.layout.num_clusters(); ++c) {
    for (int u : s.layout.users[c]) {
      const int k = s.layout.local_index[u];
      auto rng_p = substream(seed, stream::placement, c, k);
      std::uniform_real_distribution<double> ud(0.0, 1.0);
      Point p;
      double d = 0.0;
      do {
        double r = cfg.cluster_radius * std::sqrt(ud(rng_p));
        double phi = 2.0 * kPi * ud(rng_p);
        p = {s.centers[c][0] + r * std::cos(phi), s.centers[c][1] + r * std::sin(phi), s.centers[c][2]};
        d = distance(p, cfg.ris_position);
      } while (d < 1e-9);
      double pl = path_loss(d, cfg.path_loss_exponent_ru, cfg.path_loss_ref_db);
      auto rng_g = substream(seed, stream::ris_user, c, k);
      CMat glos = steering(M, cfg.ris_position, p);
      ch.g.push_back(rician_channel(glos, cfg.rician_k_ru_db, pl, rng_g).col(0));
      ch.side.push_back(s.cluster_side[c]);
      ch.position.push_back(p);
    }
  }
  return ch;
}

// JSON (de)serialization; unknown keys are rejected
inline void to_json(nlohmann::json& j, const ScenarioConfig& c)
{
  j = nlohmann::json{{"bs_position", c.bs_position},
                     {"ris_position", c.ris_position},
                     {"cluster_centers", c.cluster_centers},
                     {"cluster_sides", c.cluster_sides},
                     {"mirror_sides", c.mirror_sides},
                     {"cluster_radius", c.cluster_radius},
                     {"num_antennas", c.num_antennas},
                     {"num_elements", c.num_elements},
                     {"users_per_cluster", c.users_per_cluster},
                     {"path_loss_exponent_br", c.path_loss_exponent_br},
                     {"path_loss_exponent_ru", c.path_loss_exponent_ru},
                     {"path_loss_ref_db", c.path_loss_ref_db},
                     {"rician_k_br_db", c.rician_k_br_db},
                     {"rician_k_ru_db", c.rician_k_ru_db},
                     {"noise_power_dbm", c.noise_power_dbm},
                     {"p_max_dbm", c.p_max_dbm},
                     {"r_min", c.r_min},
                     {"rng_seed", c.rng_seed}};
}

inline void from_json(const nlohmann::json& j, ScenarioConfig& c)
{
  static const std::vector<std::string> keys{"bs_position", "ris_position", "cluster_centers", "cluster_sides",
                                             "mirror_sides", "cluster_radius", "num_antennas", "num_elements",
                                             "users_per_cluster", "path_loss_exponent_br", "path_loss_exponent_ru",
                                             "path_loss_ref_db", "rician_k_br_db", "rician_k_ru_db",
                                             "noise_power_dbm", "p_max_dbm", "r_min", "rng_seed"};
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw UsageError("unknown configuration key: " + k);
  auto get = [&](const char* k, auto& field) {
    if (j.contains(k)) j.at(k).get_to(field);
  };
  get("bs_position", c.bs_position);
  get("ris_position", c.ris_position);
  get("cluster_centers", c.cluster_centers);
  get("cluster_sides", c.cluster_sides);
  get("mirror_sides", c.mirror_sides);
  get("cluster_radius", c.cluster_radius);
  get("num_antennas", c.num_antennas);
  get("num_elements", c.num_elements);
  get("users_per_cluster", c.users_per_cluster);
  get("path_loss_exponent_br", c.path_loss_exponent_br);
  get("path_loss_exponent_ru", c.path_loss_exponent_ru);
  get("path_loss_ref_db", c.path_loss_ref_db);
  get("rician_k_br_db", c.rician_k_br_db);
  get("rician_k_ru_db", c.rician_k_ru_db);
  get("noise_power_dbm", c.noise_power_dbm);
  get("p_max_dbm", c.p_max_dbm);
  get("r_min", c.r_min);
  get("rng_seed", c.rng_seed);
}

inline ScenarioConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open configuration file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed configuration: ") + e.what());
  }
  ScenarioConfig c;
  try {
    c = j.get<ScenarioConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad configuration value: ") + e.what());
  }
  validate(c);
  return c;
}

// Sets a numeric parameter by name; used by sweeps
inline void set_parameter(ScenarioConfig& c, const std::string& name, double v)
{
  if (name == "M" || name == "num_elements") c.num_elements = static_cast<int>(std::lround(v));
  else if (name == "N_T" || name == "num_antennas") c.num_antennas = static_cast<int>(std::lround(v));
  else if (name == "P_max" || name == "p_max_dbm") c.p_max_dbm = v;
  else if (name == "R_min" || name == "r_min") c.r_min = v;
  else if (name == "K_c" || name == "users_per_cluster") {
    for (auto& k : c.users_per_cluster) k = static_cast<int>(std::lround(v));
  } else if (name == "radius" || name == "cluster_radius") c.cluster_radius = v;
  else if (name == "kappa" || name == "rician_k_db") c.rician_k_br_db = c.rician_k_ru_db = v;
  else if (name == "noise_power_dbm") c.noise_power_dbm = v;
  else throw UsageError("unknown sweep parameter: " + name);
}

}  // namespace starnoma
