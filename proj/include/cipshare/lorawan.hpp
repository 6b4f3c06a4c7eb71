#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cipshare/instance.hpp"

namespace cipshare::lorawan {

enum class RateMode { kLogistic, kThreshold };

struct RadioParams {
  double frequency_mhz = 916.0;
  double tx_height_m = 1.5;    // end device (mobile) height
  double rx_height_m = 30.0;   // gateway (base station) height
  double tx_power_dbm = 10.0;
  double sensitivity_dbm = -120.0;
  double shadowing_db = 8.0;   // sigma of log-normal shadowing
  RateMode rate_mode = RateMode::kLogistic;
  double logistic_width_db = 4.0;
  double rate_cap = 0.999;
  double threshold_rate_hi = 0.9;
  double threshold_rate_lo = 0.0;
  double min_distance_km = 0.01;
  bool clamp_distance = true;

  void validate() const {
    if (!(frequency_mhz > 0.0) || !(tx_height_m > 0.0) || !(rx_height_m > 0.0) || !(shadowing_db >= 0.0) ||
        !(logistic_width_db > 0.0) || !(rate_cap > 0.0 && rate_cap < 1.0)) {
      throw Error(ErrorCode::kInfeasibleConfig, "invalid radio parameters");
    }
  }
};

// City height correction at 916 MHz: 3.2 (log10(11.75 h_M))^2 - 4.97.
inline double height_correction(const RadioParams& p) {
  const double l = std::log10(11.75 * p.tx_height_m);
  return 3.2 * l * l - 4.97;
}

// Okumura-Hata path loss in dB for a link of `distance_km`.
inline double hata_path_loss(double distance_km, const RadioParams& p) {
  if (!(distance_km >= p.min_distance_km)) {
    if (!p.clamp_distance) {
      throw Error(ErrorCode::kNonpositiveDistance,
                  "distance " + std::to_string(distance_km) + " km is below the model minimum");
    }
    distance_km = p.min_distance_km;
  }
  const double log_hb = std::log10(p.rx_height_m);
  return 69.55 + 26.16 * std::log10(p.frequency_mhz) - 13.82 * log_hb +
         (44.9 - 6.55 * log_hb) * std::log10(distance_km) + height_correction(p);
}

// Link budget p_tx - L plus a shadowing draw (dB).
inline double received_power(double distance_km, const RadioParams& p, double shadow_draw_db) {
  return p.tx_power_dbm - hata_path_loss(distance_km, p) + shadow_draw_db;
}

// Packet reception probability for a received power, always below the cap.
inline double reception_rate(double rx_dbm, const RadioParams& p) {
  if (p.rate_mode == RateMode::kThreshold) {
    return std::min(rx_dbm >= p.sensitivity_dbm ? p.threshold_rate_hi : p.threshold_rate_lo, p.rate_cap);
  }
  const double rho = 1.0 / (1.0 + std::exp(-(rx_dbm - p.sensitivity_dbm) / p.logistic_width_db));
  return std::min(rho, p.rate_cap);
}

struct CoverageData {
  std::vector<std::vector<double>> contributions;  // n x m
  std::vector<double> requirements;                // m
};

// Independent link failures: Pr[fail] = prod_i (1 - rho_ij)^{x_i} <= eps_j
// becomes sum_i a_ij x_i >= r_j with a_ij = -ln(1 - rho_ij), r_j = -ln(eps_j).
inline CoverageData reliability_to_cip(const std::vector<std::vector<double>>& rates,
                                       const std::vector<double>& max_failure) {
  CoverageData out;
  out.contributions.resize(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i].size() != max_failure.size()) {
      throw Error(ErrorCode::kInfeasibleConfig, "rate matrix width does not match user count");
    }
    out.contributions[i].resize(rates[i].size());
    for (std::size_t j = 0; j < rates[i].size(); ++j) {
      const double rho = rates[i][j];
      if (rho >= 1.0) throw Error(ErrorCode::kRateAtOne, "reception rate of 1 gives infinite contribution");
      if (!(rho >= 0.0)) throw Error(ErrorCode::kInfeasibleConfig, "reception rates must lie in [0, 1)");
      out.contributions[i][j] = -std::log1p(-rho);
    }
  }
  out.requirements.resize(max_failure.size());
  for (std::size_t j = 0; j < max_failure.size(); ++j) {
    const double eps = max_failure[j];
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::kInfeasibleConfig, "failure bounds must lie in (0, 1)");
    out.requirements[j] = -std::log(eps);
  }
  return out;
}

struct GenConfig {
  std::size_t grid_cols = 24;
  std::size_t grid_rows = 24;
  double grid_spacing_km = 0.5;
  std::size_t num_users = 40;       // sampled from the grid
  std::size_t num_facilities = 60;  // placed uniformly over the grid's extent
  double cost_min = 0.0;
  double cost_max = 1.0;
  double geometric_q = 0.5;  // r_j = (sum_i a_ij) / G_j,  G_j ~ Geometric(q) on {1, 2, ...}
  // Rates below this are treated as no link, which keeps the contribution
  // matrix sparse.
  double rate_floor = 0.05;
  std::uint64_t seed = 1;
  std::string profile = "custom";

  void validate() const {
    if (grid_cols == 0 || grid_rows == 0 || !(grid_spacing_km > 0.0)) {
      throw Error(ErrorCode::kInfeasibleConfig, "grid must be nonempty with positive spacing");
    }
    if (num_users > grid_cols * grid_rows) {
      throw Error(ErrorCode::kInfeasibleConfig, "cannot sample more users than grid points");
    }
    if (num_facilities == 0) throw Error(ErrorCode::kInfeasibleConfig, "need at least one facility");
    if (!(geometric_q > 0.0 && geometric_q <= 1.0)) {
      throw Error(ErrorCode::kInfeasibleConfig, "geometric parameter q must lie in (0, 1]");
    }
    if (!(cost_min >= 0.0 && cost_max >= cost_min)) throw Error(ErrorCode::kInfeasibleConfig, "bad cost range");
    if (!(rate_floor >= 0.0 && rate_floor < 1.0)) throw Error(ErrorCode::kInfeasibleConfig, "bad rate floor");
  }
};

// Desk-scale profile used by the benchmark.
inline GenConfig desk_profile(std::uint64_t seed = 1) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.profile = "desk";
  return cfg;
}

// Full case-study dimensions (7,808 grid points, 2,000 users, 4,380
// facilities). Far beyond the exact solvers; shipped for generation only.
inline GenConfig paper_shaped_profile(std::uint64_t seed = 1) {
  GenConfig cfg;
  cfg.grid_cols = 122;
  cfg.grid_rows = 64;
  cfg.grid_spacing_km = 0.15;
  cfg.num_users = 2000;
  cfg.num_facilities = 4380;
  cfg.seed = seed;
  cfg.profile = "paper-shaped";
  return cfg;
}

namespace detail {

// Independent stream per (seed, stream id): results do not depend on the
// order in which streams are consumed.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32), 0x9e3779b9U};
  return std::mt19937_64(seq);
}

}  // namespace detail

// Synthesizes a coverage instance: users on a regular grid, facilities at
// uniform random sites, Hata path loss with log-normal shadowing per link,
// reception rates reduced to additive contributions, and requirements equal
// to full coverage divided by a geometric draw, which guarantees
// feasibility. Grid points with no link at all are never sampled.
inline Instance generate_instance(const GenConfig& cfg, const RadioParams& radio = {}) {
  cfg.validate();
  radio.validate();
  const std::size_t points = cfg.grid_cols * cfg.grid_rows;
  const double width = static_cast<double>(cfg.grid_cols - 1) * cfg.grid_spacing_km;
  const double height = static_cast<double>(cfg.grid_rows - 1) * cfg.grid_spacing_km;

  auto site_rng = detail::stream(cfg.seed, 0);
  std::uniform_real_distribution<double> ux(0.0, std::max(width, 1e-9));
  std::uniform_real_distribution<double> uy(0.0, std::max(height, 1e-9));
  std::uniform_real_distribution<double> ucost(cfg.cost_min, cfg.cost_max);
  const std::size_t n = cfg.num_facilities;
  std::vector<double> fx(n), fy(n), costs(n);
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = ux(site_rng);
    fy[i] = uy(site_rng);
    costs[i] = ucost(site_rng);
  }

  std::vector<std::size_t> order(points);
  for (std::size_t p = 0; p < points; ++p) order[p] = p;
  auto pick_rng = detail::stream(cfg.seed, 1);
  std::shuffle(order.begin(), order.end(), pick_rng);

  std::vector<std::vector<double>> columns;  // per accepted user: n contributions
  std::vector<double> requirements;
  std::vector<std::size_t> user_points;
  for (std::size_t p : order) {
    if (columns.size() == cfg.num_users) break;
    const double px = static_cast<double>(p % cfg.grid_cols) * cfg.grid_spacing_km;
    const double py = static_cast<double>(p / cfg.grid_cols) * cfg.grid_spacing_km;
    auto rng = detail::stream(cfg.seed, 1000 + p);
    std::normal_distribution<double> shadow(0.0, std::max(radio.shadowing_db, 0.0));
    std::vector<double> col(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = std::hypot(px - fx[i], py - fy[i]);
      const double draw = radio.shadowing_db > 0.0 ? shadow(rng) : 0.0;
      double rho = reception_rate(received_power(d, radio, draw), radio);
      if (rho < cfg.rate_floor) rho = 0.0;
      col[i] = -std::log1p(-rho);
      total += col[i];
    }
    std::geometric_distribution<int> geo(cfg.geometric_q);
    const int g = 1 + (cfg.geometric_q >= 1.0 ? 0 : geo(rng));
    if (!(total > 0.0)) continue;
    columns.push_back(std::move(col));
    // The requirement never exceeds full coverage.
    requirements.push_back(std::min(total / static_cast<double>(g), total));
    user_points.push_back(p);
  }
  if (columns.size() < cfg.num_users) {
    throw Error(ErrorCode::kInfeasibleConfig, "too few grid points have any coverage");
  }

  const std::size_t m = columns.size();
  std::vector<std::vector<double>> contributions(n, std::vector<double>(m));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) contributions[i][j] = columns[j][i];
  }

  nlohmann::json meta = {
      {"generator", "lorawan"},
      {"profile", cfg.profile},
      {"seed", cfg.seed},
      {"grid_cols", cfg.grid_cols},
      {"grid_rows", cfg.grid_rows},
      {"grid_spacing_km", cfg.grid_spacing_km},
      {"num_users", cfg.num_users},
      {"num_facilities", cfg.num_facilities},
      {"cost_min", cfg.cost_min},
      {"cost_max", cfg.cost_max},
      {"geometric_q", cfg.geometric_q},
      {"rate_floor", cfg.rate_floor},
      {"user_grid_points", user_points},
      {"radio",
       {{"frequency_mhz", radio.frequency_mhz},
        {"tx_height_m", radio.tx_height_m},
        {"rx_height_m", radio.rx_height_m},
        {"tx_power_dbm", radio.tx_power_dbm},
        {"sensitivity_dbm", radio.sensitivity_dbm},
        {"shadowing_db", radio.shadowing_db},
        {"rate_mode", radio.rate_mode == RateMode::kLogistic ? "logistic" : "threshold"},
        {"logistic_width_db", radio.logistic_width_db},
        {"rate_cap", radio.rate_cap},
        {"threshold_rate_hi", radio.threshold_rate_hi},
        {"threshold_rate_lo", radio.threshold_rate_lo},
        {"min_distance_km", radio.min_distance_km}}},
  };
  return Instance(std::move(costs), std::move(requirements), contributions, std::move(meta));
}

}  // namespace cipshare::lorawan
