#include "dronecoal/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dronecoal {

namespace {

Environment make_env(std::string name, double alpha, double gamma, double k1,
                     double k2, double g1, double g2, double mu_los,
                     double mu_nlos) {
  Environment env;
  env.name = std::move(name);
  env.alpha = alpha;
  env.gamma = gamma;
  env.k1 = k1;
  env.k2 = k2;
  env.g1 = g1;
  env.g2 = g2;
  env.mu_los = mu_los;
  env.mu_nlos = mu_nlos;
  return env;
}

}  // namespace

void validate(const Environment& env) {
  if (!(env.alpha > 0.0) || !(env.gamma > 0.0))
    throw std::invalid_argument("environment: alpha and gamma must be positive");
  if (!(env.k1 > 0.0) || !(env.g1 > 0.0))
    throw std::invalid_argument("environment: k1 and g1 must be positive");
  if (!(env.bandwidth_hz > 0.0))
    throw std::invalid_argument("environment: bandwidth must be positive");
  if (!(env.carrier_hz > 0.0))
    throw std::invalid_argument("environment: carrier frequency must be positive");
}

Environment urban() {
  return make_env("urban", 0.6, 0.11, 10.39, 0.05, 29.06, 0.03, 1.0, 20.0);
}

Environment dense_urban() {
  return make_env("dense_urban", 0.36, 0.21, 8.96, 0.04, 35.97, 0.04, 1.6, 23.0);
}

Environment high_rise_urban() {
  return make_env("high_rise_urban", 0.05, 0.61, 7.37, 0.03, 37.08, 0.03, 2.3,
                  34.0);
}

Environment environment_preset(std::string_view name) {
  if (name == "urban") return urban();
  if (name == "dense_urban") return dense_urban();
  if (name == "high_rise_urban") return high_rise_urban();
  throw std::invalid_argument("unknown environment preset '" +
                              std::string(name) + "'");
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

double from_db(double db) { return std::pow(10.0, db / 10.0); }

double distance(const Position3D& a, const Position3D& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

double elevation_angle(const Position3D& drone, const Position3D& user) {
  const double d = distance(drone, user);
  if (!(d > 0.0))
    throw std::domain_error("elevation_angle: drone and user coincide");
  const double h = drone.z - user.z;
  return std::asin(std::clamp(h / d, -1.0, 1.0));
}

double los_probability(double theta, const Environment& env) {
  const double base =
      std::max(0.0, theta * 180.0 / std::numbers::pi - env.theta_min_deg);
  return std::min(1.0, env.alpha * std::pow(base, env.gamma));
}

double shadow_std(double theta, const Environment& env, LinkKind link) {
  return link == LinkKind::LoS ? env.k1 * std::exp(-env.k2 * theta)
                               : env.g1 * std::exp(-env.g2 * theta);
}

double rician_k(double theta, const Environment& env) {
  const double a = from_db(env.k0_db);
  const double k_top = from_db(env.k_half_pi_db);
  const double b = (2.0 / std::numbers::pi) * std::log(k_top / a);
  return a * std::exp(b * theta);
}

double free_space_loss_db(double distance_m, double carrier_hz) {
  return 20.0 *
         std::log10(4.0 * std::numbers::pi * carrier_hz * distance_m /
                    kSpeedOfLight);
}

double sample_rician_power(double k_factor, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scatter = std::sqrt(0.5 / (k_factor + 1.0));
  const double dominant = std::sqrt(k_factor / (k_factor + 1.0));
  const double re = dominant + scatter * normal(rng);
  const double im = scatter * normal(rng);
  return re * re + im * im;
}

double sample_shadowing(double theta, const Environment& env, LinkKind link,
                        std::mt19937_64& rng) {
  const double mean = link == LinkKind::LoS ? env.mu_los : env.mu_nlos;
  const double sigma = shadow_std(theta, env, link);
  if (!(sigma > 0.0)) return mean;
  return std::normal_distribution<double>(mean, sigma)(rng);
}

LinkBudget path_loss(const Position3D& drone, const Position3D& user,
                     const Environment& env, LossMode mode,
                     std::mt19937_64* rng) {
  LinkBudget lb;
  lb.distance_m = distance(drone, user);
  lb.elevation_rad = elevation_angle(drone, user);
  lb.p_los = los_probability(lb.elevation_rad, env);
  const double fspl = free_space_loss_db(lb.distance_m, env.carrier_hz);

  if (mode == LossMode::Mean) {
    lb.loss_los_db = fspl + env.mu_los;
    lb.loss_nlos_db = fspl + env.mu_nlos;
  } else {
    if (rng == nullptr)
      throw std::invalid_argument("path_loss: sampled mode needs an rng");
    const double theta = lb.elevation_rad;
    const double z_los = sample_shadowing(theta, env, LinkKind::LoS, *rng);
    const double z_nlos = sample_shadowing(theta, env, LinkKind::NLoS, *rng);
    const double omega_los = sample_rician_power(rician_k(theta, env), *rng);
    const double omega_nlos = sample_rician_power(0.0, *rng);
    lb.loss_los_db = fspl + z_los + to_db(omega_los);
    lb.loss_nlos_db = fspl + z_nlos + to_db(omega_nlos);
  }
  lb.mean_loss_db = lb.p_los * lb.loss_los_db + (1.0 - lb.p_los) * lb.loss_nlos_db;
  return lb;
}

double sinr_per_watt(double mean_loss_db, const Environment& env) {
  const double noise_w_per_hz =
      from_db(env.noise_plus_interference_dbm_per_hz - 30.0);
  return from_db(env.antenna_gain_db) /
         (from_db(mean_loss_db) * env.bandwidth_hz * noise_w_per_hz);
}

double rate(double mean_loss_db, double power_w, const Environment& env) {
  if (power_w < 0.0) throw std::invalid_argument("rate: negative power");
  return env.bandwidth_hz *
         std::log2(1.0 + power_w * sinr_per_watt(mean_loss_db, env));
}

}  // namespace dronecoal
