#pragma once

#include <random>
#include <string>
#include <string_view>

namespace dronecoal {

/// Environment-dependent constants of the air-to-ground channel.
struct Environment {
  std::string name;
  double alpha = 0.0;  // LoS probability scale
  double gamma = 0.0;  // LoS probability exponent
  double k1 = 0.0;     // LoS shadowing std at theta = 0, dB
  double k2 = 0.0;     // LoS shadowing decay, 1/rad
  double g1 = 0.0;     // NLoS shadowing std at theta = 0, dB
  double g2 = 0.0;     // NLoS shadowing decay, 1/rad
  double mu_los = 0.0;   // dB
  double mu_nlos = 0.0;  // dB
  double k0_db = 3.0;
  double k_half_pi_db = 30.0;
  double theta_min_deg = 15.0;
  double carrier_hz = 2e9;
  double noise_plus_interference_dbm_per_hz = -70.0;
  double antenna_gain_db = 10.0;
  double bandwidth_hz = 1.0;

  friend bool operator==(const Environment&, const Environment&) = default;
};

/// Throws std::invalid_argument when a field violates its range.
void validate(const Environment& env);

Environment urban();
Environment dense_urban();
Environment high_rise_urban();

/// Looks up "urban", "dense_urban" or "high_rise_urban".
Environment environment_preset(std::string_view name);

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position3D&, const Position3D&) = default;
};

enum class LinkKind { LoS, NLoS };
enum class LossMode { Mean, Sampled };

struct LinkBudget {
  double distance_m = 0.0;
  double elevation_rad = 0.0;
  double p_los = 0.0;
  double loss_los_db = 0.0;
  double loss_nlos_db = 0.0;
  double mean_loss_db = 0.0;
};

inline constexpr double kSpeedOfLight = 3e8;

double to_db(double linear);
double from_db(double db);

double distance(const Position3D& a, const Position3D& b);

/// Elevation of the drone seen from the user, arcsin(h / d). Throws
/// std::domain_error for coincident positions.
double elevation_angle(const Position3D& drone, const Position3D& user);

/// alpha * (deg(theta) - theta_min)^gamma, base clamped at 0, result at 1.
double los_probability(double theta, const Environment& env);

double shadow_std(double theta, const Environment& env, LinkKind link);

/// Rician factor K = a e^{b theta}, in linear units.
double rician_k(double theta, const Environment& env);

double free_space_loss_db(double distance_m, double carrier_hz);

/// Mean mode uses the shadowing means and a 0 dB small-scale term. Sampled
/// mode draws shadowing and Rician/Rayleigh fading for each branch; rng must
/// then be non-null.
LinkBudget path_loss(const Position3D& drone, const Position3D& user,
                     const Environment& env, LossMode mode = LossMode::Mean,
                     std::mt19937_64* rng = nullptr);

/// Linear SINR per Watt of transmit power for a link with the given mean loss.
double sinr_per_watt(double mean_loss_db, const Environment& env);

/// Shannon rate B log2(1 + p g) in bits/s.
double rate(double mean_loss_db, double power_w, const Environment& env);

/// Draws the shadowing term zeta ~ N(mu, sigma(theta)^2) in dB.
double sample_shadowing(double theta, const Environment& env, LinkKind link,
                        std::mt19937_64& rng);

/// Draws the small-scale power gain Omega with unit mean; K = 0 is Rayleigh.
double sample_rician_power(double k_factor, std::mt19937_64& rng);

}  // namespace dronecoal
