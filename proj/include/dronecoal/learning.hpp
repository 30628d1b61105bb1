#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dronecoal/game.hpp"
#include "dronecoal/scenario.hpp"

namespace dronecoal {

struct GaussianEstimate {
  double mu = 0.0;
  double sigma2 = 0.0;  // biased (1/N) variance
};

/// Maximum-likelihood mean and variance. Throws on an empty sample.
GaussianEstimate mle_gaussian(std::span<const double> samples);

/// KL(p || q) for p = N(mu1, sigma1^2), q = N(mu2, sigma2^2), in nats.
/// Throws std::domain_error when sigma2 <= 0 or sigma1 < 0.
double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2);

/// Standard deviation used for an estimate whose variance is zero.
double degenerate_sigma_floor(double mu_hat);

/// Position (not id) in `types` of the closest type by KL(estimate || type);
/// ties go to the lowest position.
int classify(const GaussianEstimate& estimate, const TypeSet& types);

struct Observation {
  int round = 0;
  double watts = 0.0;
};

/// Power samples each drone received from each coalition mate.
class ObservationLog {
 public:
  ObservationLog() = default;
  explicit ObservationLog(int drones);

  int num_drones() const { return drones_; }
  /// Round indices per pair must be non-decreasing.
  void record(int observer, int observed, int round, double watts);
  const std::vector<Observation>& samples(int observer, int observed) const {
    return log_[index(observer, observed)];
  }

 private:
  std::size_t index(int observer, int observed) const {
    return static_cast<std::size_t>(observer) * drones_ + observed;
  }
  int drones_ = 0;
  std::vector<std::vector<Observation>> log_;
};

inline constexpr std::size_t kUnboundedWindow = std::numeric_limits<std::size_t>::max();

/// Classification counts per (observer, observed) pair.
struct TypePrediction {
  int drones = 0;
  int types = 0;
  std::vector<int> counts;  // [observer][observed][type position]

  int count(int observer, int observed, int type) const {
    return counts[(static_cast<std::size_t>(observer) * drones + observed) * types + type];
  }
  int interactions(int observer, int observed) const;
  /// Observation frequencies; empty pairs report the uniform prior.
  std::vector<double> frequencies(int observer, int observed) const;
  /// argmax frequency, lowest position on ties.
  int classified(int observer, int observed) const;
};

/// Replays the log: for every sample of every pair, re-estimates from the
/// trailing `window` samples, classifies, and counts. Beliefs are the
/// resulting frequencies; pairs never observed keep the uniform prior and
/// self rows are point masses on the true type.
std::pair<BeliefState, TypePrediction> update_beliefs(const ObservationLog& log,
                                                      const Scenario& scenario,
                                                      std::size_t window = kUnboundedWindow);

/// The incremental form of update_beliefs used round by round.
class BeliefLearner {
 public:
  BeliefLearner(const Scenario& scenario, std::size_t window = kUnboundedWindow);

  /// One shared sample; classification happens immediately.
  void observe(int observer, int observed, int round, double watts);

  const ObservationLog& log() const { return log_; }
  const TypePrediction& prediction() const { return prediction_; }
  BeliefState beliefs() const;

 private:
  const Scenario* scenario_;
  std::size_t window_;
  ObservationLog log_;
  TypePrediction prediction_;
};

struct FrobeniusReport {
  std::vector<double> per_type;  // one norm per type position
  double mean = 0.0;             // average over types
  double combined = 0.0;         // norm over all type matrices together
};

/// Per type m, compares the D x D indicator "i predicts m for j" (diagonal:
/// the truth) with the true indicator and returns the Frobenius norms.
FrobeniusReport frobenius_convergence(const TypePrediction& prediction,
                                      std::span<const int> true_type_positions);

}  // namespace dronecoal
