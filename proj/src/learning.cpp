#include "dronecoal/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dronecoal {

GaussianEstimate mle_gaussian(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("mle_gaussian: no samples");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mu = sum / n;
  double sq = 0.0;
  for (double x : samples) sq += (x - mu) * (x - mu);
  return {mu, sq / n};
}

double degenerate_sigma_floor(double mu_hat) {
  return std::max(1e-6 * std::abs(mu_hat), 1e-12);
}

double kl_gaussian(double mu1, double sigma1, double mu2, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::domain_error("kl_gaussian: sigma2 must be positive");
  if (sigma1 < 0.0) throw std::domain_error("kl_gaussian: sigma1 must be non-negative");
  if (sigma1 == 0.0) sigma1 = degenerate_sigma_floor(mu1);
  const double d = mu1 - mu2;
  return std::log(sigma2 / sigma1) + (sigma1 * sigma1 + d * d) / (2.0 * sigma2 * sigma2) - 0.5;
}

int classify(const GaussianEstimate& estimate, const TypeSet& types) {
  if (types.empty()) throw std::invalid_argument("classify: empty type set");
  const double sigma1 = std::sqrt(estimate.sigma2);
  int best = 0;
  double best_kl = std::numeric_limits<double>::infinity();
  for (int m = 0; m < static_cast<int>(types.size()); ++m) {
    const double kl = kl_gaussian(estimate.mu, sigma1, types[m].mu, types[m].sigma);
    if (kl < best_kl) {
      best_kl = kl;
      best = m;
    }
  }
  return best;
}

ObservationLog::ObservationLog(int drones)
    : drones_(drones), log_(static_cast<std::size_t>(drones) * drones) {}

void ObservationLog::record(int observer, int observed, int round, double watts) {
  if (observer == observed) throw std::invalid_argument("ObservationLog: self observation");
  auto& entries = log_.at(index(observer, observed));
  if (!entries.empty() && entries.back().round > round)
    throw std::invalid_argument("ObservationLog: rounds must not go backwards");
  entries.push_back({round, watts});
}

int TypePrediction::interactions(int observer, int observed) const {
  int total = 0;
  for (int m = 0; m < types; ++m) total += count(observer, observed, m);
  return total;
}

std::vector<double> TypePrediction::frequencies(int observer, int observed) const {
  std::vector<double> f(types, 1.0 / types);
  const int total = interactions(observer, observed);
  if (total == 0) return f;
  for (int m = 0; m < types; ++m)
    f[m] = static_cast<double>(count(observer, observed, m)) / total;
  return f;
}

int TypePrediction::classified(int observer, int observed) const {
  int best = 0;
  for (int m = 1; m < types; ++m)
    if (count(observer, observed, m) > count(observer, observed, best)) best = m;
  return best;
}

namespace {

GaussianEstimate windowed_estimate(const std::vector<Observation>& samples,
                                   std::size_t end, std::size_t window) {
  const std::size_t begin = end > window ? end - window : 0;
  std::vector<double> values;
  values.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) values.push_back(samples[i].watts);
  return mle_gaussian(values);
}

TypePrediction empty_prediction(int drones, int types) {
  return {drones, types, std::vector<int>(static_cast<std::size_t>(drones) * drones * types, 0)};
}

BeliefState beliefs_from(const TypePrediction& prediction, const Scenario& scenario) {
  BeliefState b = BeliefState::uniform(scenario);
  for (int i = 0; i < prediction.drones; ++i)
    for (int j = 0; j < prediction.drones; ++j)
      if (i != j) b.set_row(i, j, prediction.frequencies(i, j));
  return b;
}

}  // namespace

std::pair<BeliefState, TypePrediction> update_beliefs(const ObservationLog& log,
                                                      const Scenario& scenario,
                                                      std::size_t window) {
  const int drones = log.num_drones();
  const int types = static_cast<int>(scenario.type_set.size());
  auto prediction = empty_prediction(drones, types);
  for (int i = 0; i < drones; ++i) {
    for (int j = 0; j < drones; ++j) {
      if (i == j) continue;
      const auto& samples = log.samples(i, j);
      for (std::size_t k = 1; k <= samples.size(); ++k) {
        const int m = classify(windowed_estimate(samples, k, window), scenario.type_set);
        ++prediction.counts[(static_cast<std::size_t>(i) * drones + j) * types + m];
      }
    }
  }
  return {beliefs_from(prediction, scenario), std::move(prediction)};
}

BeliefLearner::BeliefLearner(const Scenario& scenario, std::size_t window)
    : scenario_(&scenario),
      window_(window),
      log_(scenario.num_drones()),
      prediction_(empty_prediction(scenario.num_drones(),
                                   static_cast<int>(scenario.type_set.size()))) {}

void BeliefLearner::observe(int observer, int observed, int round, double watts) {
  log_.record(observer, observed, round, watts);
  const auto& samples = log_.samples(observer, observed);
  const int m = classify(windowed_estimate(samples, samples.size(), window_),
                         scenario_->type_set);
  ++prediction_.counts[(static_cast<std::size_t>(observer) * prediction_.drones + observed) *
                           prediction_.types + m];
}

BeliefState BeliefLearner::beliefs() const { return beliefs_from(prediction_, *scenario_); }

FrobeniusReport frobenius_convergence(const TypePrediction& prediction,
                                      std::span<const int> true_type_positions) {
  const int drones = prediction.drones;
  if (static_cast<int>(true_type_positions.size()) != drones)
    throw std::invalid_argument("frobenius_convergence: one true type per drone required");
  FrobeniusReport report;
  report.per_type.assign(prediction.types, 0.0);
  double all = 0.0;
  for (int m = 0; m < prediction.types; ++m) {
    double sq = 0.0;
    for (int i = 0; i < drones; ++i) {
      for (int j = 0; j < drones; ++j) {
        const int truth = true_type_positions[j] == m ? 1 : 0;
        const int predicted =
            i == j ? truth : (prediction.classified(i, j) == m ? 1 : 0);
        sq += (predicted - truth) * (predicted - truth);
      }
    }
    report.per_type[m] = std::sqrt(sq);
    all += sq;
  }
  double sum = 0.0;
  for (double v : report.per_type) sum += v;
  report.mean = prediction.types > 0 ? sum / prediction.types : 0.0;
  report.combined = std::sqrt(all);
  return report;
}

}  // namespace dronecoal
