#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dronecoal/game.hpp"

namespace dronecoal {

/// Chain over every coalition structure of one scenario, induced by
/// best-reply dynamics under fixed beliefs.
struct MarkovModel {
  std::vector<CoalitionStructure> states;
  Eigen::MatrixXd transition;  // row-stochastic
  std::vector<int> absorbing;
  /// Absorption probability per state (zero off the absorbing set); filled by
  /// formation_probabilities.
  std::vector<double> formation_probs;

  int index_of(const CoalitionStructure& s) const;
};

/// rho(w, w') = (1/D) sum_d phi_d(w'|w): each proposer spreads its 1/D mass
/// uniformly over its best-reply outcomes, or keeps it on w if it has none.
MarkovModel build_chain(const BeliefState& beliefs, PayoffModel& model,
                        VetoRule rule = VetoRule::NextBest,
                        int cap = kDefaultEnumerationCap);

/// States whose self-transition is 1 (within 1e-12).
std::vector<int> absorbing_states(const MarkovModel& model);

/// Thrown when some transient state can never reach an absorbing state.
class TrappedClassError : public std::runtime_error {
 public:
  TrappedClassError(std::vector<int> trapped, const std::string& what)
      : std::runtime_error(what), trapped_(std::move(trapped)) {}
  const std::vector<int>& trapped() const { return trapped_; }

 private:
  std::vector<int> trapped_;
};

/// Absorption probabilities B = (I - Q)^-1 R weighted by `initial` (a
/// distribution over states; defaults to a point mass on all-singletons).
/// Result is indexed like model.states. Also stores it in the model.
std::vector<double> formation_probabilities(MarkovModel& model,
                                            std::optional<Eigen::VectorXd> initial = std::nullopt);

/// Solves pi^T W = pi^T, sum(pi) = 1. Throws std::runtime_error when the
/// solution is not unique (more than one closed class).
Eigen::VectorXd stationary_distribution(const MarkovModel& model);

/// Human-readable JSON audit of states, matrix, absorbing set, probabilities.
void write_markov_audit(std::ostream& os, const MarkovModel& model,
                        const std::vector<double>& structure_totals = {});

}  // namespace dronecoal
