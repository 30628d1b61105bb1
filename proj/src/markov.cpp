#include "dronecoal/markov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace dronecoal {

int MarkovModel::index_of(const CoalitionStructure& s) const {
  const auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || !(*it == s))
    throw std::out_of_range("structure is not a state of this chain");
  return static_cast<int>(it - states.begin());
}

MarkovModel build_chain(const BeliefState& beliefs, PayoffModel& model, VetoRule rule,
                        int cap) {
  const int drones = model.scenario().num_drones();
  MarkovModel chain;
  chain.states = enumerate_structures(drones, cap);
  std::sort(chain.states.begin(), chain.states.end());
  const auto w = static_cast<Eigen::Index>(chain.states.size());
  chain.transition = Eigen::MatrixXd::Zero(w, w);

  for (Eigen::Index s = 0; s < w; ++s) {
    const auto& state = chain.states[s];
    if (drones == 0) {
      chain.transition(s, s) = 1.0;
      continue;
    }
    for (int d = 0; d < drones; ++d) {
      const auto outcomes = best_reply_outcomes(state, d, beliefs, model, rule);
      if (outcomes.empty()) {
        chain.transition(s, s) += 1.0 / drones;
        continue;
      }
      const double share = 1.0 / (static_cast<double>(drones) * outcomes.size());
      for (const auto& next : outcomes) chain.transition(s, chain.index_of(next)) += share;
    }
  }
  chain.absorbing = absorbing_states(chain);
  return chain;
}

std::vector<int> absorbing_states(const MarkovModel& model) {
  std::vector<int> out;
  for (Eigen::Index s = 0; s < model.transition.rows(); ++s)
    if (std::abs(model.transition(s, s) - 1.0) <= 1e-12) out.push_back(static_cast<int>(s));
  return out;
}

std::vector<double> formation_probabilities(MarkovModel& model,
                                            std::optional<Eigen::VectorXd> initial) {
  const auto w = model.transition.rows();
  const auto absorbing = absorbing_states(model);
  if (absorbing.empty()) throw std::runtime_error("formation_probabilities: no absorbing state");

  Eigen::VectorXd start = Eigen::VectorXd::Zero(w);
  if (initial) {
    if (initial->size() != w) throw std::invalid_argument("initial distribution has wrong size");
    start = *initial;
  } else {
    const int drones = model.states.front().num_drones();
    start(model.index_of(CoalitionStructure::singletons(drones))) = 1.0;
  }

  std::vector<char> is_abs(w, 0);
  for (int a : absorbing) is_abs[a] = 1;
  std::vector<int> transient;
  for (Eigen::Index s = 0; s < w; ++s)
    if (!is_abs[s]) transient.push_back(static_cast<int>(s));

  // Backward reachability from the absorbing set.
  std::vector<char> reaches(w, 0);
  for (int a : absorbing) reaches[a] = 1;
  for (bool grew = true; grew;) {
    grew = false;
    for (int t : transient) {
      if (reaches[t]) continue;
      for (Eigen::Index s = 0; s < w; ++s) {
        if (reaches[s] && model.transition(t, s) > 0.0) {
          reaches[t] = 1;
          grew = true;
          break;
        }
      }
    }
  }
  std::vector<int> trapped;
  for (int t : transient)
    if (!reaches[t]) trapped.push_back(t);
  if (!trapped.empty()) {
    std::string names;
    for (int t : trapped) names += model.states[t].to_string() + ' ';
    throw TrappedClassError(trapped, "formation_probabilities: states never absorbed: " + names);
  }

  std::vector<double> probs(w, 0.0);
  const auto nt = static_cast<Eigen::Index>(transient.size());
  const auto na = static_cast<Eigen::Index>(absorbing.size());
  for (Eigen::Index k = 0; k < na; ++k) probs[absorbing[k]] = start(absorbing[k]);
  if (nt > 0) {
    Eigen::MatrixXd q(nt, nt), r(nt, na);
    for (Eigen::Index i = 0; i < nt; ++i) {
      for (Eigen::Index j = 0; j < nt; ++j) q(i, j) = model.transition(transient[i], transient[j]);
      for (Eigen::Index k = 0; k < na; ++k) r(i, k) = model.transition(transient[i], absorbing[k]);
    }
    const Eigen::MatrixXd fundamental_times_r =
        (Eigen::MatrixXd::Identity(nt, nt) - q).fullPivLu().solve(r);
    for (Eigen::Index i = 0; i < nt; ++i)
      for (Eigen::Index k = 0; k < na; ++k)
        probs[absorbing[k]] += start(transient[i]) * fundamental_times_r(i, k);
  }
  model.formation_probs = probs;
  return probs;
}

Eigen::VectorXd stationary_distribution(const MarkovModel& model) {
  const auto w = model.transition.rows();
  // (W^T - I) pi = 0 with one equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = model.transition.transpose() - Eigen::MatrixXd::Identity(w, w);
  a.row(w - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(w);
  b(w - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.rank() < w)
    throw std::runtime_error("stationary_distribution: not unique (several closed classes)");
  return lu.solve(b);
}

void write_markov_audit(std::ostream& os, const MarkovModel& model,
                        const std::vector<double>& structure_totals) {
  nlohmann::ordered_json j;
  std::vector<std::string> names;
  for (const auto& s : model.states) names.push_back(s.to_string());
  j["states"] = names;
  std::vector<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < model.transition.rows(); ++r) {
    std::vector<double> row(model.transition.cols());
    for (Eigen::Index c = 0; c < model.transition.cols(); ++c) row[c] = model.transition(r, c);
    rows.push_back(std::move(row));
  }
  j["transition"] = rows;
  std::vector<std::string> absorbing;
  for (int a : model.absorbing) absorbing.push_back(model.states[a].to_string());
  j["absorbing"] = absorbing;
  j["formation_probabilities"] = model.formation_probs;
  if (!structure_totals.empty()) j["structure_total_rates"] = structure_totals;
  os << j.dump(2) << '\n';
}

}  // namespace dronecoal
