#include "dronecoal/dynamics.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace dronecoal {

RngStreams RngStreams::from_seed(std::uint64_t seed) {
  const auto make = [seed](std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
  };
  return {make(1), make(2), make(3), make(4)};
}

StepResult best_reply_step(const CoalitionStructure& state, int proposer,
                           const BeliefState& beliefs, PayoffModel& model,
                           std::mt19937_64& tie_rng, VetoRule rule) {
  StepResult out;
  out.payoff_before = model.expected_payoff(proposer, state.coalition_of(proposer), beliefs);
  const auto outcomes = best_reply_outcomes(state, proposer, beliefs, model, rule);
  if (outcomes.empty()) {
    out.structure = state;
  } else if (outcomes.size() == 1) {
    out.structure = outcomes.front();
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, outcomes.size() - 1);
    out.structure = outcomes[pick(tie_rng)];
  }
  out.moved = !(out.structure == state);
  out.payoff_after = out.moved
                         ? model.expected_payoff(proposer, out.structure.coalition_of(proposer), beliefs)
                         : out.payoff_before;
  return out;
}

BestReplyResult run_best_reply(const CoalitionStructure& initial,
                               const BeliefState& beliefs, PayoffModel& model,
                               std::mt19937_64& proposer_rng, std::mt19937_64& tie_rng,
                               const BestReplyOptions& options) {
  BestReplyResult out;
  out.structure = initial;
  const int drones = initial.num_drones();
  // The absorbing test only needs to run when the state changes.
  if (drones == 0 || is_nash_stable(initial, beliefs, model).stable) {
    out.converged = true;
    return out;
  }
  std::uniform_int_distribution<int> pick(0, drones - 1);
  while (out.proposals < options.max_proposals) {
    const int proposer = pick(proposer_rng);
    ++out.proposals;
    auto step = best_reply_step(out.structure, proposer, beliefs, model, tie_rng,
                                options.veto_rule);
    if (!step.moved) continue;
    ++out.moves;
    out.structure = std::move(step.structure);
    out.trace.push_back({proposer, out.structure.to_string()});
    if (is_nash_stable(out.structure, beliefs, model).stable) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

void validate(const DynamicsConfig& c) {
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0))
    throw std::invalid_argument("dynamics: epsilon must lie in [0, 1]");
  if (c.init_grand_rounds < 1 || c.max_rounds < 1 || c.stability_window < 1 ||
      c.best_reply.max_proposals < 1)
    throw std::invalid_argument("dynamics: round counts must be >= 1");
  if (c.belief_window < 1) throw std::invalid_argument("dynamics: belief window must be >= 1");
}

namespace {

std::vector<double> draw_samples(const Scenario& scenario, std::mt19937_64& rng) {
  std::vector<double> samples(scenario.num_drones());
  for (int d = 0; d < scenario.num_drones(); ++d) {
    const auto& type = scenario.true_type_of(d);
    samples[d] = std::max(0.0, std::normal_distribution<double>(type.mu, type.sigma)(rng));
  }
  return samples;
}

void share(const CoalitionStructure& structure, const std::vector<double>& samples,
           int round, BeliefLearner& learner) {
  for (const auto& block : structure.blocks())
    for (int i : block)
      for (int j : block)
        if (i != j) learner.observe(i, j, round, samples[j]);
}

std::vector<int> true_positions(const Scenario& scenario) {
  std::vector<int> truth;
  for (int d = 0; d < scenario.num_drones(); ++d)
    truth.push_back(scenario.type_index(scenario.drones[d].true_type));
  return truth;
}

std::vector<int> argmax_table(const TypePrediction& p) {
  std::vector<int> table;
  for (int i = 0; i < p.drones; ++i)
    for (int j = 0; j < p.drones; ++j) table.push_back(i == j ? -1 : p.classified(i, j));
  return table;
}

}  // namespace

RepeatedGameResult run_repeated_game(const Scenario& scenario, const DynamicsConfig& config) {
  validate(config);
  const int drones = scenario.num_drones();
  auto rng = RngStreams::from_seed(config.seed);
  PayoffModel model(scenario);
  BeliefLearner learner(scenario, config.belief_window);
  const auto truth = true_positions(scenario);
  BeliefState beliefs = BeliefState::uniform(scenario);
  std::bernoulli_distribution explore(config.epsilon);

  RepeatedGameResult out;
  CoalitionStructure warm = CoalitionStructure::singletons(drones);
  std::optional<CoalitionStructure> last_best_reply;
  int prediction_stable = 0;
  int structure_repeats = 0;
  std::vector<int> previous_argmax = argmax_table(learner.prediction());

  for (int round = 1; round <= config.max_rounds; ++round) {
    RoundRecord rec;
    rec.round = round;
    rec.belief_fingerprint = beliefs.fingerprint();
    const bool grand = round <= config.init_grand_rounds || explore(rng.controller);
    rec.grand_coalition = grand;
    if (grand) {
      rec.structure = CoalitionStructure::grand(drones);
    } else {
      auto br = run_best_reply(warm, beliefs, model, rng.proposer, rng.tie_break,
                               config.best_reply);
      rec.best_reply_moves = br.moves;
      rec.best_reply_converged = br.converged;
      out.all_best_replies_converged = out.all_best_replies_converged && br.converged;
      rec.structure = br.structure;
      warm = br.structure;
      if (last_best_reply && *last_best_reply == rec.structure) ++structure_repeats;
      else structure_repeats = 0;
      last_best_reply = rec.structure;
    }
    for (int d = 0; d < drones; ++d)
      rec.expected_payoffs.push_back(
          model.expected_payoff(d, rec.structure.coalition_of(d), beliefs));

    rec.shared_samples = draw_samples(scenario, rng.samples);
    share(rec.structure, rec.shared_samples, round, learner);
    beliefs = learner.beliefs();
    const auto report = frobenius_convergence(learner.prediction(), truth);
    rec.frobenius_per_type = report.per_type;
    rec.frobenius_mean = report.mean;

    const auto current_argmax = argmax_table(learner.prediction());
    prediction_stable = current_argmax == previous_argmax ? prediction_stable + 1 : 0;
    previous_argmax = current_argmax;
    out.rounds.push_back(std::move(rec));

    if (prediction_stable >= config.stability_window && structure_repeats >= 1) {
      out.converged = true;
      if (config.stop_on_convergence) break;
    }
  }

  out.final_structure = last_best_reply.value_or(CoalitionStructure::grand(drones));
  out.final_beliefs = std::move(beliefs);
  out.final_prediction = learner.prediction();
  return out;
}

void write_trace(std::ostream& os, const std::vector<RoundRecord>& rounds) {
  for (const auto& r : rounds) {
    nlohmann::json j;
    j["round"] = r.round;
    j["grand_coalition"] = r.grand_coalition;
    j["structure"] = r.structure.to_string();
    j["expected_payoffs"] = r.expected_payoffs;
    j["shared_samples"] = r.shared_samples;
    j["belief_fingerprint"] = r.belief_fingerprint;
    j["best_reply_moves"] = r.best_reply_moves;
    j["best_reply_converged"] = r.best_reply_converged;
    j["frobenius_per_type"] = r.frobenius_per_type;
    j["frobenius_mean"] = r.frobenius_mean;
    os << j.dump() << '\n';
  }
}

std::vector<RoundRecord> read_trace(std::istream& is) {
  std::vector<RoundRecord> rounds;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    RoundRecord r;
    r.round = j.at("round").get<int>();
    r.grand_coalition = j.at("grand_coalition").get<bool>();
    r.structure = CoalitionStructure::parse(j.at("structure").get<std::string>());
    r.expected_payoffs = j.at("expected_payoffs").get<std::vector<double>>();
    r.shared_samples = j.at("shared_samples").get<std::vector<double>>();
    r.belief_fingerprint = j.at("belief_fingerprint").get<std::uint64_t>();
    r.best_reply_moves = j.at("best_reply_moves").get<int>();
    r.best_reply_converged = j.at("best_reply_converged").get<bool>();
    r.frobenius_per_type = j.at("frobenius_per_type").get<std::vector<double>>();
    r.frobenius_mean = j.at("frobenius_mean").get<double>();
    rounds.push_back(std::move(r));
  }
  return rounds;
}

ReplayResult replay_trace(const Scenario& scenario, const std::vector<RoundRecord>& rounds,
                          std::size_t belief_window) {
  ReplayResult out;
  BeliefLearner learner(scenario, belief_window);
  BeliefState beliefs = BeliefState::uniform(scenario);
  std::optional<CoalitionStructure> last_best_reply;
  for (const auto& r : rounds) {
    if (beliefs.fingerprint() != r.belief_fingerprint) out.consistent = false;
    if (!r.grand_coalition) last_best_reply = r.structure;
    share(r.structure, r.shared_samples, r.round, learner);
    beliefs = learner.beliefs();
  }
  out.final_structure =
      last_best_reply.value_or(CoalitionStructure::grand(scenario.num_drones()));
  out.final_beliefs = std::move(beliefs);
  return out;
}

}  // namespace dronecoal
