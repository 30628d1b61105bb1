#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dronecoal/game.hpp"
#include "dronecoal/learning.hpp"
#include "dronecoal/scenario.hpp"

namespace dronecoal {

/// Independent generators for the pieces of a run that consume randomness.
struct RngStreams {
  std::mt19937_64 proposer;
  std::mt19937_64 tie_break;
  std::mt19937_64 samples;
  std::mt19937_64 controller;

  static RngStreams from_seed(std::uint64_t seed);
};

struct StepResult {
  CoalitionStructure structure;
  bool moved = false;
  double payoff_before = 0.0;  // proposer's expected payoff
  double payoff_after = 0.0;
};

/// One proposal of best-reply dynamics. The proposer joins the option it
/// likes best among those that strictly beat staying and that every member
/// of the target accepts; ties are drawn with `tie_rng`.
StepResult best_reply_step(const CoalitionStructure& state, int proposer,
                           const BeliefState& beliefs, PayoffModel& model,
                           std::mt19937_64& tie_rng,
                           VetoRule rule = VetoRule::NextBest);

struct BestReplyOptions {
  int max_proposals = 10000;
  VetoRule veto_rule = VetoRule::NextBest;
};

struct MoveRecord {
  int proposer = 0;
  std::string structure;  // after the move
};

struct BestReplyResult {
  CoalitionStructure structure;
  int proposals = 0;
  int moves = 0;  // structure-changing proposals
  bool converged = false;
  std::vector<MoveRecord> trace;
};

/// Draws proposers uniformly until the structure is absorbing (no proposer
/// has an admissible improvement) or the proposal budget runs out.
BestReplyResult run_best_reply(const CoalitionStructure& initial,
                               const BeliefState& beliefs, PayoffModel& model,
                               std::mt19937_64& proposer_rng, std::mt19937_64& tie_rng,
                               const BestReplyOptions& options = {});

struct DynamicsConfig {
  double epsilon = 0.1;
  int init_grand_rounds = 5;
  int max_rounds = 200;  // including the initial grand-coalition rounds
  int stability_window = 10;
  std::uint64_t seed = 1;
  std::size_t belief_window = kUnboundedWindow;
  BestReplyOptions best_reply;
  bool stop_on_convergence = true;
};

void validate(const DynamicsConfig& config);

struct RoundRecord {
  int round = 0;
  bool grand_coalition = false;
  CoalitionStructure structure;
  std::vector<double> expected_payoffs;  // per drone, under the round's beliefs
  std::vector<double> shared_samples;    // per drone, Watts
  std::uint64_t belief_fingerprint = 0;  // beliefs the round was decided under
  int best_reply_moves = 0;
  bool best_reply_converged = true;
  std::vector<double> frobenius_per_type;  // after this round's update
  double frobenius_mean = 0.0;
};

struct RepeatedGameResult {
  CoalitionStructure final_structure;
  BeliefState final_beliefs;
  TypePrediction final_prediction;
  std::vector<RoundRecord> rounds;
  bool converged = false;
  bool all_best_replies_converged = true;
};

/// A few grand-coalition rounds seed the beliefs; afterwards each round is the
/// grand coalition with probability epsilon and otherwise best-reply dynamics
/// warm-started from the previous best-reply outcome. Coalition mates share
/// one power draw each, and beliefs are re-learned after every round. Stops
/// once predictions held for `stability_window` rounds and the best-reply
/// structure repeated, or at max_rounds.
RepeatedGameResult run_repeated_game(const Scenario& scenario, const DynamicsConfig& config);

/// Line-delimited JSON, one round per line.
void write_trace(std::ostream& os, const std::vector<RoundRecord>& rounds);
std::vector<RoundRecord> read_trace(std::istream& is);

struct ReplayResult {
  CoalitionStructure final_structure;
  BeliefState final_beliefs;
  /// Every recorded belief fingerprint matched the replayed beliefs.
  bool consistent = true;
};

/// Rebuilds beliefs from the recorded shared samples.
ReplayResult replay_trace(const Scenario& scenario, const std::vector<RoundRecord>& rounds,
                          std::size_t belief_window = kUnboundedWindow);

}  // namespace dronecoal
