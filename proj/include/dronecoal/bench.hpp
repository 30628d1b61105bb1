#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dronecoal/dynamics.hpp"
#include "dronecoal/scenario.hpp"

namespace dronecoal {

enum class Regime { Baseline, FullInfo, Proposed, SocialOptimal };

/// Which structures the exhaustive social optimum may pick.
enum class Rationality {
  Strict,  // every drone strictly above its baseline; unconstrained when none qualifies
  Weak,    // every drone at least at its baseline
  None,    // any structure
};

std::string_view regime_name(Regime r);
Regime parse_regime(std::string_view name);
const std::vector<Regime>& all_regimes();
std::string_view rationality_name(Rationality r);
Rationality parse_rationality(std::string_view name);

struct RunManifest {
  std::vector<std::string> settings{"S1"};
  std::string environment = "urban";
  std::string types = "12:3,18:3";
  int topologies = 100;
  int repetitions = 30;
  std::uint64_t seed = 1;
  std::vector<Regime> regimes = all_regimes();
  std::string output_dir = "results";

  double epsilon = 0.1;
  int init_grand_rounds = 5;
  int max_rounds = 200;
  int stability_window = 10;
  bool stop_on_convergence = true;  // false plays every round up to max_rounds
  int belief_window = 0;  // 0 = unbounded
  int max_proposals = 10000;
  VetoRule veto_rule = VetoRule::NextBest;
  int enumeration_cap = kDefaultEnumerationCap;
  int social_optimal_cap = kDefaultEnumerationCap;
  Rationality social_rationality = Rationality::Strict;
  bool markov_audit = false;
  int threads = 0;  // 0 = hardware concurrency; never changes the outputs

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// Throws std::invalid_argument on an unusable manifest.
void validate(const RunManifest& manifest);
std::string manifest_to_text(const RunManifest& manifest);
RunManifest manifest_from_text(const std::string& text);

/// Seed of topology `topology` of a standard setting. Depends only on the
/// master seed, the setting and the index, so type sets can be compared on
/// identical layouts.
std::uint64_t topology_seed(std::uint64_t master, std::string_view setting, int topology);
/// Seed of one stochastic run on a topology.
std::uint64_t run_seed(std::uint64_t topology_seed, Regime regime, int repetition);

DynamicsConfig dynamics_config(const RunManifest& manifest, std::uint64_t seed);

/// One absorbing structure with its total rate and formation probability.
struct StableOutcome {
  std::string structure;
  double total_rate = 0.0;
  double probability = 0.0;
};

/// One stochastic run (best-reply run for full_info, repeated game for proposed).
struct RunRecord {
  int repetition = 0;
  std::string final_structure;
  double total_rate = 0.0;
  int rounds = 0;            // proposed only
  int best_reply_moves = 0;  // largest single best-reply run
  bool converged = true;
  std::vector<std::vector<double>> frobenius;  // per round, per type
};

struct RegimeResult {
  std::string setting;
  int topology = 0;
  std::uint64_t scenario_seed = 0;
  Regime regime = Regime::Baseline;
  int drones = 0;
  /// Realized total under true powers: the best reachable stable structure
  /// for full_info, the repetition mean for proposed.
  double total_rate = 0.0;
  /// Formation-probability weighted total for full_info; total_rate otherwise.
  double expected_total = 0.0;
  std::vector<double> per_drone;  // rates behind total_rate
  std::string final_structure;
  std::vector<StableOutcome> stable;  // full_info only
  std::vector<RunRecord> runs;
  bool skipped = false;
  bool fallback = false;
  std::string notice;
  std::string markov_audit;  // JSON text, full_info with the chain
};

/// Sum of every block's full-information total rate.
double structure_total(const CoalitionStructure& structure, PayoffModel& model);
std::vector<double> structure_rates(const CoalitionStructure& structure, PayoffModel& model);

/// Largest total among outcomes with positive probability.
double best_stable_rate(const std::vector<StableOutcome>& outcomes);
/// Sum of probability times total.
double expected_rate(const std::vector<StableOutcome>& outcomes);

RegimeResult run_regime(const Scenario& scenario, Regime regime, const RunManifest& manifest);

/// Every configured setting x topology x regime, evaluated on a worker pool.
/// Result order is fixed: setting-major, then topology, then regime.
std::vector<RegimeResult> run_manifest(const RunManifest& manifest);

enum class AggregateMode { BestStable, Expected };

struct SummaryRow {
  std::string setting;
  Regime regime = Regime::Baseline;
  int topologies = 0;
  int skipped = 0;
  int fallbacks = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation over topologies
};

double regime_total(const RegimeResult& result, AggregateMode mode);
std::vector<SummaryRow> aggregate(const std::vector<RegimeResult>& results,
                                  const RunManifest& manifest, AggregateMode mode);

/// Creates the directory and probes it with a scratch file.
void prepare_output_dir(const std::filesystem::path& dir);

/// Line-delimited JSON of the raw per-topology results.
std::string results_to_text(const std::vector<RegimeResult>& results);
std::vector<RegimeResult> results_from_text(const std::string& text);

/// Writes manifest.json and, when any regime ran, summary.csv, per_drone.csv,
/// runs.csv, results.jsonl, convergence.csv (proposed) and markov/*.json.
std::vector<std::filesystem::path> emit_outputs(const std::vector<RegimeResult>& results,
                                                const RunManifest& manifest,
                                                const std::filesystem::path& dir);

/// True when every stochastic run converged.
bool all_converged(const std::vector<RegimeResult>& results);

}  // namespace dronecoal
