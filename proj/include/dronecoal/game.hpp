#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dronecoal/scenario.hpp"

namespace dronecoal {

/// Sorted drone ids of one coalition.
using Coalition = std::vector<int>;
using CoalitionMask = std::uint32_t;

CoalitionMask to_mask(std::span<const int> coalition);
Coalition from_mask(CoalitionMask mask);

/// A partition of {0..D-1} kept in canonical form: members sorted, blocks
/// ordered by their smallest member. Equality is therefore structural.
class CoalitionStructure {
 public:
  CoalitionStructure() = default;
  /// Throws std::invalid_argument unless `blocks` partitions {0..D-1}.
  explicit CoalitionStructure(std::vector<Coalition> blocks);

  static CoalitionStructure singletons(int drones);
  static CoalitionStructure grand(int drones);
  /// Parses the "{0}{1,2,3}" notation produced by to_string().
  static CoalitionStructure parse(std::string_view text);

  const std::vector<Coalition>& blocks() const { return blocks_; }
  int num_drones() const { return static_cast<int>(owner_.size()); }
  int block_of(int drone) const { return owner_.at(drone); }
  const Coalition& coalition_of(int drone) const { return blocks_[block_of(drone)]; }

  /// Moves `drone` into block `target` (index into blocks()), or into a new
  /// singleton when target < 0.
  CoalitionStructure with_move(int drone, int target) const;

  std::string to_string() const;

  friend bool operator==(const CoalitionStructure& a, const CoalitionStructure& b) {
    return a.blocks_ == b.blocks_;
  }
  friend auto operator<=>(const CoalitionStructure& a, const CoalitionStructure& b) {
    return a.blocks_ <=> b.blocks_;
  }

 private:
  std::vector<Coalition> blocks_;
  std::vector<int> owner_;
};

inline constexpr int kDefaultEnumerationCap = 8;

/// Every partition of {0..d-1}, generated from restricted growth strings in
/// lexicographic order. Refuses d above `cap` (Bell(8) = 4140).
std::vector<CoalitionStructure> enumerate_structures(int d,
                                                     int cap = kDefaultEnumerationCap);

/// Per observer, a probability vector over type-set positions for every
/// drone. The observer's own row is a point mass on its true type.
class BeliefState {
 public:
  BeliefState() = default;
  BeliefState(int drones, int types);

  static BeliefState uniform(const Scenario& scenario);
  static BeliefState point_mass_truth(const Scenario& scenario);

  int num_drones() const { return drones_; }
  int num_types() const { return types_; }

  double prob(int observer, int observed, int type_index) const {
    return table_[offset(observer, observed) + type_index];
  }
  std::span<const double> row(int observer, int observed) const {
    return {table_.data() + offset(observer, observed), static_cast<std::size_t>(types_)};
  }
  /// Throws std::invalid_argument unless `probs` lies on the simplex.
  void set_row(int observer, int observed, std::span<const double> probs);

  /// Most likely type position; ties go to the lowest position.
  int argmax(int observer, int observed) const;

  const std::vector<double>& table() const { return table_; }
  /// FNV-1a over the bit patterns of the table.
  std::uint64_t fingerprint() const;

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

 private:
  std::size_t offset(int observer, int observed) const {
    return (static_cast<std::size_t>(observer) * drones_ + observed) * types_;
  }
  int drones_ = 0;
  int types_ = 0;
  std::vector<double> table_;
};

/// Product of the observer's marginals: members[i] has type position
/// type_indices[i]. The empty product is 1.
double joint_belief(int observer, std::span<const int> members,
                    std::span<const int> type_indices, const BeliefState& beliefs);

struct PayoffLimits {
  /// Largest type-profile count M^(|C|-1) a single expectation may sum over.
  std::size_t max_type_profiles = std::size_t{1} << 20;
};

/// Coalition payoffs for one scenario. Rates given a type profile are
/// memoized; expected payoffs are cached for the most recent belief table.
/// Not safe for concurrent use; give each worker its own instance.
class PayoffModel {
 public:
  explicit PayoffModel(const Scenario& scenario, PayoffLimits limits = {});

  const Scenario& scenario() const { return *scenario_; }

  /// Rate of every member (in coalition order) when member i has the type at
  /// position type_indices[i].
  const std::vector<double>& member_rates(const Coalition& coalition,
                                          std::span<const int> type_indices);

  /// Payoff of `target` in `coalition` as expected by `evaluator`: the
  /// evaluator's own type is its true type, everyone else's is averaged over
  /// the evaluator's beliefs.
  double believed_payoff(int evaluator, int target, const Coalition& coalition,
                         const BeliefState& beliefs);

  double expected_payoff(int drone, const Coalition& coalition,
                         const BeliefState& beliefs) {
    return believed_payoff(drone, drone, coalition, beliefs);
  }

  double full_information_payoff(int drone, const Coalition& coalition);
  double full_information_total(const Coalition& coalition);

  std::size_t memo_size() const { return rates_.size(); }

 private:
  struct Key {
    CoalitionMask mask;
    std::uint64_t profile;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.profile * 0x9E3779B97F4A7C15ULL ^ k.mask);
    }
  };
  struct BeliefKey {
    int evaluator;
    int target;
    CoalitionMask mask;
    friend bool operator==(const BeliefKey&, const BeliefKey&) = default;
  };
  struct BeliefKeyHash {
    std::size_t operator()(const BeliefKey& k) const noexcept {
      return (static_cast<std::size_t>(k.mask) << 16) ^
             (static_cast<std::size_t>(k.evaluator) << 8) ^
             static_cast<std::size_t>(k.target);
    }
  };

  const Scenario* scenario_;
  PayoffLimits limits_;
  std::vector<int> true_type_index_;
  std::unordered_map<Key, std::vector<double>, KeyHash> rates_;
  std::vector<double> cached_table_;
  std::unordered_map<BeliefKey, double, BeliefKeyHash> believed_;
};

/// Free-function form of the expected payoff of `observer` in `coalition`.
double expected_payoff(int observer, const Coalition& coalition,
                       const BeliefState& beliefs, PayoffModel& model);

/// What a proposer sees: its current payoff and every alternative.
struct MoveOption {
  int target_block = -1;  // index into blocks(), -1 for a new singleton
  Coalition joined;       // the coalition the proposer would end up in
  double proposer_payoff = 0.0;
  bool accepted = true;   // every member of the target weakly gains
};

struct ProposerView {
  double current_payoff = 0.0;
  std::vector<MoveOption> options;
};

ProposerView evaluate_options(const CoalitionStructure& structure, int proposer,
                              const BeliefState& beliefs, PayoffModel& model);

/// How a proposer reacts when its favourite coalition refuses it.
enum class VetoRule {
  NextBest,    // pick among the best admissible options
  StayOnVeto,  // pick among the best options; a refusal means staying put
};

/// Outcomes a proposer chooses between uniformly at random. Empty when no
/// option strictly improves on staying. Under StayOnVeto an entry may equal
/// `structure` itself (a refused proposal).
std::vector<CoalitionStructure> best_reply_outcomes(
    const CoalitionStructure& structure, int proposer, const BeliefState& beliefs,
    PayoffModel& model, VetoRule rule = VetoRule::NextBest);

struct Deviation {
  int drone = 0;
  Coalition target;  // the coalition the drone would join (empty = singleton)
};

struct StabilityVerdict {
  bool stable = true;
  std::optional<Deviation> witness;
};

/// Nash stability: no drone strictly gains by joining another block (or going
/// alone) with the consent of every member of that block.
StabilityVerdict is_nash_stable(const CoalitionStructure& structure,
                                const BeliefState& beliefs, PayoffModel& model);

enum class CoreKind { Weak, Strong };

struct CoreVerdict {
  bool in_core = true;
  std::optional<Coalition> blocking;
};

/// Checks the grand coalition against every non-empty proper subset S.
/// Weak: S blocks if each d in S weakly prefers S by its own beliefs. Strong:
/// S also blocks if some d in S believes every j in S weakly prefers S.
CoreVerdict bayesian_core(const BeliefState& beliefs, PayoffModel& model,
                          CoreKind kind, int cap = kDefaultEnumerationCap);

}  // namespace dronecoal
