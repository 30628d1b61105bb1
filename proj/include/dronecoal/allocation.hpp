#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dronecoal/scenario.hpp"

namespace dronecoal {

/// Channel/user pairs, as row/column indices of the weight matrix.
using Matching = std::vector<std::pair<int, int>>;

/// Maximum-weight matching that saturates the smaller side of a rectangular
/// non-negative weight matrix (Hungarian algorithm, O(n^2 m)). Rows with
/// identical weights have their assigned columns ordered ascending, so ties
/// between interchangeable channels resolve lexicographically.
Matching max_weight_matching(const Eigen::MatrixXd& weights);

double matching_weight(const Eigen::MatrixXd& weights, const Matching& matching);

struct PowerVector {
  std::vector<double> p;
  double total_budget = 0.0;
  /// Common level mu with p_n = max(0, mu - 1/g_n); 0 if nothing is active.
  double water_level = 0.0;
};

/// Water-filling over SINR slopes `gains` (per Watt) with a total budget.
/// Exact: sorts the slopes and grows the active set until the level drops
/// below the next inverse slope. All-zero gains leave the budget unspent.
PowerVector waterfill(std::span<const double> gains, double budget);

/// The resources a coalition pools: channels in owner order, then users in
/// id order.
struct CoalitionResources {
  std::vector<int> drones;
  std::vector<int> channels;
  std::vector<int> channel_owner;  // parallel to channels
  std::vector<int> users;
};

CoalitionResources pooled_resources(std::span<const int> coalition,
                                    const Scenario& scenario);

/// Linear gains 1 / 10^(Lbar/10) of every (channel, user) pair of the
/// coalition, rows = channels, cols = users.
Eigen::MatrixXd weight_matrix(std::span<const int> coalition,
                              const Scenario& scenario);

struct AssignmentMatrices {
  Eigen::MatrixXi x;  // channel x user
  Eigen::MatrixXi y;  // drone x user
};

struct AllocationResult {
  CoalitionResources resources;
  Matching matching;  // indices into resources.channels / resources.users
  AssignmentMatrices matrices;
  PowerVector powers;  // per entry of resources.users
  std::vector<double> user_rate;  // per entry of resources.users
  std::map<int, double> per_drone_rate;
  double total_rate = 0.0;
};

/// Matching on inverse mean path loss, then water-filling of the pooled
/// budget sum(assumed_powers). `assumed_powers[i]` belongs to `coalition[i]`.
/// The result does not depend on the order of the coalition members.
AllocationResult evaluate_coalition(std::span<const int> coalition,
                                    const Scenario& scenario,
                                    std::span<const double> assumed_powers);

}  // namespace dronecoal
