#include "dronecoal/allocation.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dronecoal {

namespace {

// Shortest augmenting path Hungarian with potentials on a rows <= cols cost
// matrix; returns the column assigned to each row.
std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Matching max_weight_matching(const Eigen::MatrixXd& weights) {
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  if (rows == 0 || cols == 0) return {};
  if (!weights.allFinite() || weights.minCoeff() < 0.0)
    throw std::invalid_argument("max_weight_matching: weights must be finite and >= 0");

  std::vector<int> row_to_col(rows, -1);
  if (rows <= cols) {
    row_to_col = hungarian_min_cost(-weights);
  } else {
    const auto col_to_row = hungarian_min_cost(-weights.transpose());
    for (int c = 0; c < cols; ++c) row_to_col[col_to_row[c]] = c;
  }

  // Interchangeable rows: hand the lowest columns to the lowest rows.
  std::vector<char> grouped(rows, 0);
  for (int r = 0; r < rows; ++r) {
    if (grouped[r]) continue;
    std::vector<int> group{r};
    for (int s = r + 1; s < rows; ++s)
      if (!grouped[s] && weights.row(s) == weights.row(r)) group.push_back(s);
    if (group.size() == 1) continue;
    std::vector<int> cols_used;
    for (int g : group) {
      grouped[g] = 1;
      if (row_to_col[g] >= 0) cols_used.push_back(row_to_col[g]);
      row_to_col[g] = -1;
    }
    std::sort(cols_used.begin(), cols_used.end());
    for (std::size_t k = 0; k < cols_used.size(); ++k)
      row_to_col[group[k]] = cols_used[k];
  }

  Matching matching;
  for (int r = 0; r < rows; ++r)
    if (row_to_col[r] >= 0) matching.emplace_back(r, row_to_col[r]);
  return matching;
}

double matching_weight(const Eigen::MatrixXd& weights, const Matching& matching) {
  double total = 0.0;
  for (const auto& [r, c] : matching) total += weights(r, c);
  return total;
}

PowerVector waterfill(std::span<const double> gains, double budget) {
  if (budget < 0.0) throw std::invalid_argument("waterfill: negative budget");
  PowerVector out;
  out.total_budget = budget;
  out.p.assign(gains.size(), 0.0);

  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(gains.size()); ++i) {
    if (gains[i] < 0.0) throw std::invalid_argument("waterfill: negative gain");
    if (gains[i] > 0.0) order.push_back(i);
  }
  if (order.empty() || budget == 0.0) return out;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gains[a] > gains[b]; });

  // Largest active prefix whose level stays above its weakest member's floor.
  double inverse_sum = 0.0;
  double level = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double floor_k = 1.0 / gains[order[k]];
    const double candidate = (budget + inverse_sum + floor_k) / static_cast<double>(k + 1);
    if (candidate <= floor_k) break;
    inverse_sum += floor_k;
    level = candidate;
    active = k + 1;
  }
  out.water_level = level;
  for (std::size_t k = 0; k < active; ++k)
    out.p[order[k]] = level - 1.0 / gains[order[k]];
  return out;
}

CoalitionResources pooled_resources(std::span<const int> coalition,
                                    const Scenario& scenario) {
  if (coalition.empty())
    throw std::invalid_argument("coalition must not be empty");
  CoalitionResources res;
  res.drones.assign(coalition.begin(), coalition.end());
  std::sort(res.drones.begin(), res.drones.end());
  if (std::adjacent_find(res.drones.begin(), res.drones.end()) != res.drones.end())
    throw std::invalid_argument("coalition lists a drone twice");
  for (int d : res.drones) {
    for (int c : scenario.drones.at(d).channels) {
      res.channels.push_back(c);
      res.channel_owner.push_back(d);
    }
  }
  for (const auto& user : scenario.users) {
    if (std::binary_search(res.drones.begin(), res.drones.end(), user.baseline_drone))
      res.users.push_back(user.id);
  }
  return res;
}

namespace {

Eigen::MatrixXd mean_loss_matrix(const CoalitionResources& res,
                                 const Scenario& scenario) {
  // One link per (owner, user); channels of the same drone share it.
  Eigen::MatrixXd loss(res.channels.size(), res.users.size());
  for (std::size_t j = 0; j < res.users.size(); ++j) {
    const auto& user = scenario.users[res.users[j]].position;
    int last_owner = -1;
    double last_loss = 0.0;
    for (std::size_t i = 0; i < res.channels.size(); ++i) {
      if (res.channel_owner[i] != last_owner) {
        last_owner = res.channel_owner[i];
        last_loss = path_loss(scenario.drones[last_owner].position, user,
                              scenario.env)
                        .mean_loss_db;
      }
      loss(i, j) = last_loss;
    }
  }
  return loss;
}

}  // namespace

Eigen::MatrixXd weight_matrix(std::span<const int> coalition,
                              const Scenario& scenario) {
  const auto res = pooled_resources(coalition, scenario);
  return mean_loss_matrix(res, scenario).unaryExpr([](double l) {
    return 1.0 / from_db(l);
  });
}

AllocationResult evaluate_coalition(std::span<const int> coalition,
                                    const Scenario& scenario,
                                    std::span<const double> assumed_powers) {
  if (assumed_powers.size() != coalition.size())
    throw std::invalid_argument("evaluate_coalition: one power per member required");

  AllocationResult out;
  out.resources = pooled_resources(coalition, scenario);
  const auto& res = out.resources;

  double budget = 0.0;
  for (int d : res.drones) {
    const auto it = std::find(coalition.begin(), coalition.end(), d);
    const double p = assumed_powers[it - coalition.begin()];
    if (p < 0.0) throw std::invalid_argument("evaluate_coalition: negative power");
    budget += p;
  }

  const Eigen::MatrixXd loss = mean_loss_matrix(res, scenario);
  const Eigen::MatrixXd weights = loss.unaryExpr([](double l) { return 1.0 / from_db(l); });
  out.matching = max_weight_matching(weights);

  const auto n_users = res.users.size();
  const auto drone_row = [&](int d) {
    return static_cast<int>(std::lower_bound(res.drones.begin(), res.drones.end(), d) -
                            res.drones.begin());
  };
  out.matrices.x = Eigen::MatrixXi::Zero(res.channels.size(), n_users);
  out.matrices.y = Eigen::MatrixXi::Zero(res.drones.size(), n_users);
  std::vector<double> gains(n_users, 0.0);
  std::vector<int> serving_drone(n_users, -1);
  std::vector<double> served_loss(n_users, 0.0);
  for (const auto& [ch, u] : out.matching) {
    out.matrices.x(ch, u) = 1;
    const int owner = res.channel_owner[ch];
    out.matrices.y(drone_row(owner), u) = 1;
    serving_drone[u] = owner;
    served_loss[u] = loss(ch, u);
    gains[u] = sinr_per_watt(loss(ch, u), scenario.env);
  }

  out.powers = waterfill(gains, budget);
  out.user_rate.assign(n_users, 0.0);
  for (int d : res.drones) out.per_drone_rate[d] = 0.0;
  for (std::size_t u = 0; u < n_users; ++u) {
    if (serving_drone[u] < 0) continue;
    out.user_rate[u] = rate(served_loss[u], out.powers.p[u], scenario.env);
    out.per_drone_rate[serving_drone[u]] += out.user_rate[u];
  }
  for (const auto& [d, r] : out.per_drone_rate) out.total_rate += r;
  return out;
}

}  // namespace dronecoal
