#include "dronecoal/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dronecoal {

namespace {

double sq_dist(const Point2D& a, const Point2D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

int nearest(const Point2D& p, std::span<const Point2D> centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centroids.size()); ++c) {
    const double d = sq_dist(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Point2D> recompute_centroids(std::span<const Point2D> points,
                                         std::span<const int> assignment,
                                         std::vector<Point2D> previous,
                                         std::vector<int>& sizes) {
  const auto k = previous.size();
  std::vector<Point2D> sums(k);
  sizes.assign(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sums[assignment[i]].x += points[i].x;
    sums[assignment[i]].y += points[i].y;
    ++sizes[assignment[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0)
      previous[c] = {sums[c].x / sizes[c], sums[c].y / sizes[c]};
  }
  return previous;
}

void repair_capacity(std::span<const Point2D> points, int capacity,
                     KMeansResult& result) {
  const int k = static_cast<int>(result.centroids.size());
  std::vector<int> sizes(k, 0);
  for (int a : result.assignment) ++sizes[a];

  while (true) {
    // Cheapest single move of a point out of an overfull cluster into the
    // nearest cluster with spare room.
    int best_point = -1;
    int best_target = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
      const int from = result.assignment[i];
      if (sizes[from] <= capacity) continue;
      const double here = sq_dist(points[i], result.centroids[from]);
      for (int c = 0; c < k; ++c) {
        if (c == from || sizes[c] >= capacity) continue;
        const double cost = sq_dist(points[i], result.centroids[c]) - here;
        if (cost < best_cost) {
          best_cost = cost;
          best_point = i;
          best_target = c;
        }
      }
    }
    if (best_point < 0) break;
    --sizes[result.assignment[best_point]];
    ++sizes[best_target];
    result.assignment[best_point] = best_target;
  }
  result.centroids = recompute_centroids(points, result.assignment,
                                         result.centroids, sizes);
}

}  // namespace

double kmeans_objective(std::span<const Point2D> points,
                        std::span<const Point2D> centroids,
                        std::span<const int> assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    total += sq_dist(points[i], centroids[assignment[i]]);
  return total;
}

KMeansResult kmeans_placement(std::span<const Point2D> points, int k,
                              std::uint64_t seed, std::optional<int> capacity,
                              int max_iterations) {
  const int n = static_cast<int>(points.size());
  if (k < 1 || k > n)
    throw std::invalid_argument("kmeans_placement: need 1 <= k <= #points");
  if (capacity && *capacity * k < n)
    throw std::invalid_argument("kmeans_placement: capacity too small");

  // k-means++ seeding: each further centroid is a point drawn with
  // probability proportional to its squared distance to the nearest one.
  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids.reserve(k);
  result.centroids.push_back(points[std::uniform_int_distribution<int>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(result.centroids.size()) < k) {
    for (int i = 0; i < n; ++i)
      d2[i] = sq_dist(points[i], result.centroids[nearest(points[i], result.centroids)]);
    int pick;
    if (std::accumulate(d2.begin(), d2.end(), 0.0) > 0.0) {
      pick = std::discrete_distribution<int>(d2.begin(), d2.end())(rng);
    } else {
      pick = std::uniform_int_distribution<int>(0, n - 1)(rng);  // duplicates only
    }
    result.centroids.push_back(points[pick]);
  }
  result.assignment.assign(n, 0);

  std::vector<int> sizes;
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int c = nearest(points[i], result.centroids);
      if (c != result.assignment[i]) {
        changed = true;
        result.assignment[i] = c;
      }
    }
    result.objective_history.push_back(
        kmeans_objective(points, result.centroids, result.assignment));
    result.centroids = recompute_centroids(points, result.assignment,
                                           result.centroids, sizes);
    for (int c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      int far = 0;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        const double d = sq_dist(points[i], result.centroids[result.assignment[i]]);
        if (sizes[result.assignment[i]] > 1 && d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --sizes[result.assignment[far]];
      result.assignment[far] = c;
      sizes[c] = 1;
      result.centroids[c] = points[far];
      changed = true;
    }
    result.objective_history.push_back(
        kmeans_objective(points, result.centroids, result.assignment));
    result.iterations = it + 1;
    if (!changed) break;
  }

  if (capacity) repair_capacity(points, *capacity, result);
  return result;
}

}  // namespace dronecoal
