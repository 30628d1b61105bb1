#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dronecoal {

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

struct KMeansResult {
  std::vector<Point2D> centroids;
  std::vector<int> assignment;  // point index -> cluster
  /// Within-cluster sum of squared distances after every Lloyd iteration.
  std::vector<double> objective_history;
  int iterations = 0;
};

/// Sum of squared distances from every point to its assigned centroid.
double kmeans_objective(std::span<const Point2D> points,
                        std::span<const Point2D> centroids,
                        std::span<const int> assignment);

/// Lloyd's algorithm with k-means++ seeding. A cluster that
/// empties is re-seeded at the point farthest from its current centroid.
///
/// With `capacity`, the converged clustering is repaired so no cluster holds
/// more than `capacity` points: overflow points move, cheapest first, to the
/// nearest cluster that still has room, and centroids are recomputed.
KMeansResult kmeans_placement(std::span<const Point2D> points, int k,
                              std::uint64_t seed,
                              std::optional<int> capacity = std::nullopt,
                              int max_iterations = 300);

}  // namespace dronecoal
