#pragma once

#include "blinktrack/geometry.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace blinktrack {

double iou(const BoundingBox2D& a, const BoundingBox2D& b);

// Minimum-cost assignment (Kuhn-Munkres with potentials) on a dense
// rectangular matrix. Every row is assigned when rows <= cols and every
// column otherwise; entry i is the column of row i or -1.
std::vector<int> solve_min_cost_assignment(const Eigen::MatrixXd& cost);

struct WeightedMatching {
  std::vector<int> row_to_col;  // -1 = unmatched
  double total = 0.0;           // summed in row order
};

// Maximum-total-weight matching restricted to pairs with weight >= gate and
// weight > 0. Among optima (totals within 1e-9), returns the one whose
// row_to_col vector is lexicographically smallest, with "unmatched" ordered
// after every column index.
WeightedMatching max_weight_matching(const Eigen::MatrixXd& weights, double gate);

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (track id, detection index)
  std::vector<int> unmatched_tracks;       // track ids
  std::vector<int> unmatched_detections;   // detection indices
};

}  // namespace blinktrack
