#include "blinktrack/assignment.hpp"

#include <algorithm>
#include <limits>

namespace blinktrack {

namespace {

constexpr double kTieTolerance = 1e-9;

bool eligible(double weight, double gate) { return weight >= gate && weight > 0.0; }

// Best total over the sub-problem restricted to the given rows and columns.
double best_total(const Eigen::MatrixXd& weights, double gate, const std::vector<int>& rows,
                  const std::vector<int>& cols) {
  if (rows.empty() || cols.empty()) return 0.0;
  Eigen::MatrixXd cost(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double w = weights(rows[i], cols[j]);
      cost(i, j) = eligible(w, gate) ? -w : 0.0;
    }
  }
  const auto assignment = solve_min_cost_assignment(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (assignment[i] >= 0) total -= cost(i, assignment[i]);
  }
  return total;
}

}  // namespace

double iou(const BoundingBox2D& a, const BoundingBox2D& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<int> solve_min_cost_assignment(const Eigen::MatrixXd& cost) {
  const auto rows = static_cast<int>(cost.rows());
  const auto cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  if (rows > cols) {
    const auto transposed = solve_min_cost_assignment(cost.transpose());
    std::vector<int> result(rows, -1);
    for (int j = 0; j < cols; ++j) {
      if (transposed[j] >= 0) result[transposed[j]] = j;
    }
    return result;
  }

  // Shortest augmenting path with row/column potentials, 1-based with a
  // virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
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
      for (int j = 0; j <= cols; ++j) {
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

  std::vector<int> result(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (p[j] != 0) result[p[j] - 1] = j - 1;
  }
  return result;
}

WeightedMatching max_weight_matching(const Eigen::MatrixXd& weights, double gate) {
  const auto rows = static_cast<int>(weights.rows());
  const auto cols = static_cast<int>(weights.cols());
  WeightedMatching out;
  out.row_to_col.assign(rows, -1);

  std::vector<int> free_rows(rows), free_cols(cols);
  for (int i = 0; i < rows; ++i) free_rows[i] = i;
  for (int j = 0; j < cols; ++j) free_cols[j] = j;
  const double optimum = best_total(weights, gate, free_rows, free_cols);

  // Fix rows one at a time, taking the smallest column that still admits
  // an optimal completion.
  double fixed = 0.0;
  for (int i = 0; i < rows; ++i) {
    free_rows.erase(free_rows.begin());
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
      const int j = free_cols[k];
      const double w = weights(i, j);
      if (!eligible(w, gate)) continue;
      std::vector<int> rest_cols = free_cols;
      rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(k));
      if (fixed + w + best_total(weights, gate, free_rows, rest_cols) >= optimum - kTieTolerance) {
        out.row_to_col[i] = j;
        fixed += w;
        free_cols = std::move(rest_cols);
        break;
      }
    }
  }

  for (int i = 0; i < rows; ++i) {
    if (out.row_to_col[i] >= 0) out.total += weights(i, out.row_to_col[i]);
  }
  return out;
}

}  // namespace blinktrack
