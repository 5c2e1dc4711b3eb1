#include "blinktrack/assignment.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace blinktrack;

TEST(Iou, Basics) {
  const BoundingBox2D a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {20, 20, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, {5, 0, 10, 10}), 50.0 / 150.0);
  EXPECT_DOUBLE_EQ(iou(a, {10, 0, 10, 10}), 0.0);  // touching edges
  EXPECT_DOUBLE_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
}

TEST(MinCost, SquareAndRectangular) {
  Eigen::MatrixXd c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  EXPECT_EQ(solve_min_cost_assignment(c), (std::vector<int>{1, 0, 2}));

  Eigen::MatrixXd wide(2, 3);
  wide << 5, 1, 9, 1, 7, 8;
  EXPECT_EQ(solve_min_cost_assignment(wide), (std::vector<int>{1, 0}));

  Eigen::MatrixXd tall(3, 2);
  tall << 5, 1, 1, 7, 0, 0;
  const auto r = solve_min_cost_assignment(tall);
  ASSERT_EQ(r.size(), 3u);
  int assigned = 0;
  for (int v : r) assigned += v >= 0;
  EXPECT_EQ(assigned, 2);
  EXPECT_TRUE(solve_min_cost_assignment(Eigen::MatrixXd(0, 0)).empty());
}

TEST(MaxWeight, SpecExample) {
  Eigen::MatrixXd w(2, 2);
  w << 0.8, 0.1, 0.2, 0.7;
  const auto m = max_weight_matching(w, 0.3);
  EXPECT_EQ(m.row_to_col, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(m.total, 1.5);
}

TEST(MaxWeight, AllZeroLeavesEverythingUnmatched) {
  const auto m = max_weight_matching(Eigen::MatrixXd::Zero(2, 2), 0.0);
  EXPECT_EQ(m.row_to_col, (std::vector<int>{-1, -1}));
  EXPECT_EQ(m.total, 0.0);
}

TEST(MaxWeight, GateExcludesPairThatWouldOtherwiseWin) {
  Eigen::MatrixXd w(1, 2);
  w << 0.25, 0.2;
  EXPECT_EQ(max_weight_matching(w, 0.3).row_to_col, (std::vector<int>{-1}));
  EXPECT_EQ(max_weight_matching(w, 0.1).row_to_col, (std::vector<int>{0}));
}

TEST(MaxWeight, TieBreakPrefersLowestIndices) {
  Eigen::MatrixXd w(2, 2);
  w << 0.5, 0.5, 0.5, 0.5;
  EXPECT_EQ(max_weight_matching(w, 0.1).row_to_col, (std::vector<int>{0, 1}));
  Eigen::MatrixXd one(2, 1);
  one << 0.4, 0.4;
  EXPECT_EQ(max_weight_matching(one, 0.1).row_to_col, (std::vector<int>{0, -1}));
}

TEST(MaxWeight, MatchesBruteForce) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size(0, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const int r = size(rng);
    const int c = size(rng);
    Eigen::MatrixXd w(r, c);
    const bool quantized = trial % 3 == 0;  // many exact ties
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) w(i, j) = quantized ? 0.25 * level(rng) : (unit(rng) < 0.3 ? 0.0 : unit(rng));
    }
    const double gate = trial % 2 == 0 ? 0.0 : 0.3;
    const auto got = max_weight_matching(w, gate);
    const auto want = oracle::brute_force_matching(w, gate);
    ASSERT_EQ(got.row_to_col, want.row_to_col) << "trial " << trial;
    ASSERT_EQ(got.total, want.total) << "trial " << trial;
  }
}
