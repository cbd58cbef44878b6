// Copyright 2026 The nestpool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "nestpool/analysis.hpp"
#include "nestpool/error.hpp"
#include "nestpool/random.hpp"
#include "support/transport_lp.hpp"

namespace nestpool {
namespace {

WeightHistogram from_masses(std::vector<double> masses) {
  WeightHistogram h;
  h.masses = std::move(masses);
  return h;
}

std::vector<double> random_masses(CounterRng& rng, std::size_t n) {
  std::vector<double> m(n);
  double total = 0.0;
  for (double& x : m) {
    // Some empty bins keep the program degenerate, which is the hard case.
    x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    total += x;
  }
  if (total == 0.0) {
    m[0] = 1.0;
    total = 1.0;
  }
  for (double& x : m) x /= total;
  return m;
}

TEST(Histogram, PointMassAtZero) {
  const std::vector<double> zeros(37, 0.0);
  const WeightHistogram h = weight_histogram(zeros);
  ASSERT_EQ(h.bins(), 100u);
  EXPECT_EQ(h.masses[50], 1.0);
  EXPECT_NEAR(h.center(50), 0.01, 1e-15);
  EXPECT_EQ(h.out_of_range, 0u);
}

TEST(Histogram, UniformGrid) {
  std::vector<double> values;
  for (std::size_t l = 0; l < 100; ++l) values.push_back(-1.0 + (2.0 * l + 1.0) / 100.0);
  const WeightHistogram h = weight_histogram(values);
  for (double m : h.masses) EXPECT_DOUBLE_EQ(m, 0.01);
}

TEST(Histogram, ClampsOutOfRange) {
  const std::vector<double> values{1.5, 0.0};
  const WeightHistogram h = weight_histogram(values);
  EXPECT_EQ(h.masses.back(), 0.5);
  EXPECT_EQ(h.out_of_range, 1u);
  const WeightHistogram top = weight_histogram(std::vector<double>{1.0, -1.0}, 4);
  EXPECT_EQ(top.masses, (std::vector<double>{0.5, 0, 0, 0.5}));
}

TEST(Histogram, Rejections) {
  EXPECT_THROW(weight_histogram(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(weight_histogram(std::vector<double>{0.1}, 0), InvalidArgument);
  EXPECT_THROW(weight_histogram(std::vector<double>{std::nan("")}), InvalidArgument);
}

TEST(Otd, Identity) {
  CounterRng rng(3, 0);
  const WeightHistogram h = from_masses(random_masses(rng, 100));
  EXPECT_EQ(otd(h, h), 0.0);
}

TEST(Otd, AdjacentBins) {
  std::vector<double> a(100, 0.0);
  std::vector<double> b(100, 0.0);
  a[10] = 1.0;
  b[11] = 1.0;
  EXPECT_NEAR(otd(from_masses(a), from_masses(b)), 0.02, 1e-15);
}

TEST(Otd, EndToEnd) {
  std::vector<double> a{1, 0, 0, 0};
  std::vector<double> b{0, 0, 0, 1};
  EXPECT_NEAR(otd(from_masses(a), from_masses(b)), 1.5, 1e-15);
}

TEST(Otd, MismatchedBinsRejected) {
  EXPECT_THROW(otd(from_masses({1.0}), from_masses({0.5, 0.5})), InvalidArgument);
}

TEST(Otd, MatchesLinearProgram) {
  CounterRng rng(17, 0);
  for (std::size_t n : {2u, 5u, 10u, 30u}) {
    for (int t = 0; t < 5; ++t) {
      const std::vector<double> p = random_masses(rng, n);
      const std::vector<double> q = random_masses(rng, n);
      const double lp = testing::transport_lp(p, q);
      EXPECT_NEAR(otd(from_masses(p), from_masses(q)), lp, 1e-9) << "n=" << n;
    }
  }
}

TEST(Otd, MetricAxioms) {
  CounterRng rng(5, 0);
  for (int t = 0; t < 30; ++t) {
    const WeightHistogram a = from_masses(random_masses(rng, 20));
    const WeightHistogram b = from_masses(random_masses(rng, 20));
    const WeightHistogram c = from_masses(random_masses(rng, 20));
    EXPECT_GE(otd(a, b), 0.0);
    EXPECT_EQ(otd(a, b), otd(b, a));
    EXPECT_LE(otd(a, c), otd(a, b) + otd(b, c) + 1e-12);
  }
}

TEST(LinearProgram, SmallKnownProblem) {
  // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
  testing::LinearProgram lp;
  lp.cost = {-1, -1};
  lp.a_le = {{1, 2}, {3, 1}};
  lp.b_le = {4, 6};
  const testing::LpSolution s = testing::solve_lp(lp);
  ASSERT_TRUE(s.feasible);
  EXPECT_NEAR(s.objective, -2.8, 1e-12);
  EXPECT_NEAR(s.x[0], 1.6, 1e-12);
  EXPECT_NEAR(s.x[1], 1.2, 1e-12);
}

TEST(LinearProgram, Infeasible) {
  testing::LinearProgram lp;
  lp.cost = {1};
  lp.a_le = {{1}};
  lp.b_le = {1};
  lp.a_eq = {{1}};
  lp.b_eq = {2};
  EXPECT_FALSE(testing::solve_lp(lp).feasible);
}

TEST(Pairwise, SymmetricWithZeroDiagonal) {
  std::vector<Model> models;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    models.push_back(init_params(parse_architecture("fcn-10-8-3"), s));
  }
  models.push_back(init_params(parse_architecture("fcn-12-5-3"), 9));
  const Matrix m = pairwise_otd(models);
  ASSERT_EQ(m.rows(), 5);
  for (Eigen::Index j = 0; j < 5; ++j) {
    EXPECT_EQ(m(j, j), 0.0);
    for (Eigen::Index k = 0; k < 5; ++k) EXPECT_EQ(m(j, k), m(k, j));
  }
  const OffDiagonalStats st = off_diagonal_stats(m);
  EXPECT_GT(st.mean, 0.0);
  EXPECT_GE(st.stddev, 0.0);
}

TEST(Pairwise, OffDiagonalStats) {
  Matrix m(3, 3);
  m << 0, 1, 2, 1, 0, 3, 2, 3, 0;
  const OffDiagonalStats st = off_diagonal_stats(m);
  EXPECT_DOUBLE_EQ(st.mean, 2.0);
  EXPECT_NEAR(st.stddev, std::sqrt(2.0 / 3.0), 1e-15);
}

}  // namespace
}  // namespace nestpool
