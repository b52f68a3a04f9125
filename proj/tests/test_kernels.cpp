// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>

#include "evomon/common/error.hpp"
#include "evomon/embedding/kernels.hpp"
#include "oracles.hpp"

using namespace evomon;
using namespace evomon::embedding;

namespace {

FeatureMatrix rows2(std::vector<std::vector<float>> rows) {
  std::vector<std::string> ids;
  std::vector<float> data;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back(oracle::id_of(i));
    data.insert(data.end(), rows[i].begin(), rows[i].end());
  }
  return FeatureMatrix(ids, rows[0].size(), data);
}

oracle::Matrix to_oracle(const SquareMatrix& m) {
  oracle::Matrix out(m.size(), std::vector<double>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) out[i][j] = m(i, j);
  return out;
}

std::vector<Point2> random_points(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<Point2> y(n);
  for (auto& p : y) p = {scale * rng.normal(), scale * rng.normal()};
  return y;
}

std::vector<oracle::Pt> to_pts(const std::vector<Point2>& y) {
  std::vector<oracle::Pt> out;
  for (auto p : y) out.push_back({p.x, p.y});
  return out;
}

}  // namespace

TEST_CASE("pairwise_sq_dists: 3-4-5 triangle and duplicates") {
  const auto d = pairwise_sq_dists(rows2({{0, 0}, {3, 4}}));
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == 25.0);
  CHECK(d(1, 0) == 25.0);

  const auto z = pairwise_sq_dists(rows2({{1.5f, -2}, {1.5f, -2}, {1.5f, -2}}));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(z(i, j) == 0.0);
}

TEST_CASE("pairwise_sq_dists matches brute force on random rows") {
  const auto x = oracle::random_matrix(10, 5, 7);
  const auto d = pairwise_sq_dists(x);
  const auto ref = oracle::sq_dists(oracle::rows_of(x));
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      CHECK(d(i, j) == doctest::Approx(ref[i][j]).epsilon(1e-6));
      CHECK(d(i, j) == d(j, i));
    }
}

TEST_CASE("pairwise_sq_dists rejects non-finite rows and names them") {
  auto bad = rows2({{0, 0}, {1, 1}, {std::nanf(""), 2}});
  try {
    pairwise_sq_dists(bad);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(pairwise_sq_dists(rows2({{0, 0}})), ValidationError);
}

TEST_CASE("conditional_affinities: equidistant points give uniform rows") {
  SquareMatrix d(3, 4.0);
  for (std::size_t i = 0; i < 3; ++i) d(i, i) = 0.0;
  for (double perp : {1.2, 2.0, 2.9}) {
    const auto c = conditional_affinities(d, perp);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(c.p(i, j) == doctest::Approx(i == j ? 0.0 : 0.5).epsilon(1e-12));
  }
}

TEST_CASE("conditional_affinities: perplexity calibrated per row") {
  const auto x = oracle::random_matrix(80, 6, 11);
  const auto d = pairwise_sq_dists(x);
  for (double perp : {5.0, 20.0, 50.0}) {
    const auto c = conditional_affinities(d, perp);
    for (std::size_t i = 0; i < 80; ++i) {
      std::vector<double> row(c.p.row(i).begin(), c.p.row(i).end());
      double sum = 0;
      for (double v : row) sum += v;
      CHECK(std::abs(sum - 1.0) < 1e-9);
      CHECK(c.p(i, i) == 0.0);
      CHECK(std::abs(std::log2(oracle::row_perplexity(row)) - std::log2(perp)) < 1e-4);
      CHECK(c.sigmas[i] > 0.0);
    }
  }
}

TEST_CASE("conditional_affinities: duplicates dominate the row") {
  const auto x = rows2({{0, 0}, {0, 0}, {5, 5}, {6, 5}, {5, 6}});
  const auto c = conditional_affinities(pairwise_sq_dists(x), 2.0);
  CHECK(c.p(0, 1) > c.p(0, 2));
  CHECK(c.p(0, 1) > c.p(0, 2) + c.p(0, 3) + c.p(0, 4));
}

TEST_CASE("conditional_affinities: perplexity bounds are config errors") {
  SquareMatrix d(4, 1.0);
  CHECK_THROWS_AS(conditional_affinities(d, 4.0), ConfigError);
  CHECK_THROWS_AS(conditional_affinities(d, 1.0), ConfigError);
}

TEST_CASE("symmetrize: equidistant triple gives 1/6 everywhere") {
  SquareMatrix d(3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) d(i, i) = 0.0;
  const auto p = symmetrize(conditional_affinities(d, 2.0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(p.p(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 6.0));
}

TEST_CASE("symmetrize: random row-stochastic input becomes exactly symmetric with unit mass") {
  Rng rng(3);
  const std::size_t n = 17;
  ConditionalAffinities c{SquareMatrix(n), std::vector<double>(n, 1.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += (c.p(i, j) = rng.uniform());
    for (std::size_t j = 0; j < n; ++j) c.p(i, j) /= s;
  }
  const auto p = symmetrize(c);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(p.p(i, j) == p.p(j, i));
      total += p.p(i, j);
    }
  CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("kl_cost: two points always match") {
  const auto p = joint_affinities(rows2({{0, 0}, {1, 0}, {9, 9}}), 1.5);
  AffinityMatrix two{SquareMatrix(2), {1, 1}};
  two.p(0, 1) = two.p(1, 0) = 0.5;
  for (auto seed : {1, 2, 3}) CHECK(std::abs(kl_cost(two, random_points(2, seed))) < 1e-15);
  CHECK(kl_cost(p, random_points(3, 5)) >= 0.0);
}

TEST_CASE("kl_cost matches the oracle and the serial reference") {
  const auto x = oracle::random_matrix(25, 4, 21);
  const auto p = joint_affinities(x, 8.0);
  const auto y = random_points(25, 22);
  const double expected = oracle::kl(to_oracle(p.p), to_pts(y));
  CHECK(kl_cost(p, y) == doctest::Approx(expected).epsilon(1e-8));
  CHECK(reference::kl_cost(p, y) == doctest::Approx(expected).epsilon(1e-8));

  auto scaled = y;
  for (auto& q : scaled) q = {q.x * 7, q.y * 7};
  CHECK(kl_cost(p, scaled) != doctest::Approx(kl_cost(p, y)));
  CHECK(kl_cost(p, scaled) >= 0.0);
}

TEST_CASE("tsne_gradient: zero for two points, sums to zero, matches finite differences") {
  AffinityMatrix two{SquareMatrix(2), {1, 1}};
  two.p(0, 1) = two.p(1, 0) = 0.5;
  for (auto g : tsne_gradient(two, random_points(2, 9))) {
    CHECK(std::abs(g.x) < 1e-15);
    CHECK(std::abs(g.y) < 1e-15);
  }

  const auto x = oracle::random_matrix(20, 8, 31);
  const auto p = joint_affinities(x, 5.0);
  const auto y = random_points(20, 32);
  const auto g = tsne_gradient(p, y);
  const auto fd = oracle::kl_fd_gradient(to_oracle(p.p), to_pts(y), 1e-5);
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sx += g[i].x;
    sy += g[i].y;
    CHECK(std::abs(g[i].x - fd[i].x) <= 1e-4 * std::max(std::abs(fd[i].x), 1e-6));
    CHECK(std::abs(g[i].y - fd[i].y) <= 1e-4 * std::max(std::abs(fd[i].y), 1e-6));
  }
  CHECK(std::abs(sx) < 1e-8);
  CHECK(std::abs(sy) < 1e-8);
}

TEST_CASE("tsne_gradient is mirror-equivariant") {
  // Points symmetric under x -> -x with a P that respects the mirror pairing.
  std::vector<std::vector<float>> rows = {{-1, 0}, {1, 0}, {-2, 1}, {2, 1}, {-0.5f, 3}, {0.5f, 3}};
  const auto p = joint_affinities(rows2(rows), 2.5);
  std::vector<Point2> y = {{-1, 0.2}, {1, 0.2}, {-1.5, 1}, {1.5, 1}, {-0.3, 2}, {0.3, 2}};
  const auto g = tsne_gradient(p, y);
  for (std::size_t i = 0; i < 6; i += 2) {
    CHECK(g[i].x == doctest::Approx(-g[i + 1].x).epsilon(1e-12));
    CHECK(g[i].y == doctest::Approx(g[i + 1].y).epsilon(1e-12));
  }
}

TEST_CASE("parallel kernels agree with the serial reference") {
  const auto x = oracle::random_matrix(64, 12, 41);
  const auto d = pairwise_sq_dists(x);
  const auto dr = reference::pairwise_sq_dists(x);
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) CHECK(d(i, j) == doctest::Approx(dr(i, j)).epsilon(1e-12));

  const auto p = joint_affinities(x, 10.0);
  const auto y = random_points(64, 42, 3.0);
  const auto g = tsne_gradient(p, y, 12.0);
  const auto gr = reference::tsne_gradient(p, y, 12.0);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(g[i].x == doctest::Approx(gr[i].x).epsilon(1e-9).scale(1e-12));
    CHECK(g[i].y == doctest::Approx(gr[i].y).epsilon(1e-9).scale(1e-12));
  }
}
