// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "evomon/common/error.hpp"
#include "evomon/metrics/fid.hpp"
#include "evomon/metrics/neighborhood.hpp"
#include "evomon/metrics/series.hpp"
#include "oracles.hpp"

using namespace evomon;
using namespace evomon::metrics;

namespace {

FeatureMatrix column(std::vector<float> values, const std::string& prefix = "r") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < values.size(); ++i) ids.push_back(prefix + std::to_string(i));
  return FeatureMatrix(ids, 1, values);
}

embedding::BandLayout band_of(const std::vector<oracle::Pt>& pts) {
  embedding::BandLayout b;
  for (std::size_t i = 0; i < pts.size(); ++i) b.points.push_back({oracle::id_of(i), pts[i].x, pts[i].y});
  return b;
}

std::unordered_map<std::string, std::string> label_map(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, std::string> m;
  for (std::size_t i = 0; i < labels.size(); ++i) m[oracle::id_of(i)] = labels[i];
  return m;
}

}  // namespace

TEST_CASE("gaussian_moments: closed forms and two-pass oracle") {
  FeatureMatrix two({"a", "b"}, 2, {0, 0, 2, 0});
  const auto m = gaussian_moments(two);
  CHECK(m.mu(0) == 1.0);
  CHECK(m.mu(1) == 0.0);
  CHECK(m.sigma(0, 0) == 2.0);
  CHECK(m.sigma(0, 1) == 0.0);
  CHECK(m.sigma(1, 1) == 0.0);

  FeatureMatrix constant({"a", "b", "c"}, 2, {1, 2, 1, 2, 1, 2});
  CHECK(gaussian_moments(constant).sigma.norm() == 0.0);

  const auto x = oracle::random_matrix(100, 5, 8);
  const auto rows = oracle::rows_of(x);
  const auto mom = gaussian_moments(x);
  std::vector<double> mu(5, 0.0);
  for (auto& r : rows)
    for (int k = 0; k < 5; ++k) mu[k] += r[k] / 100.0;
  for (int a = 0; a < 5; ++a) {
    CHECK(mom.mu(a) == doctest::Approx(mu[a]).epsilon(1e-9));
    for (int b = 0; b < 5; ++b) {
      double s = 0;
      for (auto& r : rows) s += (r[a] - mu[a]) * (r[b] - mu[b]);
      CHECK(std::abs(mom.sigma(a, b) - s / 99.0) < 1e-9);
      CHECK(mom.sigma(a, b) == mom.sigma(b, a));
    }
  }
  CHECK_THROWS_WITH_AS(gaussian_moments(column({1})), doctest::Contains("insufficient samples"), ValidationError);
}

TEST_CASE("matrix_sqrt_psd") {
  CHECK((matrix_sqrt_psd(Eigen::MatrixXd::Identity(4, 4)) - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  Eigen::MatrixXd d = Eigen::Vector2d(4, 9).asDiagonal();
  Eigen::MatrixXd expect = Eigen::Vector2d(2, 3).asDiagonal();
  CHECK((matrix_sqrt_psd(d) - expect).norm() < 1e-12);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd b(6, 6);
    for (int i = 0; i < 36; ++i) b.data()[i] = rng.normal();
    const Eigen::MatrixXd a = b.transpose() * b;
    const Eigen::MatrixXd r = matrix_sqrt_psd(a);
    CHECK((r * r - a).norm() <= 1e-6 * (1 + a.norm()));
    CHECK((r - r.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }

  // Rank-deficient input: tiny negative eigenvalues are clamped.
  Eigen::MatrixXd v(3, 1);
  v << 1, 2, 3;
  const Eigen::MatrixXd rank1 = v * v.transpose();
  const Eigen::MatrixXd r = matrix_sqrt_psd(rank1);
  CHECK((r * r - rank1).norm() <= 1e-6 * (1 + rank1.norm()));
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(matrix_sqrt_psd(bad), NumericalError);
}

TEST_CASE("fid: closed-form fixtures") {
  const auto a = column({-1, 0, 1});
  CHECK(fid(a, a) <= 1e-9);
  CHECK(std::abs(fid(a, column({2, 3, 4})) - 9.0) <= 1e-6);
  CHECK(std::abs(fid(column({-2, 0, 2}), a) - 1.0) <= 1e-6);

  FeatureMatrix d2({"a", "b"}, 2, {0, 0, 1, 1});
  FeatureMatrix d1({"a", "b"}, 1, {0, 1});
  CHECK_THROWS_AS(fid(d2, d1), ValidationError);
}

TEST_CASE("fid: sampled 5-D Gaussians approach the closed form") {
  const oracle::Fid5 fx;
  const double closed = fx.closed_form();
  const auto real = fx.real();
  const auto gen = fx.gen();
  const double f = fid(real, gen);
  CHECK(std::abs(f - closed) <= 0.05 * closed);
  CHECK(std::abs(fid(gen, real) - f) <= 1e-6);
}

TEST_CASE("fid: singular covariances are regularised and recorded") {
  // Rank-deficient: 3 samples in 5 dimensions.
  const auto a = oracle::random_matrix(3, 5, 4);
  const auto b = oracle::random_matrix(3, 5, 5);
  const auto r = fid_detailed(a, b);
  CHECK(r.value >= 0.0);
  CHECK(r.epsilon_real > 0.0);
  CHECK(r.epsilon_gen > 0.0);
  CHECK(std::abs(fid(a, b) - fid(b, a)) <= 1e-6);
  CHECK(fid(a, a) <= 1e-9);

  const auto full = fid_detailed(column({-1, 0, 1}), column({2, 3, 4}));
  CHECK(full.epsilon_real == 0.0);
}

TEST_CASE("neighborhood_overlap") {
  // Real: two groups far apart in 2-D.
  std::vector<std::string> ids, groups;
  std::vector<float> data;
  for (int i = 0; i < 10; ++i) {
    ids.push_back("r" + std::to_string(i));
    groups.push_back(i < 5 ? "grey" : "black");
    data.push_back(float(i < 5 ? 0 : 100) + float(i % 5) * 0.1f);
    data.push_back(float(i % 5) * 0.1f);
  }
  FeatureMatrix real(ids, 2, data);

  FeatureMatrix copies({"g0", "g1"}, 2, {0.1f, 0.1f, 0.2f, 0.2f});
  CHECK(neighborhood_overlap(real, groups, copies, "grey", 1) == 1.0);

  FeatureMatrix drifted({"g0", "g1"}, 2, {99, 0, 101, 0.3f});
  CHECK(neighborhood_overlap(real, groups, drifted, "grey", 3) == 0.0);

  CHECK_THROWS_AS(neighborhood_overlap(real, groups, copies, "grey", 11), ValidationError);
  CHECK_THROWS_AS(neighborhood_overlap(real, groups, FeatureMatrix({}, 2, {}), "grey", 1), ValidationError);
}

TEST_CASE("neighborhood_overlap is invariant under joint rotation") {
  const auto real = oracle::random_matrix(60, 4, 12);
  const auto gen = oracle::random_matrix(20, 4, 13);
  std::vector<std::string> groups;
  for (int i = 0; i < 60; ++i) groups.push_back(i % 3 == 0 ? "a" : "b");

  // Rotation by 0.7 rad in the (0,2) plane and 1.1 rad in (1,3).
  auto rotate = [](const FeatureMatrix& m) {
    std::vector<float> d(m.data().begin(), m.data().end());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      float* r = d.data() + i * 4;
      const double a = r[0], c = r[2], b = r[1], e = r[3];
      r[0] = float(std::cos(0.7) * a - std::sin(0.7) * c);
      r[2] = float(std::sin(0.7) * a + std::cos(0.7) * c);
      r[1] = float(std::cos(1.1) * b - std::sin(1.1) * e);
      r[3] = float(std::sin(1.1) * b + std::cos(1.1) * e);
    }
    return FeatureMatrix(m.instance_ids(), 4, d);
  };
  const double before = neighborhood_overlap(real, groups, gen, "a", 7);
  const double after = neighborhood_overlap(rotate(real), groups, rotate(gen), "a", 7);
  CHECK(before == doctest::Approx(after).epsilon(1e-12));
  CHECK(before >= 0.0);
  CHECK(before <= 1.0);
}

TEST_CASE("cluster_separation") {
  std::vector<oracle::Pt> same(6, {0.5, 1.0});
  std::vector<std::string> half = {"a", "a", "a", "b", "b", "b"};
  CHECK(cluster_separation(band_of(same), label_map(half)) == doctest::Approx(0.0));

  Rng rng(4);
  std::vector<oracle::Pt> tight;
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) {
    const bool b = i % 2;
    tight.push_back({0.01 * rng.normal(), (b ? 50.0 : 0.0) + 0.01 * rng.normal()});
    labels.push_back(b ? "b" : "a");
  }
  const double s = cluster_separation(band_of(tight), label_map(labels));
  CHECK(s > 0.9);
  CHECK(s == doctest::Approx(oracle::silhouette(tight, labels)).epsilon(1e-12));

  auto shuffled = labels;
  std::rotate(shuffled.begin(), shuffled.begin() + 1, shuffled.end());
  std::swap(shuffled[3], shuffled[10]);
  CHECK(cluster_separation(band_of(tight), label_map(shuffled)) < s);

  auto moved = tight;
  for (auto& p : moved) p = {3.0 * p.x + 7.5, 3.0 * p.y - 2.0};
  CHECK(cluster_separation(band_of(moved), label_map(labels)) == doctest::Approx(s).epsilon(1e-12));

  std::vector<std::string> one(40, "a");
  CHECK_THROWS_WITH_AS(cluster_separation(band_of(tight), label_map(one)), doctest::Contains("separation undefined"),
                       ValidationError);

  // Singleton group members contribute 0.
  std::vector<std::string> singleton = labels;
  singleton[0] = "c";
  const auto values = silhouette_values(band_of(tight), label_map(singleton));
  CHECK(values[0] == 0.0);
}

TEST_CASE("build_metric_series: shape, losses, null cells") {
  // 2 groups x (real, generated) x 6 rows each, 3 snapshots.
  std::vector<SnapshotMetricsInput> inputs;
  std::vector<FeatureMatrix> feats;
  std::vector<std::vector<std::string>> origins(3), groups(3);
  std::vector<embedding::BandLayout> bands(3);
  for (int t = 0; t < 3; ++t) {
    std::vector<std::string> ids;
    std::vector<float> data;
    Rng rng(100 + t);
    for (int i = 0; i < 24; ++i) {
      ids.push_back(oracle::id_of(i));
      origins[t].push_back(i % 2 ? "generated" : "real");
      groups[t].push_back(i < 12 ? "g1" : "g2");
      data.push_back(float((i < 12 ? 0 : 10) + rng.normal()));
      data.push_back(float(rng.normal()));
      bands[t].points.push_back({ids.back(), 0.1 * rng.normal(), data[data.size() - 2]});
    }
    feats.emplace_back(ids, 2, data);
  }
  for (int t = 0; t < 3; ++t) {
    SnapshotMetricsInput in;
    in.training_iteration = 5000 * t;
    in.features = &feats[t];
    in.origins = origins[t];
    in.groups = groups[t];
    in.losses = {{"loss_g", 1.0 / (t + 1)}, {"loss_d", 0.5}};
    in.band = &bands[t];
    inputs.push_back(in);
  }
  SeriesOptions opts;
  opts.overlap_k = 5;
  const auto series = build_metric_series(inputs, opts);
  REQUIRE(series.entries.size() == 3);
  std::size_t cells = 0;
  for (const auto& e : series.entries) {
    cells += e.groups.size();
    for (const auto& [g, c] : e.groups) {
      CHECK(c.fid.has_value());
      CHECK(*c.overlap >= 0.0);
      CHECK(*c.overlap <= 1.0);
      CHECK(*c.separation >= -1.0);
      CHECK(*c.separation <= 1.0);
    }
  }
  CHECK(cells == 6);
  CHECK(series.entries[1].losses.at("loss_g") == 0.5);
  CHECK(metrics_from_json(metrics_to_json(series)) == series);

  const auto csv = metrics_to_csv(series);
  CHECK(csv.rfind("snapshot_index,training_iteration,group,fid,overlap,separation\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

  // Snapshot with only real rows: entry present, fid and overlap null, losses intact.
  std::vector<std::string> all_real(24, "real");
  SnapshotMetricsInput only_real = inputs[0];
  only_real.origins = all_real;
  const auto entry = compute_metric_entry(only_real, 0, opts);
  for (const auto& [g, c] : entry.groups) {
    CHECK_FALSE(c.fid.has_value());
    CHECK_FALSE(c.overlap.has_value());
    CHECK(c.flags.front() == "no_generated_samples");
  }
  CHECK(entry.losses.size() == 2);
  CHECK(metrics_to_csv(MetricSeries{{entry}}).find("g1,,,") != std::string::npos);

  std::vector<SnapshotMetricsInput> backwards = {inputs[1], inputs[0]};
  CHECK_THROWS_AS(build_metric_series(backwards, opts), ValidationError);
}
