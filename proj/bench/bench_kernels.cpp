// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//
// OpenMP kernels against the serial reference. Arg is the point count.

#include <map>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "evomon/embedding/kernels.hpp"

namespace {

using namespace evomon;
using namespace evomon::embedding;

constexpr std::size_t kDims = 512;

FeatureMatrix random_features(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> normal;
  std::vector<std::string> ids(n);
  std::vector<float> data(n * d);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "p" + std::to_string(i);
  for (auto& v : data) v = normal(rng);
  return {ids, d, data, "bench"};
}

std::vector<Point2> random_layout(std::size_t n) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<Point2> y(n);
  for (auto& p : y) p = {0.3 * normal(rng), 5.0 * normal(rng)};
  return y;
}

struct Fixture {
  FeatureMatrix x;
  AffinityMatrix p;
  std::vector<Point2> y;

  explicit Fixture(std::size_t n)
      : x(random_features(n, kDims)), p(joint_affinities(x, 30.0)), y(random_layout(n)) {}
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

void BM_SqDists(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_sq_dists(f.x));
}

void BM_SqDistsReference(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::pairwise_sq_dists(f.x));
}

void BM_Gradient(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tsne_gradient(f.p, f.y));
}

void BM_GradientReference(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::tsne_gradient(f.p, f.y));
}

void BM_KlCost(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kl_cost(f.p, f.y));
}

void BM_KlCostReference(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::kl_cost(f.p, f.y));
}

#define EVOMON_SIZES ->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond)

BENCHMARK(BM_SqDists) EVOMON_SIZES;
BENCHMARK(BM_SqDistsReference) EVOMON_SIZES;
BENCHMARK(BM_Gradient) EVOMON_SIZES;
BENCHMARK(BM_GradientReference) EVOMON_SIZES;
BENCHMARK(BM_KlCost) EVOMON_SIZES;
BENCHMARK(BM_KlCostReference) EVOMON_SIZES;

}  // namespace

BENCHMARK_MAIN();
