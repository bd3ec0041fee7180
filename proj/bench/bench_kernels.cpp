// Serial reference path against the OpenMP path for the hot kernels.
#include "aane/cluster.hpp"
#include "aane/embed.hpp"
#include "aane/graph.hpp"
#include "aane/kernels.hpp"
#include "aane/rng.hpp"
#include "aane/validate.hpp"

#include <benchmark/benchmark.h>

#include <fmt/format.h>

using namespace aane;
using kernels::Backend;

namespace {

Matrix random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  }
  return m;
}

graph::AttributedNetwork random_network(std::size_t n, double p) {
  Rng rng(1);
  AttributeTable table;
  table.values = random_points(static_cast<Eigen::Index>(n), 15, 2);
  for (std::size_t i = 0; i < n; ++i) table.node_ids.push_back(fmt::format("v{}", i));
  for (int c = 0; c < 15; ++c) table.columns.push_back(fmt::format("f{}", c));
  std::vector<graph::EdgeRecord> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.push_back({table.node_ids[i], table.node_ids[j], 1.0 + static_cast<double>(rng.below(10))});
    }
  }
  return graph::build_network(edges, std::move(table));
}

Backend backend_of(const benchmark::State& state) {
  return state.range(1) ? Backend::OpenMP : Backend::Serial;
}

void set_label(benchmark::State& state) { state.SetLabel(state.range(1) ? "openmp" : "serial"); }

void BM_CosineSimilarity(benchmark::State& state) {
  const Matrix x = random_points(state.range(0), 15, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cosine_similarity(x, backend_of(state)));
  set_label(state);
}

void BM_PairwiseDistances(benchmark::State& state) {
  const Matrix x = random_points(state.range(0), 16, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_distances(x, backend_of(state)));
  set_label(state);
}

void BM_Silhouette(benchmark::State& state) {
  const Matrix x = random_points(state.range(0), 16, 5);
  std::vector<int> labels(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4);
  for (auto _ : state) benchmark::DoNotOptimize(validate::silhouette(x, labels, backend_of(state)));
  set_label(state);
}

void BM_KMeans(benchmark::State& state) {
  const Matrix x = random_points(state.range(0), 16, 6);
  for (auto _ : state) benchmark::DoNotOptimize(cluster::kmeans(x, 4, 1, {}, backend_of(state)));
  set_label(state);
}

void BM_Gmm(benchmark::State& state) {
  const Matrix x = random_points(state.range(0), 8, 7);
  for (auto _ : state) benchmark::DoNotOptimize(cluster::gmm_fit(x, 4, 1, {}, backend_of(state)));
  set_label(state);
}

void BM_Embed(benchmark::State& state) {
  const auto network = random_network(static_cast<std::size_t>(state.range(0)), 0.05);
  embed::SolverConfig config;
  config.dimension = 16;
  for (auto _ : state) benchmark::DoNotOptimize(embed::embed(network, config, backend_of(state)));
  set_label(state);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {200, 800}) {
    for (int omp : {0, 1}) b->Args({n, omp});
  }
}

}  // namespace

BENCHMARK(BM_CosineSimilarity)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairwiseDistances)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Silhouette)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeans)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gmm)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Embed)->Apply(sizes)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
