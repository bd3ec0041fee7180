#include "aane/cluster.hpp"
#include "aane/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

using namespace aane;
using cluster::Method;

namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

double inertia_of(const Matrix& points, std::span<const int> labels, int k) {
  Matrix centers = Matrix::Zero(k, points.cols());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)]) centers.row(c) /= counts[static_cast<std::size_t>(c)];
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sum += (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return sum;
}

// Same partition up to a relabelling.
bool same_partition(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

Matrix blobs(Rng& rng, int per, const std::vector<Eigen::RowVector2d>& centers, double sd) {
  Matrix x(per * static_cast<int>(centers.size()), 2);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int i = 0; i < per; ++i) {
      const auto r = static_cast<Eigen::Index>(c) * per + i;
      x(r, 0) = centers[c](0) + sd * rng.normal();
      x(r, 1) = centers[c](1) + sd * rng.normal();
    }
  }
  return x;
}

}  // namespace

TEST_CASE("canonical labels follow descending size, then first appearance") {
  const std::vector<int> labels{2, 0, 0, 1, 1, 2, 2};
  std::vector<int> mapping;
  const auto out = cluster::canonicalize_labels(labels, 3, &mapping);
  CHECK(out == std::vector<int>{0, 1, 1, 2, 2, 0, 0});
  CHECK(mapping == std::vector<int>{1, 2, 0});

  // Equal sizes: the cluster holding index 0 comes first.
  CHECK(cluster::canonicalize_labels(std::vector<int>{1, 1, 0, 0}, 2) == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("canonicalization is idempotent and preserves the partition") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(5));
    const auto labels = testing::random_labels(rng, 30, k);
    const auto once = cluster::canonicalize_labels(labels, k);
    CHECK(same_partition(labels, once));
    CHECK(cluster::canonicalize_labels(once, k) == once);
  }
}

TEST_CASE("k-means splits {0, 1, 10, 11} into the optimal pair of clusters") {
  const Matrix x = column({0, 1, 10, 11});
  const auto result = cluster::kmeans(x, 2, 1);
  CHECK(result.assignment.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(result.centers(0, 0) == doctest::Approx(0.5));
  CHECK(result.centers(1, 0) == doctest::Approx(10.5));

  // Exhaustive search over the 2-partitions agrees on the optimum.
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < 15; ++mask) {
    std::vector<int> labels(4);
    for (int i = 0; i < 4; ++i) labels[static_cast<std::size_t>(i)] = (mask >> i) & 1;
    best = std::min(best, inertia_of(x, labels, 2));
  }
  CHECK(result.inertia_history.back() == doctest::Approx(best));
  CHECK(best == doctest::Approx(1.0));
}

TEST_CASE("k-means with one cluster per point has zero inertia") {
  Rng rng(8);
  const Matrix x = testing::random_matrix(rng, 7, 3);
  const auto result = cluster::kmeans(x, 7, 2);
  CHECK(result.inertia_history.back() == 0.0);
  auto sorted = result.assignment.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("duplicating every point leaves the k-means centers unchanged") {
  Rng rng(12);
  const Matrix x = blobs(rng, 15, {{0, 0}, {6, 0}, {0, 6}}, 0.5);
  Matrix doubled(2 * x.rows(), x.cols());
  doubled << x, x;
  const auto a = cluster::kmeans(x, 3, 4);
  const auto b = cluster::kmeans(doubled, 3, 4);
  CHECK((a.centers - b.centers).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("k-means inertia never increases and the final labels are a fixed point") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_matrix(rng, 40, 3);
    const int k = 2 + trial % 4;
    const auto result = cluster::kmeans(x, k, static_cast<std::uint64_t>(trial));
    const auto& h = result.inertia_history;
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] * (1 + 1e-12) + 1e-12);

    // Each point sits with its nearest center and each center is its cluster's mean.
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int own = result.assignment.labels[static_cast<std::size_t>(i)];
      const double d_own = (x.row(i) - result.centers.row(own)).squaredNorm();
      for (int c = 0; c < k; ++c) CHECK(d_own <= (x.row(i) - result.centers.row(c)).squaredNorm() + 1e-12);
    }
    CHECK(inertia_of(x, result.assignment.labels, k) == doctest::Approx(h.back()).epsilon(1e-10));
    CHECK(result.assignment.score == doctest::Approx(h.back()));
  }
}

TEST_CASE("k-means partitions are invariant under rotation and translation") {
  Rng rng(30);
  const Matrix x = blobs(rng, 20, {{0, 0}, {5, 1}, {2, 7}}, 0.6);
  const double angle = 0.7;
  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Matrix moved = (x * rot.transpose()).rowwise() + Eigen::RowVector2d(3, -2);
  const auto a = cluster::kmeans(x, 3, 9);
  const auto b = cluster::kmeans(moved, 3, 9);
  CHECK(same_partition(a.assignment.labels, b.assignment.labels));
}

TEST_CASE("k-means is deterministic and backend independent") {
  Rng rng(33);
  const Matrix x = testing::random_matrix(rng, 120, 4);
  const auto a = cluster::kmeans(x, 4, 77, {}, kernels::Backend::Serial);
  const auto b = cluster::kmeans(x, 4, 77, {}, kernels::Backend::OpenMP);
  const auto c = cluster::kmeans(x, 4, 77, {}, kernels::Backend::OpenMP);
  CHECK(a.assignment.labels == b.assignment.labels);
  CHECK(b.assignment.labels == c.assignment.labels);
  CHECK(a.centers == b.centers);
  CHECK(a.inertia_history == b.inertia_history);
}

TEST_CASE("k-means rejects more clusters than points") {
  const Matrix x = column({1, 2, 3});
  try {
    cluster::kmeans(x, 4, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooManyClusters);
  }
  CHECK_THROWS_AS(cluster::kmeans(x, 0, 0), Error);
}

TEST_CASE("GMM recovers two separated point masses") {
  Matrix x(100, 1);
  for (Eigen::Index i = 0; i < 100; ++i) x(i, 0) = i < 50 ? 0.0 : 10.0;
  const auto result = cluster::gmm_fit(x, 2, 5);
  std::vector<double> means{result.model.means(0, 0), result.model.means(1, 0)};
  std::sort(means.begin(), means.end());
  CHECK(std::abs(means[0] - 0.0) < 0.1);
  CHECK(std::abs(means[1] - 10.0) < 0.1);
  CHECK(std::abs(result.model.weights(0) - 0.5) < 0.05);
  CHECK(std::abs(result.model.weights(1) - 0.5) < 0.05);
}

TEST_CASE("GMM with one component is the regularized sample moments") {
  Rng rng(40);
  const Matrix x = testing::random_matrix(rng, 60, 3);
  const auto result = cluster::gmm_fit(x, 1, 1);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  Matrix cov = centered.transpose() * centered / 60.0;
  cov.diagonal().array() += cluster::kCovarianceRegularization * cov.trace() / 3.0;
  CHECK((result.model.means.row(0) - mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((result.model.covariances[0] - cov).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(result.model.weights(0) == doctest::Approx(1.0));
}

TEST_CASE("GMM weights sum to one and the log-likelihood does not decrease") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = blobs(rng, 25, {{0, 0}, {4, 0}, {0, 4}}, 1.0);
    for (auto type : {cluster::CovarianceType::Full, cluster::CovarianceType::Diagonal}) {
      cluster::GmmOptions opts;
      opts.covariance = type;
      const auto result = cluster::gmm_fit(x, 3, static_cast<std::uint64_t>(trial), opts);
      CHECK(result.model.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((result.model.weights.array() > 0).all());
      const auto& h = result.log_likelihood_history;
      for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] >= h[i - 1] - 1e-8);
      if (type == cluster::CovarianceType::Diagonal) {
        for (const auto& c : result.model.covariances) {
          CHECK(std::abs(c(0, 1)) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("GMM is deterministic and backend independent") {
  Rng rng(42);
  const Matrix x = blobs(rng, 30, {{0, 0}, {5, 5}}, 1.0);
  const auto a = cluster::gmm_fit(x, 2, 3, {}, kernels::Backend::Serial);
  const auto b = cluster::gmm_fit(x, 2, 3, {}, kernels::Backend::OpenMP);
  CHECK(a.assignment.labels == b.assignment.labels);
  CHECK(a.log_likelihood_history == b.log_likelihood_history);
}

TEST_CASE("GMM rejects data without any spread") {
  const Matrix x = Matrix::Ones(10, 2);
  CHECK_THROWS_AS(cluster::gmm_fit(x, 2, 0), Error);
}

TEST_CASE("method names round trip") {
  CHECK(cluster::parse_method(cluster::to_string(Method::KMeans)) == Method::KMeans);
  CHECK(cluster::parse_method(cluster::to_string(Method::Gmm)) == Method::Gmm);
  try {
    cluster::parse_method("dbscan");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
  }
}

TEST_CASE("assignment files round trip") {
  testing::TempDir dir("assign");
  Rng rng(50);
  const auto ids = testing::make_ids(12);
  std::vector<cluster::ClusterAssignment> all;
  for (auto method : {Method::Gmm, Method::KMeans}) {
    for (int k : {3, 2}) {
      for (int t : {1, 0}) {
        cluster::ClusterAssignment a;
        a.timestep = t;
        a.k = k;
        a.method = method;
        a.labels = testing::random_labels(rng, ids.size(), k);
        all.push_back(a);
      }
    }
  }
  cluster::write_assignments(all, ids, dir.path / "a.csv");
  const auto back = cluster::read_assignments(dir.path / "a.csv");
  CHECK(back.node_ids == ids);
  REQUIRE(back.assignments.size() == all.size());
  for (std::size_t i = 1; i < back.assignments.size(); ++i) {
    const auto& p = back.assignments[i - 1];
    const auto& q = back.assignments[i];
    CHECK(std::tuple(static_cast<int>(p.method), p.k, p.timestep) <
          std::tuple(static_cast<int>(q.method), q.k, q.timestep));
  }
  for (const auto& original : all) {
    const auto it = std::find_if(back.assignments.begin(), back.assignments.end(), [&](const auto& b) {
      return b.method == original.method && b.k == original.k && b.timestep == original.timestep;
    });
    REQUIRE(it != back.assignments.end());
    CHECK(it->labels == original.labels);
  }
}

TEST_CASE("fit dispatches on the method") {
  Rng rng(60);
  const Matrix x = blobs(rng, 20, {{0, 0}, {8, 8}}, 0.5);
  const auto km = cluster::fit(x, 2, Method::KMeans, 1);
  const auto gm = cluster::fit(x, 2, Method::Gmm, 1);
  CHECK(km.method == Method::KMeans);
  CHECK(gm.method == Method::Gmm);
  CHECK(same_partition(km.labels, gm.labels));
}
