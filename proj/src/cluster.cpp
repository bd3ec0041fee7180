#include "aane/cluster.hpp"

#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "aane/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

namespace aane::cluster {

std::string_view to_string(Method method) noexcept {
  return method == Method::KMeans ? "kmeans" : "gmm";
}

Method parse_method(std::string_view name) {
  if (name == "kmeans") return Method::KMeans;
  if (name == "gmm") return Method::Gmm;
  throw Error(ErrorKind::ConfigError, fmt::format("unknown clustering method '{}'", name));
}

std::vector<int> canonicalize_labels(std::span<const int> labels, int k,
                                     std::vector<int>* mapping) {
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  std::vector<std::size_t> first(static_cast<std::size_t>(k), std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++size[c];
    first[c] = std::min(first[c], i);
  }
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    return std::tie(size[ub], first[ua]) < std::tie(size[ua], first[ub]);
  });
  std::vector<int> map(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) map[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = map[static_cast<std::size_t>(labels[i])];
  if (mapping) *mapping = std::move(map);
  return out;
}

namespace {

void check_k(const Matrix& points, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "cluster count must be >= 1");
  if (k > points.rows()) {
    throw Error(ErrorKind::TooManyClusters,
                fmt::format("{} clusters requested for {} points", k, points.rows()));
  }
}

Matrix seed_centers(const Matrix& points, int k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::size_t> chosen{rng.below(n)};
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = (points.row(static_cast<Eigen::Index>(i)) -
             points.row(static_cast<Eigen::Index>(chosen[0]))).squaredNorm();
  }
  while (chosen.size() < static_cast<std::size_t>(k)) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      // D^2 sampling: far points are proportionally more likely.
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // Every remaining point coincides with a center; take the first unused index.
      while (std::find(chosen.begin(), chosen.end(), pick) != chosen.end()) ++pick;
    }
    chosen.push_back(pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) -
                               points.row(static_cast<Eigen::Index>(pick))).squaredNorm());
    }
  }
  Matrix centers(k, points.cols());
  for (int c = 0; c < k; ++c) {
    centers.row(c) = points.row(static_cast<Eigen::Index>(chosen[static_cast<std::size_t>(c)]));
  }
  return centers;
}

struct LloydRun {
  std::vector<int> labels;
  Matrix centers;
  std::vector<double> history;
  int iterations = 0;
};

LloydRun lloyd(const Matrix& points, Matrix centers, int max_iter, kernels::Backend backend) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto k = static_cast<std::size_t>(centers.rows());
  LloydRun run;
  std::vector<int> labels(n, -1), previous;
  std::vector<double> sq(n);
  for (int it = 0; it < max_iter; ++it) {
    kernels::nearest_centers(points, centers, labels, sq, backend);
    run.history.push_back(std::accumulate(sq.begin(), sq.end(), 0.0));
    run.iterations = it + 1;
    if (labels == previous) break;  // assignment is a fixed point
    previous = labels;

    std::vector<std::size_t> counts(k, 0);
    centers.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      centers.row(static_cast<Eigen::Index>(c)) += points.row(static_cast<Eigen::Index>(i));
      ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: reseed with the point farthest from its own centroid.
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[i])] > 1 && sq[i] > far_d) {
          far_d = sq[i];
          far = i;
        }
      }
      if (far == n) continue;
      --counts[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c);
      counts[c] = 1;
      sq[far] = 0.0;
      centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
      previous.clear();  // force another assignment pass
    }
  }
  run.labels = std::move(labels);
  run.centers = std::move(centers);
  return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options,
                    kernels::Backend backend) {
  check_k(points, k);
  if (options.n_init < 1 || options.max_iter < 1) {
    throw Error(ErrorKind::ConfigError, "k-means needs n_init >= 1 and max_iter >= 1");
  }
  Rng rng(seed);
  LloydRun best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.n_init; ++r) {
    LloydRun run = lloyd(points, seed_centers(points, k, rng), options.max_iter, backend);
    if (run.history.back() < best_inertia) {
      best_inertia = run.history.back();
      best = std::move(run);
    }
  }

  std::vector<int> mapping;
  KMeansResult result;
  result.assignment.labels = canonicalize_labels(best.labels, k, &mapping);
  result.assignment.k = k;
  result.assignment.method = Method::KMeans;
  result.assignment.score = best_inertia;
  result.centers.resize(k, points.cols());
  for (int c = 0; c < k; ++c) {
    result.centers.row(mapping[static_cast<std::size_t>(c)]) = best.centers.row(c);
  }
  result.inertia_history = std::move(best.history);
  result.iterations = best.iterations;
  return result;
}

namespace {

constexpr double kCollapsedShare = 1e-6;

// A component collapsed onto a single point has (numerically) zero trace; its
// floor is then tied to the scale of the whole data set.
Matrix covariance_of(const Matrix& points, const Eigen::VectorXd& resp, double weight_sum,
                     const Eigen::RowVectorXd& mean, CovarianceType type, double data_trace) {
  const Matrix centered = points.rowwise() - mean;
  Matrix cov = centered.transpose() * resp.asDiagonal() * centered;
  cov /= weight_sum;
  if (type == CovarianceType::Diagonal) cov = Matrix(cov.diagonal().asDiagonal());
  const auto d = static_cast<double>(points.cols());
  const double scale = std::max(cov.trace(), kCollapsedShare * data_trace);
  cov.diagonal().array() += kCovarianceRegularization * scale / d;
  return cov;
}

double data_trace(const Matrix& points) {
  const Matrix centered = points.rowwise() - points.colwise().mean();
  return centered.squaredNorm() / static_cast<double>(points.rows());
}

void m_step(const Matrix& points, const Matrix& resp, CovarianceType type, double trace,
            GmmModel& model, std::vector<Matrix>& factors) {
  const auto n = static_cast<double>(points.rows());
  const auto k = resp.cols();
  model.means.resize(k, points.cols());
  model.weights.resize(k);
  model.covariances.resize(static_cast<std::size_t>(k));
  factors.resize(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::VectorXd r = resp.col(c);
    const double nk = r.sum() + 10.0 * std::numeric_limits<double>::epsilon();
    model.weights(c) = nk / n;
    model.means.row(c) = (r.transpose() * points) / nk;
    auto& cov = model.covariances[static_cast<std::size_t>(c)];
    cov = covariance_of(points, r, nk, model.means.row(c), type, trace);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success || !(cov.trace() > 0.0)) {
      throw Error(ErrorKind::SingularCovariance,
                  fmt::format("component {} covariance is singular after regularization", c));
    }
    factors[static_cast<std::size_t>(c)] = llt.matrixL();
  }
  model.weights /= model.weights.sum();
}

}  // namespace

GmmResult gmm_fit(const Matrix& points, int k, std::uint64_t seed, const GmmOptions& options,
                  kernels::Backend backend) {
  check_k(points, k);
  if (points.cols() < 1) throw Error(ErrorKind::InvalidArgument, "points need >= 1 dimension");
  const auto n = points.rows();

  const auto init = kmeans(points, k, seed, {}, backend);
  Matrix resp = Matrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, init.assignment.labels[static_cast<std::size_t>(i)]) = 1.0;

  GmmResult result;
  std::vector<Matrix> factors;
  const double trace = data_trace(points);
  if (!(trace > 0.0)) {
    throw Error(ErrorKind::SingularCovariance, "points have zero variance; no mixture can be fitted");
  }
  m_step(points, resp, options.covariance, trace, result.model, factors);

  for (int it = 0; it < options.max_iter; ++it) {
    Matrix log_prob = kernels::gaussian_log_densities(points, result.model.means, factors, backend);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < k; ++c) log_prob(i, c) += std::log(result.model.weights(c));
      const double top = log_prob.row(i).maxCoeff();
      const double lse = top + std::log((log_prob.row(i).array() - top).exp().sum());
      resp.row(i) = (log_prob.row(i).array() - lse).exp();
      ll += lse;
    }
    result.iterations = it + 1;
    const bool done = !result.log_likelihood_history.empty() &&
                      std::abs(ll - result.log_likelihood_history.back()) <
                          options.tol * static_cast<double>(n);
    result.log_likelihood_history.push_back(ll);
    if (done) {
      result.converged = true;
      break;
    }
    if (it + 1 == options.max_iter) break;  // keep parameters consistent with resp
    m_step(points, resp, options.covariance, trace, result.model, factors);
  }

  std::vector<int> hard(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    resp.row(i).maxCoeff(&best);
    hard[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  std::vector<int> mapping;
  result.assignment.labels = canonicalize_labels(hard, k, &mapping);
  result.assignment.k = k;
  result.assignment.method = Method::Gmm;
  result.assignment.score = result.log_likelihood_history.back();

  GmmModel ordered;
  ordered.means.resize(k, points.cols());
  ordered.weights.resize(k);
  ordered.covariances.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const auto to = mapping[static_cast<std::size_t>(c)];
    ordered.means.row(to) = result.model.means.row(c);
    ordered.weights(to) = result.model.weights(c);
    ordered.covariances[static_cast<std::size_t>(to)] = result.model.covariances[static_cast<std::size_t>(c)];
  }
  result.model = std::move(ordered);
  return result;
}

ClusterAssignment fit(const Matrix& points, int k, Method method, std::uint64_t seed,
                      const FitOptions& options) {
  return method == Method::KMeans ? kmeans(points, k, seed, options.kmeans).assignment
                                  : gmm_fit(points, k, seed, options.gmm).assignment;
}

void write_assignments(std::span<const ClusterAssignment> assignments, const NodeIds& node_ids,
                       const std::filesystem::path& path) {
  csv::Writer writer({"node_id", "timestep", "method", "K", "label"});
  for (const auto& a : assignments) {
    if (a.labels.size() != node_ids.size()) {
      throw Error(ErrorKind::MismatchedNodes, "assignment does not cover the node set");
    }
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
      writer.add_row({node_ids[i], std::to_string(a.timestep), std::string(to_string(a.method)),
                      std::to_string(a.k), std::to_string(a.labels[i])});
    }
  }
  writer.save(path);
}

AssignmentFile read_assignments(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto cn = table.column("node_id"), ct = table.column("timestep"),
             cm = table.column("method"), ck = table.column("K"), cl = table.column("label");
  using Key = std::tuple<int, int, int>;  // method, k, timestep
  std::map<Key, std::vector<std::pair<std::string, int>>> grouped;
  for (const auto& row : table.rows) {
    const Method m = parse_method(row[cm]);
    const Key key{static_cast<int>(m), std::stoi(row[ck]), std::stoi(row[ct])};
    grouped[key].emplace_back(row[cn], std::stoi(row[cl]));
  }
  AssignmentFile out;
  for (const auto& [key, entries] : grouped) {
    NodeIds ids;
    ClusterAssignment a;
    a.method = static_cast<Method>(std::get<0>(key));
    a.k = std::get<1>(key);
    a.timestep = std::get<2>(key);
    for (const auto& [id, label] : entries) {
      ids.push_back(id);
      a.labels.push_back(label);
    }
    if (out.node_ids.empty()) {
      out.node_ids = ids;
    } else if (ids != out.node_ids) {
      throw Error(ErrorKind::MismatchedNodes,
                  fmt::format("{}: node sets differ between assignments", path.string()));
    }
    out.assignments.push_back(std::move(a));
  }
  return out;
}

}  // namespace aane::cluster
