#pragma once

#include "aane/kernels.hpp"
#include "aane/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aane::cluster {

enum class Method { KMeans, Gmm };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);

struct ClusterAssignment {
  int timestep = 0;
  std::vector<int> labels;  // one per node, in [0, k)
  int k = 0;
  Method method = Method::KMeans;
  double score = 0.0;  // inertia (k-means) or log-likelihood (GMM)
};

/// Renumbers labels by descending cluster size, ties broken by the smallest
/// member index. Returns the new labels; `mapping[old] = new` if requested.
std::vector<int> canonicalize_labels(std::span<const int> labels, int k,
                                     std::vector<int>* mapping = nullptr);

struct KMeansOptions {
  int max_iter = 300;
  int n_init = 10;  // restarts from fresh k-means++ seeds; the lowest inertia wins
};

struct KMeansResult {
  ClusterAssignment assignment;
  Matrix centers;                       // row c is the centroid of canonical label c
  std::vector<double> inertia_history;  // per iteration of the winning restart
  int iterations = 0;
};

/// Lloyd iterations from k-means++ seeds. Throws TooManyClusters when k > n.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    const KMeansOptions& options = {},
                    kernels::Backend backend = kernels::Backend::OpenMP);

enum class CovarianceType { Full, Diagonal };

struct GmmOptions {
  int max_iter = 200;
  double tol = 1e-6;  // on the change of the mean per-point log-likelihood
  CovarianceType covariance = CovarianceType::Full;
};

struct GmmModel {
  Matrix means;                      // k x d
  std::vector<Matrix> covariances;   // k of d x d
  Vector weights;                    // sums to one
};

struct GmmResult {
  GmmModel model;
  ClusterAssignment assignment;
  std::vector<double> log_likelihood_history;
  int iterations = 0;
  bool converged = false;
};

/// Added to each covariance diagonal, relative to trace / d (the data set's
/// trace when a component has collapsed to a point).
inline constexpr double kCovarianceRegularization = 1e-6;

/// Expectation-maximization for a Gaussian mixture, initialized from k-means
/// with the same seed. Hard labels take the most responsible component.
GmmResult gmm_fit(const Matrix& points, int k, std::uint64_t seed, const GmmOptions& options = {},
                  kernels::Backend backend = kernels::Backend::OpenMP);

struct FitOptions {
  KMeansOptions kmeans;
  GmmOptions gmm;
};

ClusterAssignment fit(const Matrix& points, int k, Method method, std::uint64_t seed,
                      const FitOptions& options = {});

/// CSV with columns node_id,timestep,method,K,label.
void write_assignments(std::span<const ClusterAssignment> assignments, const NodeIds& node_ids,
                       const std::filesystem::path& path);

struct AssignmentFile {
  NodeIds node_ids;
  std::vector<ClusterAssignment> assignments;  // sorted by (method, k, timestep)
};
AssignmentFile read_assignments(const std::filesystem::path& path);

}  // namespace aane::cluster
