#pragma once

// Data-parallel inner loops. Every kernel runs either as a plain serial loop
// (the reference path used by tests and the benchmark) or as an OpenMP loop
// over rows. Each row writes only its own output slot and any reductions are
// folded serially afterwards, so both paths give bitwise-identical results
// for any thread count.

#include "aane/types.hpp"

#include <exception>
#include <span>
#include <utility>

namespace aane::kernels {

enum class Backend { Serial, OpenMP };

template <class Body>
void for_each_row(std::size_t n, Backend backend, Body&& body) {
  if (backend == Backend::OpenMP) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

/// Row-wise cosine similarity with unit diagonal; zero rows are similar to nothing.
Matrix cosine_similarity(const Matrix& x, Backend backend = Backend::OpenMP);

/// Full Euclidean distance matrix.
Matrix pairwise_distances(const Matrix& points, Backend backend = Backend::OpenMP);

/// Weighted pairwise sums over cells: (sum s_i s_j d_ij, sum s_i s_j) for i < j.
std::pair<double, double> venables_sums(std::span<const double> xs, std::span<const double> ys,
                                        std::span<const double> intensities,
                                        Backend backend = Backend::OpenMP);

/// Entry (i, c): sum of distances from point i to every point labelled c.
Matrix cluster_distance_sums(const Matrix& points, std::span<const int> labels, int k,
                             Backend backend = Backend::OpenMP);

/// Nearest center per point and the squared distance to it. Ties go to the lower index.
void nearest_centers(const Matrix& points, const Matrix& centers, std::span<int> labels,
                     std::span<double> squared_distances, Backend backend = Backend::OpenMP);

/// Per-component Gaussian log densities. `cholesky_factors[c]` is the lower
/// Cholesky factor of component c's covariance.
Matrix gaussian_log_densities(const Matrix& points, const Matrix& means,
                              std::span<const Matrix> cholesky_factors,
                              Backend backend = Backend::OpenMP);

/// Smallest distance between points with different labels and the largest
/// distance between points sharing a label.
std::pair<double, double> separation_and_diameter(const Matrix& points,
                                                  std::span<const int> labels,
                                                  Backend backend = Backend::OpenMP);

/// Inputs for one alternating-direction half step. Each row x_i of the result
/// solves x_i (2 G + c_i I) = b_i where G = other^T other with
/// eigendecomposition (gram_vectors, gram_values), and
///   b_i = target_i + prox_i + lambda sum_j w_ij other_j / dist_ij,
///   c_i = rho + lambda sum_j w_ij / dist_ij,
///   dist_ij = max(||current_i - other_j||, distance_floor).
struct HalfStep {
  const Matrix* target = nullptr;   // 2 S other
  const Matrix* prox = nullptr;     // rho (z_i - u_i) or rho (q_i + u_i)
  const Matrix* current = nullptr;  // iterate being replaced
  const Matrix* other = nullptr;    // fixed block
  const Matrix* gram_vectors = nullptr;
  const Vector* gram_values = nullptr;
  const Adjacency* adjacency = nullptr;
  double lambda = 0.0;
  double rho = 1.0;
  double distance_floor = 1e-9;
};

Matrix admm_half_step(const HalfStep& step, Backend backend = Backend::OpenMP);

}  // namespace aane::kernels

namespace aane::kernels {

/// Runs independent jobs on the OpenMP worker pool (dynamic schedule). Kernels
/// called from inside a job run serially because nested parallelism is off.
/// The first exception thrown by any job is rethrown after the loop.
template <class Job>
void for_each_job(std::size_t n, Job&& job) {
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      job(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(aane_job_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace aane::kernels
