#include "aane/kernels.hpp"

#include "aane/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace aane::kernels {
namespace {

double row_distance(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  double sum = 0.0;
  const auto cols = a.cols();
  for (Eigen::Index k = 0; k < cols; ++k) {
    const double diff = a(static_cast<Eigen::Index>(i), k) - b(static_cast<Eigen::Index>(j), k);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

}  // namespace

Matrix cosine_similarity(const Matrix& x, Backend backend) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = x.row(static_cast<Eigen::Index>(i)).norm();

  Matrix s(x.rows(), x.rows());
  for_each_row(n, backend, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (i == j) {
        s(ii, jj) = 1.0;
        continue;
      }
      if (norms[i] == 0.0 || norms[j] == 0.0) {
        s(ii, jj) = 0.0;
        continue;
      }
      // Same summation order for (i, j) and (j, i) keeps the result exactly symmetric.
      double dot = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) dot += x(ii, k) * x(jj, k);
      s(ii, jj) = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
    }
  });
  return s;
}

Matrix pairwise_distances(const Matrix& points, Backend backend) {
  const auto n = static_cast<std::size_t>(points.rows());
  Matrix d(points.rows(), points.rows());
  for_each_row(n, backend, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          i == j ? 0.0 : row_distance(points, i, points, j);
    }
  });
  return d;
}

std::pair<double, double> venables_sums(std::span<const double> xs, std::span<const double> ys,
                                        std::span<const double> intensities, Backend backend) {
  const std::size_t n = intensities.size();
  std::vector<double> numer(n, 0.0), denom(n, 0.0);
  for_each_row(n, backend, [&](std::size_t i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = intensities[i] * intensities[j];
      num += w * std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
      den += w;
    }
    numer[i] = num;
    denom[i] = den;
  });
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += numer[i];
    den += denom[i];
  }
  return {num, den};
}

Matrix cluster_distance_sums(const Matrix& points, std::span<const int> labels, int k,
                             Backend backend) {
  const auto n = static_cast<std::size_t>(points.rows());
  Matrix sums = Matrix::Zero(points.rows(), k);
  for_each_row(n, backend, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sums(static_cast<Eigen::Index>(i), labels[j]) += row_distance(points, i, points, j);
    }
  });
  return sums;
}

void nearest_centers(const Matrix& points, const Matrix& centers, std::span<int> labels,
                     std::span<double> squared_distances, Backend backend) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto k = static_cast<std::size_t>(centers.rows());
  for_each_row(n, backend, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double dist = row_distance(points, i, centers, c);
      const double sq = dist * dist;
      if (sq < best) {
        best = sq;
        best_c = static_cast<int>(c);
      }
    }
    labels[i] = best_c;
    squared_distances[i] = best;
  });
}

Matrix gaussian_log_densities(const Matrix& points, const Matrix& means,
                              std::span<const Matrix> cholesky_factors, Backend backend) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto k = static_cast<Eigen::Index>(means.rows());
  const auto d = points.cols();
  Vector log_norm(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& l = cholesky_factors[static_cast<std::size_t>(c)];
    double log_det = 0.0;
    for (Eigen::Index a = 0; a < d; ++a) log_det += 2.0 * std::log(l(a, a));
    log_norm(c) = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det);
  }
  Matrix out(points.rows(), k);
  for_each_row(n, backend, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = 0; c < k; ++c) {
      const Vector diff = (points.row(ii) - means.row(c)).transpose();
      const auto& l = cholesky_factors[static_cast<std::size_t>(c)];
      const Vector y = l.triangularView<Eigen::Lower>().solve(diff);
      out(ii, c) = log_norm(c) - 0.5 * y.squaredNorm();
    }
  });
  return out;
}

std::pair<double, double> separation_and_diameter(const Matrix& points,
                                                  std::span<const int> labels, Backend backend) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<double> sep(n, std::numeric_limits<double>::infinity()), diam(n, 0.0);
  for_each_row(n, backend, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = row_distance(points, i, points, j);
      if (labels[i] == labels[j]) {
        diam[i] = std::max(diam[i], dist);
      } else {
        sep[i] = std::min(sep[i], dist);
      }
    }
  });
  return {*std::min_element(sep.begin(), sep.end()), *std::max_element(diam.begin(), diam.end())};
}

Matrix admm_half_step(const HalfStep& step, Backend backend) {
  const Matrix& other = *step.other;
  const Matrix& current = *step.current;
  const Matrix& vectors = *step.gram_vectors;
  const Vector& values = *step.gram_values;
  const Adjacency& adj = *step.adjacency;
  const auto n = static_cast<std::size_t>(current.rows());
  const auto d = current.cols();

  Matrix next(current.rows(), d);
  for_each_row(n, backend, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    Eigen::RowVectorXd b = step.target->row(ii) + step.prox->row(ii);
    double c = step.rho;
    for (std::size_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e) {
      const std::size_t j = adj.neighbors[e];
      const double dist = std::max(row_distance(current, i, other, j), step.distance_floor);
      const double coef = step.lambda * adj.weights[e] / dist;
      b += coef * other.row(static_cast<Eigen::Index>(j));
      c += coef;
    }
    // (2 G + c I)^-1 applied through the shared eigenbasis of G.
    Eigen::RowVectorXd coords = b * vectors;
    for (Eigen::Index a = 0; a < d; ++a) coords(a) /= 2.0 * values(a) + c;
    next.row(ii) = coords * vectors.transpose();
  });
  return next;
}

}  // namespace aane::kernels
