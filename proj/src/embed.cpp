#include "aane/embed.hpp"

#include "aane/csv.hpp"
#include "aane/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace aane::embed {

void SolverConfig::validate() const {
  if (dimension < 1) throw Error(ErrorKind::ConfigError, "embedding dimension must be >= 1");
  if (!(lambda >= 0.0)) throw Error(ErrorKind::ConfigError, "lambda must be >= 0");
  if (!(rho > 0.0)) throw Error(ErrorKind::ConfigError, "rho must be > 0");
  if (max_iterations < 1) throw Error(ErrorKind::ConfigError, "max_iterations must be >= 1");
  if (!(primal_tolerance > 0.0)) {
    throw Error(ErrorKind::ConfigError, "primal_tolerance must be > 0");
  }
}

double augmented_objective(const Matrix& similarity, const Adjacency& adjacency, const Matrix& q,
                           const Matrix& z, const Matrix& u, double lambda, double rho) {
  const double fit = (similarity - q * z.transpose()).squaredNorm();
  double edges = 0.0;
  for (std::size_t i = 0; i < adjacency.nodes(); ++i) {
    for (std::size_t e = adjacency.offsets[i]; e < adjacency.offsets[i + 1]; ++e) {
      const auto j = static_cast<Eigen::Index>(adjacency.neighbors[e]);
      edges += adjacency.weights[e] * (q.row(static_cast<Eigen::Index>(i)) - z.row(j)).norm();
    }
  }
  const double dual = (q - z + u).squaredNorm() - u.squaredNorm();
  return fit + lambda * edges + 0.5 * rho * dual;
}

double edge_penalty(const Matrix& q, const Adjacency& adjacency) {
  double total = 0.0;
  for (std::size_t i = 0; i < adjacency.nodes(); ++i) {
    for (std::size_t e = adjacency.offsets[i]; e < adjacency.offsets[i + 1]; ++e) {
      const std::size_t j = adjacency.neighbors[e];
      if (j <= i) continue;
      total += adjacency.weights[e] *
               (q.row(static_cast<Eigen::Index>(i)) - q.row(static_cast<Eigen::Index>(j))).norm();
    }
  }
  return total;
}

namespace {

void require_finite(const Matrix& m, const char* what, int iteration) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite,
                fmt::format("{} became non-finite at iteration {}; lower lambda or raise rho",
                            what, iteration));
  }
}

}  // namespace

Result embed(const Matrix& similarity, const Adjacency& adjacency, const NodeIds& node_ids,
             const SolverConfig& config, kernels::Backend backend) {
  config.validate();
  const auto n = similarity.rows();
  const auto d = static_cast<Eigen::Index>(config.dimension);
  if (d > n) {
    throw Error(ErrorKind::DimensionTooLarge,
                fmt::format("embedding dimension {} exceeds node count {}", d, n));
  }
  if (similarity.cols() != n || static_cast<Eigen::Index>(adjacency.nodes()) != n ||
      static_cast<Eigen::Index>(node_ids.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, "similarity, adjacency and node ids disagree in size");
  }

  // Q0 = Z0 = leading d columns of S, U0 = 0.
  Matrix q = similarity.leftCols(d);
  Matrix z = q;
  Matrix u = Matrix::Zero(n, d);

  SolverTrace trace;
  trace.objective.push_back(
      augmented_objective(similarity, adjacency, q, z, u, config.lambda, config.rho));
  trace.residual.push_back(0.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  kernels::HalfStep step;
  step.adjacency = &adjacency;
  step.lambda = config.lambda;
  step.rho = config.rho;
  step.distance_floor = kDistanceFloor;

  bool monotone = true;
  double best_residual = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int it = 1; it <= config.max_iterations; ++it) {
    // Q half step against the frozen Z.
    {
      eig.compute(Eigen::MatrixXd(z.transpose() * z));
      const Matrix vectors = eig.eigenvectors();
      const Vector values = eig.eigenvalues();
      const Matrix target = 2.0 * (similarity * z);
      const Matrix prox = config.rho * (z - u);
      step.target = &target;
      step.prox = &prox;
      step.current = &q;
      step.other = &z;
      step.gram_vectors = &vectors;
      step.gram_values = &values;
      q = kernels::admm_half_step(step, backend);
    }
    require_finite(q, "Q", it);
    // Z half step against the new Q.
    {
      eig.compute(Eigen::MatrixXd(q.transpose() * q));
      const Matrix vectors = eig.eigenvectors();
      const Vector values = eig.eigenvalues();
      const Matrix target = 2.0 * (similarity * q);
      const Matrix prox = config.rho * (q + u);
      step.target = &target;
      step.prox = &prox;
      step.current = &z;
      step.other = &q;
      step.gram_vectors = &vectors;
      step.gram_values = &values;
      z = kernels::admm_half_step(step, backend);
    }
    require_finite(z, "Z", it);
    u += q - z;
    require_finite(u, "U", it);

    const double residual = (q - z).norm();
    trace.residual.push_back(residual);
    trace.objective.push_back(
        augmented_objective(similarity, adjacency, q, z, u, config.lambda, config.rho));
    trace.iterations = it;

    if (it > kBurnInIterations && residual > trace.residual[static_cast<std::size_t>(it - 1)]) {
      monotone = false;
    }
    if (residual < config.primal_tolerance) {
      trace.converged = true;
      break;
    }
    // ADMM residuals oscillate while decaying, so progress is judged on the
    // running minimum rather than on consecutive sweeps.
    if (it > kBurnInIterations) {
      if (residual < best_residual) {
        best_residual = residual;
        since_best = 0;
      } else if (++since_best >= kStallWindow) {
        trace.stalled = true;
        break;
      }
    }
  }
  trace.residual_monotone = monotone;
  return {{node_ids, std::move(q)}, std::move(trace)};
}

Result embed(const graph::AttributedNetwork& network, const SolverConfig& config,
             kernels::Backend backend) {
  config.validate();
  if (static_cast<std::size_t>(config.dimension) > network.size()) {
    throw Error(ErrorKind::DimensionTooLarge,
                fmt::format("embedding dimension {} exceeds node count {}", config.dimension,
                            network.size()));
  }
  const Matrix similarity = kernels::cosine_similarity(network.attributes.values, backend);
  const Adjacency adjacency = graph::normalized_adjacency(network);
  return embed(similarity, adjacency, network.node_ids, config, backend);
}

Matrix project_2d(const Matrix& embedding) {
  if (embedding.cols() < 2) {
    throw Error(ErrorKind::InvalidArgument, "projection needs at least two embedding columns");
  }
  const Eigen::RowVectorXd mean = embedding.colwise().mean();
  const Matrix centered = embedding.rowwise() - mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      Eigen::MatrixXd(centered.transpose() * centered));
  const auto d = embedding.cols();
  Eigen::MatrixXd axes(d, 2);
  for (int a = 0; a < 2; ++a) {
    Vector axis = eig.eigenvectors().col(d - 1 - a);  // eigenvalues ascend
    Eigen::Index pivot = 0;
    for (Eigen::Index k = 1; k < d; ++k) {
      if (std::abs(axis(k)) > std::abs(axis(pivot))) pivot = k;
    }
    if (axis(pivot) < 0.0) axis = -axis;
    axes.col(a) = axis;
  }
  return centered * axes;
}

void write_embedding(const Embedding& embedding, const std::filesystem::path& path) {
  std::vector<std::string> header{"node_id"};
  for (Eigen::Index c = 0; c < embedding.values.cols(); ++c) header.push_back(fmt::format("e{}", c));
  csv::Writer writer(std::move(header));
  for (std::size_t r = 0; r < embedding.node_ids.size(); ++r) {
    std::vector<std::string> row{embedding.node_ids[r]};
    for (Eigen::Index c = 0; c < embedding.values.cols(); ++c) {
      row.push_back(csv::format_number(embedding.values(static_cast<Eigen::Index>(r), c)));
    }
    writer.add_row(std::move(row));
  }
  writer.save(path);
}

Embedding read_embedding(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto id_col = table.column("node_id");
  Embedding out;
  const auto d = static_cast<Eigen::Index>(table.header.size() - 1);
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), d);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.node_ids.push_back(table.rows[r][id_col]);
    Eigen::Index c = 0;
    for (std::size_t f = 0; f < table.header.size(); ++f) {
      if (f == id_col) continue;
      out.values(static_cast<Eigen::Index>(r), c++) = csv::parse_number(table.rows[r][f], path);
    }
  }
  return out;
}

void write_trace(const SolverTrace& trace, const std::filesystem::path& path) {
  csv::Writer writer({"iteration", "objective", "residual"});
  for (std::size_t k = 0; k < trace.objective.size(); ++k) {
    writer.add_row({std::to_string(k), csv::format_number(trace.objective[k]),
                    csv::format_number(trace.residual[k])});
  }
  writer.save(path);
}

}  // namespace aane::embed
