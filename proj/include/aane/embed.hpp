#pragma once

#include "aane/graph.hpp"
#include "aane/kernels.hpp"
#include "aane/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace aane::embed {

struct SolverConfig {
  int dimension = 256;
  double lambda = 0.05;  // weight of the edge-difference penalty
  double rho = 5.0;      // ADMM penalty
  int max_iterations = 50;
  double primal_tolerance = 1e-4;
  // The initial iterate is read off the similarity matrix, so the solver
  // consumes no randomness; the seed is carried for run bookkeeping.
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolverTrace {
  // Entry 0 describes the initial iterate, entry k the state after sweep k.
  std::vector<double> objective;
  std::vector<double> residual;  // ||Q - Z||_F
  int iterations = 0;
  bool converged = false;          // residual < primal_tolerance at exit
  bool residual_monotone = false;  // no residual increase after the burn-in sweeps
  bool stalled = false;            // stopped early: residual stopped improving
};

struct Embedding {
  NodeIds node_ids;
  Matrix values;  // n x d
};

struct Result {
  Embedding embedding;
  SolverTrace trace;
};

inline constexpr int kBurnInIterations = 5;
inline constexpr int kStallWindow = 10;
inline constexpr double kDistanceFloor = 1e-9;

/// Jointly factorizes the attribute similarity S ~ Q Q^T and penalizes
/// lambda * sum_ij w_ij ||q_i - z_j|| over edges, splitting Q from its copy Z
/// with scaled duals U. Rows of Q and Z are updated in closed form against a
/// frozen snapshot of the opposite block; the per-row linear systems share the
/// eigenbasis of the d x d Gram matrix.
///
/// Throws DimensionTooLarge when d > n and NonFinite if an iterate overflows.
Result embed(const graph::AttributedNetwork& network, const SolverConfig& config,
             kernels::Backend backend = kernels::Backend::OpenMP);

/// Same solver on an explicit similarity matrix and normalized adjacency.
Result embed(const Matrix& similarity, const Adjacency& adjacency, const NodeIds& node_ids,
             const SolverConfig& config, kernels::Backend backend = kernels::Backend::OpenMP);

/// ||S - Q Z^T||_F^2 + lambda sum_i sum_{j in N(i)} w_ij ||q_i - z_j||
///   + rho/2 sum_i (||q_i - z_i + u_i||^2 - ||u_i||^2)
double augmented_objective(const Matrix& similarity, const Adjacency& adjacency, const Matrix& q,
                           const Matrix& z, const Matrix& u, double lambda, double rho);

/// sum over undirected edges of w_ij ||q_i - q_j|| (each edge counted once).
double edge_penalty(const Matrix& q, const Adjacency& adjacency);

/// Projection of the centered embedding onto its top two principal axes.
/// Each axis is signed so that its largest-magnitude loading is positive.
Matrix project_2d(const Matrix& embedding);

void write_embedding(const Embedding& embedding, const std::filesystem::path& path);
Embedding read_embedding(const std::filesystem::path& path);
void write_trace(const SolverTrace& trace, const std::filesystem::path& path);

}  // namespace aane::embed
