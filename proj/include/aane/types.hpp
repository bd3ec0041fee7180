#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace aane {

// Row-major so that per-node rows are contiguous; kernels parallelize over rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using NodeIds = std::vector<std::string>;

/// Node-by-feature table for one timestep. Missing values are NaN until imputed.
struct AttributeTable {
  NodeIds node_ids;
  std::vector<std::string> columns;
  Matrix values;  // node_ids.size() x columns.size()
  int timestep = 0;

  std::size_t rows() const { return node_ids.size(); }
  std::size_t cols() const { return columns.size(); }

  /// Copy of the table with one feature column removed.
  AttributeTable without_column(std::size_t column) const;
};

}  // namespace aane

namespace aane {

/// Symmetric sparse adjacency in compressed-row form; both directions of
/// every undirected edge are stored.
struct Adjacency {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> neighbors;
  std::vector<double> weights;

  std::size_t nodes() const { return offsets.size() - 1; }
};

}  // namespace aane
