#pragma once

#include "aane/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace aane::features {

/// Serial interval of COVID-19 in days, the default growth-to-R0 horizon.
inline constexpr double kDefaultSerialIntervalDays = 5.1;

struct Cell {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
  double intensity = 0.0;
};

/// Intensity-weighted mean pairwise distance between activity cells.
/// Throws DegenerateGrid when fewer than two cells carry positive intensity.
double venables_distance(std::span<const Cell> grid);

struct CaseSeries {
  std::vector<std::int64_t> counts;  // cumulative confirmed cases
  double step_days = 1.0;
};

/// Closed index range; the counts at both endpoints are used and the elapsed
/// time is (end - begin) * step_days.
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// R0 = exp(K tau) with K the log growth rate between the window endpoints.
double reproduction_number(const CaseSeries& series, Window window,
                           double tau_days = kDefaultSerialIntervalDays);

struct PairwiseIndexMatrix {
  NodeIds node_ids;
  Matrix values;
};

/// Row sums excluding the diagonal. Throws AsymmetricMatrix beyond 1e-12 relative.
Vector weighted_degree_centrality(const PairwiseIndexMatrix& m);

/// (x[t] - x[b]) / x[b]; the baseline entry is exactly zero.
std::vector<double> percent_change_from_baseline(std::span<const double> series,
                                                 std::size_t baseline);

/// Replaces NaN entries with the column median of the observed values.
AttributeTable impute_median(AttributeTable table);

/// Median imputation followed by z-scoring with population variance.
/// Constant columns become all zero.
AttributeTable standardize(const AttributeTable& table);

// CSV readers for the raw inputs.
std::vector<Cell> read_activity_grid(const std::filesystem::path& path);
CaseSeries read_case_series(const std::filesystem::path& path, double step_days = 1.0);
PairwiseIndexMatrix read_pairwise_matrix(const std::filesystem::path& path);
AttributeTable read_attribute_table(const std::filesystem::path& path, int timestep = 0);
void write_attribute_table(const AttributeTable& table, const std::filesystem::path& path);

}  // namespace aane::features
