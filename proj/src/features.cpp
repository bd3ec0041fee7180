#include "aane/features.hpp"

#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "aane/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace aane {

AttributeTable AttributeTable::without_column(std::size_t column) const {
  if (column >= cols()) throw Error(ErrorKind::InvalidArgument, "column index out of range");
  AttributeTable out;
  out.node_ids = node_ids;
  out.timestep = timestep;
  out.values.resize(values.rows(), values.cols() - 1);
  for (std::size_t c = 0, o = 0; c < cols(); ++c) {
    if (c == column) continue;
    out.columns.push_back(columns[c]);
    out.values.col(static_cast<Eigen::Index>(o++)) = values.col(static_cast<Eigen::Index>(c));
  }
  return out;
}

}  // namespace aane

namespace aane::features {

double venables_distance(std::span<const Cell> grid) {
  std::vector<double> xs, ys, s;
  for (const auto& cell : grid) {
    if (!(cell.intensity >= 0.0) || !std::isfinite(cell.intensity)) {
      throw Error(ErrorKind::InvalidArgument, "activity intensities must be finite and >= 0");
    }
    if (cell.intensity == 0.0) continue;  // contributes nothing to either sum
    xs.push_back(cell.x);
    ys.push_back(cell.y);
    s.push_back(cell.intensity);
  }
  if (s.size() < 2) {
    throw Error(ErrorKind::DegenerateGrid,
                "Venables distance needs at least two cells with positive intensity");
  }
  const auto [num, den] = kernels::venables_sums(xs, ys, s);
  return num / den;
}

double reproduction_number(const CaseSeries& series, Window window, double tau_days) {
  if (window.begin >= window.end || window.end >= series.counts.size()) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("window [{}, {}] invalid for a series of length {}", window.begin,
                            window.end, series.counts.size()));
  }
  const auto first = series.counts[window.begin];
  const auto last = series.counts[window.end];
  if (first <= 0 || last <= 0) {
    throw Error(ErrorKind::ZeroCases, "reproduction number needs positive counts at both ends");
  }
  const double t = static_cast<double>(window.end - window.begin) * series.step_days;
  // exp(K tau) with K = ln(last / first) / t, evaluated as a power so that
  // whole growth factors over whole serial intervals come out exact.
  return std::pow(static_cast<double>(last) / static_cast<double>(first), tau_days / t);
}

Vector weighted_degree_centrality(const PairwiseIndexMatrix& m) {
  const auto n = m.values.rows();
  if (m.values.cols() != n) throw Error(ErrorKind::InvalidArgument, "matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = m.values(i, j), b = m.values(j, i);
      const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
      if (std::abs(a - b) > 1e-12 * scale) {
        throw Error(ErrorKind::AsymmetricMatrix,
                    fmt::format("entries ({0},{1}) and ({1},{0}) differ: {2} vs {3}", i, j, a, b));
      }
    }
  }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sum += m.values(i, j);
    }
    out(i) = sum;
  }
  return out;
}

std::vector<double> percent_change_from_baseline(std::span<const double> series,
                                                 std::size_t baseline) {
  if (baseline >= series.size()) {
    throw Error(ErrorKind::InvalidArgument, "baseline index out of range");
  }
  const double base = series[baseline];
  if (base == 0.0) throw Error(ErrorKind::ZeroBaseline, "baseline value is zero");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    out[t] = t == baseline ? 0.0 : (series[t] - base) / base;
  }
  return out;
}

AttributeTable impute_median(AttributeTable table) {
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    std::vector<double> observed;
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
      if (!std::isnan(table.values(r, c))) observed.push_back(table.values(r, c));
    }
    if (observed.size() == static_cast<std::size_t>(table.values.rows())) continue;
    if (observed.empty()) {
      throw Error(ErrorKind::InputError,
                  fmt::format("feature '{}' has no observed values at timestep {}",
                              table.columns[static_cast<std::size_t>(c)], table.timestep));
    }
    std::sort(observed.begin(), observed.end());
    const std::size_t m = observed.size();
    const double median =
        m % 2 ? observed[m / 2] : 0.5 * (observed[m / 2 - 1] + observed[m / 2]);
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
      if (std::isnan(table.values(r, c))) table.values(r, c) = median;
    }
  }
  return table;
}

AttributeTable standardize(const AttributeTable& input) {
  if (input.rows() < 2) {
    throw Error(ErrorKind::InsufficientData, "standardization needs at least two rows");
  }
  AttributeTable table = impute_median(input);
  const auto n = static_cast<double>(table.values.rows());
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    auto col = table.values.col(c);
    if (col.minCoeff() == col.maxCoeff()) {
      col.setZero();
      continue;
    }
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    col = (col.array() - mean) / std::sqrt(var);
  }
  return table;
}

std::vector<Cell> read_activity_grid(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto cx = table.column("x"), cy = table.column("y"), ci = table.column("intensity");
  std::vector<Cell> cells;
  cells.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    cells.push_back({csv::parse_number(row[cx], path), csv::parse_number(row[cy], path),
                     csv::parse_number(row[ci], path)});
  }
  return cells;
}

CaseSeries read_case_series(const std::filesystem::path& path, double step_days) {
  const auto table = csv::read(path);
  const auto cc = table.column("cumulative_cases");
  CaseSeries series;
  series.step_days = step_days;
  for (const auto& row : table.rows) {
    const double v = csv::parse_number(row[cc], path);
    if (!(v >= 0.0) || v != std::floor(v)) {
      throw Error(ErrorKind::InputError,
                  fmt::format("{}: case counts must be nonnegative integers", path.string()));
    }
    if (!series.counts.empty() && static_cast<std::int64_t>(v) < series.counts.back()) {
      throw Error(ErrorKind::InputError,
                  fmt::format("{}: cumulative cases decrease", path.string()));
    }
    series.counts.push_back(static_cast<std::int64_t>(v));
  }
  return series;
}

PairwiseIndexMatrix read_pairwise_matrix(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  PairwiseIndexMatrix m;
  // Header is either "id,a,b,c" (row labels present) or "a,b,c".
  const bool labelled = table.header.size() == table.rows.size() + 1;
  m.node_ids.assign(table.header.begin() + (labelled ? 1 : 0), table.header.end());
  const auto n = static_cast<Eigen::Index>(m.node_ids.size());
  if (static_cast<Eigen::Index>(table.rows.size()) != n) {
    throw Error(ErrorKind::InputError, fmt::format("{}: matrix is not square", path.string()));
  }
  m.values.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < n; ++c) {
      m.values(r, c) = csv::parse_number(row[static_cast<std::size_t>(c + (labelled ? 1 : 0))], path);
    }
  }
  return m;
}

AttributeTable read_attribute_table(const std::filesystem::path& path, int timestep) {
  const auto table = csv::read(path);
  const auto id_col = table.column("node_id");
  AttributeTable out;
  out.timestep = timestep;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == id_col) continue;
    feature_cols.push_back(c);
    out.columns.push_back(table.header[c]);
  }
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                    static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.node_ids.push_back(table.rows[r][id_col]);
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
          csv::parse_number(table.rows[r][feature_cols[f]], path);
    }
  }
  auto sorted = out.node_ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InputError, fmt::format("{}: duplicate node_id", path.string()));
  }
  return out;
}

void write_attribute_table(const AttributeTable& table, const std::filesystem::path& path) {
  std::vector<std::string> header{"node_id"};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  csv::Writer writer(std::move(header));
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::vector<std::string> row{table.node_ids[r]};
    for (std::size_t c = 0; c < table.cols(); ++c) {
      row.push_back(csv::format_number(
          table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    }
    writer.add_row(std::move(row));
  }
  writer.save(path);
}

}  // namespace aane::features
