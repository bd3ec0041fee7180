#pragma once

#include "aane/archetype.hpp"
#include "aane/types.hpp"

#include <span>
#include <string>
#include <vector>

// Minimal static SVG charts. Output is a pure function of the inputs.
namespace aane::svg {

struct Series {
  std::string name;
  std::vector<double> values;  // one per x label
};

std::string line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                       std::span<const Series> series, const std::string& y_label);

/// 2-D scatter coloured by label.
std::string scatter(const std::string& title, const Matrix& points, std::span<const int> labels);

/// Cells shaded from white (lo) to dark (hi); `marked` cells get a dot.
std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& column_labels, const Matrix& values, double lo,
                    double hi, const std::vector<std::vector<bool>>& marked = {});

/// One row per retained archetype, one cell per timestep coloured by label.
std::string timeline(const archetype::ArchetypeTable& table);

}  // namespace aane::svg
