#include "aane/svg.hpp"

#include "aane/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace aane::svg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return csv::format_number(std::round(v * 100.0) / 100.0); }

std::string open(double width, double height, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      num(width), num(height), num(width / 2), escape(title));
}

}  // namespace

std::string line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                       std::span<const Series> series, const std::string& y_label) {
  const double width = 640, height = 400, left = 60, right = 140, top = 30, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const std::size_t nx = std::max<std::size_t>(x_labels.size(), 1);
  auto px = [&](std::size_t i) { return left + (nx == 1 ? pw / 2 : pw * static_cast<double>(i) / static_cast<double>(nx - 1)); };
  auto py = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

  std::string out = open(width, height, title);
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     num(left), num(top), num(pw), num(ph));
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(left - 4),
                       num(py(v) + 4), csv::format_number(std::round(v * 1000.0) / 1000.0));
  }
  for (std::size_t i = 0; i < x_labels.size(); ++i) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(px(i)),
                       num(top + ph + 16), escape(x_labels[i]));
  }
  out += fmt::format("<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>\n",
                     num(top + ph / 2), num(top + ph / 2), escape(y_label));
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string points;
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      if (!std::isfinite(series[s].values[i])) continue;
      points += fmt::format("{},{} ", num(px(i)), num(py(series[s].values[i])));
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                       colour(s), points);
    const double ly = top + 14 + 16 * static_cast<double>(s);
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
                       "<text x=\"{}\" y=\"{}\">{}</text>\n",
                       num(left + pw + 10), num(ly - 9), colour(s), num(left + pw + 24), num(ly),
                       escape(series[s].name));
  }
  return out + "</svg>\n";
}

std::string scatter(const std::string& title, const Matrix& points, std::span<const int> labels) {
  const double size = 480, margin = 30;
  std::string out = open(size, size, title);
  if (points.rows() == 0 || points.cols() < 2) return out + "</svg>\n";
  const double x0 = points.col(0).minCoeff(), x1 = points.col(0).maxCoeff();
  const double y0 = points.col(1).minCoeff(), y1 = points.col(1).maxCoeff();
  const double sx = x1 > x0 ? (size - 2 * margin) / (x1 - x0) : 0.0;
  const double sy = y1 > y0 ? (size - 2 * margin) / (y1 - y0) : 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto label = labels.empty() ? 0 : static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                       num(margin + (points(i, 0) - x0) * sx),
                       num(size - margin - (points(i, 1) - y0) * sy), colour(label));
  }
  return out + "</svg>\n";
}

std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& column_labels, const Matrix& values, double lo,
                    double hi, const std::vector<std::vector<bool>>& marked) {
  const double cell = 22, left = 120, top = 40;
  const double width = left + cell * static_cast<double>(column_labels.size()) + 20;
  const double height = top + cell * static_cast<double>(row_labels.size()) + 70;
  std::string out = open(width, height, title);
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    const double y = top + cell * static_cast<double>(r);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(left - 4),
                       num(y + cell * 0.7), escape(row_labels[r]));
    for (std::size_t c = 0; c < column_labels.size(); ++c) {
      const double v = values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      const double f = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - f)));
      const double x = left + cell * static_cast<double>(c);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({},{},255)\" stroke=\"#ccc\"/>\n",
                         num(x), num(y), num(cell), num(cell), shade, shade);
      if (r < marked.size() && c < marked[r].size() && marked[r][c]) {
        out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\"/>\n",
                           num(x + cell / 2), num(y + cell / 2));
      }
    }
  }
  const double label_y = top + cell * static_cast<double>(row_labels.size()) + 8;
  for (std::size_t c = 0; c < column_labels.size(); ++c) {
    const double x = left + cell * static_cast<double>(c) + cell / 2;
    out += fmt::format("<text x=\"{0}\" y=\"{1}\" transform=\"rotate(60 {0} {1})\">{2}</text>\n",
                       num(x), num(label_y), escape(column_labels[c]));
  }
  return out + "</svg>\n";
}

std::string timeline(const archetype::ArchetypeTable& table) {
  std::size_t steps = 0;
  for (const auto& a : table.archetypes) steps = std::max(steps, a.signature.size());
  const double cell = 24, left = 160, top = 40;
  const double width = left + cell * static_cast<double>(steps) + 20;
  const double height = top + cell * static_cast<double>(table.archetypes.size()) + 30;
  std::string out = open(width, height, "Archetype label trajectories");
  for (std::size_t r = 0; r < table.archetypes.size(); ++r) {
    const auto& a = table.archetypes[r];
    const double y = top + cell * static_cast<double>(r);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">archetype {} (n={})</text>\n",
                       num(left - 4), num(y + cell * 0.7), a.id, a.members.size());
    for (std::size_t t = 0; t < a.signature.size(); ++t) {
      const double x = left + cell * static_cast<double>(t);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"white\"/>"
                         "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"white\">{}</text>\n",
                         num(x), num(y), num(cell), num(cell),
                         colour(static_cast<std::size_t>(a.signature[t])), num(x + cell / 2),
                         num(y + cell * 0.7), a.signature[t]);
    }
  }
  for (std::size_t t = 0; t < steps; ++t) {
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       num(left + cell * static_cast<double>(t) + cell / 2),
                       num(top + cell * static_cast<double>(table.archetypes.size()) + 16), t);
  }
  return out + "</svg>\n";
}

}  // namespace aane::svg
