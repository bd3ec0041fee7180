#include "aane/stats.hpp"

#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "aane/kernels.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

namespace aane::stats {
namespace {

struct Pooled {
  std::vector<double> values;
  std::vector<std::size_t> group;
  std::vector<std::size_t> sizes;
};

Pooled pool(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(ErrorKind::InsufficientData, "at least two groups are required");
  Pooled p;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) {
      throw Error(ErrorKind::InsufficientData, fmt::format("group {} is empty", g));
    }
    for (double v : groups[g]) {
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "non-finite observation");
      p.values.push_back(v);
      p.group.push_back(g);
    }
    p.sizes.push_back(groups[g].size());
  }
  if (p.values.size() < 3) throw Error(ErrorKind::InsufficientData, "at least three observations are required");
  return p;
}

std::vector<double> rank_sums(const Pooled& p, const std::vector<double>& ranks) {
  std::vector<double> sums(p.sizes.size(), 0.0);
  for (std::size_t i = 0; i < ranks.size(); ++i) sums[p.group[i]] += ranks[i];
  return sums;
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = rank;
    i = j + 1;
  }
  return ranks;
}

double tie_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    sum += t * t * t - t;
    i = j + 1;
  }
  return sum;
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw Error(ErrorKind::InvalidArgument, "degrees of freedom must be >= 1");
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

KruskalWallis kruskal_wallis(std::span<const std::vector<double>> groups) {
  const Pooled p = pool(groups);
  const double n = static_cast<double>(p.values.size());
  KruskalWallis out;
  out.df = static_cast<int>(groups.size()) - 1;
  const double correction = 1.0 - tie_sum(p.values) / (n * n * n - n);
  if (correction <= 0.0) return out;  // every value identical

  const auto ranks = midranks(p.values);
  const auto sums = rank_sums(p, ranks);
  double acc = 0.0;
  for (std::size_t g = 0; g < sums.size(); ++g) acc += sums[g] * sums[g] / static_cast<double>(p.sizes[g]);
  // One rounding in the final division: integer rank sums give H as a
  // correctly rounded quotient of exact terms.
  const double h = (12.0 * acc - 3.0 * n * (n + 1.0) * (n + 1.0)) / (n * (n + 1.0));
  out.h = std::max(0.0, h / correction);
  out.p_value = chi_square_sf(out.h, out.df);
  return out;
}

std::string_view to_string(Correction correction) noexcept {
  switch (correction) {
    case Correction::None: return "none";
    case Correction::Bonferroni: return "bonferroni";
    case Correction::Holm: return "holm";
    case Correction::BenjaminiHochberg: return "bh";
  }
  return "none";
}

Correction parse_correction(std::string_view name) {
  if (name == "none") return Correction::None;
  if (name == "bonferroni") return Correction::Bonferroni;
  if (name == "holm") return Correction::Holm;
  if (name == "bh" || name == "fdr_bh") return Correction::BenjaminiHochberg;
  throw Error(ErrorKind::ConfigError, fmt::format("unknown p-value correction '{}'", name));
}

std::vector<double> adjust_p_values(std::span<const double> p_values, Correction correction) {
  const std::size_t m = p_values.size();
  std::vector<double> out(p_values.begin(), p_values.end());
  if (m == 0 || correction == Correction::None) return out;
  const double md = static_cast<double>(m);
  if (correction == Correction::Bonferroni) {
    for (double& p : out) p = std::min(1.0, p * md);
    return out;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  if (correction == Correction::Holm) {
    double running = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      running = std::max(running, (md - static_cast<double>(r)) * p_values[order[r]]);
      out[order[r]] = std::min(1.0, running);
    }
  } else {
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
      running = std::min(running, md / static_cast<double>(r + 1) * p_values[order[r]]);
      out[order[r]] = std::min(1.0, running);
    }
  }
  return out;
}

std::vector<PairwiseComparison> dunn_posthoc(std::span<const std::vector<double>> groups,
                                             double alpha, Correction correction) {
  const Pooled p = pool(groups);
  const double n = static_cast<double>(p.values.size());
  const auto ranks = midranks(p.values);
  const auto sums = rank_sums(p, ranks);
  const double variance = n * (n + 1.0) / 12.0 - tie_sum(p.values) / (12.0 * (n - 1.0));

  const boost::math::normal standard;
  std::vector<PairwiseComparison> out;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      PairwiseComparison c;
      c.first = a;
      c.second = b;
      const double na = static_cast<double>(p.sizes[a]), nb = static_cast<double>(p.sizes[b]);
      const double se = std::sqrt(variance * (1.0 / na + 1.0 / nb));
      if (variance > 0.0) {
        c.z = (sums[a] / na - sums[b] / nb) / se;
        c.p_raw = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(standard, std::abs(c.z))));
      }
      out.push_back(c);
    }
  }
  std::vector<double> raw;
  for (const auto& c : out) raw.push_back(c.p_raw);
  const auto adjusted = adjust_p_values(raw, correction);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].p_adjusted = adjusted[i];
    out[i].significant = adjusted[i] < alpha;
  }
  return out;
}

FeatureTestReport feature_difference_scan(std::span<const AttributeTable> attributes,
                                          const archetype::ArchetypeTable& table, double alpha,
                                          Correction correction) {
  if (table.archetypes.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                fmt::format("{} retained archetype(s); at least two are needed for group tests",
                            table.archetypes.size()));
  }
  if (attributes.empty()) throw Error(ErrorKind::InsufficientData, "no attribute tables");

  FeatureTestReport report;
  report.alpha = alpha;
  report.correction = correction;
  report.features = attributes.front().columns;
  for (const auto& a : table.archetypes) report.archetype_ids.push_back(a.id);

  // member row indices per timestep and archetype
  std::vector<std::vector<std::vector<Eigen::Index>>> rows(attributes.size());
  for (std::size_t t = 0; t < attributes.size(); ++t) {
    const auto& attr = attributes[t];
    if (attr.columns != report.features) {
      throw Error(ErrorKind::InputError, fmt::format("timestep {} has a different feature set", t));
    }
    std::unordered_map<std::string, Eigen::Index> index;
    for (std::size_t i = 0; i < attr.rows(); ++i) index[attr.node_ids[i]] = static_cast<Eigen::Index>(i);
    for (const auto& a : table.archetypes) {
      auto& list = rows[t].emplace_back();
      for (const auto& node : a.members) {
        const auto it = index.find(node);
        if (it == index.end()) {
          throw Error(ErrorKind::MismatchedNodes,
                      fmt::format("node '{}' of archetype {} has no attributes at timestep {}", node,
                                  a.id, t));
        }
        list.push_back(it->second);
      }
    }
  }

  const std::size_t f_count = report.features.size();
  report.tests.resize(attributes.size() * f_count);
  kernels::for_each_job(report.tests.size(), [&](std::size_t job) {
    const std::size_t t = job / f_count, f = job % f_count;
    std::vector<std::vector<double>> groups;
    for (const auto& list : rows[t]) {
      auto& g = groups.emplace_back();
      for (auto r : list) g.push_back(attributes[t].values(r, static_cast<Eigen::Index>(f)));
    }
    FeatureTest& test = report.tests[job];
    test.timestep = attributes[t].timestep;
    test.feature = report.features[f];
    test.omnibus = kruskal_wallis(groups);
    test.significant = test.omnibus.p_value < alpha;
    if (test.significant) test.posthoc = dunn_posthoc(groups, alpha, correction);
  });
  return report;
}

std::string week_label(int timestep, const std::string& start_date) {
  if (start_date.empty()) return fmt::format("week_{}", timestep);
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(start_date.c_str(), "%d-%u-%u", &y, &m, &d) != 3) {
    throw Error(ErrorKind::ConfigError, fmt::format("start_date '{}' is not YYYY-MM-DD", start_date));
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw Error(ErrorKind::ConfigError, fmt::format("invalid start_date '{}'", start_date));
  const std::chrono::year_month_day shifted{std::chrono::sys_days{ymd} + std::chrono::days{7 * timestep}};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(shifted.year()),
                     static_cast<unsigned>(shifted.month()), static_cast<unsigned>(shifted.day()));
}

void write_tests(const FeatureTestReport& report, const std::string& start_date,
                 const std::filesystem::path& path) {
  csv::Writer w({"timestep", "week_start", "feature", "statistic", "df", "p_value", "significant"});
  for (const auto& t : report.tests) {
    w.add_row({std::to_string(t.timestep), week_label(t.timestep, start_date), t.feature,
               csv::format_number(t.omnibus.h), std::to_string(t.omnibus.df),
               csv::format_number(t.omnibus.p_value), t.significant ? "1" : "0"});
  }
  w.save(path);
}

void write_similar_features(const FeatureTestReport& report, const std::string& start_date,
                            const std::filesystem::path& path) {
  csv::Writer w({"week_start", "feature", "statistic", "p_value"});
  for (const auto& t : report.tests) {
    if (t.significant) continue;
    w.add_row({week_label(t.timestep, start_date), t.feature, csv::format_number(t.omnibus.h),
               csv::format_number(t.omnibus.p_value)});
  }
  w.save(path);
}

void write_posthoc(const FeatureTestReport& report, const std::filesystem::path& path) {
  csv::Writer w({"timestep", "feature", "archetype_a", "archetype_b", "z", "p_raw", "p_adjusted",
                 "significant"});
  for (const auto& t : report.tests) {
    for (const auto& c : t.posthoc) {
      w.add_row({std::to_string(t.timestep), t.feature,
                 std::to_string(report.archetype_ids[c.first]),
                 std::to_string(report.archetype_ids[c.second]), csv::format_number(c.z),
                 csv::format_number(c.p_raw), csv::format_number(c.p_adjusted),
                 c.significant ? "1" : "0"});
    }
  }
  w.save(path);
}

void write_feature_summary(const FeatureTestReport& report, const std::filesystem::path& path) {
  csv::Writer w({"feature", "timesteps_significant", "timesteps_total", "median_p_value"});
  for (const auto& feature : report.features) {
    std::vector<double> ps;
    int hits = 0;
    for (const auto& t : report.tests) {
      if (t.feature != feature) continue;
      ps.push_back(t.omnibus.p_value);
      hits += t.significant ? 1 : 0;
    }
    std::sort(ps.begin(), ps.end());
    const double median = ps.empty() ? 1.0
                          : ps.size() % 2 ? ps[ps.size() / 2]
                                          : 0.5 * (ps[ps.size() / 2 - 1] + ps[ps.size() / 2]);
    w.add_row({feature, std::to_string(hits), std::to_string(ps.size()), csv::format_number(median)});
  }
  w.save(path);
}

}  // namespace aane::stats
