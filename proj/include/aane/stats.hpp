#pragma once

#include "aane/archetype.hpp"
#include "aane/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aane::stats {

/// Ranks 1..N with tied values sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

/// Sum over tie groups of (t^3 - t).
double tie_sum(std::span<const double> values);

struct KruskalWallis {
  double h = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Tie-corrected H with a chi-square p-value on K - 1 degrees of freedom.
/// Needs at least two non-empty groups and N >= 3 (InsufficientData);
/// a fully tied sample gives H = 0, p = 1.
KruskalWallis kruskal_wallis(std::span<const std::vector<double>> groups);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, int df);

enum class Correction { None, Bonferroni, Holm, BenjaminiHochberg };

std::string_view to_string(Correction correction) noexcept;
Correction parse_correction(std::string_view name);

/// Multiplicity-adjusted p-values, returned in input order and capped at 1.
std::vector<double> adjust_p_values(std::span<const double> p_values, Correction correction);

struct PairwiseComparison {
  std::size_t first = 0;  // group indices, first < second
  std::size_t second = 0;
  double z = 0.0;  // (mean rank of first - mean rank of second) / standard error
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;
};

/// Dunn's rank-based pairwise comparisons over the pooled ranking, with
/// two-sided normal p-values. Pairs are listed as (0,1), (0,2), ..., (K-2,K-1).
std::vector<PairwiseComparison> dunn_posthoc(std::span<const std::vector<double>> groups,
                                             double alpha = 0.05,
                                             Correction correction = Correction::Holm);

struct FeatureTest {
  int timestep = 0;
  std::string feature;
  KruskalWallis omnibus;
  bool significant = false;
  std::vector<PairwiseComparison> posthoc;  // empty unless significant
};

struct FeatureTestReport {
  double alpha = 0.05;
  Correction correction = Correction::Holm;
  std::vector<int> archetype_ids;  // group order used by the post hoc indices
  std::vector<std::string> features;
  std::vector<FeatureTest> tests;  // ordered by (timestep, feature column)
};

/// Kruskal-Wallis for each timestep and feature across the retained
/// archetypes, followed by Dunn's test wherever the omnibus test rejects.
/// Throws MismatchedNodes when an archetype member lacks attribute values.
FeatureTestReport feature_difference_scan(std::span<const AttributeTable> attributes,
                                          const archetype::ArchetypeTable& table,
                                          double alpha = 0.05,
                                          Correction correction = Correction::Holm);

/// Label for a timestep: ISO start date plus 7 days per step when
/// `start_date` is non-empty, else "week_<t>".
std::string week_label(int timestep, const std::string& start_date);

/// Every omnibus result: timestep,week_start,feature,statistic,df,p_value,significant.
void write_tests(const FeatureTestReport& report, const std::string& start_date,
                 const std::filesystem::path& path);
/// Non-significant (feature, week) pairs: week_start,feature,statistic,p_value.
void write_similar_features(const FeatureTestReport& report, const std::string& start_date,
                            const std::filesystem::path& path);
/// timestep,feature,archetype_a,archetype_b,z,p_raw,p_adjusted,significant.
void write_posthoc(const FeatureTestReport& report, const std::filesystem::path& path);
/// Per feature: number of timesteps where it distinguishes the archetypes.
void write_feature_summary(const FeatureTestReport& report, const std::filesystem::path& path);

}  // namespace aane::stats
