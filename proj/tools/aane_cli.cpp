#include "aane/config.hpp"
#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "aane/features.hpp"
#include "aane/pipeline.hpp"
#include "aane/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using aane::config::PipelineConfig;

struct Overrides {
  std::string config;
  std::string input_dir;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::string k_range;
  std::string method;
  std::optional<std::size_t> min_archetype_size;
  std::optional<double> alpha;
  std::optional<int> threads;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "JSON configuration file");
  app.add_option("--input-dir", o.input_dir, "Directory holding week_<k>/{edges,attributes}.csv");
  app.add_option("--output-dir", o.output_dir, "Directory for all outputs");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--k-range", o.k_range, "Cluster counts, e.g. 2-6 or 2,4");
  app.add_option("--method", o.method, "Clustering method")->check(CLI::IsMember({"kmeans", "gmm", "both"}));
  app.add_option("--min-archetype-size", o.min_archetype_size, "Smallest archetype kept");
  app.add_option("--alpha", o.alpha, "Significance level");
  app.add_option("--threads", o.threads, "Worker threads (0: all cores)");
}

PipelineConfig build_config(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : aane::config::load(o.config);
  if (!o.input_dir.empty()) c.input_dir = o.input_dir;
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (o.seed) c.seed = *o.seed;
  if (!o.k_range.empty()) c.k_range = aane::config::parse_k_range(o.k_range);
  if (!o.method.empty()) c.methods = aane::config::parse_methods(o.method);
  if (o.min_archetype_size) c.min_archetype_size = *o.min_archetype_size;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.threads) c.threads = *o.threads;
  c.validate();
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
  return c;
}

void print_value(const std::string& name, double value) {
  std::cout << name << "," << aane::csv::format_number(value) << "\n";
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("aane");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%l] %v");
  if (const char* level = std::getenv("AANE_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Attributed network embedding, clustering and archetype analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aane::pipeline::kVersion);
  Overrides o;

  auto* features = app.add_subcommand("features", "Standardize inputs, or compute one raw feature");
  features->require_subcommand(0, 1);
  add_common(*features, o);

  std::string grid_path;
  auto* venables = features->add_subcommand("venables", "Venables distance of an activity grid (x,y,intensity)");
  venables->add_option("--grid", grid_path, "Grid CSV")->required();

  std::string cases_path;
  std::size_t begin = 0, end = 0;
  double step_days = 1.0, tau = aane::features::kDefaultSerialIntervalDays;
  auto* r0 = features->add_subcommand("r0", "Reproduction number from cumulative cases");
  r0->add_option("--cases", cases_path, "CSV with a cumulative_cases column")->required();
  r0->add_option("--begin", begin, "First index of the window")->required();
  r0->add_option("--end", end, "Last index of the window")->required();
  r0->add_option("--step-days", step_days, "Days between rows");
  r0->add_option("--tau", tau, "Serial interval in days");

  std::string matrix_path;
  auto* centrality = features->add_subcommand("centrality", "Weighted degree of a pairwise index matrix");
  centrality->add_option("--matrix", matrix_path, "Square CSV matrix")->required();

  std::string series_path, series_column;
  std::size_t baseline = 0;
  auto* pct = features->add_subcommand("pct-change", "Percent change of a column from a baseline row");
  pct->add_option("--input", series_path, "CSV file")->required();
  pct->add_option("--column", series_column, "Column name")->required();
  pct->add_option("--baseline", baseline, "Baseline row index");

  auto* embed = app.add_subcommand("embed", "Embed every timestep");
  auto* cluster = app.add_subcommand("cluster", "Cluster every embedding for each K and method");
  auto* validate = app.add_subcommand("validate", "Silhouette sweep, stability and selection");
  auto* archetype = app.add_subcommand("archetype", "Align labels and merge trajectories");
  auto* test = app.add_subcommand("test", "Kruskal-Wallis and Dunn tests across archetypes");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write manifest.json");
  for (auto* sub : {embed, cluster, validate, archetype, test, pipeline}) add_common(*sub, o);

  aane::synth::SyntheticSpec spec;
  std::string synth_dir;
  auto* synth = app.add_subcommand("synth", "Write a planted-partition dataset");
  synth->add_option("--output-dir", synth_dir, "Dataset directory")->required();
  synth->add_option("--blocks", spec.blocks);
  synth->add_option("--nodes-per-block", spec.nodes_per_block);
  synth->add_option("--timesteps", spec.timesteps);
  synth->add_option("--p-in", spec.p_in);
  synth->add_option("--p-out", spec.p_out);
  synth->add_option("--shift", spec.shift, "Attribute shift in standard deviations");
  synth->add_option("--features", spec.features);
  synth->add_option("--switch-fraction", spec.switch_fraction, "Share of each block that moves at T/2");
  synth->add_option("--persistence", spec.persistence, "Share of attribute noise fixed per node");
  synth->add_option("--seed", spec.seed);

  try {
    app.parse(argc, argv);

    if (features->parsed()) {
      if (venables->parsed()) {
        print_value("venables_distance", aane::features::venables_distance(aane::features::read_activity_grid(grid_path)));
      } else if (r0->parsed()) {
        const auto series = aane::features::read_case_series(cases_path, step_days);
        print_value("reproduction_number", aane::features::reproduction_number(series, {begin, end}, tau));
      } else if (centrality->parsed()) {
        const auto m = aane::features::read_pairwise_matrix(matrix_path);
        const auto degree = aane::features::weighted_degree_centrality(m);
        std::cout << "node_id,centrality\n";
        for (std::size_t i = 0; i < m.node_ids.size(); ++i) {
          std::cout << m.node_ids[i] << "," << aane::csv::format_number(degree(static_cast<Eigen::Index>(i))) << "\n";
        }
      } else if (pct->parsed()) {
        const auto table = aane::csv::read(series_path);
        const auto col = table.column(series_column);
        std::vector<double> values;
        for (const auto& row : table.rows) values.push_back(aane::csv::parse_number(row[col], series_path));
        std::cout << "index,pct_change\n";
        const auto change = aane::features::percent_change_from_baseline(values, baseline);
        for (std::size_t i = 0; i < change.size(); ++i) {
          std::cout << i << "," << aane::csv::format_number(change[i]) << "\n";
        }
      } else {
        aane::pipeline::run_features(build_config(o));
      }
    } else if (embed->parsed()) {
      aane::pipeline::run_embed(build_config(o));
    } else if (cluster->parsed()) {
      aane::pipeline::run_cluster(build_config(o));
    } else if (validate->parsed()) {
      aane::pipeline::run_validate(build_config(o));
    } else if (archetype->parsed()) {
      aane::pipeline::run_archetype(build_config(o));
    } else if (test->parsed()) {
      aane::pipeline::run_stats(build_config(o));
    } else if (pipeline->parsed()) {
      const auto manifest = aane::pipeline::run_pipeline(build_config(o));
      spdlog::info("pipeline: K={} method={}, {} output files", manifest.selected_k,
                   manifest.selected_method, manifest.outputs.size());
    } else if (synth->parsed()) {
      aane::synth::generate(spec, synth_dir);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const aane::Error& e) {
    std::cerr << nlohmann::json{{"error", std::string(aane::to_string(e.kind()))}, {"message", e.what()}}.dump()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  }
  return 0;
}
