#include "aane/pipeline.hpp"

#include "aane/archetype.hpp"
#include "aane/csv.hpp"
#include "aane/digest.hpp"
#include "aane/error.hpp"
#include "aane/features.hpp"
#include "aane/graph.hpp"
#include "aane/kernels.hpp"
#include "aane/svg.hpp"
#include "aane/validate.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aane::pipeline {
namespace fs = std::filesystem;
namespace {

fs::path week_dir(const fs::path& root, int t) { return root / fmt::format("week_{}", t); }
fs::path features_dir(const config::PipelineConfig& c, int t) {
  return week_dir(c.output_dir / "features", t);
}

// Timesteps available to downstream stages.
int feature_timesteps(const config::PipelineConfig& c) {
  int t = 0;
  while (fs::exists(features_dir(c, t) / "attributes.csv")) ++t;
  if (t == 0) {
    throw Error(ErrorKind::InputError,
                fmt::format("no feature tables under '{}'; run the features stage first",
                            (c.output_dir / "features").string()));
  }
  return t;
}

graph::AttributedNetwork load_network(const config::PipelineConfig& c, int t) {
  auto attrs = features::read_attribute_table(features_dir(c, t) / "attributes.csv", t);
  const auto edges = graph::read_edges(features_dir(c, t) / "edges.csv");
  auto network = graph::build_network(edges, std::move(attrs));
  network.timestep = t;
  return network;
}

std::vector<embed::Embedding> load_embeddings(const config::PipelineConfig& c, int timesteps) {
  std::vector<embed::Embedding> out;
  for (int t = 0; t < timesteps; ++t) {
    out.push_back(embed::read_embedding(c.output_dir / "embeddings" / fmt::format("week_{}.csv", t)));
  }
  return out;
}

std::string fmt_or_nan(double v) { return std::isfinite(v) ? csv::format_number(v) : "nan"; }

struct Selection {
  int k = 0;
  cluster::Method method = cluster::Method::KMeans;
};

Selection read_selection(const config::PipelineConfig& c) {
  const auto table = csv::read(c.output_dir / "validate" / "selection.csv");
  const auto key = table.column("key"), value = table.column("value");
  Selection s;
  bool have_k = false, have_m = false;
  for (const auto& row : table.rows) {
    if (row[key] == "selected_k") {
      s.k = std::stoi(row[value]);
      have_k = true;
    } else if (row[key] == "selected_method") {
      s.method = cluster::parse_method(row[value]);
      have_m = true;
    }
  }
  if (!have_k || !have_m) {
    throw Error(ErrorKind::InputError, fmt::format("'{}' lacks the selected K or method", table.source.string()));
  }
  return s;
}

std::vector<cluster::ClusterAssignment> pick(const cluster::AssignmentFile& file, int k,
                                             cluster::Method method, int timesteps) {
  std::vector<cluster::ClusterAssignment> out;
  for (const auto& a : file.assignments) {
    if (a.k == k && a.method == method) out.push_back(a);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.timestep < b.timestep; });
  if (static_cast<int>(out.size()) != timesteps) {
    throw Error(ErrorKind::InputError,
                fmt::format("expected {} {} assignments with K={}, found {}", timesteps,
                            cluster::to_string(method), k, out.size()));
  }
  return out;
}

void apply_threads(const config::PipelineConfig& c) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#else
  (void)c;
#endif
}

}  // namespace

std::vector<int> fitted_ks(const config::PipelineConfig& c) {
  std::set<int> ks(c.k_range.begin(), c.k_range.end());
  if (c.k_override) ks.insert(*c.k_override);
  return {ks.begin(), ks.end()};
}

int input_timesteps(const config::PipelineConfig& c) {
  if (c.input_dir.empty()) throw Error(ErrorKind::ConfigError, "no input directory configured");
  if (!fs::is_directory(c.input_dir)) {
    throw Error(ErrorKind::InputError, fmt::format("input directory '{}' does not exist", c.input_dir.string()));
  }
  if (c.timesteps > 0) {
    for (int t = 0; t < c.timesteps; ++t) {
      const auto dir = week_dir(c.input_dir, t);
      if (!fs::is_directory(dir)) {
        throw Error(ErrorKind::InputError, fmt::format("missing week directory '{}'", dir.string()));
      }
    }
    return c.timesteps;
  }
  int t = 0;
  while (fs::is_directory(week_dir(c.input_dir, t))) ++t;
  if (t == 0) {
    throw Error(ErrorKind::InputError,
                fmt::format("missing week directory '{}'", week_dir(c.input_dir, 0).string()));
  }
  return t;
}

void run_features(const config::PipelineConfig& c) {
  const int timesteps = input_timesteps(c);
  std::vector<AttributeTable> tables;
  std::vector<std::vector<graph::EdgeRecord>> edges;
  for (int t = 0; t < timesteps; ++t) {
    const auto dir = week_dir(c.input_dir, t);
    for (const char* name : {"attributes.csv", "edges.csv"}) {
      if (!fs::exists(dir / name)) {
        throw Error(ErrorKind::InputError, fmt::format("missing input file '{}'", (dir / name).string()));
      }
    }
    tables.push_back(features::read_attribute_table(dir / "attributes.csv", t));
    edges.push_back(graph::read_edges(dir / "edges.csv"));
  }

  // Node universe: identical across timesteps; rows follow timestep 0's order.
  const NodeIds& universe = tables.front().node_ids;
  const std::set<std::string> reference(universe.begin(), universe.end());
  for (int t = 0; t < timesteps; ++t) {
    auto& table = tables[static_cast<std::size_t>(t)];
    const std::set<std::string> nodes(table.node_ids.begin(), table.node_ids.end());
    if (nodes != reference) {
      throw Error(ErrorKind::MismatchedNodes,
                  fmt::format("'{}' does not share the node set of week_0",
                              (week_dir(c.input_dir, t) / "attributes.csv").string()));
    }
    if (table.columns != tables.front().columns) {
      throw Error(ErrorKind::InputError,
                  fmt::format("'{}' has different feature columns than week_0",
                              (week_dir(c.input_dir, t) / "attributes.csv").string()));
    }
    for (const auto& e : edges[static_cast<std::size_t>(t)]) {
      for (const auto* id : {&e.src, &e.dst}) {
        if (!reference.count(*id)) {
          throw Error(ErrorKind::UnknownNode,
                      fmt::format("'{}' references node '{}' absent from the attribute table",
                                  (week_dir(c.input_dir, t) / "edges.csv").string(), *id));
        }
      }
    }
    if (table.node_ids != universe) {
      std::map<std::string, Eigen::Index> row;
      for (std::size_t i = 0; i < table.rows(); ++i) row[table.node_ids[i]] = static_cast<Eigen::Index>(i);
      Matrix reordered(table.values.rows(), table.values.cols());
      for (std::size_t i = 0; i < universe.size(); ++i) {
        reordered.row(static_cast<Eigen::Index>(i)) = table.values.row(row.at(universe[i]));
      }
      table.values = std::move(reordered);
      table.node_ids = universe;
    }
  }

  for (int t = 0; t < timesteps; ++t) {
    const auto st = features::standardize(tables[static_cast<std::size_t>(t)]);
    const auto network = graph::build_network(edges[static_cast<std::size_t>(t)], st);
    features::write_attribute_table(st, features_dir(c, t) / "attributes.csv");
    csv::Writer w({"src", "dst", "count"});
    for (const auto& e : network.edges) {
      w.add_row({network.node_ids[e.u], network.node_ids[e.v], csv::format_number(e.weight)});
    }
    w.save(features_dir(c, t) / "edges.csv");
  }
  spdlog::info("features: {} timesteps, {} nodes, {} features", timesteps, universe.size(),
               tables.front().cols());
}

void run_embed(const config::PipelineConfig& c) {
  const int timesteps = feature_timesteps(c);
  std::vector<embed::SolverTrace> traces(static_cast<std::size_t>(timesteps));
  kernels::for_each_job(static_cast<std::size_t>(timesteps), [&](std::size_t job) {
    const int t = static_cast<int>(job);
    const auto network = load_network(c, t);
    const auto result = embed::embed(network, c.solver);
    embed::write_embedding(result.embedding, c.output_dir / "embeddings" / fmt::format("week_{}.csv", t));
    embed::write_trace(result.trace, c.output_dir / "embeddings" / fmt::format("trace_week_{}.csv", t));
    traces[job] = result.trace;
  });
  csv::Writer w({"timestep", "iterations", "objective_initial", "objective_final", "residual_final",
                 "converged", "residual_monotone", "stalled"});
  int converged = 0;
  for (int t = 0; t < timesteps; ++t) {
    const auto& tr = traces[static_cast<std::size_t>(t)];
    converged += tr.converged ? 1 : 0;
    w.add_row({std::to_string(t), std::to_string(tr.iterations), csv::format_number(tr.objective.front()),
               csv::format_number(tr.objective.back()), csv::format_number(tr.residual.back()),
               tr.converged ? "1" : "0", tr.residual_monotone ? "1" : "0", tr.stalled ? "1" : "0"});
  }
  w.save(c.output_dir / "embeddings" / "convergence.csv");
  if (converged < timesteps) {
    spdlog::warn("embed: {}/{} timesteps reached the residual tolerance (see embeddings/convergence.csv)",
                 converged, timesteps);
  } else {
    spdlog::info("embed: all {} timesteps converged (d={})", timesteps, c.solver.dimension);
  }
}

void run_cluster(const config::PipelineConfig& c) {
  const int timesteps = feature_timesteps(c);
  const auto embeddings = load_embeddings(c, timesteps);
  const auto ks = fitted_ks(c);
  const auto n = embeddings.front().values.rows();
  for (int k : ks) {
    if (k > n - 1) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("K={} exceeds n-1 for n={} nodes", k, n));
    }
  }
  const std::size_t per_t = ks.size() * c.methods.size();
  std::vector<cluster::ClusterAssignment> fits(static_cast<std::size_t>(timesteps) * per_t);
  kernels::for_each_job(fits.size(), [&](std::size_t job) {
    const std::size_t t = job / per_t;
    const int k = ks[(job % per_t) / c.methods.size()];
    const auto method = c.methods[job % c.methods.size()];
    fits[job] = cluster::fit(embeddings[t].values, k, method, c.seed, c.fit);
    fits[job].timestep = static_cast<int>(t);
  });
  cluster::write_assignments(fits, embeddings.front().node_ids, c.output_dir / "clusters" / "assignments.csv");
  csv::Writer w({"timestep", "method", "K", "score"});
  for (const auto& a : fits) {
    w.add_row({std::to_string(a.timestep), std::string(cluster::to_string(a.method)), std::to_string(a.k),
               csv::format_number(a.score)});
  }
  w.save(c.output_dir / "clusters" / "fits.csv");
  spdlog::info("cluster: {} fits", fits.size());
}

void run_validate(const config::PipelineConfig& c) {
  const int timesteps = feature_timesteps(c);
  const auto embeddings = load_embeddings(c, timesteps);
  std::vector<Matrix> points;
  for (const auto& e : embeddings) points.push_back(e.values);
  const auto file = cluster::read_assignments(c.output_dir / "clusters" / "assignments.csv");
  const auto ks = fitted_ks(c);
  const auto out = c.output_dir / "validate";

  const auto report = validate::silhouette_report(points, file.assignments, ks, c.methods);
  {
    csv::Writer w({"K", "method", "mean_silhouette", "rank"});
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
        w.add_row({std::to_string(ks[ki]), std::string(cluster::to_string(c.methods[mi])),
                   csv::format_number(report.mean[ki][mi]),
                   std::to_string(report.rank_of(ks[ki], c.methods[mi]))});
      }
    }
    w.save(out / "silhouette.csv");
    csv::Writer weekly({"timestep", "K", "method", "silhouette"});
    for (int t = 0; t < timesteps; ++t) {
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
          weekly.add_row({std::to_string(t), std::to_string(ks[ki]),
                          std::string(cluster::to_string(c.methods[mi])),
                          csv::format_number(report.per_timestep[static_cast<std::size_t>(t)][ki][mi])});
        }
      }
    }
    weekly.save(out / "silhouette_weekly.csv");
    std::vector<std::string> x;
    for (int k : ks) x.push_back(fmt::format("K={}", k));
    std::vector<svg::Series> series;
    for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
      svg::Series s{std::string(cluster::to_string(c.methods[mi])), {}};
      for (std::size_t ki = 0; ki < ks.size(); ++ki) s.values.push_back(report.mean[ki][mi]);
      series.push_back(std::move(s));
    }
    csv::write_text(out / "silhouette.svg",
                    svg::line_chart("Week-averaged silhouette", x, series, "silhouette"));
  }

  {
    csv::Writer w({"timestep", "K", "method", "dunn_index"});
    for (const auto& a : file.assignments) {
      double value = std::nan("");
      try {
        value = validate::dunn_index(points[static_cast<std::size_t>(a.timestep)], a.labels);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ZeroDiameter) throw;
      }
      w.add_row({std::to_string(a.timestep), std::to_string(a.k),
                 std::string(cluster::to_string(a.method)), fmt_or_nan(value)});
    }
    w.save(out / "dunn.csv");
  }

  const auto [best_k, best_method] = report.best();
  Selection selected{c.k_override.value_or(best_k), best_method};
  const auto ki = static_cast<std::size_t>(std::find(ks.begin(), ks.end(), selected.k) - ks.begin());
  if (c.k_override) {
    std::size_t mi_best = 0;
    for (std::size_t mi = 1; mi < c.methods.size(); ++mi) {
      if (report.mean[ki][mi] > report.mean[ki][mi_best]) mi_best = mi;
    }
    selected.method = c.methods[mi_best];
  }

  csv::Writer stab({"method", "apn", "ad", "adm", "fom", "rank_apn", "rank_ad", "rank_adm",
                    "rank_fom", "rank_sum"});
  csv::Writer stab_weekly({"timestep", "method", "apn", "ad", "adm", "fom"});
  if (c.stability) {
    std::vector<graph::AttributedNetwork> networks;
    for (int t = 0; t < timesteps; ++t) networks.push_back(load_network(c, t));
    std::vector<validate::StabilityInput> inputs(static_cast<std::size_t>(timesteps));
    for (int t = 0; t < timesteps; ++t) {
      auto& in = inputs[static_cast<std::size_t>(t)];
      in.network = &networks[static_cast<std::size_t>(t)];
      in.embedding = &points[static_cast<std::size_t>(t)];
      for (auto m : c.methods) {
        const auto it = std::find_if(file.assignments.begin(), file.assignments.end(), [&](const auto& a) {
          return a.timestep == t && a.k == selected.k && a.method == m;
        });
        if (it == file.assignments.end()) {
          throw Error(ErrorKind::InputError, fmt::format("no assignment for timestep {} at K={}", t, selected.k));
        }
        in.reference.push_back(&*it);
      }
    }
    const auto stability = validate::stability(inputs, c.solver, selected.k, c.methods, c.seed, c.fit);
    selected.method = stability.preferred();
    for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
      const auto& a = stability.average[mi];
      const auto& r = stability.ranks[mi];
      stab.add_row({std::string(cluster::to_string(c.methods[mi])), csv::format_number(a.apn),
                    csv::format_number(a.ad), csv::format_number(a.adm), csv::format_number(a.fom),
                    std::to_string(r[0]), std::to_string(r[1]), std::to_string(r[2]),
                    std::to_string(r[3]), std::to_string(r[0] + r[1] + r[2] + r[3])});
      for (int t = 0; t < timesteps; ++t) {
        const auto& s = stability.per_timestep[static_cast<std::size_t>(t)][mi];
        stab_weekly.add_row({std::to_string(t), std::string(cluster::to_string(c.methods[mi])),
                             csv::format_number(s.apn), csv::format_number(s.ad),
                             csv::format_number(s.adm), csv::format_number(s.fom)});
      }
    }
  }
  stab.save(out / "stability.csv");
  stab_weekly.save(out / "stability_weekly.csv");

  csv::Writer sel({"key", "value"});
  sel.add_row({"silhouette_best_k", std::to_string(best_k)});
  sel.add_row({"silhouette_best_method", std::string(cluster::to_string(best_method))});
  sel.add_row({"k_override", c.k_override ? std::to_string(*c.k_override) : ""});
  sel.add_row({"selected_k", std::to_string(selected.k)});
  sel.add_row({"selected_method", std::string(cluster::to_string(selected.method))});
  sel.add_row({"method_rule", c.stability ? "stability" : "silhouette"});
  sel.save(out / "selection.csv");

  const auto chosen = pick(file, selected.k, selected.method, timesteps);
  csv::write_text(out / "projection_week_0.svg",
                  svg::scatter(fmt::format("Embedding, week 0 ({} K={})",
                                           cluster::to_string(selected.method), selected.k),
                               embed::project_2d(points.front()), chosen.front().labels));
  spdlog::info("validate: silhouette optimum K={} ({}); selected K={} with {}", best_k,
               cluster::to_string(best_method), selected.k, cluster::to_string(selected.method));
}

void run_archetype(const config::PipelineConfig& c) {
  const int timesteps = feature_timesteps(c);
  const auto selection = read_selection(c);
  const auto file = cluster::read_assignments(c.output_dir / "clusters" / "assignments.csv");
  const auto aligned = archetype::align_labels(pick(file, selection.k, selection.method, timesteps));
  const auto out = c.output_dir / "archetypes";
  cluster::write_assignments(aligned, file.node_ids, out / "aligned_assignments.csv");

  const auto paths = archetype::trajectories(file.node_ids, aligned);
  auto table = archetype::merge_archetypes(paths, c.min_archetype_size);
  table = archetype::fuse_similar(table, c.fuse_threshold);
  archetype::write_table(table, out / "members.csv", out / "summary.csv");
  csv::write_text(out / "timeline.svg", svg::timeline(table));
  std::size_t kept = 0;
  for (const auto& a : table.archetypes) kept += a.members.size();
  spdlog::info("archetype: {} retained ({} nodes), {} dropped", table.archetypes.size(), kept,
               table.dropped.size());
}

void run_stats(const config::PipelineConfig& c) {
  const int timesteps = feature_timesteps(c);
  std::vector<AttributeTable> attributes;
  for (int t = 0; t < timesteps; ++t) {
    attributes.push_back(features::read_attribute_table(features_dir(c, t) / "attributes.csv", t));
  }
  const auto out = c.output_dir / "archetypes";
  const auto table = archetype::read_table(out / "members.csv", out / "summary.csv");
  const auto dir = c.output_dir / "stats";

  stats::FeatureTestReport report;
  report.alpha = c.alpha;
  report.correction = c.correction;
  report.features = attributes.front().columns;
  if (table.archetypes.size() >= 2) {
    report = stats::feature_difference_scan(attributes, table, c.alpha, c.correction);
  } else {
    spdlog::warn("stats: {} retained archetype(s); group tests skipped", table.archetypes.size());
  }
  stats::write_tests(report, c.start_date, dir / "kruskal_wallis.csv");
  stats::write_similar_features(report, c.start_date, dir / "similar_features.csv");
  stats::write_posthoc(report, dir / "posthoc.csv");
  stats::write_feature_summary(report, dir / "feature_summary.csv");

  const std::size_t f_count = report.features.size();
  Matrix heat = Matrix::Zero(static_cast<Eigen::Index>(f_count), timesteps);
  std::vector<std::vector<bool>> marked(f_count, std::vector<bool>(static_cast<std::size_t>(timesteps)));
  std::vector<std::string> weeks;
  for (int t = 0; t < timesteps; ++t) weeks.push_back(stats::week_label(t, c.start_date));
  for (std::size_t i = 0; i < report.tests.size(); ++i) {
    const auto& test = report.tests[i];
    const auto f = i % f_count;
    heat(static_cast<Eigen::Index>(f), test.timestep) =
        std::min(10.0, -std::log10(std::max(test.omnibus.p_value, 1e-300)));
    marked[f][static_cast<std::size_t>(test.timestep)] = test.significant;
  }
  csv::write_text(dir / "significance.svg",
                  svg::heatmap("Kruskal-Wallis -log10(p) by feature and week (dot: significant)",
                               report.features, weeks, heat, 0.0, 10.0, marked));
  std::size_t significant = 0;
  for (const auto& t : report.tests) significant += t.significant ? 1 : 0;
  spdlog::info("stats: {}/{} feature-week tests significant at alpha={}", significant,
               report.tests.size(), c.alpha);
}

std::vector<FileDigest> output_digests(const fs::path& output_dir) {
  std::vector<FileDigest> out;
  for (const auto& entry : fs::recursive_directory_iterator(output_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), output_dir).generic_string();
    if (rel == "manifest.json") continue;
    out.push_back({rel, digest::sha256_file(entry.path())});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

RunManifest run_pipeline(const config::PipelineConfig& c) {
  c.validate();
  apply_threads(c);
  RunManifest manifest;
  manifest.config_json = config::to_json(c);
  manifest.config_hash = digest::sha256(manifest.config_json);

  const int timesteps = input_timesteps(c);
  for (int t = 0; t < timesteps; ++t) {
    for (const char* name : {"attributes.csv", "edges.csv"}) {
      const auto path = week_dir(c.input_dir, t) / name;
      if (fs::exists(path)) {
        manifest.inputs.push_back({fmt::format("week_{}/{}", t, name), digest::sha256_file(path)});
      }
    }
  }
  // Stale outputs from a previous run with other settings would otherwise leak in.
  for (const char* sub : {"features", "embeddings", "clusters", "validate", "archetypes", "stats"}) {
    fs::remove_all(c.output_dir / sub);
  }

  using Clock = std::chrono::steady_clock;
  const std::pair<const char*, void (*)(const config::PipelineConfig&)> stages[] = {
      {"features", run_features}, {"embed", run_embed},         {"cluster", run_cluster},
      {"validate", run_validate}, {"archetype", run_archetype}, {"stats", run_stats},
  };
  for (const auto& [name, stage] : stages) {
    const auto start = Clock::now();
    stage(c);
    manifest.timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
  }

  const auto selection = read_selection(c);
  manifest.selected_k = selection.k;
  manifest.selected_method = std::string(cluster::to_string(selection.method));
  manifest.outputs = output_digests(c.output_dir);
  write_manifest(manifest, c.output_dir / "manifest.json");
  return manifest;
}

void write_manifest(const RunManifest& m, const fs::path& path) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["version"] = m.version;
  doc["config_hash"] = m.config_hash;
  doc["config"] = ordered_json::parse(m.config_json);
  auto files = [](const std::vector<FileDigest>& list) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : list) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return arr;
  };
  doc["inputs"] = files(m.inputs);
  ordered_json timings = ordered_json::array();
  for (const auto& t : m.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  doc["timings"] = timings;
  doc["selected"] = {{"K", m.selected_k}, {"method", m.selected_method}};
  doc["outputs"] = files(m.outputs);
  csv::write_text(path, doc.dump(2) + "\n");
}

}  // namespace aane::pipeline
