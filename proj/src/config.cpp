#include "aane/config.hpp"

#include "aane/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace aane::config {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!object.is_object()) throw Error(ErrorKind::ConfigError, fmt::format("'{}' must be an object", where));
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : object.items()) {
    if (!keys.count(key)) {
      throw Error(ErrorKind::ConfigError, fmt::format("unknown config key '{}{}'", where, key));
    }
  }
}

template <class T>
void read(const json& object, const char* key, T& target) {
  if (object.contains(key)) target = object.at(key).get<T>();
}

std::filesystem::path resolve(const std::string& text, const std::filesystem::path& base) {
  std::filesystem::path p(text);
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void PipelineConfig::validate() const {
  solver.validate();
  if (k_range.empty()) throw Error(ErrorKind::ConfigError, "k_range is empty");
  for (int k : k_range) {
    if (k < 2) throw Error(ErrorKind::ConfigError, fmt::format("K={} is below 2", k));
  }
  if (methods.empty()) throw Error(ErrorKind::ConfigError, "no clustering method selected");
  if (k_override && *k_override < 2) throw Error(ErrorKind::ConfigError, "k_override must be >= 2");
  if (timesteps < 0) throw Error(ErrorKind::ConfigError, "timesteps must be >= 0");
  if (threads < 0) throw Error(ErrorKind::ConfigError, "threads must be >= 0");
  if (fuse_threshold < 0) throw Error(ErrorKind::ConfigError, "fuse_threshold must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::ConfigError, "alpha must lie in (0, 1)");
  if (fit.kmeans.n_init < 1 || fit.kmeans.max_iter < 1 || fit.gmm.max_iter < 1) {
    throw Error(ErrorKind::ConfigError, "iteration counts must be positive");
  }
}

PipelineConfig parse(const std::string& text, const std::filesystem::path& base) {
  PipelineConfig c;
  try {
    const json doc = json::parse(text);
    reject_unknown(doc, "", {"input_dir", "output_dir", "timesteps", "seed", "threads", "embedding",
                             "clustering", "validation", "archetype", "stats"});
    if (doc.contains("input_dir")) c.input_dir = resolve(doc["input_dir"].get<std::string>(), base);
    if (doc.contains("output_dir")) c.output_dir = resolve(doc["output_dir"].get<std::string>(), base);
    read(doc, "timesteps", c.timesteps);
    read(doc, "seed", c.seed);
    read(doc, "threads", c.threads);
    if (doc.contains("embedding")) {
      const auto& e = doc["embedding"];
      reject_unknown(e, "embedding.", {"dimension", "lambda", "rho", "max_iterations", "primal_tolerance"});
      read(e, "dimension", c.solver.dimension);
      read(e, "lambda", c.solver.lambda);
      read(e, "rho", c.solver.rho);
      read(e, "max_iterations", c.solver.max_iterations);
      read(e, "primal_tolerance", c.solver.primal_tolerance);
    }
    if (doc.contains("clustering")) {
      const auto& k = doc["clustering"];
      reject_unknown(k, "clustering.", {"k_range", "methods", "k_override", "kmeans_restarts",
                                        "kmeans_max_iter", "gmm_max_iter", "gmm_tol", "gmm_covariance"});
      read(k, "k_range", c.k_range);
      if (k.contains("methods")) {
        c.methods.clear();
        for (const auto& m : k["methods"]) c.methods.push_back(cluster::parse_method(m.get<std::string>()));
      }
      if (k.contains("k_override") && !k["k_override"].is_null()) c.k_override = k["k_override"].get<int>();
      read(k, "kmeans_restarts", c.fit.kmeans.n_init);
      read(k, "kmeans_max_iter", c.fit.kmeans.max_iter);
      read(k, "gmm_max_iter", c.fit.gmm.max_iter);
      read(k, "gmm_tol", c.fit.gmm.tol);
      if (k.contains("gmm_covariance")) {
        const auto cov = k["gmm_covariance"].get<std::string>();
        if (cov == "full") c.fit.gmm.covariance = cluster::CovarianceType::Full;
        else if (cov == "diagonal") c.fit.gmm.covariance = cluster::CovarianceType::Diagonal;
        else throw Error(ErrorKind::ConfigError, fmt::format("unknown gmm_covariance '{}'", cov));
      }
    }
    if (doc.contains("validation")) {
      reject_unknown(doc["validation"], "validation.", {"stability"});
      read(doc["validation"], "stability", c.stability);
    }
    if (doc.contains("archetype")) {
      const auto& a = doc["archetype"];
      reject_unknown(a, "archetype.", {"min_size", "fuse_threshold"});
      read(a, "min_size", c.min_archetype_size);
      read(a, "fuse_threshold", c.fuse_threshold);
    }
    if (doc.contains("stats")) {
      const auto& s = doc["stats"];
      reject_unknown(s, "stats.", {"alpha", "correction", "start_date"});
      read(s, "alpha", c.alpha);
      if (s.contains("correction")) c.correction = stats::parse_correction(s["correction"].get<std::string>());
      read(s, "start_date", c.start_date);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, fmt::format("malformed config: {}", e.what()));
  }
  c.validate();
  return c;
}

PipelineConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, fmt::format("cannot read config '{}'", path.string()));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text, path.parent_path());
}

std::string to_json(const PipelineConfig& c) {
  json methods = json::array();
  for (auto m : c.methods) methods.push_back(std::string(cluster::to_string(m)));
  json doc{
      {"input_dir", c.input_dir.generic_string()},
      {"output_dir", c.output_dir.generic_string()},
      {"timesteps", c.timesteps},
      {"seed", c.seed},
      {"embedding",
       {{"dimension", c.solver.dimension},
        {"lambda", c.solver.lambda},
        {"rho", c.solver.rho},
        {"max_iterations", c.solver.max_iterations},
        {"primal_tolerance", c.solver.primal_tolerance}}},
      {"clustering",
       {{"k_range", c.k_range},
        {"methods", methods},
        {"k_override", c.k_override ? json(*c.k_override) : json(nullptr)},
        {"kmeans_restarts", c.fit.kmeans.n_init},
        {"kmeans_max_iter", c.fit.kmeans.max_iter},
        {"gmm_max_iter", c.fit.gmm.max_iter},
        {"gmm_tol", c.fit.gmm.tol},
        {"gmm_covariance", c.fit.gmm.covariance == cluster::CovarianceType::Full ? "full" : "diagonal"}}},
      {"validation", {{"stability", c.stability}}},
      {"archetype", {{"min_size", c.min_archetype_size}, {"fuse_threshold", c.fuse_threshold}}},
      {"stats",
       {{"alpha", c.alpha},
        {"correction", std::string(stats::to_string(c.correction))},
        {"start_date", c.start_date}}},
  };
  // Thread count changes scheduling only, never results, so it is not hashed.
  return doc.dump(2);
}

std::vector<int> parse_k_range(const std::string& text) {
  auto to_int = [&](const std::string& part) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, fmt::format("malformed K range '{}'", text));
    }
  };
  std::vector<int> out;
  for (const char* sep : {"..", "-"}) {
    const auto pos = text.find(sep);
    if (pos != std::string::npos && pos > 0) {
      const int lo = to_int(text.substr(0, pos)), hi = to_int(text.substr(pos + std::string(sep).size()));
      if (lo > hi) throw Error(ErrorKind::ConfigError, fmt::format("empty K range '{}'", text));
      for (int k = lo; k <= hi; ++k) out.push_back(k);
      return out;
    }
  }
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(to_int(part));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw Error(ErrorKind::ConfigError, "empty K range");
  return out;
}

std::vector<cluster::Method> parse_methods(const std::string& text) {
  if (text == "both") return {cluster::Method::KMeans, cluster::Method::Gmm};
  return {cluster::parse_method(text)};
}

}  // namespace aane::config
