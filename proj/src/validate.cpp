#include "aane/validate.hpp"

#include "aane/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

namespace aane::validate {
namespace {

// Cluster sizes for labels that must cover [0, K) without gaps.
std::vector<std::size_t> cluster_sizes(std::span<const int> labels, std::size_t n_points) {
  if (labels.size() != n_points) {
    throw Error(ErrorKind::InvalidArgument, "one label per point is required");
  }
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorKind::InvalidArgument, "labels must be nonnegative");
    k = std::max(k, l + 1);
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  if (k < 2) throw Error(ErrorKind::SingleCluster, "at least two clusters are required");
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] == 0) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("cluster {} is empty", c));
    }
  }
  return sizes;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

SilhouetteValues silhouette(const Matrix& points, std::span<const int> labels,
                            kernels::Backend backend) {
  const auto sizes = cluster_sizes(labels, static_cast<std::size_t>(points.rows()));
  const int k = static_cast<int>(sizes.size());
  const Matrix sums = kernels::cluster_distance_sums(points, labels, k, backend);

  SilhouetteValues out;
  out.values.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] == 1) {
      out.values[i] = 0.0;
      continue;
    }
    const auto ii = static_cast<Eigen::Index>(i);
    const double a = sums(ii, static_cast<Eigen::Index>(own)) / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (static_cast<std::size_t>(c) == own) continue;
      b = std::min(b, sums(ii, c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]));
    }
    const double scale = std::max(a, b);
    out.values[i] = scale > 0.0 ? (b - a) / scale : 0.0;
  }
  out.average = std::accumulate(out.values.begin(), out.values.end(), 0.0) /
                static_cast<double>(out.values.size());
  return out;
}

double dunn_index(const Matrix& points, std::span<const int> labels, kernels::Backend backend) {
  cluster_sizes(labels, static_cast<std::size_t>(points.rows()));
  const auto [separation, diameter] = kernels::separation_and_diameter(points, labels, backend);
  if (diameter == 0.0) {
    throw Error(ErrorKind::ZeroDiameter, "every cluster has zero diameter");
  }
  return separation / diameter;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "label vectors differ in size");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : joint) index += choose2(count);
  for (const auto& [key, count] : rows) sum_rows += choose2(count);
  for (const auto& [key, count] : cols) sum_cols += choose2(count);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;  // both partitions trivial and identical in shape
  return (index - expected) / (maximum - expected);
}

int SilhouetteReport::best_k(cluster::Method method) const {
  const auto mi = static_cast<std::size_t>(
      std::find(methods.begin(), methods.end(), method) - methods.begin());
  if (mi == methods.size()) throw Error(ErrorKind::InvalidArgument, "method not in report");
  std::size_t best = 0;
  for (std::size_t ki = 1; ki < ks.size(); ++ki) {
    if (mean[ki][mi] > mean[best][mi]) best = ki;
  }
  return ks[best];
}

std::pair<int, cluster::Method> SilhouetteReport::best() const {
  std::size_t bk = 0, bm = 0;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      if (mean[ki][mi] > mean[bk][bm]) {
        bk = ki;
        bm = mi;
      }
    }
  }
  return {ks[bk], methods[bm]};
}

int SilhouetteReport::rank_of(int k, cluster::Method method) const {
  const auto mi = static_cast<std::size_t>(
      std::find(methods.begin(), methods.end(), method) - methods.begin());
  const auto ki = static_cast<std::size_t>(std::find(ks.begin(), ks.end(), k) - ks.begin());
  if (mi == methods.size() || ki == ks.size()) {
    throw Error(ErrorKind::InvalidArgument, "(K, method) not in report");
  }
  int rank = 1;
  for (std::size_t other = 0; other < ks.size(); ++other) {
    if (mean[other][mi] > mean[ki][mi]) ++rank;
  }
  return rank;
}

SilhouetteReport silhouette_report(std::span<const Matrix> embeddings,
                                   std::span<const cluster::ClusterAssignment> assignments,
                                   std::span<const int> ks,
                                   std::span<const cluster::Method> methods) {
  SilhouetteReport report;
  report.ks.assign(ks.begin(), ks.end());
  report.methods.assign(methods.begin(), methods.end());
  const std::size_t t_count = embeddings.size();
  if (t_count == 0) throw Error(ErrorKind::InsufficientData, "no timesteps to evaluate");

  std::map<std::tuple<int, int, int>, const cluster::ClusterAssignment*> index;
  for (const auto& a : assignments) index[{a.timestep, a.k, static_cast<int>(a.method)}] = &a;

  report.per_timestep.assign(
      t_count, std::vector<std::vector<double>>(ks.size(), std::vector<double>(methods.size())));
  const std::size_t jobs = t_count * ks.size() * methods.size();
  kernels::for_each_job(jobs, [&](std::size_t job) {
    const std::size_t mi = job % methods.size();
    const std::size_t ki = (job / methods.size()) % ks.size();
    const std::size_t t = job / (methods.size() * ks.size());
    const auto it = index.find({static_cast<int>(t), ks[ki], static_cast<int>(methods[mi])});
    if (it == index.end()) {
      throw Error(ErrorKind::InputError,
                  fmt::format("no {} assignment for timestep {} and K={}",
                              cluster::to_string(methods[mi]), t, ks[ki]));
    }
    report.per_timestep[t][ki][mi] = silhouette(embeddings[t], it->second->labels).average;
  });

  report.mean.assign(ks.size(), std::vector<double>(methods.size(), 0.0));
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      double sum = 0.0;
      for (std::size_t t = 0; t < t_count; ++t) sum += report.per_timestep[t][ki][mi];
      report.mean[ki][mi] = sum / static_cast<double>(t_count);
    }
  }
  return report;
}

SilhouetteReport select_k(std::span<const Matrix> embeddings, std::span<const int> ks,
                          std::span<const cluster::Method> methods, std::uint64_t seed,
                          const cluster::FitOptions& options) {
  for (const auto& emb : embeddings) {
    for (int k : ks) {
      if (k < 2 || k > emb.rows() - 1) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("K={} outside [2, n-1] for n={}", k, emb.rows()));
      }
    }
  }
  std::vector<cluster::ClusterAssignment> fits(embeddings.size() * ks.size() * methods.size());
  kernels::for_each_job(fits.size(), [&](std::size_t job) {
    const std::size_t mi = job % methods.size();
    const std::size_t ki = (job / methods.size()) % ks.size();
    const std::size_t t = job / (methods.size() * ks.size());
    fits[job] = cluster::fit(embeddings[t], ks[ki], methods[mi], seed, options);
    fits[job].timestep = static_cast<int>(t);
  });
  return silhouette_report(embeddings, fits, ks, methods);
}

StabilityMeasures stability_measures(const Matrix& points, std::span<const int> reference,
                                     std::span<const std::vector<int>> reduced,
                                     const Matrix& held_out) {
  const auto n = static_cast<std::size_t>(points.rows());
  const std::size_t m = reduced.size();
  if (reference.size() != n || static_cast<std::size_t>(held_out.rows()) != n ||
      static_cast<std::size_t>(held_out.cols()) != m || m == 0) {
    throw Error(ErrorKind::InvalidArgument, "stability inputs disagree in shape");
  }
  const Matrix dist = kernels::pairwise_distances(points);

  auto group = [&](std::span<const int> labels) {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
    return members;
  };
  auto centroid = [&](const std::vector<std::size_t>& members) {
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(points.cols());
    for (auto i : members) c += points.row(static_cast<Eigen::Index>(i));
    return Eigen::RowVectorXd(c / static_cast<double>(members.size()));
  };

  const auto ref_members = group(reference);
  std::vector<Eigen::RowVectorXd> ref_centroids;
  for (const auto& mem : ref_members) ref_centroids.push_back(centroid(mem));

  StabilityMeasures total;
  for (std::size_t l = 0; l < m; ++l) {
    const auto& labels = reduced[l];
    if (labels.size() != n) throw Error(ErrorKind::InvalidArgument, "reduced labels size");
    const auto red_members = group(labels);
    const std::size_t kr = ref_members.size(), ks = red_members.size();

    // Block statistics between reference cluster r and reduced cluster s.
    Matrix overlap = Matrix::Zero(static_cast<Eigen::Index>(kr), static_cast<Eigen::Index>(ks));
    Matrix block = Matrix::Zero(static_cast<Eigen::Index>(kr), static_cast<Eigen::Index>(ks));
    for (std::size_t i = 0; i < n; ++i) {
      overlap(reference[i], labels[i]) += 1.0;
    }
    for (std::size_t r = 0; r < kr; ++r) {
      for (std::size_t s = 0; s < ks; ++s) {
        if (overlap(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) == 0.0) continue;
        double sum = 0.0;
        for (auto a : ref_members[r]) {
          for (auto b : red_members[s]) sum += dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
        block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = sum;
      }
    }
    std::vector<Eigen::RowVectorXd> red_centroids;
    for (const auto& mem : red_members) {
      red_centroids.push_back(mem.empty() ? Eigen::RowVectorXd::Zero(points.cols()) : centroid(mem));
    }

    double apn = 0.0, ad = 0.0, adm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::size_t>(reference[i]);
      const auto s = static_cast<std::size_t>(labels[i]);
      const double nr = static_cast<double>(ref_members[r].size());
      const double ns = static_cast<double>(red_members[s].size());
      apn += 1.0 - overlap(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) / nr;
      ad += block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) / (nr * ns);
      adm += (red_centroids[s] - ref_centroids[r]).norm();
    }

    // FOM: spread of the deleted column around its means under the reduced clustering.
    double sq = 0.0;
    for (const auto& mem : red_members) {
      if (mem.empty()) continue;
      double mean = 0.0;
      for (auto i : mem) mean += held_out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
      mean /= static_cast<double>(mem.size());
      for (auto i : mem) {
        const double diff = held_out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) - mean;
        sq += diff * diff;
      }
    }
    const double nd = static_cast<double>(n);
    total.apn += apn / nd;
    total.ad += ad / nd;
    total.adm += adm / nd;
    total.fom += std::sqrt(sq / nd);
  }
  const double md = static_cast<double>(m);
  total.apn /= md;
  total.ad /= md;
  total.adm /= md;
  total.fom /= md;
  return total;
}

cluster::Method StabilityReport::preferred() const {
  std::size_t best = 0;
  auto rank_sum = [&](std::size_t m) { return ranks[m][0] + ranks[m][1] + ranks[m][2] + ranks[m][3]; };
  for (std::size_t m = 1; m < methods.size(); ++m) {
    const int a = rank_sum(m), b = rank_sum(best);
    if (a < b || (a == b && average[m].apn < average[best].apn)) best = m;
  }
  return methods[best];
}

StabilityReport stability(std::span<const StabilityInput> timesteps,
                          const embed::SolverConfig& solver, int k,
                          std::span<const cluster::Method> methods, std::uint64_t seed,
                          const cluster::FitOptions& options) {
  if (timesteps.empty()) throw Error(ErrorKind::InsufficientData, "no timesteps for stability");
  StabilityReport report;
  report.k = k;
  report.methods.assign(methods.begin(), methods.end());

  // One job per (timestep, deleted column); each produces labels for every method.
  std::vector<std::size_t> job_t, job_l;
  for (std::size_t t = 0; t < timesteps.size(); ++t) {
    const auto& in = timesteps[t];
    if (!in.network || !in.embedding || in.reference.size() != methods.size()) {
      throw Error(ErrorKind::InvalidArgument, "incomplete stability input");
    }
    if (in.network->attributes.cols() < 2) {
      throw Error(ErrorKind::InsufficientData, "stability needs at least two attribute columns");
    }
    for (std::size_t l = 0; l < in.network->attributes.cols(); ++l) {
      job_t.push_back(t);
      job_l.push_back(l);
    }
  }
  // reduced[t][method][column]
  std::vector<std::vector<std::vector<std::vector<int>>>> reduced(timesteps.size());
  for (std::size_t t = 0; t < timesteps.size(); ++t) {
    reduced[t].assign(methods.size(),
                      std::vector<std::vector<int>>(timesteps[t].network->attributes.cols()));
  }
  kernels::for_each_job(job_t.size(), [&](std::size_t job) {
    const std::size_t t = job_t[job], l = job_l[job];
    const auto& net = *timesteps[t].network;
    const AttributeTable attrs = net.attributes.without_column(l);
    const Matrix similarity = kernels::cosine_similarity(attrs.values);
    const Adjacency adjacency = graph::normalized_adjacency(net);
    const auto result = embed::embed(similarity, adjacency, net.node_ids, solver);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      reduced[t][mi][l] = cluster::fit(result.embedding.values, k, methods[mi], seed, options).labels;
    }
  });

  report.per_timestep.assign(timesteps.size(), std::vector<StabilityMeasures>(methods.size()));
  report.average.assign(methods.size(), StabilityMeasures{});
  for (std::size_t t = 0; t < timesteps.size(); ++t) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const auto& s = report.per_timestep[t][mi] =
          stability_measures(*timesteps[t].embedding, timesteps[t].reference[mi]->labels,
                             reduced[t][mi], timesteps[t].network->attributes.values);
      report.average[mi].apn += s.apn;
      report.average[mi].ad += s.ad;
      report.average[mi].adm += s.adm;
      report.average[mi].fom += s.fom;
    }
  }
  const double tc = static_cast<double>(timesteps.size());
  for (auto& a : report.average) {
    a.apn /= tc;
    a.ad /= tc;
    a.adm /= tc;
    a.fom /= tc;
  }

  report.ranks.assign(methods.size(), {1, 1, 1, 1});
  auto value = [&](std::size_t m, int measure) {
    const auto& a = report.average[m];
    return measure == 0 ? a.apn : measure == 1 ? a.ad : measure == 2 ? a.adm : a.fom;
  };
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (int measure = 0; measure < 4; ++measure) {
      for (std::size_t o = 0; o < methods.size(); ++o) {
        if (value(o, measure) < value(m, measure)) ++report.ranks[m][static_cast<std::size_t>(measure)];
      }
    }
  }
  return report;
}

}  // namespace aane::validate
