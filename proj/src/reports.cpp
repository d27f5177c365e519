#include "dreb/reports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "dreb/rng.hpp"

namespace dreb {

using nlohmann::json;

DistributionReport distribution_report(const Dataset& original,
                                       const Dataset& benchmark) {
  DistributionReport rep;
  rep.original_counts = relation_histogram(original);
  rep.benchmark_counts = relation_histogram(benchmark);

  std::set<std::string> labels;
  for (const auto& [l, _] : rep.original_counts) labels.insert(l);
  for (const auto& [l, _] : rep.benchmark_counts) labels.insert(l);
  rep.labels.assign(labels.begin(), labels.end());

  const double n_orig = static_cast<double>(original.size());
  const double n_bench = static_cast<double>(benchmark.size());
  double tv = 0.0;
  for (const auto& l : rep.labels) {
    const double po =
        n_orig == 0.0 ? 0.0 : static_cast<double>(rep.original_counts[l]) / n_orig;
    const double pb =
        n_bench == 0.0 ? 0.0 : static_cast<double>(rep.benchmark_counts[l]) / n_bench;
    tv += std::abs(po - pb);
  }
  rep.total_variation = 0.5 * tv;
  return rep;
}

json DistributionReport::to_json() const {
  json doc;
  doc["labels"] = labels;
  doc["original_counts"] = original_counts;
  doc["benchmark_counts"] = benchmark_counts;
  doc["total_variation"] = total_variation;
  return doc;
}

void DistributionReport::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << "label,original,benchmark\n";
  for (const auto& l : labels) {
    const auto o = original_counts.find(l);
    const auto b = benchmark_counts.find(l);
    out << l << "," << (o == original_counts.end() ? 0 : o->second) << ","
        << (b == benchmark_counts.end() ? 0 : b->second) << "\n";
  }
}

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {}

std::vector<double> HashEmbedder::embed(const TokenList& tokens) const {
  std::vector<double> out(dim_, 0.0);
  if (tokens.empty()) return out;
  for (const auto& tok : tokens) {
    // FNV-1a over the token text seeds a per-token stream.
    std::uint64_t h = 1469598103934665603ULL ^ seed_;
    for (unsigned char c : tok) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    Rng rng(h);
    for (std::size_t k = 0; k < dim_; ++k) {
      out[k] += rng.uniform() * 2.0 - 1.0;
    }
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& v : out) v *= inv;
  return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Mean distance from each row of `from` to its nearest row of `to`. When
// `exclude_same_index` is set the matching row is skipped, which makes the
// statistic well defined for clouds that share points 1:1.
double mean_nn_dist(const Matrix& from, const Matrix& to, bool exclude_same_index) {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.size(); ++j) {
      if (exclude_same_index && i == j) continue;
      best = std::min(best, sq_dist(from[i], to[j]));
    }
    if (std::isfinite(best)) {
      total += std::sqrt(best);
      ++n;
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace

SemanticReport semantic_report(const Dataset& original, const Dataset& benchmark,
                               const SentenceEmbedder& embedder) {
  if (original.size() < 2) {
    throw ValidationError("semantic report needs at least two original samples");
  }

  Matrix orig_vecs;
  orig_vecs.reserve(original.size());
  for (const auto& s : original.samples) orig_vecs.push_back(embedder.embed(s.tokens));
  Matrix bench_vecs;
  bench_vecs.reserve(benchmark.size());
  for (const auto& s : benchmark.samples) bench_vecs.push_back(embedder.embed(s.tokens));

  Matrix all = orig_vecs;
  all.insert(all.end(), bench_vecs.begin(), bench_vecs.end());
  Pca pca = pca_fit(all, 2);

  SemanticReport rep;
  rep.original_points = pca.project_all(orig_vecs);
  rep.benchmark_points = pca.project_all(bench_vecs);

  double total_var = 0.0;
  {
    // Share of variance captured by the two kept components.
    std::vector<double> mean(embedder.dim(), 0.0);
    for (const auto& p : all) {
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
    }
    for (double& m : mean) m /= static_cast<double>(all.size());
    for (const auto& p : all) {
      for (std::size_t k = 0; k < mean.size(); ++k) {
        const double d = p[k] - mean[k];
        total_var += d * d;
      }
    }
    total_var /= static_cast<double>(all.size() - 1);
  }
  const double kept = pca.eigenvalues[0] + (pca.eigenvalues.size() > 1 ? pca.eigenvalues[1] : 0.0);
  rep.explained_variance = total_var > 0.0 ? kept / total_var : 1.0;

  const bool paired = original.size() == benchmark.size();
  const double denom = mean_nn_dist(rep.original_points, rep.original_points, true);
  const double numer = mean_nn_dist(rep.benchmark_points, rep.original_points, paired);
  rep.overlap_ratio = denom > 0.0 ? numer / denom : (numer == 0.0 ? 1.0 : 0.0);
  return rep;
}

json SemanticReport::to_json() const {
  json doc;
  doc["overlap_ratio"] = overlap_ratio;
  doc["explained_variance"] = explained_variance;
  doc["original_points"] = original_points;
  doc["benchmark_points"] = benchmark_points;
  return doc;
}

void SemanticReport::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << "split,x,y\n";
  for (const auto& p : original_points) {
    out << "original," << p[0] << "," << p[1] << "\n";
  }
  for (const auto& p : benchmark_points) {
    out << "benchmark," << p[0] << "," << p[1] << "\n";
  }
}

}  // namespace dreb
