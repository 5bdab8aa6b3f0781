#pragma once

// Supporting experiments: one-shot identifiability, error binning by word
// metadata, transformed-distance identities under SVD, and decision-boundary
// grids contrasting Word Confusion with cosine.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wordconf/classifier.hpp"
#include "wordconf/core.hpp"
#include "wordconf/embedding_store.hpp"
#include "wordconf/similarity.hpp"

namespace wordconf {

// ---------------------------------------------------------------------------
// One-shot identifiability

struct IdentifiabilityOptions {
  std::size_t n_classes = 1000;
  std::size_t train_per_class = 1;
  std::size_t test_per_class = 10;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  TrainConfig train;
};

struct WordOutcome {
  std::string word;
  bool correct = false;
};

struct IdentifiabilityResult {
  double mean_accuracy = 0.0;
  Vector trial_accuracy;
  std::vector<WordOutcome> outcomes;  // every test prediction, trial order
};

/// Per trial: draw `n_classes` labels, train on `train_per_class` records of
/// each and classify `test_per_class` held-out records of each.
inline IdentifiabilityResult one_shot_identifiability(const EmbeddingBundle& bundle,
                                                      const IdentifiabilityOptions& opt) {
  if (opt.n_classes < 2) throw Error("identifiability: n_classes must be >= 2");
  if (opt.train_per_class < 1 || opt.test_per_class < 1)
    throw Error("identifiability: train/test counts must be >= 1");
  if (opt.trials < 1) throw Error("identifiability: trials must be >= 1");
  const std::size_t need = opt.train_per_class + opt.test_per_class;
  auto groups = bundle.group_by_label();
  std::vector<std::string> eligible;
  for (const auto& [label, recs] : groups)
    if (recs.size() >= need) eligible.push_back(label);
  if (eligible.size() < opt.n_classes)
    throw Error("identifiability: only " + std::to_string(eligible.size()) +
                " labels have >= " + std::to_string(need) + " records; need " +
                std::to_string(opt.n_classes));

  std::mt19937_64 rng(opt.seed);
  IdentifiabilityResult res;
  for (std::size_t t = 0; t < opt.trials; ++t) {
    std::vector<std::string> pool = eligible;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(opt.n_classes);
    std::sort(pool.begin(), pool.end());
    std::vector<LabeledEmbedding> train_set, test_set;
    for (const auto& label : pool) {
      auto recs = groups[label];
      std::shuffle(recs.begin(), recs.end(), rng);
      for (std::size_t i = 0; i < need; ++i)
        (i < opt.train_per_class ? train_set : test_set).push_back(recs[i]);
    }
    const auto model = train(train_set, opt.train);
    std::size_t ok = 0;
    for (const auto& r : test_set) {
      const bool c = model.predict(r.vec) == r.label;
      ok += c;
      res.outcomes.push_back({r.label, c});
    }
    res.trial_accuracy.push_back(static_cast<double>(ok) / static_cast<double>(test_set.size()));
  }
  double s = 0;
  for (double a : res.trial_accuracy) s += a;
  res.mean_accuracy = s / static_cast<double>(res.trial_accuracy.size());
  return res;
}

// ---------------------------------------------------------------------------
// Error binning

struct WordMetadata {
  double frequency = 0;
  double sense_count = 0;
  double token_count = 0;
  double first_token_frequency = 0;
};

enum class Facet { frequency, sense_count, token_count, first_token_frequency };

inline const char* to_string(Facet f) {
  switch (f) {
    case Facet::frequency: return "frequency";
    case Facet::sense_count: return "sense_count";
    case Facet::token_count: return "token_count";
    case Facet::first_token_frequency: return "first_token_frequency";
  }
  return "?";
}

inline double facet_value(const WordMetadata& m, Facet f) {
  switch (f) {
    case Facet::frequency: return m.frequency;
    case Facet::sense_count: return m.sense_count;
    case Facet::token_count: return m.token_count;
    case Facet::first_token_frequency: return m.first_token_frequency;
  }
  return 0;
}

/// Metadata TSV: word, frequency, sense_count, token_count, first_token_frequency.
inline std::map<std::string, WordMetadata> parse_metadata_tsv(std::istream& in) {
  std::map<std::string, WordMetadata> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(line, '\t');
    const std::string where = "metadata line " + std::to_string(lineno);
    if (f.size() != 5) throw Error(where + ": expected 5 tab-separated fields");
    WordMetadata m{parse_double(f[1], where), parse_double(f[2], where),
                   parse_double(f[3], where), parse_double(f[4], where)};
    out[std::string(trim(f[0]))] = m;
  }
  return out;
}

inline std::map<std::string, WordMetadata> load_metadata_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open metadata file " + path.string());
  return parse_metadata_tsv(in);
}

/// Per-prediction outcomes: `word<TAB>correct` with correct in {0, 1}.
inline std::vector<WordOutcome> parse_outcomes_tsv(std::istream& in) {
  std::vector<WordOutcome> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(line, '\t');
    const std::string where = "results line " + std::to_string(lineno);
    if (f.size() != 2) throw Error(where + ": expected word<TAB>correct");
    const auto c = trim(f[1]);
    if (c != "0" && c != "1") throw Error(where + ": correct must be 0 or 1");
    out.push_back({std::string(trim(f[0])), c == "1"});
  }
  return out;
}

struct BinEdges {
  // Bins are (-inf, e0), [e0, e1), ..., [e_last, inf).
  std::map<Facet, Vector> edges = {
      {Facet::frequency, {1e2, 1e3, 1e4, 1e5, 1e6, 1e7}},
      {Facet::sense_count, {1, 2, 5, 11}},
      {Facet::token_count, {1, 2, 3, 4}},
      {Facet::first_token_frequency, {1e2, 1e3, 1e4, 1e5, 1e6, 1e7}},
  };
};

struct ErrorBin {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  std::size_t errors = 0;
  std::optional<double> rate() const {
    if (n == 0) return std::nullopt;
    return static_cast<double>(errors) / static_cast<double>(n);
  }
};

struct ErrorBinTable {
  std::map<Facet, std::vector<ErrorBin>> bins;
  std::size_t excluded = 0;  // outcomes whose word had no metadata
  std::vector<std::string> missing_words;
};

inline ErrorBinTable error_bins(std::span<const WordOutcome> results,
                                const std::map<std::string, WordMetadata>& metadata,
                                const BinEdges& edges = {}) {
  ErrorBinTable table;
  for (const auto& [facet, e] : edges.edges) {
    if (!std::is_sorted(e.begin(), e.end()) ||
        std::adjacent_find(e.begin(), e.end()) != e.end())
      throw Error(std::string("error_bins: edges for ") + to_string(facet) +
                  " must be strictly increasing");
    auto& bins = table.bins[facet];
    const double inf = std::numeric_limits<double>::infinity();
    bins.push_back({-inf, e.empty() ? inf : e.front()});
    for (std::size_t i = 0; i < e.size(); ++i)
      bins.push_back({e[i], i + 1 < e.size() ? e[i + 1] : inf});
    if (e.empty()) bins.resize(1);
  }
  std::set<std::string> missing;
  for (const auto& r : results) {
    const auto it = metadata.find(r.word);
    if (it == metadata.end()) {
      ++table.excluded;
      missing.insert(r.word);
      continue;
    }
    for (auto& [facet, bins] : table.bins) {
      const double v = facet_value(it->second, facet);
      for (auto& b : bins)
        if (v >= b.lo && v < b.hi) {
          ++b.n;
          b.errors += !r.correct;
          break;
        }
    }
  }
  table.missing_words.assign(missing.begin(), missing.end());
  return table;
}

inline std::string format_error_bins_csv(const ErrorBinTable& t) {
  std::string out = "facet,lo,hi,n,errors,error_rate\n";
  for (const auto& [facet, bins] : t.bins)
    for (const auto& b : bins) {
      const auto r = b.rate();
      out += std::string(to_string(facet)) + "," + format_double(b.lo) + "," +
             format_double(b.hi) + "," + std::to_string(b.n) + "," + std::to_string(b.errors) +
             "," + (r ? format_double(*r) : std::string()) + "\n";
    }
  return out;
}

// ---------------------------------------------------------------------------
// Transformed distances under A = U S V^T

struct SvdCheckReport {
  Eigen::MatrixXd A, U, V;
  Eigen::VectorXd singular_values;  // descending, >= 0
  Eigen::VectorXd x, y;
  double original_euclidean = 0, original_cosine = 0;
  double direct_euclidean = 0, direct_cosine = 0;        // of (Ax, Ay)
  double decomposed_euclidean = 0, decomposed_cosine = 0;  // of (S V^T x, S V^T y)
  double u_orthogonality_error = 0, v_orthogonality_error = 0;
  double max_discrepancy = 0;
};

/// Since U is orthogonal, |Ax - Ay| = |S V^T (x - y)| and
/// cos(Ax, Ay) = cos(S V^T x, S V^T y). Both sides are computed independently
/// and the largest difference reported.
inline SvdCheckReport svd_distance_check(const Eigen::MatrixXd& A, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& y) {
  if (A.rows() != A.cols() || A.rows() < 1) throw Error("svd_distance_check: A must be square");
  if (x.size() != A.cols() || y.size() != A.cols())
    throw Error("svd_distance_check: dimension mismatch between A and x/y");
  if (!A.allFinite() || !x.allFinite() || !y.allFinite())
    throw Error("svd_distance_check: non-finite input");
  if (x.norm() == 0.0 || y.norm() == 0.0) throw Error("svd_distance_check: zero vector");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error("svd_distance_check: SVD did not converge");
  SvdCheckReport r;
  r.A = A;
  r.U = svd.matrixU();
  r.V = svd.matrixV();
  r.singular_values = svd.singularValues();
  r.x = x;
  r.y = y;
  const auto n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  r.u_orthogonality_error = (r.U.transpose() * r.U - I).cwiseAbs().maxCoeff();
  r.v_orthogonality_error = (r.V.transpose() * r.V - I).cwiseAbs().maxCoeff();

  auto cos = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0)
      throw Error("svd_distance_check: transformed vector is zero (A is rank deficient)");
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  };
  r.original_euclidean = (x - y).norm();
  r.original_cosine = cos(x, y);
  const Eigen::VectorXd ax = A * x, ay = A * y;
  r.direct_euclidean = (ax - ay).norm();
  r.direct_cosine = cos(ax, ay);
  const Eigen::VectorXd zx = r.singular_values.asDiagonal() * (r.V.transpose() * x);
  const Eigen::VectorXd zy = r.singular_values.asDiagonal() * (r.V.transpose() * y);
  r.decomposed_euclidean = (zx - zy).norm();
  r.decomposed_cosine = cos(zx, zy);
  r.max_discrepancy = std::max(std::abs(r.direct_euclidean - r.decomposed_euclidean),
                               std::abs(r.direct_cosine - r.decomposed_cosine));
  return r;
}

// ---------------------------------------------------------------------------
// Decision-boundary grid

struct BoundaryGrid {
  double extent = 0;
  std::size_t resolution = 0;
  Vector xs, ys;  // cell centers; point (i, j) is (xs[i], ys[j]), row-major by j
  std::vector<std::string> wc_labels;
  std::vector<std::string> cosine_labels;
  std::vector<bool> disagreement;
  std::vector<double> scales;
  bool cosine_scale_invariant = true;  // cosine label unchanged under every scale
  std::size_t wc_scale_flips = 0;      // points whose WC label changes under some scale

  std::size_t size() const { return wc_labels.size(); }
  std::size_t disagreements() const {
    return static_cast<std::size_t>(std::count(disagreement.begin(), disagreement.end(), true));
  }
};

/// Label of the centroid with the largest cosine to `p` (ties lexicographic).
inline std::string cosine_label(std::span<const double> p,
                                const std::map<std::string, Vector>& centroids) {
  std::map<std::string, double> s;
  for (const auto& [label, c] : centroids) s[label] = cosine(p, c);
  return best_label(s);
}

/// Evaluates both classifiers on a resolution x resolution grid of cell
/// centers over [-extent, extent]^2 (the origin is never a sample point),
/// then re-labels every point scaled by each factor in `scales`.
inline BoundaryGrid boundary_grid(const ClassifierModel& model,
                                  const std::map<std::string, Vector>& centroids, double extent,
                                  std::size_t resolution,
                                  std::vector<double> scales = {0.5, 2.0, 10.0}) {
  if (model.dim() != 2) throw Error("boundary_grid: model dimension must be 2");
  if (centroids.size() < 2) throw Error("boundary_grid: need at least 2 centroids");
  for (const auto& [label, c] : centroids) {
    if (c.size() != 2) throw Error("boundary_grid: centroid '" + label + "' must be 2D");
    if (norm(c) == 0.0) throw Error("boundary_grid: zero centroid '" + label + "'");
  }
  if (!(extent > 0)) throw Error("boundary_grid: extent must be > 0");
  if (resolution < 1) throw Error("boundary_grid: resolution must be >= 1");
  for (double a : scales)
    if (!(a > 0)) throw Error("boundary_grid: scales must be > 0");

  BoundaryGrid g;
  g.extent = extent;
  g.resolution = resolution;
  g.scales = scales;
  const double step = 2.0 * extent / static_cast<double>(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    g.xs.push_back(-extent + (static_cast<double>(i) + 0.5) * step);
    g.ys.push_back(-extent + (static_cast<double>(i) + 0.5) * step);
  }
  for (std::size_t j = 0; j < resolution; ++j)
    for (std::size_t i = 0; i < resolution; ++i) {
      const Vector p = {g.xs[i], g.ys[j]};
      const auto wc = model.predict(p);
      const auto cl = cosine_label(p, centroids);
      bool flips = false;
      for (double a : scales) {
        const Vector q = {a * p[0], a * p[1]};
        if (cosine_label(q, centroids) != cl) g.cosine_scale_invariant = false;
        if (model.predict(q) != wc) flips = true;
      }
      g.wc_scale_flips += flips;
      g.disagreement.push_back(wc != cl);
      g.wc_labels.push_back(wc);
      g.cosine_labels.push_back(cl);
    }
  return g;
}

inline std::string format_grid_csv(const BoundaryGrid& g) {
  std::string out = "x,y,wc_label,cosine_label,disagree\n";
  std::size_t k = 0;
  for (std::size_t j = 0; j < g.resolution; ++j)
    for (std::size_t i = 0; i < g.resolution; ++i, ++k)
      out += format_double(g.xs[i]) + "," + format_double(g.ys[j]) + "," +
             csv_field(g.wc_labels[k]) + "," + csv_field(g.cosine_labels[k]) + "," +
             (g.disagreement[k] ? "1" : "0") + "\n";
  return out;
}

}  // namespace wordconf
