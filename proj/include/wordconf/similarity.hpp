#pragma once

// Word Confusion scores and the cosine baselines.
//
// sim_wc(class c, target t) is the probability the trained classifier assigns
// to class c, averaged over the target's sampled embeddings. Averaging is done
// on probability vectors, never on embeddings; the cosine baselines do the
// opposite and compare averaged embeddings.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wordconf/classifier.hpp"
#include "wordconf/core.hpp"
#include "wordconf/embedding_store.hpp"

namespace wordconf {

enum class Method { word_confusion, cosine_v1, cosine_v2, cosine_v3 };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::word_confusion: return "word_confusion";
    case Method::cosine_v1: return "cosine_v1";
    case Method::cosine_v2: return "cosine_v2";
    case Method::cosine_v3: return "cosine_v3";
  }
  return "?";
}

struct SimilarityResult {
  std::string target;
  std::string class_label;
  double score = 0.0;
  Method method = Method::word_confusion;
  std::size_t samples_used = 0;
};

/// Elementwise mean of predict_proba over the records.
inline ProbDistribution average_distribution(const ClassifierModel& model,
                                             std::span<const LabeledEmbedding> records) {
  if (records.empty()) throw Error("no target records");
  Vector acc(model.num_classes(), 0.0);
  for (const auto& r : records) {
    const auto p = model.predict_proba(r.vec);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p.probs[k];
  }
  const double n = static_cast<double>(records.size());
  for (auto& v : acc) v /= n;
  return {model.class_list(), std::move(acc), {}};
}

/// Zeroes `label`'s entry and renormalizes the rest. A no-op when the label is
/// not a class.
inline ProbDistribution exclude_class(ProbDistribution dist, const std::string& label) {
  const auto i = dist.index_of(label);
  if (!i) return dist;
  if (dist.size() < 2) throw Error("cannot exclude the only class");
  dist.probs[*i] = 0.0;
  double z = 0.0;
  for (double p : dist.probs) z += p;
  if (!(z > 0.0)) throw Error("exclusion left no probability mass to renormalize");
  for (auto& p : dist.probs) p /= z;
  return dist;
}

/// Averaged distribution for a target word, optionally with the target's own
/// class removed.
inline ProbDistribution target_distribution(const ClassifierModel& model,
                                            std::span<const LabeledEmbedding> records,
                                            const std::string& target, bool exclude_self) {
  auto dist = average_distribution(model, records);
  if (exclude_self) dist = exclude_class(std::move(dist), target);
  return dist;
}

/// Word Confusion similarity of `class_label` for the target word named by
/// `target`.
inline SimilarityResult sim_wc(const ClassifierModel& model,
                               std::span<const LabeledEmbedding> target_records,
                               const std::string& target, const std::string& class_label,
                               bool exclude_self) {
  if (!model.has_class(class_label)) throw Error("unknown class label '" + class_label + "'");
  if (target_records.empty()) throw Error("sim_wc: no records for target '" + target + "'");
  if (exclude_self && class_label == target && model.has_class(target))
    throw Error("sim_wc: class '" + class_label +
                "' is the target itself and is excluded (exclude_self)");
  const auto dist = target_distribution(model, target_records, target, exclude_self);
  return {target, class_label, dist.prob(class_label), Method::word_confusion,
          target_records.size()};
}

/// Same, with the target word taken from the records' label.
inline SimilarityResult sim_wc(const ClassifierModel& model,
                               std::span<const LabeledEmbedding> target_records,
                               const std::string& class_label, bool exclude_self) {
  if (target_records.empty()) throw Error("sim_wc: empty target records");
  return sim_wc(model, target_records, target_records.front().label, class_label, exclude_self);
}

struct MatrixOptions {
  bool exclude_self = true;
  std::size_t samples_per_word = 30;
  std::uint64_t seed = 0;
};

/// Rows are targets, columns classes, both in `words` order. Entry (j, i) is
/// sim_wc(class i | target j); with exclude_self a word's own column is 0.
struct SimilarityMatrix {
  std::vector<std::string> words;
  std::vector<std::vector<SimilarityResult>> entries;
  Method method = Method::word_confusion;

  double score(std::size_t row, std::size_t col) const { return entries[row][col].score; }
};

inline SimilarityMatrix similarity_matrix(const ClassifierModel& model,
                                          const EmbeddingBundle& bundle,
                                          const std::vector<std::string>& words,
                                          const MatrixOptions& opt = {}) {
  if (words.empty()) throw Error("similarity_matrix: empty word list");
  for (const auto& w : words)
    if (!model.has_class(w)) throw Error("similarity_matrix: '" + w + "' is not a model class");
  SimilarityMatrix m;
  m.words = words;
  for (const auto& target : words) {
    if (bundle.count(target) == 0)
      throw Error("similarity_matrix: no records for word '" + target + "'");
    const auto recs = sample_per_label(bundle, target, opt.samples_per_word, opt.seed);
    const auto dist = target_distribution(model, recs, target, opt.exclude_self);
    std::vector<SimilarityResult> row;
    for (const auto& cls : words)
      row.push_back({target, cls, dist.prob(cls), Method::word_confusion, recs.size()});
    m.entries.push_back(std::move(row));
  }
  return m;
}

inline std::string format_matrix_csv(const SimilarityMatrix& m) {
  std::string out = to_string(m.method);
  for (const auto& w : m.words) out += "," + csv_field(w);
  out += '\n';
  for (std::size_t j = 0; j < m.words.size(); ++j) {
    out += csv_field(m.words[j]);
    for (std::size_t i = 0; i < m.words.size(); ++i) out += "," + format_double(m.score(j, i));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cosine baselines

inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                std::to_string(v.size()) + ")");
  const double nu = norm(u), nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw Error("cosine: zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

/// Per-class cosine score of the targets against each class's seed records.
///   1: cosine(centroid(targets), centroid(seeds))
///   2: mean over targets of cosine(target, centroid(seeds))
///   3: mean over (target, seed) pairs of cosine(target, seed)
inline std::map<std::string, double> cosine_seed_score(
    std::span<const LabeledEmbedding> targets,
    const std::map<std::string, std::vector<LabeledEmbedding>>& seeds_by_class, int variant) {
  if (variant < 1 || variant > 3) throw Error("cosine_seed_score: variant must be 1, 2 or 3");
  if (targets.empty()) throw Error("cosine_seed_score: empty target list");
  if (seeds_by_class.empty()) throw Error("cosine_seed_score: no seed classes");
  std::map<std::string, double> out;
  const Vector tc = mean_embedding(targets);
  if (norm(tc) == 0.0) throw Error("cosine_seed_score: zero-vector target centroid");
  for (const auto& [label, seeds] : seeds_by_class) {
    if (seeds.empty()) throw Error("cosine_seed_score: class '" + label + "' has no seeds");
    if (seeds.front().vec.size() != tc.size())
      throw Error("cosine_seed_score: dimension mismatch for class '" + label + "'");
    double s = 0.0;
    if (variant == 1 || variant == 2) {
      const Vector sc = mean_embedding(seeds);
      if (norm(sc) == 0.0)
        throw Error("cosine_seed_score: zero-vector centroid for class '" + label + "'");
      if (variant == 1) {
        s = cosine(tc, sc);
      } else {
        for (const auto& t : targets) s += cosine(t.vec, sc);
        s /= static_cast<double>(targets.size());
      }
    } else {
      for (const auto& t : targets)
        for (const auto& sd : seeds) s += cosine(t.vec, sd.vec);
      s /= static_cast<double>(targets.size() * seeds.size());
    }
    out[label] = s;
  }
  return out;
}

/// Class with the highest score; ties to the lexicographically smallest label
/// (std::map iteration order).
inline std::string best_label(const std::map<std::string, double>& scores) {
  if (scores.empty()) throw Error("best_label: empty score map");
  auto best = scores.begin();
  for (auto it = scores.begin(); it != scores.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

/// Predicted feature class: argmax of the averaged probability vector.
inline std::string feature_classify(const ClassifierModel& model,
                                    std::span<const LabeledEmbedding> target_records) {
  if (target_records.empty()) throw Error("feature_classify: empty target records");
  return average_distribution(model, target_records).argmax();
}

}  // namespace wordconf
