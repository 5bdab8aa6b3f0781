#pragma once

// Benchmark runners: word-pair similarity (Spearman against human scores)
// and feature classification (macro-F1 per method).

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wordconf/classifier.hpp"
#include "wordconf/core.hpp"
#include "wordconf/embedding_store.hpp"
#include "wordconf/metrics.hpp"
#include "wordconf/similarity.hpp"

namespace wordconf {

struct WordPairRecord {
  std::string word_a;
  std::string word_b;
  double human_score = 0.0;
};

/// `word_a<TAB>word_b<TAB>score` per line; blank lines and `#` comments skipped.
inline std::vector<WordPairRecord> parse_pairs_tsv(std::istream& in) {
  std::vector<WordPairRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split(line, '\t');
    const std::string where = "pairs line " + std::to_string(lineno);
    if (f.size() != 3) throw Error(where + ": expected 3 tab-separated fields");
    WordPairRecord r{std::string(trim(f[0])), std::string(trim(f[1])), parse_double(f[2], where)};
    if (r.word_a.empty() || r.word_b.empty()) throw Error(where + ": empty word");
    if (!std::isfinite(r.human_score)) throw Error(where + ": non-finite score");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<WordPairRecord> load_pairs_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pairs file " + path.string());
  return parse_pairs_tsv(in);
}

struct PairBenchmarkOptions {
  std::string dataset = "pairs";
  std::size_t samples_per_word = 30;
  std::uint64_t seed = 0;
  bool exclude_self = false;
};

struct PairScore {
  std::string word_a;
  std::string word_b;
  double human = 0.0;
  double word_confusion = 0.0;
  double cosine = 0.0;
};

struct BenchmarkReport {
  std::string dataset;
  std::size_t n_total = 0;
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;
  double rho_word_confusion = 0.0;
  double rho_cosine = 0.0;
  std::vector<PairScore> pairs;        // evaluated pairs, input order
  std::vector<std::string> skipped;    // "a\tb: reason"
};

/// For each pair, word_a is the target and word_b the class: the WC score is
/// p(word_b | sampled embeddings of word_a), the baseline is the cosine of the
/// two words' mean embeddings. Pairs lacking records or a class are skipped
/// and counted.
inline BenchmarkReport run_pair_benchmark(const ClassifierModel& model,
                                          const EmbeddingBundle& bundle,
                                          std::span<const WordPairRecord> pairs,
                                          const PairBenchmarkOptions& opt = {}) {
  if (bundle.dim() != model.dim())
    throw Error("benchmark: bundle dim " + std::to_string(bundle.dim()) +
                " does not match model dim " + std::to_string(model.dim()));
  BenchmarkReport rep;
  rep.dataset = opt.dataset;
  rep.n_total = pairs.size();
  const auto groups = bundle.group_by_label();
  std::map<std::string, std::vector<LabeledEmbedding>> sampled;
  auto sample = [&](const std::string& w) -> const std::vector<LabeledEmbedding>& {
    auto it = sampled.find(w);
    if (it == sampled.end())
      it = sampled.emplace(w, sample_per_label(bundle, w, opt.samples_per_word, opt.seed)).first;
    return it->second;
  };
  for (const auto& p : pairs) {
    std::string reason;
    if (!groups.contains(p.word_a)) reason = "no embeddings for '" + p.word_a + "'";
    else if (!groups.contains(p.word_b)) reason = "no embeddings for '" + p.word_b + "'";
    else if (!model.has_class(p.word_b)) reason = "'" + p.word_b + "' is not a model class";
    else if (opt.exclude_self && p.word_a == p.word_b) reason = "identical words under exclude_self";
    if (!reason.empty()) {
      rep.skipped.push_back(p.word_a + "\t" + p.word_b + ": " + reason);
      continue;
    }
    const auto& ra = sample(p.word_a);
    const auto& rb = sample(p.word_b);
    const auto wc = sim_wc(model, ra, p.word_a, p.word_b, opt.exclude_self);
    const Vector ma = mean_embedding(ra), mb = mean_embedding(rb);
    double cos = 0.0;
    try {
      cos = cosine(ma, mb);
    } catch (const Error&) {
      rep.skipped.push_back(p.word_a + "\t" + p.word_b + ": zero mean embedding");
      continue;
    }
    rep.pairs.push_back({p.word_a, p.word_b, p.human_score, wc.score, cos});
  }
  rep.n_evaluated = rep.pairs.size();
  rep.n_skipped = rep.skipped.size();
  if (rep.n_evaluated == 0) throw Error("benchmark: zero evaluable pairs");
  Vector h, wc, cs;
  for (const auto& s : rep.pairs) {
    h.push_back(s.human);
    wc.push_back(s.word_confusion);
    cs.push_back(s.cosine);
  }
  rep.rho_word_confusion = spearman(wc, h);
  rep.rho_cosine = spearman(cs, h);
  return rep;
}

inline Json report_to_json(const BenchmarkReport& r) {
  Json j = Json::object();
  j["dataset"] = r.dataset;
  j["n_pairs_total"] = r.n_total;
  j["n_pairs_evaluated"] = r.n_evaluated;
  j["n_pairs_skipped"] = r.n_skipped;
  j["rho_word_confusion"] = r.rho_word_confusion;
  j["rho_cosine"] = r.rho_cosine;
  j["skipped"] = r.skipped;
  return j;
}

inline std::string format_pair_table_csv(const BenchmarkReport& r) {
  std::string out = "word_a,word_b,human,word_confusion,cosine\n";
  for (const auto& p : r.pairs)
    out += csv_field(p.word_a) + "," + csv_field(p.word_b) + "," + format_double(p.human) + "," +
           format_double(p.word_confusion) + "," + format_double(p.cosine) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Feature classification

/// A target word with its gold feature class and its sampled embeddings.
struct FeatureTarget {
  std::string word;
  std::string gold;
  std::vector<LabeledEmbedding> records;
};

struct FeaturePrediction {
  std::string word;
  std::string gold;
  std::string word_confusion;
  std::string cosine[3];
};

struct FeatureBenchmarkReport {
  std::vector<std::string> classes;
  std::vector<FeaturePrediction> predictions;
  double f1_word_confusion = 0.0;
  double f1_cosine[3] = {0.0, 0.0, 0.0};
  double f1_cosine_mean = 0.0;  // mean of the three cosine columns
};

/// Word Confusion labels each target by feature_classify; cosine variant v
/// labels it by the argmax of cosine_seed_score(v). Macro-F1 is taken over the
/// model's classes.
inline FeatureBenchmarkReport run_feature_benchmark(
    const ClassifierModel& model, std::span<const FeatureTarget> targets,
    const std::map<std::string, std::vector<LabeledEmbedding>>& seeds_by_class) {
  if (targets.empty()) throw Error("feature benchmark: empty targets");
  FeatureBenchmarkReport rep;
  rep.classes = model.classes();
  for (const auto& [cls, seeds] : seeds_by_class) {
    if (!model.has_class(cls))
      throw Error("feature benchmark: seed class '" + cls + "' is not a model class");
    if (seeds.empty()) throw Error("feature benchmark: seed class '" + cls + "' is empty");
  }
  std::vector<std::string> truth, wc, cos[3];
  for (const auto& t : targets) {
    if (t.records.empty()) throw Error("feature benchmark: target '" + t.word + "' has no records");
    if (!model.has_class(t.gold))
      throw Error("feature benchmark: gold class '" + t.gold + "' is not a model class");
    FeaturePrediction p;
    p.word = t.word;
    p.gold = t.gold;
    p.word_confusion = feature_classify(model, t.records);
    for (int v = 1; v <= 3; ++v)
      p.cosine[v - 1] = best_label(cosine_seed_score(t.records, seeds_by_class, v));
    truth.push_back(p.gold);
    wc.push_back(p.word_confusion);
    for (int v = 0; v < 3; ++v) cos[v].push_back(p.cosine[v]);
    rep.predictions.push_back(std::move(p));
  }
  rep.f1_word_confusion = macro_f1(truth, wc, rep.classes);
  for (int v = 0; v < 3; ++v) rep.f1_cosine[v] = macro_f1(truth, cos[v], rep.classes);
  rep.f1_cosine_mean = (rep.f1_cosine[0] + rep.f1_cosine[1] + rep.f1_cosine[2]) / 3.0;
  return rep;
}

inline Json report_to_json(const FeatureBenchmarkReport& r) {
  Json j = Json::object();
  j["classes"] = r.classes;
  j["n_targets"] = r.predictions.size();
  j["macro_f1"] = {{"word_confusion", r.f1_word_confusion},
                   {"cosine_1", r.f1_cosine[0]},
                   {"cosine_2", r.f1_cosine[1]},
                   {"cosine_3", r.f1_cosine[2]},
                   {"cosine_average", r.f1_cosine_mean}};
  return j;
}

inline std::string format_feature_table_csv(const FeatureBenchmarkReport& r) {
  std::string out = "word,gold,word_confusion,cosine_1,cosine_2,cosine_3\n";
  for (const auto& p : r.predictions)
    out += csv_field(p.word) + "," + csv_field(p.gold) + "," + csv_field(p.word_confusion) + "," +
           csv_field(p.cosine[0]) + "," + csv_field(p.cosine[1]) + "," + csv_field(p.cosine[2]) +
           "\n";
  return out;
}

}  // namespace wordconf
