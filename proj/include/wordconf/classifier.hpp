#pragma once

// One-vs-rest logistic regression over contextual embeddings, plus the
// bucketized linear value regressor.
//
// Each class k gets an independent binary problem (k vs. the rest) minimizing
//
//     sum_i log(1 + exp(-y_i (w_k . x_i + b_k))) + lambda/2 * |w_k|^2
//
// with y_i = +1 for records of class k and -1 otherwise. The bias is not
// penalized. Solved by full-batch accelerated gradient descent from zero
// initialization, so training is a pure function of (data, config).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wordconf/core.hpp"
#include "wordconf/embedding_store.hpp"
#include "wordconf/metrics.hpp"

namespace wordconf {

struct TrainConfig {
  double lambda = 1.0;
  int max_iterations = 1000;
  double tolerance = 1e-6;  // on the gradient 2-norm
  unsigned threads = 0;     // 0: hardware concurrency
};

struct BinaryFitStats {
  int iterations = 0;
  double objective = 0.0;
  double initial_objective = 0.0;  // at w = 0, b = 0
  double grad_norm = 0.0;
  bool converged = false;

  friend bool operator==(const BinaryFitStats&, const BinaryFitStats&) = default;
};

struct TrainMeta {
  int iterations = 0;      // max over the OvR subproblems
  double objective = 0.0;  // sum over the OvR subproblems
  double lambda = 1.0;
  std::size_t dim = 0;
  int max_iterations = 0;
  double tolerance = 0.0;
  bool converged = true;  // false: some subproblem hit max_iterations; model still usable
  std::vector<BinaryFitStats> per_class;
  Json info = Json::object();  // free-form provenance (seed, sampling, ...)

  friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

/// Per-class probability vector from the OvR model.
struct ProbDistribution {
  std::shared_ptr<const std::vector<std::string>> class_list;
  Vector probs;
  // Raw scores behind `probs` for a single input; empty for averaged
  // distributions. Breaks ties between probabilities that saturated to the
  // same double.
  Vector scores;

  const std::vector<std::string>& classes() const { return *class_list; }
  std::size_t size() const { return probs.size(); }

  std::optional<std::size_t> index_of(const std::string& label) const {
    const auto& c = *class_list;
    const auto it = std::find(c.begin(), c.end(), label);
    if (it == c.end()) return std::nullopt;
    return static_cast<std::size_t>(it - c.begin());
  }

  double prob(const std::string& label) const {
    const auto i = index_of(label);
    if (!i) throw Error("unknown class label '" + label + "'");
    return probs[*i];
  }

  /// Highest-probability class. Equal probabilities are ordered by raw score
  /// when present, then by the lexicographically smallest label.
  std::size_t argmax_index() const {
    const auto& c = *class_list;
    const bool by_score = scores.size() == probs.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] != probs[best]) {
        if (probs[i] > probs[best]) best = i;
      } else if (by_score && scores[i] != scores[best]) {
        if (scores[i] > scores[best]) best = i;
      } else if (c[i] < c[best]) {
        best = i;
      }
    }
    return best;
  }
  const std::string& argmax() const { return (*class_list)[argmax_index()]; }

  void validate() const {
    if (!class_list || class_list->size() != probs.size())
      throw Error("probability distribution: class/probability count mismatch");
    double s = 0;
    for (double p : probs) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error("probability distribution: entry outside [0,1]");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error("probability distribution: does not sum to 1");
  }
};

namespace detail {

/// Index of the largest value; ties resolved to the lexicographically smallest label.
inline std::size_t argmax_by_label(std::span<const double> v,
                                   const std::vector<std::string>& labels) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best] || (v[i] == v[best] && labels[i] < labels[best])) best = i;
  return best;
}

}  // namespace detail

class ClassifierModel {
 public:
  ClassifierModel(std::vector<std::string> classes, Eigen::MatrixXd weights,
                  Eigen::VectorXd biases, TrainMeta meta = {})
      : classes_(std::make_shared<const std::vector<std::string>>(std::move(classes))),
        weights_(std::move(weights)),
        biases_(std::move(biases)),
        meta_(std::move(meta)) {
    const auto& c = *classes_;
    if (c.size() < 2) throw Error("classifier model: need at least 2 classes");
    if (static_cast<std::size_t>(weights_.rows()) != c.size() ||
        static_cast<std::size_t>(biases_.size()) != c.size())
      throw Error("classifier model: weight rows / bias length must equal class count");
    if (weights_.cols() < 1) throw Error("classifier model: dimension must be >= 1");
    if (std::set<std::string>(c.begin(), c.end()).size() != c.size())
      throw Error("classifier model: class labels must be unique");
    if (!weights_.allFinite() || !biases_.allFinite())
      throw Error("classifier model: non-finite parameter");
    meta_.dim = dim();
  }

  const std::vector<std::string>& classes() const { return *classes_; }
  const std::shared_ptr<const std::vector<std::string>>& class_list() const { return classes_; }
  std::size_t num_classes() const { return classes_->size(); }
  std::size_t dim() const { return static_cast<std::size_t>(weights_.cols()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& biases() const { return biases_; }
  const TrainMeta& meta() const { return meta_; }

  std::optional<std::size_t> index_of(const std::string& label) const {
    const auto it = std::find(classes_->begin(), classes_->end(), label);
    if (it == classes_->end()) return std::nullopt;
    return static_cast<std::size_t>(it - classes_->begin());
  }
  bool has_class(const std::string& label) const { return index_of(label).has_value(); }

  /// Raw linear scores w_k . x + b_k.
  Vector scores(std::span<const double> x) const {
    check_input(x);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd s = weights_ * xv + biases_;
    return {s.data(), s.data() + s.size()};
  }

  /// sigma(score_k) normalized over classes. Computed from log-sigmoids so
  /// extreme scores cannot underflow the normalizer.
  ProbDistribution predict_proba(std::span<const double> x) const {
    const Vector s = scores(x);
    Vector p(s.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.size(); ++k) {
      p[k] = -softplus(-s[k]);
      mx = std::max(mx, p[k]);
    }
    double z = 0;
    for (auto& v : p) {
      v = std::exp(v - mx);
      z += v;
    }
    for (auto& v : p) v /= z;
    return {classes_, std::move(p), s};
  }

  std::string predict(std::span<const double> x) const {
    return predict_proba(x).argmax();
  }

 private:
  void check_input(std::span<const double> x) const {
    if (x.size() != dim())
      throw Error("dimension mismatch: model expects " + std::to_string(dim()) + ", got " +
                  std::to_string(x.size()));
    if (!all_finite(x)) throw Error("non-finite input embedding");
  }

  std::shared_ptr<const std::vector<std::string>> classes_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd biases_;
  TrainMeta meta_;
};

/// Regularized negative log-likelihood of one OvR subproblem. Exposed so
/// callers can audit a fitted model independently of the optimizer.
inline double ovr_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, double b, double lambda) {
  const Eigen::VectorXd m = X * w;
  double f = 0.5 * lambda * w.squaredNorm();
  for (Eigen::Index i = 0; i < m.size(); ++i) f += softplus(-y[i] * (m[i] + b));
  return f;
}

namespace detail {

struct BinaryFit {
  Eigen::VectorXd w;
  double b = 0.0;
  BinaryFitStats stats;
};

/// Full-batch Nesterov-accelerated gradient descent with backtracking on the
/// step size and a gradient-based momentum restart.
inline BinaryFit fit_binary(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const TrainConfig& cfg) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const double lambda = cfg.lambda;

  struct Point {
    Eigen::VectorXd w;
    double b = 0.0;
    Eigen::VectorXd margin;  // X w + b
  };
  Eigen::VectorXd r(n);
  auto gradient = [&](const Point& p, Eigen::VectorXd& gw, double& gb) {
    for (Eigen::Index i = 0; i < n; ++i) r[i] = -y[i] * sigmoid(-y[i] * p.margin[i]);
    gw.noalias() = X.transpose() * r;
    gw += lambda * p.w;
    gb = r.sum();
  };

  Point x{Eigen::VectorXd::Zero(d), 0.0, Eigen::VectorXd::Zero(n)};
  Point prev = x, z, cand;
  Eigen::VectorXd gw(d), gzw(d), gcw(d), dir(n);
  double gb = 0.0, gzb = 0.0, gcb = 0.0, t = 1.0, gnorm = 0.0;
  int it = 0, k = 0;

  BinaryFit fit;
  fit.stats.initial_objective = static_cast<double>(n) * std::log(2.0);
  gradient(x, gw, gb);
  for (;; ++it) {
    gnorm = std::sqrt(gw.squaredNorm() + gb * gb);
    if (gnorm <= cfg.tolerance) {
      fit.stats.converged = true;
      break;
    }
    if (it >= cfg.max_iterations) break;

    const double beta = static_cast<double>(k) / static_cast<double>(k + 3);
    if (k == 0) {
      z = x;
      gzw = gw;
      gzb = gb;
    } else {
      z.w = x.w + beta * (x.w - prev.w);
      z.b = x.b + beta * (x.b - prev.b);
      z.margin = x.margin + beta * (x.margin - prev.margin);
      gradient(z, gzw, gzb);
    }
    const double gsq = gzw.squaredNorm() + gzb * gzb;
    dir.noalias() = X * gzw;
    dir.array() += gzb;

    // Step size t is accepted once the gradient change along the step is
    // bounded by |step|^2 / t, i.e. t <= 1 / (local Lipschitz constant).
    // Unlike a function-value test this stays meaningful when the decrease
    // falls below the rounding error of f.
    t = std::min(t * 2.0, 1e6);
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      cand.w = z.w - t * gzw;
      cand.b = z.b - t * gzb;
      cand.margin = z.margin - t * dir;
      gradient(cand, gcw, gcb);
      const double curvature = -t * ((gcw - gzw).dot(gzw) + (gcb - gzb) * gzb);
      if (curvature <= t * gsq) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    // Momentum restarts when the step opposes descent at the extrapolated point.
    const bool uphill = k > 0 && gzw.dot(cand.w - x.w) + gzb * (cand.b - x.b) > 0;
    prev = std::move(x);
    x = std::move(cand);
    gw = gcw;
    gb = gcb;
    k = uphill ? 0 : k + 1;
  }
  fit.w = std::move(x.w);
  fit.b = x.b;
  fit.stats.iterations = it;
  fit.stats.grad_norm = gnorm;
  fit.stats.objective = ovr_objective(X, y, fit.w, fit.b, lambda);
  return fit;
}

}  // namespace detail

/// Trains K independent OvR logistic regressions. Classes are ordered
/// lexicographically. Subproblems run on `cfg.threads` workers; each writes
/// only its own row, so the result does not depend on scheduling.
inline ClassifierModel train(std::span<const LabeledEmbedding> dataset, const TrainConfig& cfg) {
  if (dataset.empty()) throw Error("train: empty dataset");
  if (cfg.lambda < 0 || !std::isfinite(cfg.lambda)) throw Error("train: lambda must be >= 0");
  if (cfg.max_iterations < 0) throw Error("train: max_iterations must be >= 0");
  const std::size_t d = dataset.front().vec.size();
  if (d < 1) throw Error("train: embedding dimension must be >= 1");
  std::set<std::string> label_set;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset[i];
    if (r.vec.size() != d)
      throw Error("train: dimension mismatch at record " + std::to_string(i));
    if (!all_finite(r.vec)) throw Error("train: non-finite input at record " + std::to_string(i));
    if (r.label.empty()) throw Error("train: empty label at record " + std::to_string(i));
    label_set.insert(r.label);
  }
  if (label_set.size() < 2) throw Error("train: need at least 2 distinct class labels");
  std::vector<std::string> classes(label_set.begin(), label_set.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < classes.size(); ++k) index[classes[k]] = k;

  const auto n = static_cast<Eigen::Index>(dataset.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(d));
  std::vector<std::size_t> label_of(dataset.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = dataset[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < d; ++j) X(i, static_cast<Eigen::Index>(j)) = r.vec[j];
    label_of[static_cast<std::size_t>(i)] = index[r.label];
  }

  const std::size_t K = classes.size();
  Eigen::MatrixXd W(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(d));
  Eigen::VectorXd B(static_cast<Eigen::Index>(K));
  std::vector<BinaryFitStats> stats(K);

  auto solve = [&](std::size_t k) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] = label_of[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0;
    auto fit = detail::fit_binary(X, y, cfg);
    W.row(static_cast<Eigen::Index>(k)) = fit.w.transpose();
    B[static_cast<Eigen::Index>(k)] = fit.b;
    stats[k] = fit.stats;
  };

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, K));
  if (workers <= 1) {
    for (std::size_t k = 0; k < K; ++k) solve(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < K; k += workers) solve(k);
      });
  }

  TrainMeta meta;
  meta.lambda = cfg.lambda;
  meta.dim = d;
  meta.max_iterations = cfg.max_iterations;
  meta.tolerance = cfg.tolerance;
  for (const auto& s : stats) {
    meta.iterations = std::max(meta.iterations, s.iterations);
    meta.objective += s.objective;
    meta.converged = meta.converged && s.converged;
  }
  meta.per_class = std::move(stats);
  return {std::move(classes), std::move(W), std::move(B), std::move(meta)};
}

// ---------------------------------------------------------------------------
// Model persistence: one JSON document, weights row-major.

inline Json model_to_json(const ClassifierModel& m) {
  Json j = Json::object();
  j["format"] = "wcmodel";
  j["version"] = 1;
  j["dim"] = m.dim();
  j["lambda"] = m.meta().lambda;
  j["classes"] = m.classes();
  Json w = Json::array();
  for (Eigen::Index k = 0; k < m.weights().rows(); ++k)
    for (Eigen::Index c = 0; c < m.weights().cols(); ++c) w.push_back(m.weights()(k, c));
  j["weights"] = std::move(w);
  Json b = Json::array();
  for (Eigen::Index k = 0; k < m.biases().size(); ++k) b.push_back(m.biases()[k]);
  j["biases"] = std::move(b);
  const auto& meta = m.meta();
  Json tm = Json::object();
  tm["iterations"] = meta.iterations;
  tm["objective"] = meta.objective;
  tm["converged"] = meta.converged;
  tm["max_iterations"] = meta.max_iterations;
  tm["tolerance"] = meta.tolerance;
  Json pc = Json::array();
  for (const auto& s : meta.per_class)
    pc.push_back({{"iterations", s.iterations},
                  {"objective", s.objective},
                  {"initial_objective", s.initial_objective},
                  {"grad_norm", s.grad_norm},
                  {"converged", s.converged}});
  tm["per_class"] = std::move(pc);
  tm["info"] = meta.info;
  j["train_meta"] = std::move(tm);
  return j;
}

inline ClassifierModel model_from_json(const Json& j) {
  try {
    if (j.at("format") != "wcmodel") throw Error("model file: format must be \"wcmodel\"");
    if (j.at("version") != 1) throw Error("model file: unsupported version");
    const auto d = j.at("dim").get<std::size_t>();
    auto classes = j.at("classes").get<std::vector<std::string>>();
    const auto flat = j.at("weights").get<std::vector<double>>();
    const auto bias = j.at("biases").get<std::vector<double>>();
    const auto K = classes.size();
    if (flat.size() != K * d) throw Error("model file: weights size must equal K*dim");
    if (bias.size() != K) throw Error("model file: biases length must equal K");
    Eigen::MatrixXd W(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t c = 0; c < d; ++c)
        W(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = flat[k * d + c];
    Eigen::VectorXd B = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(K));
    TrainMeta meta;
    meta.lambda = j.at("lambda").get<double>();
    meta.dim = d;
    if (j.contains("train_meta")) {
      const auto& tm = j["train_meta"];
      meta.iterations = tm.value("iterations", 0);
      meta.objective = tm.value("objective", 0.0);
      meta.converged = tm.value("converged", true);
      meta.max_iterations = tm.value("max_iterations", 0);
      meta.tolerance = tm.value("tolerance", 0.0);
      if (tm.contains("per_class"))
        for (const auto& s : tm["per_class"])
          meta.per_class.push_back({s.at("iterations").get<int>(), s.at("objective").get<double>(),
                                    s.at("initial_objective").get<double>(),
                                    s.at("grad_norm").get<double>(), s.at("converged").get<bool>()});
      if (tm.contains("info")) meta.info = tm["info"];
    }
    return {std::move(classes), std::move(W), std::move(B), std::move(meta)};
  } catch (const Json::exception& e) {
    throw Error(std::string("model file: ") + e.what());
  }
}

inline void save_model(const ClassifierModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(m).dump(1) + "\n");
}

inline ClassifierModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error&) {
    throw Error("model file " + path.string() + ": invalid JSON");
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Bucketized value regression.

enum class BucketScheme { quantile, equal_width };

inline BucketScheme parse_bucket_scheme(const std::string& s) {
  if (s == "quantile") return BucketScheme::quantile;
  if (s == "equal_width" || s == "width") return BucketScheme::equal_width;
  throw Error("unknown bucket scheme '" + s + "' (expected quantile or equal_width)");
}

inline const char* to_string(BucketScheme s) {
  return s == BucketScheme::quantile ? "quantile" : "equal_width";
}

struct Bucketing {
  Vector representatives;                // median value of each bucket, strictly increasing
  std::vector<std::size_t> assignment;   // bucket index per input value
  std::vector<std::string> warnings;
};

namespace detail {

inline double median_sorted(std::span<const double> s) {
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace detail

/// Splits values into at most `bucket_count` buckets. Equal values always land
/// in the same bucket; when there are fewer distinct values than buckets the
/// count is reduced and a warning is recorded. Empty equal-width bins are
/// dropped.
inline Bucketing bucketize(std::span<const double> values, std::size_t bucket_count,
                           BucketScheme scheme) {
  if (values.empty()) throw Error("bucketize: empty value list");
  if (bucket_count < 1) throw Error("bucketize: bucket count must be >= 1");
  if (!all_finite(values)) throw Error("bucketize: non-finite value");
  Vector sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Vector distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Bucketing out;
  std::size_t B = bucket_count;
  if (distinct.size() < B) {
    out.warnings.push_back("only " + std::to_string(distinct.size()) +
                           " distinct values; bucket count reduced from " +
                           std::to_string(B) + " to " + std::to_string(distinct.size()));
    B = distinct.size();
  }

  // bucket of each distinct value
  std::vector<std::size_t> bucket_of(distinct.size(), 0);
  if (scheme == BucketScheme::quantile) {
    std::map<double, std::size_t> counts;
    for (double v : sorted) ++counts[v];
    const double n = static_cast<double>(sorted.size());
    const std::size_t D = distinct.size();
    std::size_t b = 0, cum = 0;
    for (std::size_t i = 0; i < D; ++i) {
      bucket_of[i] = b;
      cum += counts[distinct[i]];
      if (b + 1 == B) continue;
      const std::size_t values_left = D - (i + 1), buckets_left = B - (b + 1);
      // close the bucket once it holds its quantile share, or when each later
      // bucket needs one of the remaining distinct values
      const bool share_reached =
          static_cast<double>(cum) >= n * static_cast<double>(b + 1) / static_cast<double>(B);
      if (values_left == buckets_left || (share_reached && values_left >= buckets_left)) ++b;
    }
  } else {
    const double lo = distinct.front(), hi = distinct.back();
    const double width = (hi - lo) / static_cast<double>(B);
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      std::size_t b = width > 0 ? static_cast<std::size_t>((distinct[i] - lo) / width) : 0;
      bucket_of[i] = std::min(b, B - 1);
    }
    // compact away empty bins
    std::size_t next = 0, prev = bucket_of.empty() ? 0 : bucket_of[0];
    for (std::size_t i = 0; i < bucket_of.size(); ++i) {
      if (bucket_of[i] != prev) {
        ++next;
        prev = bucket_of[i];
      }
      bucket_of[i] = next;
    }
    if (next + 1 < B)
      out.warnings.push_back(std::to_string(B - next - 1) + " empty equal-width bins dropped");
  }

  const std::size_t used = bucket_of.back() + 1;
  std::vector<Vector> members(used);
  for (double v : sorted) {
    const auto i = static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin());
    members[bucket_of[i]].push_back(v);
  }
  for (const auto& m : members) out.representatives.push_back(detail::median_sorted(m));
  out.assignment.reserve(values.size());
  for (double v : values) {
    const auto i = static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin());
    out.assignment.push_back(bucket_of[i]);
  }
  return out;
}

struct ValueSample {
  Vector embedding;
  double value = 0.0;
};

struct RegressorConfig {
  double ridge = 1.0;  // L2 penalty on the weights (bias unpenalized)
  BucketScheme scheme = BucketScheme::quantile;
};

struct ValueRegressor {
  Vector weights;
  double bias = 0.0;
  Vector buckets;         // bucket representative values, strictly increasing
  double fit_r = 0.0;     // Pearson(prediction, observed value) on the training data
  bool degenerate = false;  // fit_r undefined (constant targets or predictions), reported as 0
  std::size_t requested_buckets = 0;
  std::vector<std::string> warnings;
};

inline double predict_value(const ValueRegressor& reg, std::span<const double> x) {
  if (x.size() != reg.weights.size())
    throw Error("dimension mismatch: regressor expects " + std::to_string(reg.weights.size()) +
                ", got " + std::to_string(x.size()));
  if (!all_finite(x)) throw Error("non-finite input embedding");
  return dot(reg.weights, x) + reg.bias;
}

/// Fits embedding -> bucket-median value by ridge least squares on centered
/// data (closed form), so the intercept is exactly mean(target) - mean(x).w.
inline ValueRegressor train_value_regressor(std::span<const ValueSample> data,
                                            std::size_t bucket_count,
                                            const RegressorConfig& cfg = {}) {
  if (data.empty()) throw Error("train_value_regressor: empty dataset");
  if (data.size() < 2) throw Error("train_value_regressor: need at least 2 samples");
  if (cfg.ridge < 0) throw Error("train_value_regressor: ridge must be >= 0");
  const std::size_t d = data.front().embedding.size();
  if (d < 1) throw Error("train_value_regressor: embedding dimension must be >= 1");
  Vector values;
  values.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].embedding.size() != d)
      throw Error("train_value_regressor: dimension mismatch at sample " + std::to_string(i));
    if (!all_finite(data[i].embedding) || !std::isfinite(data[i].value))
      throw Error("train_value_regressor: non-finite input at sample " + std::to_string(i));
    values.push_back(data[i].value);
  }
  auto bucketing = bucketize(values, bucket_count, cfg.scheme);

  const auto n = static_cast<Eigen::Index>(data.size());
  const auto de = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd X(n, de);
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = data[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < de; ++j) X(i, j) = s.embedding[static_cast<std::size_t>(j)];
    t[i] = bucketing.representatives[bucketing.assignment[static_cast<std::size_t>(i)]];
  }
  const Eigen::RowVectorXd xmean = X.colwise().mean();
  const double tmean = t.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xmean;
  const Eigen::VectorXd tc = t.array() - tmean;
  Eigen::MatrixXd G = Xc.transpose() * Xc;
  G.diagonal().array() += cfg.ridge;
  const Eigen::VectorXd rhs = Xc.transpose() * tc;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(de);
  if (rhs.squaredNorm() > 0) {
    // ridge == 0 with collinear features: complete orthogonal decomposition
    // gives the minimum-norm solution
    w = G.completeOrthogonalDecomposition().solve(rhs);
  }

  ValueRegressor reg;
  reg.weights.assign(w.data(), w.data() + w.size());
  reg.bias = tmean - xmean.dot(w);
  reg.buckets = std::move(bucketing.representatives);
  reg.requested_buckets = bucket_count;
  reg.warnings = std::move(bucketing.warnings);
  if (!all_finite(reg.weights) || !std::isfinite(reg.bias))
    throw Error("train_value_regressor: non-finite fitted parameters");

  Vector pred;
  pred.reserve(data.size());
  for (const auto& s : data) pred.push_back(predict_value(reg, s.embedding));
  try {
    reg.fit_r = pearson(pred, values);
  } catch (const Error&) {
    reg.fit_r = 0.0;
    reg.degenerate = true;
    reg.warnings.push_back("fit correlation undefined (constant targets or predictions)");
  }
  return reg;
}

}  // namespace wordconf
