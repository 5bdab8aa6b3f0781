#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "wordconf/classifier.hpp"
#include "wordconf/fixtures.hpp"

using namespace wordconf;

namespace {

ClassifierModel two_class_hand_model() {
  Eigen::MatrixXd w(2, 2);
  w << 1, 0, 0, 1;
  return ClassifierModel({"A", "B"}, w, Eigen::VectorXd::Zero(2));
}

ClassifierModel random_model(std::mt19937_64& rng, std::size_t K, std::size_t d, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<std::string> classes;
  for (std::size_t k = 0; k < K; ++k) classes.push_back(fixtures::word_label(k));
  Eigen::MatrixXd w(K, d);
  Eigen::VectorXd b(K);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = g(rng);
  return ClassifierModel(classes, w, b);
}

double train_accuracy(const ClassifierModel& m, const EmbeddingBundle& b) {
  std::size_t ok = 0;
  for (const auto& r : b.records) ok += m.predict(r.vec) == r.label;
  return static_cast<double>(ok) / static_cast<double>(b.records.size());
}

}  // namespace

TEST(PredictProba, HandSigmoidNormalization) {
  const auto p = two_class_hand_model().predict_proba(Vector{std::log(3.0), 0.0});
  // sigmoid(ln 3) = 3/4, sigmoid(0) = 1/2
  EXPECT_NEAR(p.prob("A"), 0.6, 1e-15);
  EXPECT_NEAR(p.prob("B"), 0.4, 1e-15);
  EXPECT_EQ(p.argmax(), "A");
}

TEST(PredictProba, ZeroWeightsAreUniform) {
  const ClassifierModel m({"blue", "green", "red"}, Eigen::MatrixXd::Zero(3, 4),
                          Eigen::VectorXd::Zero(3));
  const auto p = m.predict_proba(Vector{1, -2, 3, 0.5});
  for (double v : p.probs) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  EXPECT_EQ(p.argmax(), "blue");  // lexicographic tie-break
}

TEST(PredictProba, ContractOnRandomModels) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t K = 2 + rng() % 8, d = 1 + rng() % 10;
    const auto m = random_model(rng, K, d, t % 3 == 0 ? 30.0 : 1.0);
    Vector x(d);
    for (auto& v : x) v = g(rng);
    const auto p = m.predict_proba(x);
    p.validate();
    double s = 0;
    for (double v : p.probs) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
    const auto raw = m.scores(x);
    EXPECT_EQ(p.argmax_index(),
              static_cast<std::size_t>(std::max_element(raw.begin(), raw.end()) - raw.begin()));
  }
}

TEST(PredictProba, ExtremeScoresStayFinite) {
  Eigen::MatrixXd w(3, 1);
  w << 1e6, -1e6, 0;
  const ClassifierModel m({"a", "b", "c"}, w, Eigen::VectorXd::Zero(3));
  for (double x : {-1e3, 1e3, 1e300}) {
    const auto p = m.predict_proba(Vector{x});
    p.validate();
  }
}

TEST(PredictProba, Errors) {
  const auto m = two_class_hand_model();
  EXPECT_THROW(m.predict_proba(Vector{1.0}), Error);
  EXPECT_THROW(m.predict_proba(Vector{1.0, std::nan("")}), Error);
  EXPECT_THROW(m.predict_proba(Vector{1.0, 2.0}).prob("C"), Error);
}

TEST(Model, ConstructorInvariants) {
  EXPECT_THROW(ClassifierModel({"a"}, Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1)), Error);
  EXPECT_THROW(ClassifierModel({"a", "a"}, Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)),
               Error);
  EXPECT_THROW(ClassifierModel({"a", "b"}, Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)),
               Error);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 2);
  w(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ClassifierModel({"a", "b"}, w, Eigen::VectorXd::Zero(2)), Error);
}

TEST(Train, SeparableFixtureFitsExactly) {
  const auto b = fixtures::separable_2d(5);
  const auto m = train(b.records, {});
  EXPECT_EQ(train_accuracy(m, b), 1.0);
  EXPECT_EQ(m.classes(), (std::vector<std::string>{"neg", "pos"}));
  for (const auto& s : m.meta().per_class) EXPECT_LT(s.objective, s.initial_objective);
}

TEST(Train, ReportedObjectiveMatchesIndependentEvaluation) {
  const auto b = fixtures::separable_2d(8);
  const TrainConfig cfg{};
  const auto m = train(b.records, cfg);
  const auto n = static_cast<Eigen::Index>(b.records.size());
  Eigen::MatrixXd X(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) X(i, j) = b.records[static_cast<std::size_t>(i)].vec[static_cast<std::size_t>(j)];
  for (std::size_t k = 0; k < m.num_classes(); ++k) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] = b.records[static_cast<std::size_t>(i)].label == m.classes()[k] ? 1.0 : -1.0;
    const Eigen::VectorXd w = m.weights().row(static_cast<Eigen::Index>(k)).transpose();
    const double f = ovr_objective(X, y, w, m.biases()[static_cast<Eigen::Index>(k)], cfg.lambda);
    EXPECT_NEAR(f, m.meta().per_class[k].objective, 1e-9 * std::max(1.0, f));
    EXPECT_LT(f, static_cast<double>(n) * std::log(2.0));  // objective at zero weights
    // central-difference gradient vanishes at the optimum
    const double h = 1e-6;
    for (Eigen::Index j = 0; j <= 2; ++j) {
      Eigen::VectorXd wp = w, wm = w;
      double bp = m.biases()[static_cast<Eigen::Index>(k)], bm = bp;
      if (j < 2) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double g = (ovr_objective(X, y, wp, bp, cfg.lambda) -
                        ovr_objective(X, y, wm, bm, cfg.lambda)) / (2 * h);
      EXPECT_NEAR(g, 0.0, 1e-4) << "class " << k << " coordinate " << j;
    }
  }
}

TEST(Train, BitIdenticalRetrainAcrossThreadCounts) {
  const auto b = fixtures::planted_benchmark(2, 6, 4, 20);
  TrainConfig one{}, many{};
  one.threads = 1;
  many.threads = 4;
  const auto a = train(b.bundle.records, one);
  const auto c = train(b.bundle.records, one);
  const auto d = train(b.bundle.records, many);
  EXPECT_TRUE(a.weights() == c.weights() && a.biases() == c.biases());
  EXPECT_TRUE(a.weights() == d.weights() && a.biases() == d.biases());
}

TEST(Train, ZeroIterationsGiveUniformModel) {
  const auto b = fixtures::colors(1);
  TrainConfig cfg{};
  cfg.max_iterations = 0;
  const auto m = train(b.records, cfg);
  EXPECT_TRUE(m.weights().isZero(0.0));
  EXPECT_TRUE(m.biases().isZero(0.0));
  EXPECT_FALSE(m.meta().converged);
  for (double p : m.predict_proba(b.records.front().vec).probs) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Train, Errors) {
  std::vector<LabeledEmbedding> one_class = {{"a", {1.0}, {}}, {"a", {2.0}, {}}};
  EXPECT_THROW(train(one_class, {}), Error);
  EXPECT_THROW(train(std::vector<LabeledEmbedding>{}, {}), Error);
  std::vector<LabeledEmbedding> mixed = {{"a", {1.0}, {}}, {"b", {2.0, 1.0}, {}}};
  EXPECT_THROW(train(mixed, {}), Error);
  std::vector<LabeledEmbedding> bad = {{"a", {1.0}, {}}, {"b", {std::nan("")}, {}}};
  EXPECT_THROW(train(bad, {}), Error);
}

TEST(ModelFile, RoundTripIsExact) {
  const auto b = fixtures::colors(4);
  const auto m = train(b.records, {});
  const auto dir = test_util::temp_dir("model");
  save_model(m, dir / "m.wcm");
  const auto l = load_model(dir / "m.wcm");
  EXPECT_EQ(l.classes(), m.classes());
  EXPECT_TRUE(l.weights() == m.weights());
  EXPECT_TRUE(l.biases() == m.biases());
  EXPECT_EQ(l.meta().iterations, m.meta().iterations);
  EXPECT_EQ(l.meta().converged, m.meta().converged);
}

TEST(ModelFile, RejectsCorruptFiles) {
  const auto dir = test_util::temp_dir("badmodel");
  write_file_atomic(dir / "a.wcm", "not json");
  write_file_atomic(dir / "b.wcm", R"({"format":"wcmodel","version":1,"dim":2,"classes":["a","b"],"weights":[1,2,3],"biases":[0,0]})");
  EXPECT_THROW(load_model(dir / "a.wcm"), Error);
  EXPECT_THROW(load_model(dir / "b.wcm"), Error);
  EXPECT_THROW(load_model(dir / "missing.wcm"), Error);
}
