#include <gtest/gtest.h>

#include <cmath>

#include "wordconf/fixtures.hpp"
#include "wordconf/similarity.hpp"

using namespace wordconf;

namespace {

ClassifierModel zero_rgb(std::size_t d = 3) {
  return ClassifierModel({"blue", "green", "red"}, Eigen::MatrixXd::Zero(3, static_cast<Eigen::Index>(d)),
                         Eigen::VectorXd::Zero(3));
}

std::vector<LabeledEmbedding> recs(const std::string& label, std::vector<Vector> vs) {
  std::vector<LabeledEmbedding> out;
  for (auto& v : vs) out.push_back({label, std::move(v), Json::object()});
  return out;
}

}  // namespace

TEST(SimWc, ZeroModelIsUniform) {
  const auto m = zero_rgb();
  const auto t = recs("burgundy", {{1, 2, 3}, {0, 0, 1}});
  for (const char* c : {"red", "green", "blue"})
    EXPECT_DOUBLE_EQ(sim_wc(m, t, c, false).score, 1.0 / 3.0);
}

TEST(SimWc, ExcludeSelfRenormalizes) {
  const auto m = zero_rgb();
  const auto t = recs("red", {{1, 2, 3}});
  EXPECT_DOUBLE_EQ(sim_wc(m, t, "green", true).score, 0.5);
  EXPECT_THROW(sim_wc(m, t, "red", true), Error);
  EXPECT_DOUBLE_EQ(sim_wc(m, t, "red", false).score, 1.0 / 3.0);
}

TEST(SimWc, BurgundyIsMostlyRed) {
  const auto b = fixtures::colors(3);
  std::vector<LabeledEmbedding> train_set;
  for (const auto& r : b.records)
    if (r.label != "burgundy") train_set.push_back(r);
  const auto m = train(train_set, {});
  const auto dist = target_distribution(m, b.records_for("burgundy"), "burgundy", true);
  EXPECT_EQ(dist.argmax(), "red");
}

TEST(SimWc, AveragesPerRecordDistributions) {
  Eigen::MatrixXd w(2, 1);
  w << 1, -1;
  const ClassifierModel m({"a", "b"}, w, Eigen::VectorXd::Zero(2));
  const auto t = recs("x", {{2.0}, {-0.5}});
  const double expect = (m.predict_proba(Vector{2.0}).prob("a") + m.predict_proba(Vector{-0.5}).prob("a")) / 2;
  EXPECT_DOUBLE_EQ(sim_wc(m, t, "a", false).score, expect);
}

TEST(SimWc, Errors) {
  const auto m = zero_rgb();
  EXPECT_THROW(sim_wc(m, recs("x", {{1, 2, 3}}), "purple", false), Error);
  EXPECT_THROW(sim_wc(m, std::vector<LabeledEmbedding>{}, "x", "red", false), Error);
  EXPECT_THROW(sim_wc(m, recs("x", {{1, 2}}), "red", false), Error);
}

TEST(Matrix, ZeroModelOffDiagonalsEqual) {
  const auto m = zero_rgb();
  EmbeddingBundle b;
  b.header.dim = 3;
  b.header.model = "m";
  for (const char* l : {"red", "green", "blue"}) b.records.push_back({l, {1, 1, 1}, Json::object()});
  const auto sm = similarity_matrix(m, b, {"red", "green", "blue"});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_DOUBLE_EQ(sm.score(i, j), i == j ? 0.0 : 0.5);
  const auto csv = format_matrix_csv(sm);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "word_confusion,red,green,blue");
  EXPECT_THROW(similarity_matrix(m, b, {"red", "teal"}), Error);
}

TEST(Matrix, NestedCategoryIsAsymmetric) {
  const auto b = fixtures::nested_category(1);
  const auto m = train(b.records, {});
  const double cat_to_animal = sim_wc(m, b.records_for("cat"), "animal", false).score;
  const double animal_to_cat = sim_wc(m, b.records_for("animal"), "cat", false).score;
  EXPECT_GT(cat_to_animal, animal_to_cat);
  EXPECT_GE(cat_to_animal - animal_to_cat, 0.05);
}

TEST(Cosine, Basics) {
  EXPECT_DOUBLE_EQ(cosine(Vector{1, 0}, Vector{0, 2}), 0.0);
  EXPECT_DOUBLE_EQ(cosine(Vector{1, 1}, Vector{3, 3}), 1.0);
  EXPECT_THROW(cosine(Vector{0, 0}, Vector{1, 0}), Error);
  EXPECT_THROW(cosine(Vector{1, 0}, Vector{1}), Error);
}

TEST(CosineSeedScore, HandCase) {
  const auto targets = recs("t", {{1, 0}, {0, 1}});
  const std::map<std::string, std::vector<LabeledEmbedding>> seeds = {{"c", recs("s", {{1, 0}})}};
  EXPECT_NEAR(cosine_seed_score(targets, seeds, 1).at("c"), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cosine_seed_score(targets, seeds, 2).at("c"), 0.5, 1e-15);
  EXPECT_NEAR(cosine_seed_score(targets, seeds, 3).at("c"), 0.5, 1e-15);
}

TEST(CosineSeedScore, DegenerateCases) {
  const std::map<std::string, std::vector<LabeledEmbedding>> seeds = {
      {"c", recs("s", {{1, 2}})}, {"d", recs("s", {{-1, 0.5}})}};
  const auto single = recs("t", {{0.3, 0.7}});
  for (const auto& [c, _] : seeds) {
    const double v1 = cosine_seed_score(single, seeds, 1).at(c);
    EXPECT_NEAR(cosine_seed_score(single, seeds, 2).at(c), v1, 1e-15);
    EXPECT_NEAR(cosine_seed_score(single, seeds, 3).at(c), v1, 1e-15);
  }
  const std::map<std::string, std::vector<LabeledEmbedding>> same = {
      {"c", recs("s", {{1, 2}, {1, 2}})}};
  for (int v = 1; v <= 3; ++v)
    EXPECT_NEAR(cosine_seed_score(recs("t", {{1, 2}, {1, 2}}), same, v).at("c"), 1.0, 1e-15);
  EXPECT_THROW(cosine_seed_score(single, seeds, 4), Error);
  EXPECT_THROW(cosine_seed_score(std::vector<LabeledEmbedding>{}, seeds, 1), Error);
}

TEST(FeatureClassify, TieBreakAndFixtures) {
  const ClassifierModel zero({"negative", "positive"}, Eigen::MatrixXd::Zero(2, 2),
                             Eigen::VectorXd::Zero(2));
  EXPECT_EQ(feature_classify(zero, recs("x", {{1, 1}})), "negative");

  const auto b = fixtures::separable_2d(9);
  const auto m = train(b.records, {});
  EXPECT_EQ(feature_classify(m, recs("x", {{1.8, 2.3}, {2.4, 1.9}})), "pos");
  EXPECT_EQ(feature_classify(m, std::vector<LabeledEmbedding>{b.records_for("neg").front()}), "neg");
  EXPECT_THROW(feature_classify(m, std::vector<LabeledEmbedding>{}), Error);
}
