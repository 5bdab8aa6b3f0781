#include <gtest/gtest.h>

#include <sstream>

#include "wordconf/analysis.hpp"
#include "wordconf/fixtures.hpp"

using namespace wordconf;

TEST(Identifiability, SeparatedClustersAreIdentified) {
  const auto b = fixtures::sphere_clusters(60, 16, 0.05, 11, 1);
  IdentifiabilityOptions opt;
  opt.n_classes = 60;
  const auto r = one_shot_identifiability(b, opt);
  EXPECT_GE(r.mean_accuracy, 0.9);
  EXPECT_EQ(r.outcomes.size(), 600u);
}

TEST(Identifiability, SharedCenterIsNearChance) {
  const auto b = fixtures::sphere_clusters(40, 8, 0.05, 11, 2, true);
  IdentifiabilityOptions opt;
  opt.n_classes = 40;
  opt.trials = 2;
  const auto r = one_shot_identifiability(b, opt);
  const double p = 1.0 / 40, n = 800;
  EXPECT_LE(std::abs(r.mean_accuracy - p), 3 * std::sqrt(p * (1 - p) / n));
}

TEST(Identifiability, Errors) {
  const auto b = fixtures::sphere_clusters(5, 4, 0.05, 11, 1);
  IdentifiabilityOptions opt;
  opt.n_classes = 1;
  EXPECT_THROW(one_shot_identifiability(b, opt), Error);
  opt.n_classes = 6;
  EXPECT_THROW(one_shot_identifiability(b, opt), Error);  // only 5 eligible words
}

namespace {

std::map<std::string, WordMetadata> meta_fixture() {
  std::istringstream in(
      "# word freq senses tokens first_freq\n"
      "rare\t50\t1\t1\t50\n"
      "common\t5e6\t3\t2\t1e6\n"
      "the\t2e7\t12\t1\t2e7\n");
  return parse_metadata_tsv(in);
}

const ErrorBin& bin_containing(const std::vector<ErrorBin>& bins, double v) {
  for (const auto& b : bins)
    if (v >= b.lo && v < b.hi) return b;
  throw std::logic_error("no bin");
}

}  // namespace

TEST(ErrorBins, AllCorrectIsZeroEverywhere) {
  const std::vector<WordOutcome> res = {{"rare", true}, {"common", true}, {"the", true}};
  const auto t = error_bins(res, meta_fixture(), {});
  for (const auto& [facet, bins] : t.bins)
    for (const auto& b : bins)
      if (b.n) EXPECT_EQ(*b.rate(), 0.0);
}

TEST(ErrorBins, ErrorsLandInTheirBin) {
  const std::vector<WordOutcome> res = {{"rare", true}, {"common", true}, {"the", false},
                                        {"the", false}, {"ghost", false}};
  const auto t = error_bins(res, meta_fixture(), {});
  EXPECT_EQ(t.excluded, 1u);
  EXPECT_EQ(t.missing_words, std::vector<std::string>{"ghost"});
  const auto& freq = t.bins.at(Facet::frequency);
  EXPECT_EQ(*bin_containing(freq, 2e7).rate(), 1.0);
  EXPECT_EQ(*bin_containing(freq, 50).rate(), 0.0);
  EXPECT_EQ(*bin_containing(freq, 5e6).rate(), 0.0);
  EXPECT_FALSE(bin_containing(freq, 5e3).rate().has_value());
  const auto csv = format_error_bins_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "facet,lo,hi,n,errors,error_rate");
}

TEST(ErrorBins, MetadataErrors) {
  std::istringstream short_row("w\t1\t2\n");
  EXPECT_THROW(parse_metadata_tsv(short_row), Error);
  std::istringstream bad_outcome("w\tmaybe\n");
  EXPECT_THROW(parse_outcomes_tsv(bad_outcome), Error);
}

TEST(SvdCheck, IdentityAndOrthogonal) {
  Eigen::VectorXd x(3), y(3);
  x << 1, 2, -1;
  y << 0.5, -1, 4;
  const auto id = svd_distance_check(Eigen::MatrixXd::Identity(3, 3), x, y);
  EXPECT_NEAR(id.direct_euclidean, id.original_euclidean, 1e-12);
  EXPECT_NEAR(id.direct_cosine, id.original_cosine, 1e-12);
  EXPECT_LE(id.max_discrepancy, 1e-12);

  const double a = 0.7;
  Eigen::MatrixXd R(3, 3);
  R << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  const auto rot = svd_distance_check(R, x, y);
  EXPECT_NEAR(rot.decomposed_euclidean, rot.original_euclidean, 1e-12);
  EXPECT_NEAR(rot.decomposed_cosine, rot.original_cosine, 1e-12);
  EXPECT_LE(rot.u_orthogonality_error, 1e-12);
}

TEST(SvdCheck, RandomTwoByTwo) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd A(2, 2);
    A << g(rng), g(rng), g(rng), g(rng);
    Eigen::VectorXd x(2), y(2);
    x << g(rng), g(rng);
    y << g(rng), g(rng);
    const auto r = svd_distance_check(A, x.normalized(), y.normalized());
    EXPECT_NEAR(r.direct_euclidean, r.decomposed_euclidean, 1e-9);
    EXPECT_NEAR(r.direct_cosine, r.decomposed_cosine, 1e-9);
    const Eigen::VectorXd d = A * x.normalized() - A * y.normalized();
    EXPECT_NEAR(r.direct_euclidean, d.norm(), 1e-12);
  }
}

TEST(BoundaryGrid, CosineLabelAndScaleInvariance) {
  const std::map<std::string, Vector> c = {{"east", {1, 0}}, {"north", {0, 1}}};
  EXPECT_EQ(cosine_label(Vector{2, 0.1}, c), "east");
  for (double s : {0.5, 2.0, 10.0}) EXPECT_EQ(cosine_label(Vector{2 * s, 0.1 * s}, c), "east");
}

TEST(BoundaryGrid, OffsetBlobsDisagree) {
  const auto b = fixtures::offset_blobs(3);
  const auto m = train(b.records, {});
  std::map<std::string, Vector> c;
  for (const auto& l : b.labels()) c[l] = mean_embedding(b.records_for(l));
  const auto g = boundary_grid(m, c, 5.0, 20);
  EXPECT_EQ(g.size(), 400u);
  EXPECT_TRUE(g.cosine_scale_invariant);
  EXPECT_GT(g.wc_scale_flips, 0u);
  EXPECT_GT(g.disagreements(), 0u);
  const auto csv = format_grid_csv(g);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 401u);
  EXPECT_THROW(boundary_grid(m, c, 5.0, 0), Error);
}
