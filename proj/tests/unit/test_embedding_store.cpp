#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "test_util.hpp"
#include "wordconf/embedding_store.hpp"

using namespace wordconf;

namespace {

const char* kHeader = R"({"format":"ceb","version":1,"dim":3,"model":"m"})";

EmbeddingBundle parse(const std::string& text) {
  std::istringstream in(text);
  return parse_bundle(in);
}

}  // namespace

TEST(Bundle, ParsesHeaderAndRecords) {
  const auto b = parse(std::string(kHeader) + "\n" +
                       R"({"label":"cat","vec":[1,2,3]})" "\n"
                       R"({"label":"dog","vec":[4,5,6],"meta":{"sent":3}})" "\n");
  EXPECT_EQ(b.dim(), 3u);
  EXPECT_EQ(b.header.model, "m");
  ASSERT_EQ(b.records.size(), 2u);
  EXPECT_EQ(b.records[1].label, "dog");
  EXPECT_EQ(b.records[1].vec, (Vector{4, 5, 6}));
  EXPECT_EQ(b.records[1].meta["sent"], 3);
}

TEST(Bundle, DimensionMismatchNamesLine) {
  try {
    parse(std::string(kHeader) + "\n" + R"({"label":"cat","vec":[1,2]})" "\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("dimension"), std::string::npos) << e.what();
  }
}

TEST(Bundle, MissingHeader) {
  try {
    parse(R"({"label":"cat","vec":[1,2,3]})" "\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing header"), std::string::npos) << e.what();
  }
}

TEST(Bundle, RejectsBadHeadersAndRecords) {
  EXPECT_THROW(parse(""), Error);
  EXPECT_THROW(parse(R"({"format":"xyz","version":1,"dim":3,"model":"m"})"), Error);
  EXPECT_THROW(parse(R"({"format":"ceb","version":2,"dim":3,"model":"m"})"), Error);
  EXPECT_THROW(parse(R"({"format":"ceb","version":1,"dim":0,"model":"m"})"), Error);
  EXPECT_THROW(parse(std::string(kHeader) + "\nnot json\n"), Error);
  EXPECT_THROW(parse(std::string(kHeader) + "\n" + R"({"label":"","vec":[1,2,3]})"), Error);
  EXPECT_THROW(parse(std::string(kHeader) + "\n" + R"({"label":"a","vec":[1,null,3]})"), Error);
  EXPECT_THROW(parse(std::string(kHeader) + "\n" + R"({"vec":[1,2,3]})"), Error);
}

TEST(Bundle, RoundTripIsIdentity) {
  EmbeddingBundle b;
  b.header.dim = 2;
  b.header.model = "bert-base-cased";
  b.header.segment = "1789";
  Json meta = Json::object();
  meta["offset"] = 17;
  b.records.push_back({"peuple", {0.1, -2.5e-7}, meta});
  b.records.push_back({"roi", {1.0 / 3.0, 1e300}, Json::object()});
  const auto text = format_bundle(b);
  EXPECT_EQ(parse(text), b);
  EXPECT_EQ(format_bundle(parse(text)), text);
}

TEST(Bundle, SingleRecordFileHasTwoLines) {
  EmbeddingBundle b;
  b.header.dim = 1;
  b.header.model = "m";
  b.records.push_back({"x", {0.0}, Json::object()});
  const auto text = format_bundle(b);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Bundle, NanIsRefusedOnWrite) {
  EmbeddingBundle b;
  b.header.dim = 2;
  b.header.model = "m";
  b.records.push_back({"x", {0.0, std::nan("")}, Json::object()});
  EXPECT_THROW(format_bundle(b), Error);
  const auto dir = test_util::temp_dir("nan");
  EXPECT_THROW(write_bundle(b, dir / "b.ceb"), Error);
  EXPECT_FALSE(std::filesystem::exists(dir / "b.ceb"));
}

TEST(Bundle, FileRoundTrip) {
  EmbeddingBundle b;
  b.header.dim = 2;
  b.header.model = "m";
  b.records.push_back({"x", {1.5, 2.5}, Json::object()});
  const auto dir = test_util::temp_dir("rt");
  write_bundle(b, dir / "b.ceb");
  EXPECT_EQ(read_bundle(dir / "b.ceb"), b);
  EXPECT_THROW(read_bundle(dir / "missing.ceb"), Error);
}

TEST(Bundle, LabelsAndGroups) {
  EmbeddingBundle b;
  b.header.dim = 1;
  b.header.model = "m";
  for (const char* l : {"b", "a", "b", "c"}) b.records.push_back({l, {1.0}, Json::object()});
  EXPECT_EQ(b.labels(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(b.count("b"), 2u);
  EXPECT_EQ(b.group_by_label().at("b").size(), 2u);
}

namespace {

EmbeddingBundle numbered(const std::string& label, std::size_t n) {
  EmbeddingBundle b;
  b.header.dim = 1;
  b.header.model = "m";
  for (std::size_t i = 0; i < n; ++i)
    b.records.push_back({label, {static_cast<double>(i)}, Json::object()});
  b.records.push_back({"other", {-1.0}, Json::object()});
  return b;
}

std::vector<double> firsts(const std::vector<LabeledEmbedding>& r) {
  std::vector<double> out;
  for (const auto& x : r) out.push_back(x.vec[0]);
  return out;
}

}  // namespace

TEST(Sample, DrawsKDistinctRecords) {
  const auto b = numbered("w", 50);
  const auto s = sample_per_label(b, "w", 30, 1);
  ASSERT_EQ(s.size(), 30u);
  const auto v = firsts(s);
  EXPECT_EQ(std::set<double>(v.begin(), v.end()).size(), 30u);
  for (const auto& r : s) EXPECT_EQ(r.label, "w");
}

TEST(Sample, ClampsToAvailable) {
  const auto b = numbered("w", 10);
  EXPECT_EQ(sample_per_label(b, "w", 30, 1).size(), 10u);
}

TEST(Sample, DeterministicPerSeed) {
  const auto b = numbered("w", 200);
  EXPECT_EQ(firsts(sample_per_label(b, "w", 20, 5)), firsts(sample_per_label(b, "w", 20, 5)));
  bool differs = false;
  for (std::uint64_t s = 6; s < 12 && !differs; ++s)
    differs = firsts(sample_per_label(b, "w", 20, 5)) != firsts(sample_per_label(b, "w", 20, s));
  EXPECT_TRUE(differs);
}

TEST(Sample, Errors) {
  const auto b = numbered("w", 5);
  EXPECT_THROW(sample_per_label(b, "w", 0, 1), Error);
  EXPECT_THROW(sample_per_label(b, "nope", 3, 1), Error);
}

TEST(Mean, HandCases) {
  EXPECT_EQ(mean_embedding(std::vector<Vector>{{2.5, -1.0}}), (Vector{2.5, -1.0}));
  EXPECT_EQ(mean_embedding(std::vector<Vector>{{1, 1}, {-1, -1}}), (Vector{0, 0}));
  EXPECT_EQ(mean_embedding(std::vector<Vector>{{1, 2}, {3, 4}, {5, 6}}), (Vector{3, 4}));
  EXPECT_THROW(mean_embedding(std::vector<Vector>{}), Error);
  EXPECT_THROW(mean_embedding(std::vector<Vector>{{1, 2}, {1}}), Error);
}
