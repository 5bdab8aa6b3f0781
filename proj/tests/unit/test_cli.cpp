#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "test_util.hpp"
#include "wordconf/cli.hpp"

using namespace wordconf;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Planted-benchmark bundle, pairs and trained model in a fresh directory.
fs::path planted_workspace() {
  const auto dir = test_util::temp_dir("cli");
  const auto pb = fixtures::planted_benchmark(1, 6, 4, 20);
  write_bundle(pb.bundle, dir / "planted.ceb");
  std::string tsv;
  for (const auto& p : pb.pairs)
    tsv += p.word_a + "\t" + p.word_b + "\t" + format_double(p.human_score) + "\n";
  write_file_atomic(dir / "planted.tsv", tsv);
  const auto r = run({"--out", dir.string(), "train", "--bundle", (dir / "planted.ceb").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  return dir;
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("benchmark-pairs"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"train"}).code, 2);  // missing --bundle
  EXPECT_EQ(run({"validate", "x.ceb", "--bogus"}).code, 2);
  EXPECT_EQ(run({"trace", "--segments", "c.json", "--format", "png"}).code, 2);
}

TEST(Cli, DomainErrorsExitOneWithMessage) {
  const auto dir = test_util::temp_dir("clibad");
  write_file_atomic(dir / "bad.ceb", R"({"label":"a","vec":[1]})" "\n");
  const auto r = run({"validate", (dir / "bad.ceb").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing header"), std::string::npos) << r.err;
  EXPECT_EQ(run({"validate", (dir / "nope.ceb").string()}).code, 1);
}

TEST(Cli, ValidateSummarizes) {
  const auto dir = planted_workspace();
  const auto r = run({"validate", (dir / "planted.ceb").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("120 records"), std::string::npos) << r.out;
}

TEST(Cli, BenchmarkPairsReportsBothRhoAndIsReproducible) {
  const auto dir = planted_workspace();
  auto bench = [&](const fs::path& out) {
    return run({"--out", out.string(), "--seed", "3", "benchmark-pairs", "--model",
                (dir / "model.wcm").string(), "--bundle", (dir / "planted.ceb").string(),
                "--pairs", (dir / "planted.tsv").string()});
  };
  ASSERT_EQ(bench(dir / "a").code, 0);
  ASSERT_EQ(bench(dir / "b").code, 0);
  const auto ja = read_file(dir / "a" / "benchmark_planted.json");
  EXPECT_EQ(ja, read_file(dir / "b" / "benchmark_planted.json"));
  EXPECT_EQ(read_file(dir / "a" / "benchmark_planted_pairs.csv"),
            read_file(dir / "b" / "benchmark_planted_pairs.csv"));
  const auto j = Json::parse(ja);
  EXPECT_TRUE(j.contains("rho_word_confusion"));
  EXPECT_TRUE(j.contains("rho_cosine"));
  EXPECT_EQ(j["provenance"]["seed"], 3);
  EXPECT_EQ(j["provenance"]["options"]["samples"], "30");
  EXPECT_EQ(j["provenance"]["options"]["exclude-self"], "true");
  const auto csv = read_file(dir / "a" / "benchmark_planted_pairs.csv");
  EXPECT_EQ(csv.rfind("# wordconf ", 0), 0u);
  EXPECT_NE(csv.find("\"seed\":3"), std::string::npos);
}

TEST(Cli, ConfigFileAndEnvironmentDefaults) {
  const auto dir = planted_workspace();
  write_file_atomic(dir / "run.toml", "seed = 9\n[matrix]\nwords = [\"w00\", \"w01\"]\nsamples = 5\n");
  ::setenv("WORDCONF_OUT", (dir / "env_out").string().c_str(), 1);
  const auto r = run({"--config", (dir / "run.toml").string(), "matrix", "--model",
                      (dir / "model.wcm").string(), "--bundle", (dir / "planted.ceb").string()});
  ::unsetenv("WORDCONF_OUT");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = read_file(dir / "env_out" / "matrix.csv");
  EXPECT_NE(csv.find("\"seed\":9"), std::string::npos) << csv;
  EXPECT_NE(csv.find("word_confusion,w00,w01\n"), std::string::npos) << csv;
}

TEST(Cli, SimilarRefusesExcludedSelfClass) {
  const auto dir = planted_workspace();
  const std::vector<std::string> base = {"--out", dir.string(), "similar", "--model",
                                         (dir / "model.wcm").string(), "--bundle",
                                         (dir / "planted.ceb").string(), "--target", "w02"};
  auto ok = base;
  EXPECT_EQ(run(ok).code, 0);
  auto self = base;
  self.insert(self.end(), {"--class", "w02"});
  EXPECT_EQ(run(self).code, 1);
  self.push_back("--no-exclude-self");
  EXPECT_EQ(run(self).code, 0);
}
