// Writes the synthetic fixture set used by the examples in the README and the
// end-to-end tests. Output is a pure function of --seed.

#include <filesystem>
#include <random>

#include <CLI11.hpp>

#include "wordconf/fixtures.hpp"

namespace fs = std::filesystem;
using namespace wordconf;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  write_file_atomic(p, s);
  std::cout << "wrote " << p.string() << "\n";
}

void write_b(const fs::path& p, const EmbeddingBundle& b) {
  write_bundle(b, p);
  std::cout << "wrote " << p.string() << "\n";
}

// Seed classes "near"/"far" along one ray, and twenty target words drawn close
// to one of them. Cosine to the seeds cannot tell the two apart.
void feature_fixture(const fs::path& dir, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto seeds = fixtures::offset_blobs(seed + 1, 60, 0.3);
  auto targets = fixtures::empty_bundle(2);
  std::string tsv = "# word\tgold class\n";
  for (std::size_t i = 0; i < 20; ++i) {
    const bool near = i % 2 == 0;
    const std::string w = fixtures::word_label(i, 2);
    const double c = near ? 1.0 : 3.0;
    fixtures::add_cluster(targets, w, {c, c}, 0.3, 10, rng);
    tsv += w + "\t" + (near ? "near" : "far") + "\n";
  }
  write_b(dir / "feature_seeds.ceb", seeds);
  write_b(dir / "feature_targets.ceb", targets);
  write_text(dir / "feature_targets.tsv", tsv);
}

// One bundle per segment: labeled records carry meta "value" = 2 * x0 * scale;
// basket records carry meta "basket_item".
void value_fixture(const fs::path& dir, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  const double scale[3] = {1.0, 1.5, 2.5};
  const char* seg[3] = {"1850", "1900", "1950"};
  std::string index = "segment\tprice_index\n";
  for (int s = 0; s < 3; ++s) {
    auto b = fixtures::empty_bundle(2);
    b.header.segment = seg[s];
    for (int i = 0; i < 120; ++i) {
      const double x = u(rng);
      Json meta = Json::object();
      meta["value"] = 2.0 * x * scale[s];
      b.records.push_back({"item", {x, noise(rng)}, meta});
    }
    for (int i = 0; i < 20; ++i) {
      Json meta = Json::object();
      meta["basket_item"] = "bread";
      b.records.push_back({"bread", {2.0 + noise(rng), noise(rng)}, meta});
    }
    write_b(dir / ("values_" + std::string(seg[s]) + ".ceb"), b);
    index += std::string(seg[s]) + "\t" + format_double(100.0 * scale[s]) + "\n";
  }
  write_text(dir / "values_index.tsv", index);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic wordconf fixture set"};
  std::string out = "fixtures";
  std::uint64_t seed = 7;
  app.add_option("dir", out, "Output directory")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path dir(out);
    fs::create_directories(dir);

    const auto pb = fixtures::planted_benchmark(seed);
    write_b(dir / "planted.ceb", pb.bundle);
    std::string tsv = "# word_a\tword_b\taffinity\n";
    for (const auto& p : pb.pairs)
      tsv += p.word_a + "\t" + p.word_b + "\t" + format_double(p.human_score) + "\n";
    write_text(dir / "planted.tsv", tsv);

    const auto d = fixtures::drift(seed);
    Json cfg = Json::object();
    cfg["target"] = "concept";
    cfg["classes"] = {{"A", {"A"}}, {"B", {"B"}}};
    cfg["segments"] = Json::array();
    for (const auto& [label, b] : d.segments) {
      const std::string name = "drift_" + label + ".ceb";
      write_b(dir / name, b);
      cfg["segments"].push_back({{"label", label}, {"bundle", name}});
    }
    cfg["target_samples"] = 30;
    cfg["projection"] = "per_segment";
    write_text(dir / "drift.json", cfg.dump(2) + "\n");

    write_b(dir / "offset_blobs.ceb", fixtures::offset_blobs(seed));
    write_b(dir / "nested.ceb", fixtures::nested_category(seed));
    write_b(dir / "colors.ceb", fixtures::colors(seed));
    feature_fixture(dir, seed);
    value_fixture(dir, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
