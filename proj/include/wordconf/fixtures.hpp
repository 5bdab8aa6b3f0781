#pragma once

// Seeded synthetic embedding fixtures with known geometry. Used by the test
// suites, the acceptance gate, and `wordconf identifiability --synthetic`.

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wordconf/core.hpp"
#include "wordconf/embedding_store.hpp"
#include "wordconf/eval.hpp"

namespace wordconf::fixtures {

/// Isotropic Gaussian cloud of `n` records around `center`.
inline void add_cluster(EmbeddingBundle& b, const std::string& label, const Vector& center,
                        double sigma, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t i = 0; i < n; ++i) {
    Vector v = center;
    for (auto& x : v) x += noise(rng);
    b.records.push_back({label, std::move(v), Json::object()});
  }
}

inline EmbeddingBundle empty_bundle(std::size_t dim, std::string model = "synthetic") {
  EmbeddingBundle b;
  b.header.dim = dim;
  b.header.model = std::move(model);
  return b;
}

inline std::string word_label(std::size_t i, std::size_t width = 4) {
  std::string s = std::to_string(i);
  return "w" + std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

/// `n_classes` labels with centers drawn uniformly on the unit sphere and
/// `per_class` records each at noise `sigma`. With `shared_center` every class
/// uses the same center (chance-level control).
inline EmbeddingBundle sphere_clusters(std::size_t n_classes, std::size_t dim, double sigma,
                                       std::size_t per_class, std::uint64_t seed,
                                       bool shared_center = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto unit = [&] {
    Vector c(dim);
    double s = 0;
    for (auto& x : c) {
      x = g(rng);
      s += x * x;
    }
    for (auto& x : c) x /= std::sqrt(s);
    return c;
  };
  auto b = empty_bundle(dim);
  const Vector common = unit();
  for (std::size_t k = 0; k < n_classes; ++k) {
    const Vector c = shared_center ? common : unit();
    add_cluster(b, word_label(k), c, sigma, per_class, rng);
  }
  return b;
}

/// Two 2D blobs along the same ray from the origin: "near" at (1, 1) and
/// "far" at (3, 3). No origin-anchored angular boundary separates them.
inline EmbeddingBundle offset_blobs(std::uint64_t seed, std::size_t per_class = 60,
                                    double sigma = 0.3) {
  std::mt19937_64 rng(seed);
  auto b = empty_bundle(2);
  add_cluster(b, "near", {1.0, 1.0}, sigma, per_class, rng);
  add_cluster(b, "far", {3.0, 3.0}, sigma, per_class, rng);
  return b;
}

/// 2D, two classes, linearly separable with margin >= 1 around x + y = 0.
inline EmbeddingBundle separable_2d(std::uint64_t seed, std::size_t per_class = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto b = empty_bundle(2);
  for (std::size_t i = 0; i < per_class; ++i) {
    b.records.push_back({"pos", {2.0 + u(rng), 2.0 + u(rng)}, Json::object()});
    b.records.push_back({"neg", {-2.0 + u(rng), -2.0 + u(rng)}, Json::object()});
  }
  return b;
}

/// Tight "cat" cluster near the center of a broad "animal" cloud holding four
/// times as many records, plus a distant "vehicle" class.
inline EmbeddingBundle nested_category(std::uint64_t seed, std::size_t per_class = 60) {
  std::mt19937_64 rng(seed);
  auto b = empty_bundle(4);
  add_cluster(b, "animal", {0.0, 0.0, 0.0, 0.0}, 1.0, 4 * per_class, rng);
  add_cluster(b, "cat", {0.5, 0.25, 0.0, 0.0}, 0.15, per_class, rng);
  add_cluster(b, "vehicle", {-4.0, 4.0, 0.0, 0.0}, 0.5, per_class, rng);
  return b;
}

/// red / green / blue clusters and a "burgundy" target drawn next to red.
inline EmbeddingBundle colors(std::uint64_t seed, std::size_t per_class = 40) {
  std::mt19937_64 rng(seed);
  auto b = empty_bundle(3);
  add_cluster(b, "red", {3.0, 0.0, 0.0}, 0.4, per_class, rng);
  add_cluster(b, "green", {0.0, 3.0, 0.0}, 0.4, per_class, rng);
  add_cluster(b, "blue", {0.0, 0.0, 3.0}, 0.4, per_class, rng);
  add_cluster(b, "burgundy", {2.6, 0.4, 0.3}, 0.3, 10, rng);
  return b;
}

/// Words placed evenly on a circle in the first two of `dim` coordinates, with
/// every pair's human score equal to its planted affinity (closeness along the
/// circle).
struct PlantedBenchmark {
  EmbeddingBundle bundle;
  std::vector<WordPairRecord> pairs;
};

inline PlantedBenchmark planted_benchmark(std::uint64_t seed, std::size_t n_words = 12,
                                          std::size_t dim = 6, std::size_t per_word = 40,
                                          double radius = 3.0, double sigma = 0.6) {
  std::mt19937_64 rng(seed);
  PlantedBenchmark pb{empty_bundle(dim), {}};
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n_words; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_words);
    Vector c(dim, 0.0);
    c[0] = radius * std::cos(a);
    c[1] = radius * std::sin(a);
    words.push_back(word_label(i, 2));
    add_cluster(pb.bundle, words.back(), c, sigma, per_word, rng);
  }
  for (std::size_t i = 0; i < n_words; ++i)
    for (std::size_t j = 0; j < n_words; ++j) {
      if (i == j) continue;
      const std::size_t diff = i > j ? i - j : j - i;
      const std::size_t steps = std::min(diff, n_words - diff);
      pb.pairs.push_back({words[i], words[j], static_cast<double>(n_words / 2 - steps)});
    }
  return pb;
}

/// Three segments sharing classes "A" and "B"; the target "concept" moves from
/// near A (first segment) to near B (last).
struct DriftFixture {
  std::vector<std::pair<std::string, EmbeddingBundle>> segments;
};

inline DriftFixture drift(std::uint64_t seed, std::size_t per_class = 50,
                          std::size_t target_per_segment = 30) {
  std::mt19937_64 rng(seed);
  const Vector a = {2.0, 0.0, 0.5}, bcen = {0.0, 2.0, 0.5};
  const double mix[3] = {0.15, 0.5, 0.85};
  const char* labels[3] = {"1789", "1791", "1793"};
  DriftFixture f;
  for (int s = 0; s < 3; ++s) {
    auto b = empty_bundle(3);
    b.header.segment = labels[s];
    add_cluster(b, "A", a, 0.5, per_class, rng);
    add_cluster(b, "B", bcen, 0.5, per_class, rng);
    Vector t(3);
    for (int k = 0; k < 3; ++k) t[k] = (1 - mix[s]) * a[k] + mix[s] * bcen[k];
    add_cluster(b, "concept", t, 0.3, target_per_segment, rng);
    f.segments.emplace_back(labels[s], std::move(b));
  }
  return f;
}

/// d = 1 samples with value = 2x exactly, x evenly spaced over [1, 5].
inline std::vector<ValueSample> linear_values(std::size_t n = 100) {
  std::vector<ValueSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 1.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({{x}, 2.0 * x});
  }
  return out;
}

}  // namespace wordconf::fixtures
