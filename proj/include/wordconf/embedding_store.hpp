#pragma once

// Portable labeled-embedding bundles ("ceb" files).
//
// Line 1 is a header object, every further line one record:
//   {"format":"ceb","version":1,"dim":3,"model":"bert-base-cased","segment":"1789"}
//   {"label":"red","vec":[0.1,-2.5,3],"meta":{"sentence":17}}
//
// Doubles are written in the shortest form that parses back bit-identically,
// and record meta objects are carried through untouched (key order included).

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wordconf/core.hpp"

namespace wordconf {

using Json = nlohmann::ordered_json;

/// One contextual-embedding observation of a word.
struct LabeledEmbedding {
  std::string label;
  Vector vec;
  Json meta = Json::object();

  friend bool operator==(const LabeledEmbedding&, const LabeledEmbedding&) = default;
};

struct BundleHeader {
  std::size_t dim = 0;
  std::string model;
  std::optional<std::string> segment;
  int version = 1;

  friend bool operator==(const BundleHeader&, const BundleHeader&) = default;
};

struct EmbeddingBundle {
  BundleHeader header;
  std::vector<LabeledEmbedding> records;

  friend bool operator==(const EmbeddingBundle&, const EmbeddingBundle&) = default;

  std::size_t dim() const { return header.dim; }

  /// Throws Error naming the first broken invariant. `record_offset` is added
  /// to record indices in messages (file line numbers when reading).
  void validate(std::size_t record_offset = 0) const {
    if (header.version != 1)
      throw Error("bundle header: unsupported version " + std::to_string(header.version));
    if (header.dim < 1) throw Error("bundle header: dim must be >= 1");
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      const std::string where = "record " + std::to_string(i + record_offset);
      if (r.label.empty()) throw Error(where + ": empty label");
      if (r.vec.size() != header.dim)
        throw Error(where + ": dimension mismatch (expected " + std::to_string(header.dim) +
                    ", got " + std::to_string(r.vec.size()) + ")");
      if (!all_finite(r.vec)) throw Error(where + ": non-finite value in vec");
      if (!r.meta.is_object()) throw Error(where + ": meta must be an object");
    }
  }

  /// Distinct labels in lexicographic order.
  std::vector<std::string> labels() const {
    std::set<std::string> s;
    for (const auto& r : records) s.insert(r.label);
    return {s.begin(), s.end()};
  }

  std::vector<LabeledEmbedding> records_for(const std::string& label) const {
    std::vector<LabeledEmbedding> out;
    for (const auto& r : records)
      if (r.label == label) out.push_back(r);
    return out;
  }

  std::size_t count(const std::string& label) const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [&](const auto& r) { return r.label == label; }));
  }

  std::map<std::string, std::vector<LabeledEmbedding>> group_by_label() const {
    std::map<std::string, std::vector<LabeledEmbedding>> out;
    for (const auto& r : records) out[r.label].push_back(r);
    return out;
  }
};

namespace detail {

inline Json header_to_json(const BundleHeader& h) {
  Json j = Json::object();
  j["format"] = "ceb";
  j["version"] = h.version;
  j["dim"] = h.dim;
  j["model"] = h.model;
  if (h.segment) j["segment"] = *h.segment;
  return j;
}

inline BundleHeader header_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("format")) {
    if (j.is_object() && j.contains("label"))
      throw Error("line 1: missing header (first line is a record)");
    throw Error("line 1: missing header");
  }
  if (j["format"] != "ceb") throw Error("line 1: invalid header: format must be \"ceb\"");
  BundleHeader h;
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw Error("line 1: invalid header: version missing");
  h.version = j["version"].get<int>();
  if (h.version != 1)
    throw Error("line 1: invalid header: unsupported version " + std::to_string(h.version));
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() < 1)
    throw Error("line 1: invalid header: dim must be an integer >= 1");
  h.dim = j["dim"].get<std::size_t>();
  if (j.contains("model")) {
    if (!j["model"].is_string()) throw Error("line 1: invalid header: model must be a string");
    h.model = j["model"].get<std::string>();
  }
  if (j.contains("segment") && !j["segment"].is_null()) {
    if (!j["segment"].is_string())
      throw Error("line 1: invalid header: segment must be a string");
    h.segment = j["segment"].get<std::string>();
  }
  return h;
}

inline LabeledEmbedding record_from_json(const Json& j, std::size_t dim, std::size_t line) {
  const std::string where = "line " + std::to_string(line);
  if (!j.is_object()) throw Error(where + ": record must be a JSON object");
  if (!j.contains("label") || !j["label"].is_string())
    throw Error(where + ": record label missing");
  LabeledEmbedding r;
  r.label = j["label"].get<std::string>();
  if (r.label.empty()) throw Error(where + ": empty label");
  if (!j.contains("vec") || !j["vec"].is_array()) throw Error(where + ": record vec missing");
  const auto& v = j["vec"];
  if (v.size() != dim)
    throw Error(where + ": dimension mismatch (expected " + std::to_string(dim) + ", got " +
                std::to_string(v.size()) + ")");
  r.vec.reserve(dim);
  for (const auto& x : v) {
    if (!x.is_number()) throw Error(where + ": non-finite value in vec");
    const double d = x.get<double>();
    if (!std::isfinite(d)) throw Error(where + ": non-finite value in vec");
    r.vec.push_back(d);
  }
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw Error(where + ": meta must be an object");
    r.meta = j["meta"];
  }
  return r;
}

inline Json record_to_json(const LabeledEmbedding& r) {
  Json j = Json::object();
  j["label"] = r.label;
  j["vec"] = r.vec;
  j["meta"] = r.meta;
  return j;
}

}  // namespace detail

inline EmbeddingBundle parse_bundle(std::istream& in) {
  EmbeddingBundle b;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw Error("line " + std::to_string(lineno) +
                  (have_header ? ": malformed record (invalid JSON or non-finite value)"
                               : ": missing header (invalid JSON)"));
    }
    if (!have_header) {
      if (lineno != 1 && !(j.is_object() && j.contains("format")))
        throw Error("line " + std::to_string(lineno) + ": missing header");
      b.header = detail::header_from_json(j);
      have_header = true;
      continue;
    }
    b.records.push_back(detail::record_from_json(j, b.header.dim, lineno));
  }
  if (!have_header) throw Error("empty bundle file (no header)");
  return b;
}

inline EmbeddingBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open bundle " + path.string());
  return parse_bundle(in);
}

inline std::string format_bundle(const EmbeddingBundle& bundle) {
  bundle.validate();
  std::string out = detail::header_to_json(bundle.header).dump();
  out += '\n';
  for (const auto& r : bundle.records) {
    out += detail::record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline void write_bundle(const EmbeddingBundle& bundle, const std::filesystem::path& path) {
  write_file_atomic(path, format_bundle(bundle));
}

/// Up to `k` records carrying `label`, drawn uniformly without replacement.
/// When fewer than `k` exist all of them are returned. Selected records keep
/// their bundle order.
inline std::vector<LabeledEmbedding> sample_per_label(const EmbeddingBundle& bundle,
                                                      const std::string& label, std::size_t k,
                                                      std::uint64_t seed) {
  if (k < 1) throw Error("sample_per_label: k must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < bundle.records.size(); ++i)
    if (bundle.records[i].label == label) idx.push_back(i);
  if (idx.empty()) throw Error("sample_per_label: label '" + label + "' absent from bundle");
  if (k < idx.size()) {
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<LabeledEmbedding> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(bundle.records[i]);
  return out;
}

inline Vector mean_embedding(std::span<const Vector> vecs) {
  if (vecs.empty()) throw Error("mean_embedding: empty list");
  const std::size_t d = vecs.front().size();
  Vector sum(d, 0.0);
  for (const auto& v : vecs) {
    if (v.size() != d) throw Error("mean_embedding: mixed dimensions");
    for (std::size_t i = 0; i < d; ++i) sum[i] += v[i];
  }
  const double n = static_cast<double>(vecs.size());
  for (auto& x : sum) x /= n;
  return sum;
}

inline Vector mean_embedding(std::span<const LabeledEmbedding> records) {
  if (records.empty()) throw Error("mean_embedding: empty list");
  const std::size_t d = records.front().vec.size();
  Vector sum(d, 0.0);
  for (const auto& r : records) {
    if (r.vec.size() != d) throw Error("mean_embedding: mixed dimensions");
    for (std::size_t i = 0; i < d; ++i) sum[i] += r.vec[i];
  }
  const double n = static_cast<double>(records.size());
  for (auto& x : sum) x /= n;
  return sum;
}

}  // namespace wordconf
