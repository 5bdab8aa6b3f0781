#pragma once

// Per-segment classifiers over seed classes, concept tracing across segments,
// and 2D projection / plot output.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wordconf/classifier.hpp"
#include "wordconf/core.hpp"
#include "wordconf/embedding_store.hpp"
#include "wordconf/similarity.hpp"

namespace wordconf {

/// One temporal segment: where its embeddings live and which seed words make
/// up each class (class name -> seed-word labels in the bundle).
struct SegmentSpec {
  std::string label;
  std::filesystem::path bundle_path;
  std::map<std::string, std::vector<std::string>> classes;
};

struct Segment {
  SegmentSpec spec;
  EmbeddingBundle bundle;
};

/// Everything a `trace` run needs; loaded from a JSON config:
///   {"target": "revolution",
///    "classes": {"peuple": ["peuple", "populaire"], "gouvernement": ["conseil"]},
///    "segments": [{"label": "1789", "bundle": "seg1789.ceb"}, ...],
///    "samples_per_class": 0, "target_samples": 30, "projection": "per_segment"}
/// A segment may carry its own "classes" object; bundle paths are relative to
/// the config file.
struct TraceConfig {
  std::string target;
  std::vector<SegmentSpec> segments;
  std::size_t samples_per_class = 0;  // 0: use every seed record
  std::size_t target_samples = 30;
  bool joint_projection = false;
};

inline TraceConfig parse_trace_config(const Json& j, const std::filesystem::path& base_dir) {
  TraceConfig cfg;
  try {
    cfg.target = j.at("target").get<std::string>();
    std::map<std::string, std::vector<std::string>> shared;
    if (j.contains("classes"))
      shared = j["classes"].get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& s : j.at("segments")) {
      SegmentSpec spec;
      spec.label = s.at("label").get<std::string>();
      spec.bundle_path = base_dir / s.at("bundle").get<std::string>();
      spec.classes = s.contains("classes")
                         ? s["classes"].get<std::map<std::string, std::vector<std::string>>>()
                         : shared;
      cfg.segments.push_back(std::move(spec));
    }
    cfg.samples_per_class = j.value("samples_per_class", std::size_t{0});
    cfg.target_samples = j.value("target_samples", std::size_t{30});
    const auto proj = j.value("projection", std::string("per_segment"));
    if (proj != "per_segment" && proj != "joint")
      throw Error("trace config: projection must be per_segment or joint");
    cfg.joint_projection = proj == "joint";
  } catch (const Json::exception& e) {
    throw Error(std::string("trace config: ") + e.what());
  }
  if (cfg.target.empty()) throw Error("trace config: empty target");
  if (cfg.target_samples < 1) throw Error("trace config: target_samples must be >= 1");
  return cfg;
}

inline TraceConfig load_trace_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error&) {
    throw Error("trace config " + path.string() + ": invalid JSON");
  }
  return parse_trace_config(j, path.parent_path());
}

namespace detail {

inline void check_segment_schema(std::span<const SegmentSpec> specs) {
  if (specs.empty()) throw Error("no segments");
  std::set<std::string> seen;
  for (const auto& s : specs) {
    if (s.label.empty()) throw Error("segment with empty label");
    if (!seen.insert(s.label).second) throw Error("duplicate segment label '" + s.label + "'");
    if (s.classes.size() < 2)
      throw Error("segment '" + s.label + "': need at least 2 seed classes");
    for (const auto& [cls, words] : s.classes)
      if (words.empty())
        throw Error("segment '" + s.label + "': class '" + cls + "' has no seed words");
  }
  const auto& ref = specs.front().classes;
  for (const auto& s : specs) {
    bool same = s.classes.size() == ref.size();
    for (auto a = s.classes.begin(), b = ref.begin(); same && a != s.classes.end(); ++a, ++b)
      same = a->first == b->first;
    if (!same)
      throw Error("segment '" + s.label + "': seed-class schema differs from segment '" +
                  specs.front().label + "'");
  }
}

}  // namespace detail

/// Seed records of one segment relabeled with their class name. With
/// `per_class_cap > 0` each class is subsampled to at most that many records.
inline std::vector<LabeledEmbedding> seed_dataset(const Segment& seg, std::size_t per_class_cap,
                                                  std::uint64_t seed) {
  std::vector<LabeledEmbedding> out;
  for (const auto& [cls, words] : seg.spec.classes) {
    std::vector<LabeledEmbedding> recs;
    const std::set<std::string> wanted(words.begin(), words.end());
    for (const auto& r : seg.bundle.records)
      if (wanted.contains(r.label)) recs.push_back(r);
    if (recs.empty())
      throw Error("segment '" + seg.spec.label + "': no records for class '" + cls + "'");
    if (per_class_cap > 0 && recs.size() > per_class_cap) {
      EmbeddingBundle tmp{seg.bundle.header, {}};
      for (auto& r : recs) {
        r.label = cls;
        tmp.records.push_back(r);
      }
      recs = sample_per_label(tmp, cls, per_class_cap, seed);
    }
    for (auto& r : recs) {
      r.label = cls;
      out.push_back(std::move(r));
    }
  }
  return out;
}

struct SegmentModel {
  std::string segment;
  ClassifierModel model;
};

/// One independently trained model per segment, in segment order.
inline std::vector<SegmentModel> train_segments(std::span<const Segment> segments,
                                                const TrainConfig& cfg,
                                                std::size_t per_class_cap = 0,
                                                std::uint64_t seed = 0) {
  std::vector<SegmentSpec> specs;
  for (const auto& s : segments) specs.push_back(s.spec);
  detail::check_segment_schema(specs);
  std::vector<SegmentModel> out;
  for (const auto& seg : segments) {
    const auto data = seed_dataset(seg, per_class_cap, seed);
    out.push_back({seg.spec.label, train(data, cfg)});
  }
  return out;
}

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

struct Projection {
  std::vector<ProjectedPoint> points;
  Vector mean;
  Vector components[2];  // unit-norm principal directions (zero when absent)
  bool degenerate = false;
};

/// PCA onto the top two principal directions of the mean-centered records.
/// Each direction's largest-magnitude coordinate is made positive. Identical
/// inputs project to (0, 0) and set `degenerate`.
inline Projection project_2d(std::span<const LabeledEmbedding> records) {
  if (records.size() < 2) throw Error("project_2d: need at least 2 records");
  const std::size_t d = records.front().vec.size();
  for (const auto& r : records)
    if (r.vec.size() != d) throw Error("project_2d: mixed dimensions");
  Projection p;
  p.mean = mean_embedding(records);
  p.components[0].assign(d, 0.0);
  p.components[1].assign(d, 0.0);
  const bool identical = std::all_of(records.begin(), records.end(),
                                     [&](const auto& r) { return r.vec == records.front().vec; });
  if (identical) {
    p.degenerate = true;
    for (const auto& r : records) p.points.push_back({0.0, 0.0, r.label});
    return p;
  }
  const auto n = static_cast<Eigen::Index>(records.size());
  const auto de = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd Xc(n, de);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < de; ++j)
      Xc(i, j) = records[static_cast<std::size_t>(i)].vec[static_cast<std::size_t>(j)] -
                 p.mean[static_cast<std::size_t>(j)];
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Xc, Eigen::ComputeThinV);
  const Eigen::MatrixXd& V = svd.matrixV();
  const Eigen::Index ncomp = std::min<Eigen::Index>(2, V.cols());
  for (Eigen::Index c = 0; c < ncomp; ++c) {
    Eigen::VectorXd v = V.col(c);
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < de; ++j)
      if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
    if (v[arg] < 0) v = -v;
    p.components[c].assign(v.data(), v.data() + v.size());
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    Vector row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = records[i].vec[j] - p.mean[j];
    p.points.push_back({dot(row, p.components[0]), dot(row, p.components[1]), records[i].label});
  }
  return p;
}

struct SegmentTrace {
  std::string segment;
  ProbDistribution distribution;
  std::size_t samples = 0;
  std::vector<ProjectedPoint> points;
  bool projection_degenerate = false;
};

struct TraceReport {
  std::string target;
  std::vector<std::string> classes;
  std::vector<SegmentTrace> segments;
};

/// Averaged class distribution of `target` in every segment (sim_wc
/// semantics; the target's own class is excluded when it is one).
inline TraceReport trace_concept(
    std::span<const SegmentModel> models,
    const std::map<std::string, std::vector<LabeledEmbedding>>& target_records,
    const std::string& target) {
  if (models.empty()) throw Error("trace_concept: no segment models");
  TraceReport rep;
  rep.target = target;
  rep.classes = models.front().model.classes();
  for (const auto& sm : models) {
    if (sm.model.classes() != rep.classes)
      throw Error("trace_concept: segment '" + sm.segment + "' has a different class schema");
    const auto it = target_records.find(sm.segment);
    if (it == target_records.end() || it->second.empty())
      throw Error("trace_concept: no records for target '" + target + "' in segment '" +
                  sm.segment + "'");
    auto dist = target_distribution(sm.model, it->second, target, true);
    rep.segments.push_back({sm.segment, std::move(dist), it->second.size(), {}, false});
  }
  return rep;
}

/// Fills each segment's 2D points from its seed records (tagged with class
/// names) plus the target records (tagged with the target word). Per-segment
/// mode fits one PCA per segment; joint mode fits one over all segments.
inline void attach_projections(TraceReport& rep,
                               const std::map<std::string, std::vector<LabeledEmbedding>>& seeds,
                               const std::map<std::string, std::vector<LabeledEmbedding>>& targets,
                               bool joint) {
  std::vector<LabeledEmbedding> all;
  std::vector<std::size_t> offsets;
  for (auto& st : rep.segments) {
    std::vector<LabeledEmbedding> recs;
    if (auto it = seeds.find(st.segment); it != seeds.end()) recs = it->second;
    if (auto it = targets.find(st.segment); it != targets.end())
      for (auto r : it->second) {
        r.label = rep.target;
        recs.push_back(std::move(r));
      }
    if (joint) {
      offsets.push_back(all.size());
      all.insert(all.end(), recs.begin(), recs.end());
    } else if (recs.size() >= 2) {
      auto p = project_2d(recs);
      st.points = std::move(p.points);
      st.projection_degenerate = p.degenerate;
    }
  }
  if (joint && all.size() >= 2) {
    auto p = project_2d(all);
    offsets.push_back(all.size());
    for (std::size_t s = 0; s < rep.segments.size(); ++s) {
      rep.segments[s].points.assign(p.points.begin() + static_cast<std::ptrdiff_t>(offsets[s]),
                                    p.points.begin() + static_cast<std::ptrdiff_t>(offsets[s + 1]));
      rep.segments[s].projection_degenerate = p.degenerate;
    }
  }
}

inline std::string format_trace_csv(const TraceReport& rep) {
  std::string out = "segment,samples";
  for (const auto& c : rep.classes) out += "," + csv_field(c);
  out += '\n';
  for (const auto& s : rep.segments) {
    out += csv_field(s.segment) + "," + std::to_string(s.samples);
    for (double p : s.distribution.probs) out += "," + format_double(p);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plot output

enum class PlotFormat { csv, svg };

inline PlotFormat parse_plot_format(const std::string& s) {
  if (s == "csv") return PlotFormat::csv;
  if (s == "svg") return PlotFormat::svg;
  throw Error("unknown plot format '" + s + "' (expected csv or svg)");
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const std::vector<std::string>& default_palette() {
  static const std::vector<std::string> p = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                             "#bcbd22", "#17becf"};
  return p;
}

}  // namespace detail

/// CSV (`x,y,label`) or an 800x600 SVG scatter with one color per label in
/// label sort order. `colors` overrides the palette per label; `comment`, when
/// non-empty, is written as a leading `#` line / XML comment.
inline std::string format_plot(std::span<const ProjectedPoint> points, PlotFormat format,
                               const std::map<std::string, std::string>& colors = {},
                               const std::string& comment = {}) {
  if (points.empty()) throw Error("emit_plot: no points");
  std::string out;
  if (format == PlotFormat::csv) {
    if (!comment.empty()) out += "# " + comment + "\n";
    out += "x,y,label\n";
    for (const auto& p : points)
      out += format_double(p.x) + "," + format_double(p.y) + "," + csv_field(p.label) + "\n";
    return out;
  }
  std::set<std::string> label_set;
  for (const auto& p : points) label_set.insert(p.label);
  std::map<std::string, std::string> color_of;
  std::size_t i = 0;
  for (const auto& l : label_set) {
    const auto it = colors.find(l);
    color_of[l] = it != colors.end() ? it->second
                                     : detail::default_palette()[i % detail::default_palette().size()];
    ++i;
  }
  double xmin = points[0].x, xmax = xmin, ymin = points[0].y, ymax = ymin;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double W = 800, H = 600, margin = 50, legend_w = 160;
  const double xr = xmax > xmin ? xmax - xmin : 1.0, yr = ymax > ymin ? ymax - ymin : 1.0;
  auto px = [&](double x) { return margin + (x - xmin) / xr * (W - 2 * margin - legend_w); };
  auto py = [&](double y) { return H - margin - (y - ymin) / yr * (H - 2 * margin); };
  char buf[256];
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) {
    std::string c = comment;
    for (std::size_t pos; (pos = c.find("--")) != std::string::npos;) c.replace(pos, 2, "- -");
    out += "<!-- " + c + " -->\n";
  }
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"4\" fill=\"%s\"",
                  px(p.x), py(p.y), detail::xml_escape(color_of[p.label]).c_str());
    out += buf;
    out += " fill-opacity=\"0.8\"><title>" + detail::xml_escape(p.label) + "</title></circle>\n";
  }
  out += "<g font-family=\"sans-serif\" font-size=\"14\">\n";
  double ly = margin;
  for (const auto& [label, color] : color_of) {
    std::snprintf(buf, sizeof buf, "<rect x=\"%.0f\" y=\"%.0f\" width=\"12\" height=\"12\" fill=\"%s\"/>",
                  W - legend_w, ly, detail::xml_escape(color).c_str());
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.0f\" y=\"%.0f\">", W - legend_w + 18, ly + 11);
    out += buf;
    out += detail::xml_escape(label) + "</text>\n";
    ly += 20;
  }
  out += "</g>\n</svg>\n";
  return out;
}

inline void emit_plot(std::span<const ProjectedPoint> points, const std::filesystem::path& path,
                      PlotFormat format, const std::map<std::string, std::string>& colors = {},
                      const std::string& comment = {}) {
  write_file_atomic(path, format_plot(points, format, colors, comment));
}

/// Reads back `x,y,label` plot CSV (leading `#` lines skipped).
inline std::vector<ProjectedPoint> read_plot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<ProjectedPoint> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw Error("malformed plot CSV row");
    std::string label = line.substr(c2 + 1);
    if (label.size() >= 2 && label.front() == '"') {
      label = label.substr(1, label.size() - 2);
      for (std::size_t pos = 0; (pos = label.find("\"\"", pos)) != std::string::npos; ++pos)
        label.erase(pos, 1);
    }
    out.push_back({parse_double(line.substr(0, c1), "plot x"),
                   parse_double(line.substr(c1 + 1, c2 - c1 - 1), "plot y"), label});
  }
  return out;
}

}  // namespace wordconf
