#pragma once

// The `wordconf` command-line tool. Kept in a header so the test suites can
// drive it in-process; tools/wordconf.cpp is a two-line main.
//
// Exit codes: 0 success, 1 domain error (message names the failed invariant),
// 2 usage error. Every file written embeds the effective options and seed.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wordconf/analysis.hpp"
#include "wordconf/classifier.hpp"
#include "wordconf/core.hpp"
#include "wordconf/diachronic.hpp"
#include "wordconf/embedding_store.hpp"
#include "wordconf/eval.hpp"
#include "wordconf/fixtures.hpp"
#include "wordconf/metrics.hpp"
#include "wordconf/similarity.hpp"

namespace wordconf::cli {

namespace fs = std::filesystem;

namespace detail {

struct Global {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct TrainOpts {
  double lambda = 1.0;
  int max_iterations = 1000;
  double tolerance = 1e-6;

  void add_to(CLI::App* sub) {
    sub->add_option("--lambda", lambda, "L2 regularization strength")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--max-iter", max_iterations, "Gradient-descent iteration cap")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", tolerance, "Gradient-norm tolerance")->capture_default_str();
  }
  TrainConfig config(unsigned threads) const {
    return {lambda, max_iterations, tolerance, threads};
  }
};

inline std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

/// Effective value of every option on `app` (given or defaulted), keyed by
/// its long name. The output directory is left out so runs compare equal
/// wherever they were written.
inline void collect_options(const CLI::App* app, Json& into) {
  for (const CLI::Option* opt : app->get_options()) {
    const std::string& name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "out" || name.empty()) continue;
    if (opt->count() > 0)
      into[name] = join(opt->results(), ",");
    else if (opt->get_expected_max() == 0 && opt->get_default_str().empty())
      into[name] = "false";
    else
      into[name] = opt->get_default_str();
  }
}

struct Run {
  std::string command;
  Json provenance = Json::object();
  fs::path out_dir;
  std::ostream& out;

  /// One-line reproducibility header for CSV/TSV outputs.
  std::string comment() const { return "wordconf " + provenance.dump(); }

  void write(const std::string& name, const std::string& content) const {
    write_file_atomic(out_dir / name, content);
    out << "wrote " << (out_dir / name).string() << "\n";
  }
  void write_csv(const std::string& name, const std::string& body) const {
    write(name, "# " + comment() + "\n" + body);
  }
  void write_json(const std::string& name, Json j) const {
    j["provenance"] = provenance;
    write(name, j.dump(2) + "\n");
  }
};

inline std::string safe_filename(const std::string& s) {
  std::string out;
  for (unsigned char c : s) out += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? char(c) : '_';
  return out.empty() ? "segment" : out;
}

inline Vector parse_vector(const std::string& s, const std::string& what) {
  Vector v;
  for (const auto& f : split(s, ',')) v.push_back(parse_double(f, what));
  return v;
}

inline Eigen::MatrixXd parse_matrix(const std::string& s) {
  std::vector<Vector> rows;
  for (const auto& r : split(s, ';')) rows.push_back(parse_vector(r, "--matrix"));
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows[static_cast<std::size_t>(i)].size() != rows.front().size())
      throw Error("--matrix: ragged rows");
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return A;
}

inline Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Dataset for `train`: optional label filter, optional per-label cap.
inline std::vector<LabeledEmbedding> training_set(const EmbeddingBundle& b,
                                                  const std::vector<std::string>& classes,
                                                  std::size_t cap, std::uint64_t seed) {
  std::vector<std::string> labels = classes.empty() ? b.labels() : classes;
  std::vector<LabeledEmbedding> out;
  for (const auto& l : labels) {
    if (b.count(l) == 0) throw Error("train: class '" + l + "' has no records in bundle");
    auto recs = cap > 0 ? sample_per_label(b, l, cap, seed) : b.records_for(l);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Word similarity as classifier confusion: train one-vs-rest probes over "
               "contextual embeddings and score words by predicted class probability."};
  app.name("wordconf");
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI config file");
  Global g;
  app.add_option("--out", g.out_dir, "Output directory")
      ->envname("WORDCONF_OUT")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Training threads (0: all cores)")->capture_default_str();

  // validate
  auto* validate = app.add_subcommand("validate", "Check a bundle against the ceb format");
  std::string v_bundle;
  validate->add_option("bundle,--bundle", v_bundle, "Bundle file")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a one-vs-rest classifier on a bundle");
  std::string t_bundle, t_output;
  std::vector<std::string> t_classes;
  std::size_t t_cap = 0;
  TrainOpts t_opts;
  train_cmd->add_option("--bundle", t_bundle, "Training bundle")->required();
  train_cmd->add_option("--output,-o", t_output, "Model file (default <out>/model.wcm)");
  train_cmd->add_option("--classes", t_classes, "Restrict to these labels")->delimiter(',');
  train_cmd->add_option("--per-class-cap", t_cap, "Sample at most this many records per class (0: all)")
      ->capture_default_str();
  t_opts.add_to(train_cmd);

  // similar
  auto* similar = app.add_subcommand("similar", "Word Confusion scores of one target word");
  std::string s_model, s_bundle, s_target;
  std::vector<std::string> s_classes;
  bool s_exclude = true;
  std::size_t s_k = 30;
  similar->add_option("--model", s_model, "Trained model file")->required();
  similar->add_option("--bundle", s_bundle, "Bundle with the words' embeddings")->required();
  similar->add_option("--target", s_target, "Target word (bundle label)")->required();
  similar->add_option("--class", s_classes, "Report only these classes")->delimiter(',');
  similar->add_flag("--exclude-self,!--no-exclude-self", s_exclude,
                    "Drop the target's own class and renormalize")
      ->default_str("true");
  similar->add_option("--samples,-k", s_k, "Embeddings sampled per word")->capture_default_str();

  // matrix
  auto* matrix = app.add_subcommand("matrix", "Asymmetric Word Confusion similarity matrix");
  std::string m_model, m_bundle;
  std::vector<std::string> m_words;
  bool m_exclude = true;
  std::size_t m_k = 30;
  matrix->add_option("--model", m_model, "Trained model file")->required();
  matrix->add_option("--bundle", m_bundle, "Bundle with the words' embeddings")->required();
  matrix->add_option("--words", m_words, "Words (default: model classes)")->delimiter(',');
  matrix->add_flag("--exclude-self,!--no-exclude-self", m_exclude, "Drop each word's own class and renormalize")->default_str("true");
  matrix->add_option("--samples,-k", m_k, "Embeddings sampled per word")->capture_default_str();

  // benchmark-pairs
  auto* bpairs = app.add_subcommand("benchmark-pairs", "Spearman rho against human word-pair scores");
  std::string bp_model, bp_bundle, bp_pairs, bp_name;
  bool bp_exclude = true;
  std::size_t bp_k = 30;
  bpairs->add_option("--model", bp_model, "Trained model file")->required();
  bpairs->add_option("--bundle", bp_bundle, "Bundle with the words' embeddings")->required();
  bpairs->add_option("--pairs", bp_pairs, "TSV word_a<TAB>word_b<TAB>score")->required();
  bpairs->add_option("--name", bp_name, "Dataset name (default: pairs file stem)");
  bpairs->add_flag("--exclude-self,!--no-exclude-self", bp_exclude, "Drop each word's own class and renormalize")->default_str("true");
  bpairs->add_option("--samples,-k", bp_k, "Embeddings sampled per word")->capture_default_str();

  // benchmark-features
  auto* bfeat = app.add_subcommand("benchmark-features", "Macro-F1 of feature classification");
  std::string bf_model, bf_bundle, bf_targets, bf_seeds;
  std::size_t bf_k = 30;
  bfeat->add_option("--model", bf_model, "Trained model file")->required();
  bfeat->add_option("--bundle", bf_bundle, "Bundle with target-word embeddings")->required();
  bfeat->add_option("--targets", bf_targets, "TSV word<TAB>gold_class")->required();
  bfeat->add_option("--seeds", bf_seeds, "Bundle of seed embeddings labeled by class")->required();
  bfeat->add_option("--samples,-k", bf_k, "Embeddings sampled per word")->capture_default_str();

  // trace
  auto* trace = app.add_subcommand("trace", "Trace a concept across temporal segments");
  std::string tr_config, tr_format = "both";
  TrainOpts tr_opts;
  trace->add_option("--segments", tr_config, "Segment config (JSON)")->required();
  trace->add_option("--format", tr_format, "Plot format")
      ->check(CLI::IsMember({"csv", "svg", "both"}))
      ->capture_default_str();
  tr_opts.add_to(trace);

  // project
  auto* project = app.add_subcommand("project", "2D PCA projection of bundle records");
  std::string p_bundle, p_format = "svg", p_output;
  std::vector<std::string> p_labels;
  std::size_t p_k = 0;
  project->add_option("--bundle", p_bundle, "Bundle to project")->required();
  project->add_option("--labels", p_labels, "Only these labels")->delimiter(',');
  project->add_option("--samples,-k", p_k, "Cap per label (0: all)")->capture_default_str();
  project->add_option("--format", p_format)->check(CLI::IsMember({"csv", "svg"}))->capture_default_str();
  project->add_option("--output", p_output, "File name inside --out");

  // identifiability
  auto* ident = app.add_subcommand("identifiability", "One-shot word identifiability experiment");
  std::string i_bundle;
  bool i_synth = false, i_shared = false;
  std::size_t i_syn_classes = 1000, i_dim = 32, i_per_class = 11;
  double i_sigma = 0.05;
  IdentifiabilityOptions i_opt;
  TrainOpts i_train;
  ident->add_option("--bundle", i_bundle, "Bundle to sample words from");
  ident->add_flag("--synthetic", i_synth, "Use a generated Gaussian-cluster bundle");
  ident->add_option("--synthetic-classes", i_syn_classes)->capture_default_str();
  ident->add_option("--dim", i_dim)->capture_default_str();
  ident->add_option("--sigma", i_sigma)->capture_default_str();
  ident->add_option("--per-class", i_per_class, "Generated records per class")->capture_default_str();
  ident->add_flag("--shared-center", i_shared, "Chance-level control: one center for all classes");
  ident->add_option("--n-classes", i_opt.n_classes)->capture_default_str();
  ident->add_option("--test-per-class", i_opt.test_per_class)->capture_default_str();
  ident->add_option("--trials", i_opt.trials)->capture_default_str();
  i_train.add_to(ident);

  // svd-check
  auto* svd = app.add_subcommand("svd-check", "Verify transformed-distance identities under SVD");
  std::string sv_matrix, sv_x, sv_y;
  std::size_t sv_random = 100, sv_dim = 2;
  double sv_max_cond = 1e6;
  svd->add_option("--matrix", sv_matrix, "Square matrix, rows ';'-separated, entries ','-separated");
  svd->add_option("--x", sv_x, "Vector x (with --matrix)");
  svd->add_option("--y", sv_y, "Vector y (with --matrix)");
  svd->add_option("--random", sv_random, "Random cases when no --matrix")->capture_default_str();
  svd->add_option("--dim", sv_dim)->capture_default_str();
  svd->add_option("--max-cond", sv_max_cond, "Reject random A above this condition number")
      ->capture_default_str();

  // boundary-grid
  auto* grid = app.add_subcommand("boundary-grid", "Word Confusion vs cosine decision regions (2D)");
  std::string g_model, g_bundle;
  double g_extent = 5.0;
  std::size_t g_res = 40;
  std::vector<double> g_scales = {0.5, 2.0, 10.0};
  grid->add_option("--model", g_model, "Trained model file")->required();
  grid->add_option("--bundle", g_bundle, "Records whose class means are the cosine centroids")
      ->required();
  grid->add_option("--extent", g_extent)->capture_default_str();
  grid->add_option("--resolution", g_res)->capture_default_str();
  grid->add_option("--scales", g_scales)->delimiter(',')->capture_default_str();

  // value-regress
  auto* vreg = app.add_subcommand("value-regress", "Bucketized value regression per segment");
  std::vector<std::string> vr_bundles;
  std::size_t vr_buckets = 60;
  std::string vr_scheme = "quantile", vr_value_key = "value", vr_basket_key = "basket_item",
              vr_index;
  double vr_ridge = 1.0;
  vreg->add_option("--bundle", vr_bundles, "One bundle per segment")->required();
  vreg->add_option("--buckets", vr_buckets)->capture_default_str();
  vreg->add_option("--scheme", vr_scheme)
      ->check(CLI::IsMember({"quantile", "equal_width"}))
      ->capture_default_str();
  vreg->add_option("--ridge", vr_ridge)->capture_default_str();
  vreg->add_option("--value-key", vr_value_key, "Record meta key holding the value")
      ->capture_default_str();
  vreg->add_option("--basket-key", vr_basket_key, "Record meta key marking basket items")
      ->capture_default_str();
  vreg->add_option("--index", vr_index, "TSV: segment then one column per external series");

  // error-bins
  auto* ebins = app.add_subcommand("error-bins", "Error rate binned by word metadata");
  std::string e_results, e_meta;
  BinEdges e_edges;
  std::vector<double> e_freq, e_sense, e_tok, e_first;
  ebins->add_option("--results", e_results, "TSV word<TAB>correct(0/1)")->required();
  ebins->add_option("--metadata", e_meta, "TSV word, frequency, senses, tokens, first-token freq")
      ->required();
  ebins->add_option("--frequency-edges", e_freq)->delimiter(',');
  ebins->add_option("--sense-edges", e_sense)->delimiter(',');
  ebins->add_option("--token-edges", e_tok)->delimiter(',');
  ebins->add_option("--first-token-edges", e_first)->delimiter(',');

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run{sub->get_name(), Json::object(), fs::path(g.out_dir), out};
  run.provenance["tool"] = "wordconf";
  run.provenance["command"] = sub->get_name();
  run.provenance["seed"] = g.seed;
  Json opts = Json::object();
  collect_options(&app, opts);
  collect_options(sub, opts);
  run.provenance["options"] = opts;

  try {
    if (sub != validate) {
      std::error_code ec;
      fs::create_directories(run.out_dir, ec);
      if (ec) throw Error("cannot create output directory " + run.out_dir.string());
    }

    if (sub == validate) {
      const auto b = read_bundle(v_bundle);
      out << "ok: " << v_bundle << ": " << b.records.size() << " records, dim " << b.dim()
          << ", " << b.labels().size() << " labels, model '" << b.header.model << "'"
          << (b.header.segment ? ", segment '" + *b.header.segment + "'" : std::string()) << "\n";

    } else if (sub == train_cmd) {
      const auto b = read_bundle(t_bundle);
      const auto data = training_set(b, t_classes, t_cap, g.seed);
      auto model = train(data, t_opts.config(g.threads));
      TrainMeta meta = model.meta();
      meta.info = run.provenance;
      model = ClassifierModel(model.classes(), model.weights(), model.biases(), meta);
      const fs::path path = t_output.empty() ? run.out_dir / "model.wcm" : fs::path(t_output);
      save_model(model, path);
      out << "trained " << model.num_classes() << " classes on " << data.size()
          << " records (dim " << model.dim() << "), iterations " << meta.iterations
          << (meta.converged ? ", converged" : ", NOT converged (max iterations reached)")
          << "\nwrote " << path.string() << "\n";

    } else if (sub == similar) {
      const auto model = load_model(s_model);
      const auto b = read_bundle(s_bundle);
      if (b.count(s_target) == 0) throw Error("no records for target '" + s_target + "'");
      const auto recs = sample_per_label(b, s_target, s_k, g.seed);
      const auto dist = target_distribution(model, recs, s_target, s_exclude);
      std::vector<std::string> classes = s_classes;
      if (classes.empty()) {
        for (const auto& c : model.classes())
          if (!(s_exclude && c == s_target)) classes.push_back(c);
      }
      std::string body = "class,score\n";
      for (const auto& c : classes) {
        if (s_exclude && c == s_target)
          throw Error("similar: class '" + c + "' is the target itself and is excluded");
        const double score = dist.prob(c);
        body += csv_field(c) + "," + format_double(score) + "\n";
        out << c << "\t" << format_double(score) << "\n";
      }
      out << "most similar class: " << dist.argmax() << " (" << recs.size() << " samples)\n";
      run.write_csv("similar_" + safe_filename(s_target) + ".csv", body);

    } else if (sub == matrix) {
      const auto model = load_model(m_model);
      const auto b = read_bundle(m_bundle);
      std::vector<std::string> words = m_words;
      if (words.empty())
        for (const auto& c : model.classes())
          if (b.count(c) > 0) words.push_back(c);
      const auto m = similarity_matrix(model, b, words, {m_exclude, m_k, g.seed});
      run.write_csv("matrix.csv", format_matrix_csv(m));

    } else if (sub == bpairs) {
      const auto model = load_model(bp_model);
      const auto b = read_bundle(bp_bundle);
      const auto pairs = load_pairs_tsv(bp_pairs);
      PairBenchmarkOptions o;
      o.dataset = bp_name.empty() ? fs::path(bp_pairs).stem().string() : bp_name;
      o.samples_per_word = bp_k;
      o.seed = g.seed;
      o.exclude_self = bp_exclude;
      const auto rep = run_pair_benchmark(model, b, pairs, o);
      out << o.dataset << ": evaluated " << rep.n_evaluated << "/" << rep.n_total
          << " pairs, rho_word_confusion " << format_double(rep.rho_word_confusion)
          << ", rho_cosine " << format_double(rep.rho_cosine) << "\n";
      const std::string stem = "benchmark_" + safe_filename(o.dataset);
      run.write_json(stem + ".json", report_to_json(rep));
      run.write_csv(stem + "_pairs.csv", format_pair_table_csv(rep));

    } else if (sub == bfeat) {
      const auto model = load_model(bf_model);
      const auto b = read_bundle(bf_bundle);
      const auto seeds_bundle = read_bundle(bf_seeds);
      std::ifstream tin(bf_targets);
      if (!tin) throw Error("cannot open targets file " + bf_targets);
      std::vector<FeatureTarget> targets;
      std::vector<std::string> skipped;
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(tin, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line).front() == '#') continue;
        const auto f = split(line, '\t');
        if (f.size() != 2)
          throw Error("targets line " + std::to_string(lineno) + ": expected word<TAB>class");
        const std::string word(trim(f[0])), gold(trim(f[1]));
        if (b.count(word) == 0) {
          skipped.push_back(word);
          continue;
        }
        targets.push_back({word, gold, sample_per_label(b, word, bf_k, g.seed)});
      }
      const auto rep = run_feature_benchmark(model, targets, seeds_bundle.group_by_label());
      out << "macro-F1: word_confusion " << format_double(rep.f1_word_confusion) << ", cosine_1 "
          << format_double(rep.f1_cosine[0]) << ", cosine_2 " << format_double(rep.f1_cosine[1])
          << ", cosine_3 " << format_double(rep.f1_cosine[2]) << ", cosine_average "
          << format_double(rep.f1_cosine_mean) << "\n";
      auto j = report_to_json(rep);
      j["skipped_targets"] = skipped;
      run.write_json("features.json", j);
      run.write_csv("features.csv", format_feature_table_csv(rep));

    } else if (sub == trace) {
      const auto cfg = load_trace_config(tr_config);
      std::vector<Segment> segments;
      for (const auto& spec : cfg.segments) segments.push_back({spec, read_bundle(spec.bundle_path)});
      const auto models =
          train_segments(segments, tr_opts.config(g.threads), cfg.samples_per_class, g.seed);
      std::map<std::string, std::vector<LabeledEmbedding>> targets, seeds;
      for (const auto& seg : segments) {
        if (seg.bundle.count(cfg.target) == 0)
          throw Error("segment '" + seg.spec.label + "': no records for target '" + cfg.target + "'");
        targets[seg.spec.label] = sample_per_label(seg.bundle, cfg.target, cfg.target_samples, g.seed);
        seeds[seg.spec.label] = seed_dataset(seg, cfg.samples_per_class, g.seed);
      }
      auto rep = trace_concept(models, targets, cfg.target);
      attach_projections(rep, seeds, targets, cfg.joint_projection);
      run.write_csv("trace.csv", format_trace_csv(rep));
      Json j = Json::object();
      j["target"] = rep.target;
      j["classes"] = rep.classes;
      Json segs = Json::array();
      for (const auto& s : rep.segments) {
        Json probs = Json::object();
        for (std::size_t k = 0; k < rep.classes.size(); ++k)
          probs[rep.classes[k]] = s.distribution.probs[k];
        segs.push_back({{"segment", s.segment},
                        {"samples", s.samples},
                        {"probabilities", probs},
                        {"projection_degenerate", s.projection_degenerate}});
        if (s.points.empty()) continue;
        const std::string stem = "trace_" + safe_filename(s.segment);
        if (tr_format != "svg")
          run.write(stem + ".csv", format_plot(s.points, PlotFormat::csv, {}, run.comment()));
        if (tr_format != "csv")
          run.write(stem + ".svg", format_plot(s.points, PlotFormat::svg, {}, run.comment()));
      }
      j["segments"] = segs;
      run.write_json("trace.json", j);
      for (const auto& s : rep.segments) {
        out << s.segment;
        for (std::size_t k = 0; k < rep.classes.size(); ++k)
          out << "\t" << rep.classes[k] << "=" << format_double(s.distribution.probs[k]);
        out << "\n";
      }

    } else if (sub == project) {
      const auto b = read_bundle(p_bundle);
      std::vector<LabeledEmbedding> recs;
      const auto labels = p_labels.empty() ? b.labels() : p_labels;
      for (const auto& l : labels) {
        if (b.count(l) == 0) throw Error("project: no records for label '" + l + "'");
        auto r = p_k > 0 ? sample_per_label(b, l, p_k, g.seed) : b.records_for(l);
        recs.insert(recs.end(), r.begin(), r.end());
      }
      const auto p = project_2d(recs);
      if (p.degenerate) out << "warning: all points identical; projection is degenerate\n";
      const auto fmt = parse_plot_format(p_format);
      run.write(p_output.empty() ? "projection." + p_format : p_output,
                format_plot(p.points, fmt, {}, run.comment()));

    } else if (sub == ident) {
      if (i_synth == !i_bundle.empty())
        throw Error("identifiability: give exactly one of --bundle or --synthetic");
      const auto b = i_synth ? fixtures::sphere_clusters(i_syn_classes, i_dim, i_sigma,
                                                         i_per_class, g.seed, i_shared)
                             : read_bundle(i_bundle);
      i_opt.seed = g.seed;
      i_opt.train = i_train.config(g.threads);
      const auto res = one_shot_identifiability(b, i_opt);
      out << "mean one-shot accuracy " << format_double(res.mean_accuracy) << " over "
          << res.trial_accuracy.size() << " trial(s)\n";
      Json j = {{"mean_accuracy", res.mean_accuracy},
                {"trial_accuracy", res.trial_accuracy},
                {"n_classes", i_opt.n_classes},
                {"test_per_class", i_opt.test_per_class},
                {"chance", 1.0 / static_cast<double>(i_opt.n_classes)}};
      run.write_json("identifiability.json", j);
      std::string tsv;
      for (const auto& o : res.outcomes) tsv += o.word + "\t" + (o.correct ? "1" : "0") + "\n";
      run.write_csv("identifiability_outcomes.tsv", tsv);

    } else if (sub == svd) {
      std::string body =
          "case,dim,sigma_max,sigma_min,original_euclidean,direct_euclidean,decomposed_euclidean,"
          "original_cosine,direct_cosine,decomposed_cosine,max_discrepancy\n";
      double worst = 0;
      std::size_t cases = 0;
      auto emit = [&](const SvdCheckReport& r) {
        const auto& s = r.singular_values;
        body += std::to_string(cases++) + "," + std::to_string(r.A.rows()) + "," +
                format_double(s[0]) + "," + format_double(s[s.size() - 1]) + "," +
                format_double(r.original_euclidean) + "," + format_double(r.direct_euclidean) +
                "," + format_double(r.decomposed_euclidean) + "," +
                format_double(r.original_cosine) + "," + format_double(r.direct_cosine) + "," +
                format_double(r.decomposed_cosine) + "," + format_double(r.max_discrepancy) + "\n";
        worst = std::max(worst, r.max_discrepancy);
      };
      if (!sv_matrix.empty()) {
        if (sv_x.empty() || sv_y.empty()) throw Error("svd-check: --matrix needs --x and --y");
        emit(svd_distance_check(parse_matrix(sv_matrix), to_eigen(parse_vector(sv_x, "--x")),
                                to_eigen(parse_vector(sv_y, "--y"))));
      } else {
        if (sv_dim < 1) throw Error("svd-check: --dim must be >= 1");
        std::mt19937_64 rng(g.seed);
        std::normal_distribution<double> nd(0.0, 1.0);
        const auto n = static_cast<Eigen::Index>(sv_dim);
        while (cases < sv_random) {
          Eigen::MatrixXd A(n, n);
          for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = nd(rng);
          Eigen::VectorXd x(n), y(n);
          for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = nd(rng);
            y[i] = nd(rng);
          }
          const Eigen::JacobiSVD<Eigen::MatrixXd> s(A);
          const auto& sv = s.singularValues();
          if (sv[n - 1] == 0.0 || sv[0] / sv[n - 1] > sv_max_cond) continue;
          emit(svd_distance_check(A, x.normalized(), y.normalized()));
        }
      }
      out << cases << " case(s), max discrepancy " << format_double(worst) << "\n";
      run.write_csv("svd_check.csv", body);
      run.write_json("svd_check.json", Json{{"cases", cases}, {"max_discrepancy", worst}});

    } else if (sub == grid) {
      const auto model = load_model(g_model);
      const auto b = read_bundle(g_bundle);
      std::map<std::string, Vector> centroids;
      for (const auto& c : model.classes()) {
        const auto recs = b.records_for(c);
        if (recs.empty()) throw Error("boundary-grid: no records for class '" + c + "'");
        centroids[c] = mean_embedding(recs);
      }
      const auto bg = boundary_grid(model, centroids, g_extent, g_res, g_scales);
      out << bg.size() << " grid points, " << bg.disagreements() << " disagreements, "
          << bg.wc_scale_flips << " WC label flips under scaling, cosine scale-invariant: "
          << (bg.cosine_scale_invariant ? "yes" : "no") << "\n";
      run.write_csv("grid.csv", format_grid_csv(bg));
      run.write_json("grid.json", Json{{"points", bg.size()},
                                       {"disagreements", bg.disagreements()},
                                       {"wc_scale_flips", bg.wc_scale_flips},
                                       {"cosine_scale_invariant", bg.cosine_scale_invariant},
                                       {"scales", bg.scales}});

    } else if (sub == vreg) {
      RegressorConfig rc{vr_ridge, parse_bucket_scheme(vr_scheme)};
      std::string body = "segment,n_train,buckets,fit_r,degenerate,n_basket,basket_mean\n";
      Json segs = Json::array();
      std::map<std::string, double> basket_means;
      std::vector<std::string> order;
      double fit_sum = 0;
      for (const auto& path : vr_bundles) {
        const auto b = read_bundle(path);
        const std::string seg = b.header.segment ? *b.header.segment : fs::path(path).stem().string();
        std::vector<ValueSample> samples;
        std::vector<LabeledEmbedding> basket;
        for (const auto& r : b.records) {
          if (r.meta.contains(vr_value_key)) {
            if (!r.meta[vr_value_key].is_number())
              throw Error("segment '" + seg + "': meta '" + vr_value_key + "' must be numeric");
            samples.push_back({r.vec, r.meta[vr_value_key].get<double>()});
          } else if (r.meta.contains(vr_basket_key)) {
            basket.push_back(r);
          }
        }
        const auto reg = train_value_regressor(samples, vr_buckets, rc);
        for (const auto& w : reg.warnings) err << "warning: segment '" << seg << "': " << w << "\n";
        std::optional<double> bmean;
        if (!basket.empty()) {
          double s = 0;
          for (const auto& r : basket) s += predict_value(reg, r.vec);
          bmean = s / static_cast<double>(basket.size());
          basket_means[seg] = *bmean;
        }
        order.push_back(seg);
        fit_sum += reg.fit_r;
        body += csv_field(seg) + "," + std::to_string(samples.size()) + "," +
                std::to_string(reg.buckets.size()) + "," + format_double(reg.fit_r) + "," +
                (reg.degenerate ? "1" : "0") + "," + std::to_string(basket.size()) + "," +
                (bmean ? format_double(*bmean) : std::string()) + "\n";
        segs.push_back({{"segment", seg},
                        {"n_train", samples.size()},
                        {"buckets", reg.buckets.size()},
                        {"fit_r", reg.fit_r},
                        {"degenerate", reg.degenerate},
                        {"warnings", reg.warnings},
                        {"weights", reg.weights},
                        {"bias", reg.bias},
                        {"basket_mean", bmean ? Json(*bmean) : Json(nullptr)}});
      }
      Json j = {{"segments", segs},
                {"mean_fit_r", fit_sum / static_cast<double>(vr_bundles.size())}};
      if (!vr_index.empty()) {
        std::ifstream in(vr_index);
        if (!in) throw Error("cannot open index file " + vr_index);
        std::string line;
        std::vector<std::string> names;
        std::map<std::string, std::map<std::string, double>> series;
        while (std::getline(in, line)) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (trim(line).empty() || trim(line).front() == '#') continue;
          const auto f = split(line, '\t');
          if (names.empty()) {
            names.assign(f.begin() + 1, f.end());
            continue;
          }
          if (f.size() != names.size() + 1) throw Error("index file: ragged row");
          for (std::size_t c = 0; c < names.size(); ++c)
            series[names[c]][std::string(trim(f[0]))] = parse_double(f[c + 1], "index file");
        }
        Json corr = Json::object();
        for (const auto& name : names) {
          Vector a, bvals;
          for (const auto& seg : order)
            if (basket_means.contains(seg) && series[name].contains(seg)) {
              a.push_back(basket_means[seg]);
              bvals.push_back(series[name][seg]);
            }
          corr[name] = pearson(a, bvals);
          out << "pearson(basket, " << name << ") = " << format_double(corr[name].get<double>())
              << " over " << a.size() << " segments\n";
        }
        j["index_correlation"] = corr;
      }
      run.write_csv("value_regress.csv", body);
      run.write_json("value_regress.json", j);

    } else if (sub == ebins) {
      std::ifstream rin(e_results);
      if (!rin) throw Error("cannot open results file " + e_results);
      const auto results = parse_outcomes_tsv(rin);
      const auto meta = load_metadata_tsv(e_meta);
      if (!e_freq.empty()) e_edges.edges[Facet::frequency] = e_freq;
      if (!e_sense.empty()) e_edges.edges[Facet::sense_count] = e_sense;
      if (!e_tok.empty()) e_edges.edges[Facet::token_count] = e_tok;
      if (!e_first.empty()) e_edges.edges[Facet::first_token_frequency] = e_first;
      const auto t = error_bins(results, meta, e_edges);
      if (t.excluded)
        err << "warning: " << t.excluded << " result(s) excluded for missing metadata\n";
      run.write_csv("error_bins.csv", format_error_bins_csv(t));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace wordconf::cli
