#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "tcb/corpus.hpp"
#include "tcb/errors.hpp"
#include "tcb/eval.hpp"
#include "tcb/model_io.hpp"
#include "tcb/preprocess.hpp"
#include "tcb/rvm.hpp"
#include "tcb/svm.hpp"

namespace tcb {
namespace cli {

namespace cli_detail {

inline std::string g17(double value) { return io_detail::g17(value); }

// Shared option bag; each subcommand binds the subset it cares about.
struct Opts {
  // shared
  std::uint64_t seed = 42;
  std::string out;
  bool quiet = false;

  // prepare
  std::string source;
  std::string path;
  int docs = 0;     // 0 = whole corpus
  int classes = 0;  // 0 = all classes (only meaningful with --docs)
  int min_df = 2;
  bool no_stem = false;

  // train / evaluate / predict
  std::string model;  // train: svm|rvm; evaluate/predict: model file path
  std::string vectors;
  double c = 1.0;
  double tol = 1e-3;
  double alpha_init = 1.0;
  double alpha_prune = 1e9;
  int max_iter = 0;  // 0 = model default (svm: 200 epochs, rvm: 500 outer)

  // predict
  std::string vocab;
  std::string input;
  std::string tsv;

  // benchmark
  std::string manifest;
  int folds = 10;

  // stats
  std::string csv_a;
  std::string csv_b;
  std::string model_a;
  std::string model_b;
};

inline PipelineConfig pipeline_from(const Opts& o) {
  PipelineConfig cfg;
  cfg.min_df = o.min_df;
  cfg.stem = !o.no_stem;
  return cfg;
}

inline int cmd_prepare(const Opts& o, std::ostream& out) {
  if (o.classes > 0 && o.docs <= 0) throw ConfigError("prepare: --classes requires --docs");

  Corpus corpus = load_for_source(o.source, o.path);
  if (o.docs > 0) {
    SubsetSpec spec;
    spec.n_docs = o.docs;
    spec.n_classes = o.classes > 0 ? o.classes : corpus.n_classes();
    spec.seed = o.seed;
    corpus = sample_subset(corpus, spec);
  }
  if (!o.quiet)
    out << "loaded " << corpus.n_docs() << " documents, " << corpus.n_classes() << " classes\n";

  const PipelineConfig pcfg = pipeline_from(o);
  std::vector<std::vector<std::string>> tokens(corpus.documents.size());
  for (std::size_t i = 0; i < corpus.documents.size(); ++i)
    tokens[i] = pipeline_tokens(corpus.documents[i].text, pcfg);

  const Vocabulary vocab = build_vocabulary(tokens, pcfg);
  if (!o.quiet)
    out << "vocabulary: " << vocab.p() << " terms (min_df=" << pcfg.min_df << ", stem="
        << (pcfg.stem ? "on" : "off") << ", stop=" << pcfg.stopword_list << ")\n";

  VectorsData data;
  data.p = vocab.p();
  data.seed = o.seed;
  data.class_names = corpus.classes;
  data.docs.reserve(corpus.documents.size());
  for (std::size_t i = 0; i < corpus.documents.size(); ++i)
    data.docs.push_back(
        {vectorize(tokens[i], vocab), corpus.class_index_of(corpus.documents[i].label)});

  const std::string prefix = o.out.empty() ? "data" : o.out;
  write_vectors_file(prefix + ".vectors", data);
  VocabData vd;
  vd.vocab = vocab;
  vd.pipeline = pcfg;
  vd.seed = o.seed;
  write_vocab_file(prefix + ".vocab", vd);
  if (!o.quiet) out << "wrote " << prefix << ".vectors\nwrote " << prefix << ".vocab\n";
  return 0;
}

inline int cmd_train(const Opts& o, std::ostream& out) {
  const ModelKind kind = model_kind_from(o.model);
  const VectorsData data = load_vectors_file(o.vectors);
  if (data.docs.empty()) throw RuntimeError("vectors file contains no documents");
  if (!o.quiet)
    out << "loaded " << data.n() << " documents, p=" << data.p << ", k=" << data.k() << "\n";

  const std::string out_path = o.out.empty() ? "model.tcb" : o.out;
  double seconds = 0.0;

  if (kind == ModelKind::svm) {
    SvmConfig cfg;
    cfg.C = o.c;
    cfg.tol = o.tol;
    cfg.max_epochs = o.max_iter > 0 ? o.max_iter : 200;
    cfg.shuffle_seed = o.seed;
    const auto t0 = std::chrono::steady_clock::now();
    const SvmModel model = train_svm(data.docs, data.p, data.class_names, cfg);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_model_file(out_path, model, o.seed);
  } else {
    RvmConfig cfg;
    cfg.alpha_init = o.alpha_init;
    cfg.alpha_prune = o.alpha_prune;
    cfg.tol_alpha = o.tol;
    cfg.max_outer = o.max_iter > 0 ? o.max_iter : 500;
    const auto t0 = std::chrono::steady_clock::now();
    const RvmModel model = train_rvm(data.docs, data.class_names, data.p, cfg);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_model_file(out_path, model, o.seed);
  }

  if (!o.quiet) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", seconds);
    out << "train seconds: " << buf << "\n";
    out << "wrote " << out_path << "\n";
  }
  return 0;
}

inline int cmd_evaluate(const Opts& o, std::ostream& out) {
  const LoadedModel model = load_model_file(o.model);
  const VectorsData data = load_vectors_file(o.vectors);
  if (data.docs.empty()) throw RuntimeError("vectors file contains no documents");

  const int model_p = model.kind == ModelKind::svm ? model.svm.p : model.rvm.p;
  if (model_p != data.p)
    throw RuntimeError("model p=" + std::to_string(model_p) +
                       " incompatible with vectors p=" + std::to_string(data.p));
  const std::vector<std::string>& names =
      model.kind == ModelKind::svm ? model.svm.class_names : model.rvm.class_names;
  if (names != data.class_names)
    throw RuntimeError("model class table differs from vectors class table");

  std::vector<int> preds, truth;
  preds.reserve(data.docs.size());
  truth.reserve(data.docs.size());
  for (const LabeledVector& d : data.docs) {
    truth.push_back(d.class_index);
    if (model.kind == ModelKind::svm)
      preds.push_back(predict(model.svm, augment_bias(d.vector, data.p)));
    else
      preds.push_back(predict(model.rvm, d.vector));
  }

  const ConfusionCounts counts = confusion(preds, truth, static_cast<int>(names.size()));
  const Metrics m = compute_metrics(counts);
  out << "n=" << counts.total << " k=" << counts.K << "\n";
  out << "micro_p=" << g17(m.micro_p) << " micro_r=" << g17(m.micro_r)
      << " micro_f1=" << g17(m.micro_f1) << "\n";
  out << "macro_p=" << g17(m.macro_p) << " macro_r=" << g17(m.macro_r)
      << " macro_f1=" << g17(m.macro_f1) << "\n";
  out << "accuracy=" << g17(m.accuracy) << "\n";
  for (int c = 0; c < counts.K; ++c)
    out << "class " << names[c] << " tp=" << counts.tp[c] << " fp=" << counts.fp[c]
        << " fn=" << counts.fn[c] << "\n";
  return 0;
}

inline int cmd_benchmark(const Opts& o, std::ostream& out) {
  const std::vector<DatasetSpecRow> specs =
      parse_manifest(detail::read_file_bytes(o.manifest), o.seed);
  if (o.folds < 2) throw ConfigError("benchmark: --folds must be at least 2");

  const PipelineConfig pcfg = pipeline_from(o);
  SvmConfig scfg;
  scfg.C = o.c;
  RvmConfig rcfg;

  const BenchmarkReport report = run_benchmark(specs, pcfg, scfg, rcfg, o.folds);

  const std::string prefix = o.out.empty() ? "benchmark" : o.out;
  atomic_write_file(prefix + ".csv", render_benchmark_csv(report));
  const std::string table = render_benchmark_table(report);
  atomic_write_file(prefix + ".txt", table);
  if (!o.quiet) out << table;
  if (!o.quiet) out << "wrote " << prefix << ".csv\nwrote " << prefix << ".txt\n";
  return 0;
}

inline int cmd_predict(const Opts& o, std::ostream& out) {
  if (o.input.empty() == o.tsv.empty())
    throw ConfigError("predict: exactly one of --input or --tsv is required");

  const VocabData vd = load_vocab_file(o.vocab);
  const LoadedModel model = load_model_file(o.model);
  const int model_p = model.kind == ModelKind::svm ? model.svm.p : model.rvm.p;
  if (model_p != vd.vocab.p())
    throw RuntimeError("model p=" + std::to_string(model_p) +
                       " incompatible with vocabulary p=" + std::to_string(vd.vocab.p()));
  const std::vector<std::string>& names =
      model.kind == ModelKind::svm ? model.svm.class_names : model.rvm.class_names;

  std::vector<std::pair<std::string, std::string>> inputs;  // id, text
  if (!o.input.empty()) {
    inputs.push_back({o.input, detail::read_file_bytes(o.input)});
  } else {
    const std::string text = detail::read_file_bytes(o.tsv);
    io_detail::LineReader reader(text);
    std::string line;
    while (reader.next(line)) {
      if (line.empty()) continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos || tab == 0)
        throw RuntimeError("line " + std::to_string(reader.lineno) +
                           ": expected 2 tab-separated fields (id, text)");
      inputs.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
  }

  if (model.kind == ModelKind::rvm) {
    out << "# classes";
    for (const std::string& name : names) out << "\t" << name;
    out << "\n";
  }

  for (const auto& [id, text] : inputs) {
    const SparseVector v = vectorize(pipeline_tokens(text, vd.pipeline), vd.vocab);
    if (model.kind == ModelKind::svm) {
      out << id << "\t" << names[predict(model.svm, augment_bias(v, vd.vocab.p()))] << "\n";
    } else {
      const std::vector<double> probs = predict_proba(model.rvm, v);
      int best = 0;
      for (int c = 1; c < static_cast<int>(probs.size()); ++c)
        if (probs[c] > probs[best]) best = c;
      out << id << "\t" << names[best] << "\t";
      for (std::size_t c = 0; c < probs.size(); ++c) out << (c ? " " : "") << g17(probs[c]);
      out << "\n";
    }
  }
  return 0;
}

// Resolves a stats model filter: explicit flag, else the file's single model
// kind, else svm when the file carries both.
inline std::string resolve_stats_model(const std::string& flag, const std::vector<CsvRow>& rows) {
  if (!flag.empty()) return flag;
  std::set<std::string> kinds;
  for (const CsvRow& r : rows) kinds.insert(r.model);
  if (kinds.size() == 1) return *kinds.begin();
  return "svm";
}

inline int cmd_stats(const Opts& o, std::ostream& out) {
  const std::vector<CsvRow> rows_a = parse_benchmark_csv(detail::read_file_bytes(o.csv_a));
  const std::vector<CsvRow> rows_b = parse_benchmark_csv(detail::read_file_bytes(o.csv_b));
  const std::string model_a = resolve_stats_model(o.model_a, rows_a);
  const std::string model_b = resolve_stats_model(o.model_b, rows_b);
  if (model_a != "svm" && model_a != "rvm")
    throw ConfigError("stats: unknown model '" + model_a + "'");
  if (model_b != "svm" && model_b != "rvm")
    throw ConfigError("stats: unknown model '" + model_b + "'");

  // (dataset, fold) -> micro_f1 for the selected model of each file
  auto collect = [](const std::vector<CsvRow>& rows, const std::string& model,
                    const std::string& which) {
    std::map<std::string, std::map<int, double>> by_dataset;
    for (const CsvRow& r : rows) {
      if (r.model != model) continue;
      auto& folds = by_dataset[r.dataset];
      if (!folds.emplace(r.fold, r.micro_f1).second)
        throw RuntimeError(which + ": duplicate row for dataset " + r.dataset + " fold " +
                           std::to_string(r.fold));
    }
    return by_dataset;
  };
  const auto a = collect(rows_a, model_a, "first file");
  const auto b = collect(rows_b, model_b, "second file");

  std::vector<std::string> missing;
  std::set<std::string> datasets;
  for (const auto& [name, folds] : a) datasets.insert(name);
  for (const auto& [name, folds] : b) datasets.insert(name);
  for (const std::string& name : datasets) {
    const auto ia = a.find(name), ib = b.find(name);
    if (ia == a.end()) {
      missing.push_back("dataset " + name + " missing from first file");
      continue;
    }
    if (ib == b.end()) {
      missing.push_back("dataset " + name + " missing from second file");
      continue;
    }
    for (const auto& [fold, v] : ia->second)
      if (!ib->second.count(fold))
        missing.push_back("dataset " + name + " fold " + std::to_string(fold) +
                          " missing from second file");
    for (const auto& [fold, v] : ib->second)
      if (!ia->second.count(fold))
        missing.push_back("dataset " + name + " fold " + std::to_string(fold) +
                          " missing from first file");
  }
  if (!missing.empty()) {
    std::string msg = "stats: fold sets differ:";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + missing[i];
    if (missing.size() > shown)
      msg += "\n  (+" + std::to_string(missing.size() - shown) + " more)";
    throw RuntimeError(msg);
  }
  if (datasets.empty()) throw RuntimeError("stats: no rows selected");

  out << "# a=" << o.csv_a << ":" << model_a << " b=" << o.csv_b << ":" << model_b << "\n";

  std::vector<std::vector<std::string>> grid;
  grid.push_back({"dataset", "n", "mean-a", "mean-b", "t", "df", "p", "sig"});
  for (const std::string& name : datasets) {
    std::vector<double> va, vb;
    for (const auto& [fold, v] : a.at(name)) {
      va.push_back(v);
      vb.push_back(b.at(name).at(fold));
    }
    const TTestResult res = paired_t_test(va, vb);
    char tbuf[64], pbuf[64], mabuf[64], mbbuf[64];
    std::snprintf(tbuf, sizeof(tbuf), "%.4f", res.t);
    std::snprintf(pbuf, sizeof(pbuf), "%.4g", res.p);
    std::snprintf(mabuf, sizeof(mabuf), "%.6f", mean_of(va));
    std::snprintf(mbbuf, sizeof(mbbuf), "%.6f", mean_of(vb));
    grid.push_back({name, std::to_string(va.size()), mabuf, mbbuf, tbuf,
                    std::to_string(res.df), pbuf, res.p < 0.05 ? "*" : ""});
  }

  std::vector<std::size_t> widths(grid[0].size(), 0);
  for (const auto& r : grid)
    for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
  for (const auto& r : grid) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << "  ";
      std::string cell = r[c];
      if (c + 1 < r.size() && cell.size() < widths[c]) cell.append(widths[c] - cell.size(), ' ');
      out << cell;
    }
    out << "\n";
  }
  return 0;
}

}  // namespace cli_detail

// Entry point shared by the binary and the tests. Returns the process exit
// code: 0 success, 1 runtime failure, 2 usage or configuration error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using cli_detail::Opts;
  Opts o;

  CLI::App app{"document classification benchmark toolkit", "tcb"};
  app.require_subcommand(1);

  CLI::App* prepare = app.add_subcommand("prepare", "load a corpus and write vectors + vocabulary");
  prepare->add_option("--source", o.source, "corpus loader: reuters, ng20, or tsv")
      ->required()
      ->check(CLI::IsMember({"reuters", "ng20", "tsv"}));
  prepare->add_option("--path", o.path, "corpus file or directory")->required();
  prepare->add_option("--docs", o.docs, "subsample to this many documents (0 = all)");
  prepare->add_option("--classes", o.classes, "subsample to this many classes (requires --docs)");
  prepare->add_option("--min-df", o.min_df, "minimum document frequency (default 2)");
  prepare->add_flag("--no-stem", o.no_stem, "disable stemming");
  prepare->add_option("--seed", o.seed, "random seed (default 42)");
  prepare->add_option("--out", o.out, "output prefix (default 'data')");
  prepare->add_flag("--quiet", o.quiet, "suppress progress output");

  CLI::App* train = app.add_subcommand("train", "train a model on a vectors file");
  train->add_option("--model", o.model, "model kind: svm or rvm")
      ->required()
      ->check(CLI::IsMember({"svm", "rvm"}));
  train->add_option("--vectors", o.vectors, "vectors file from prepare")->required();
  train->add_option("--c", o.c, "svm regularization C (default 1.0)");
  train->add_option("--tol", o.tol, "convergence tolerance (default 1e-3)");
  train->add_option("--alpha-init", o.alpha_init, "rvm initial precision (default 1.0)");
  train->add_option("--alpha-prune", o.alpha_prune, "rvm pruning threshold (default 1e9)");
  train->add_option("--max-iter", o.max_iter,
                    "iteration cap (default: 200 svm epochs, 500 rvm outer)");
  train->add_option("--seed", o.seed, "random seed (default 42)");
  train->add_option("--out", o.out, "model output path (default 'model.tcb')");
  train->add_flag("--quiet", o.quiet, "suppress progress output");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a model on a labeled vectors file");
  evaluate->add_option("--model", o.model, "model file")->required();
  evaluate->add_option("--vectors", o.vectors, "labeled vectors file")->required();
  evaluate->add_flag("--quiet", o.quiet, "suppress progress output");

  CLI::App* benchmark = app.add_subcommand("benchmark", "run the manifest-driven model comparison");
  benchmark->add_option("--manifest", o.manifest, "dataset manifest file")->required();
  benchmark->add_option("--folds", o.folds, "cross-validation folds (default 10)");
  benchmark->add_option("--seed", o.seed, "default seed for rows without one (default 42)");
  benchmark->add_option("--out", o.out, "report prefix (default 'benchmark')");
  benchmark->add_flag("--quiet", o.quiet, "suppress table output");

  CLI::App* predict = app.add_subcommand("predict", "classify unlabeled documents");
  predict->add_option("--model", o.model, "model file")->required();
  predict->add_option("--vocab", o.vocab, "vocabulary file from prepare")->required();
  predict->add_option("--input", o.input, "single raw-text document");
  predict->add_option("--tsv", o.tsv, "unlabeled TSV: id<TAB>text per line");
  predict->add_flag("--quiet", o.quiet, "suppress progress output");

  CLI::App* stats = app.add_subcommand("stats", "paired t-test between two benchmark CSV files");
  stats->add_option("csv_a", o.csv_a, "first benchmark CSV")->required();
  stats->add_option("csv_b", o.csv_b, "second benchmark CSV")->required();
  stats->add_option("--model-a", o.model_a, "model kind to read from the first file");
  stats->add_option("--model-b", o.model_b, "model kind to read from the second file");
  stats->add_flag("--quiet", o.quiet, "suppress informational output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (prepare->parsed()) return cli_detail::cmd_prepare(o, out);
    if (train->parsed()) return cli_detail::cmd_train(o, out);
    if (evaluate->parsed()) return cli_detail::cmd_evaluate(o, out);
    if (benchmark->parsed()) return cli_detail::cmd_benchmark(o, out);
    if (predict->parsed()) return cli_detail::cmd_predict(o, out);
    if (stats->parsed()) return cli_detail::cmd_stats(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const RuntimeError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cli
}  // namespace tcb
