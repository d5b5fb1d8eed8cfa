#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcb/corpus.hpp"
#include "tcb/errors.hpp"
#include "tcb/numerics.hpp"
#include "tcb/preprocess.hpp"
#include "tcb/random.hpp"
#include "tcb/rvm.hpp"
#include "tcb/svm.hpp"

namespace tcb {

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;  // fold index per document position
};

// Stratified k-fold: within each class, documents are shuffled by a seeded
// generator (salted with the class label) and dealt round-robin starting at
// fold 0. Every class must have at least k documents.
inline FoldAssignment stratified_kfold(const std::vector<int>& labels, int k,
                                       std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be at least 2");
  int max_label = -1;
  for (const int l : labels) {
    if (l < 0) throw RuntimeError("stratified_kfold: negative label");
    max_label = std::max(max_label, l);
  }
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));

  std::string deficient;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && static_cast<int>(by_class[c].size()) < k) {
      if (!deficient.empty()) deficient += ", ";
      deficient += "class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                   " documents";
    }
  }
  if (!deficient.empty())
    throw ConfigError("stratified_kfold: every class needs at least " + std::to_string(k) +
                      " documents; " + deficient);

  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.assign(labels.size(), -1);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) continue;
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(by_class[c]);
    for (std::size_t pos = 0; pos < by_class[c].size(); ++pos)
      fa.fold_of[static_cast<std::size_t>(by_class[c][pos])] = static_cast<int>(pos % k);
  }
  return fa;
}

struct ConfusionCounts {
  int K = 0;
  std::vector<long long> tp, fp, fn;
  long long total = 0;

  explicit ConfusionCounts(int classes = 0)
      : K(classes),
        tp(static_cast<std::size_t>(classes), 0),
        fp(static_cast<std::size_t>(classes), 0),
        fn(static_cast<std::size_t>(classes), 0) {}
};

inline ConfusionCounts confusion(const std::vector<int>& predicted,
                                 const std::vector<int>& truth, int k) {
  if (predicted.size() != truth.size()) throw ConfigError("confusion: length mismatch");
  ConfusionCounts counts(k);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i], t = truth[i];
    if (p < 0 || p >= k || t < 0 || t >= k)
      throw RuntimeError("confusion: class index out of range");
    if (p == t) {
      ++counts.tp[static_cast<std::size_t>(t)];
    } else {
      ++counts.fp[static_cast<std::size_t>(p)];
      ++counts.fn[static_cast<std::size_t>(t)];
    }
  }
  counts.total = static_cast<long long>(predicted.size());
  return counts;
}

inline void accumulate(ConfusionCounts& into, const ConfusionCounts& from) {
  if (into.K == 0) into = ConfusionCounts(from.K);
  if (into.K != from.K) throw RuntimeError("accumulate: class count mismatch");
  for (int c = 0; c < from.K; ++c) {
    into.tp[c] += from.tp[c];
    into.fp[c] += from.fp[c];
    into.fn[c] += from.fn[c];
  }
  into.total += from.total;
}

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

namespace eval_detail {

// Every reported value is a single integer-to-integer division so the exact
// identities between micro metrics hold bitwise; 0/0 is defined as 0.
inline double ratio(long long num, long long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace eval_detail

inline Prf micro_metrics(const ConfusionCounts& counts) {
  long long tp = 0, fp = 0, fn = 0;
  for (int c = 0; c < counts.K; ++c) {
    tp += counts.tp[c];
    fp += counts.fp[c];
    fn += counts.fn[c];
  }
  Prf m;
  m.precision = eval_detail::ratio(tp, tp + fp);
  m.recall = eval_detail::ratio(tp, tp + fn);
  m.f1 = eval_detail::ratio(2 * tp, 2 * tp + fp + fn);
  return m;
}

// Averages per-class scores over classes that appear in the truth
// (tp + fn > 0). Macro-F1 is the mean of per-class F1 values, not the
// harmonic mean of macro precision and recall.
inline Prf macro_metrics(const ConfusionCounts& counts) {
  double sp = 0.0, sr = 0.0, sf = 0.0;
  int present = 0;
  for (int c = 0; c < counts.K; ++c) {
    if (counts.tp[c] + counts.fn[c] == 0) continue;
    ++present;
    sp += eval_detail::ratio(counts.tp[c], counts.tp[c] + counts.fp[c]);
    sr += eval_detail::ratio(counts.tp[c], counts.tp[c] + counts.fn[c]);
    sf += eval_detail::ratio(2 * counts.tp[c], 2 * counts.tp[c] + counts.fp[c] + counts.fn[c]);
  }
  Prf m;
  if (present > 0) {
    m.precision = sp / present;
    m.recall = sr / present;
    m.f1 = sf / present;
  }
  return m;
}

struct Metrics {
  double micro_p = 0, micro_r = 0, micro_f1 = 0;
  double macro_p = 0, macro_r = 0, macro_f1 = 0;
  double accuracy = 0;
};

inline Metrics compute_metrics(const ConfusionCounts& counts) {
  const Prf micro = micro_metrics(counts);
  const Prf macro = macro_metrics(counts);
  long long tp = 0;
  for (int c = 0; c < counts.K; ++c) tp += counts.tp[c];
  Metrics m;
  m.micro_p = micro.precision;
  m.micro_r = micro.recall;
  m.micro_f1 = micro.f1;
  m.macro_p = macro.precision;
  m.macro_r = macro.recall;
  m.macro_f1 = macro.f1;
  m.accuracy = eval_detail::ratio(tp, counts.total);
  return m;
}

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;
};

// Two-sided paired t-test with the sample (k-1) standard deviation. A zero
// spread degenerates to t=0,p=1 when the mean difference is also zero and to
// t=±inf,p=0 otherwise. Antisymmetric in its arguments bit for bit.
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("paired_t_test: length mismatch");
  const int k = static_cast<int>(a.size());
  if (k < 2) throw ConfigError("paired_t_test: need at least 2 pairs");

  std::vector<double> d(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (const double v : d) mean += v;
  mean /= k;
  double ss = 0.0;
  for (const double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (k - 1));

  TTestResult res;
  res.df = k - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      res.t = 0.0;
      res.p = 1.0;
    } else {
      res.t = mean > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    }
    return res;
  }
  res.t = mean / (sd / std::sqrt(static_cast<double>(k)));
  res.p = student_t_two_tailed_p(res.t, res.df);
  return res;
}

inline double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (const double v : values) s += v;
  return s / static_cast<double>(values.size());
}

enum class ModelKind { svm, rvm };

inline const char* model_kind_name(ModelKind kind) {
  return kind == ModelKind::svm ? "svm" : "rvm";
}

inline ModelKind model_kind_from(const std::string& name) {
  if (name == "svm") return ModelKind::svm;
  if (name == "rvm") return ModelKind::rvm;
  throw ConfigError("unknown model kind: " + name + " (expected svm or rvm)");
}

struct CvResult {
  int k = 0;
  std::vector<Metrics> fold_metrics;
  std::vector<double> train_seconds;  // wall clock of the train call only
  ConfusionCounts pooled;
  std::vector<std::string> class_names;
};

// Stratified k-fold cross-validation of one model kind. Documents are
// tokenized once up front; the vocabulary and tf-idf weights are rebuilt from
// the training split of each fold so no test-set statistics leak in. The
// per-fold SVM shuffle seed is derived from (seed, fold); RVM training is
// deterministic by construction.
inline CvResult run_cv(const Corpus& corpus, ModelKind kind, const PipelineConfig& pcfg,
                       const SvmConfig& scfg, const RvmConfig& rcfg, int k, std::uint64_t seed) {
  if (corpus.n_classes() < 2) throw ConfigError("run_cv: corpus has fewer than 2 classes");
  const int n = corpus.n_docs();
  const int kc = corpus.n_classes();

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[i] = corpus.class_index_of(corpus.documents[i].label);

  const FoldAssignment folds = stratified_kfold(labels, k, seed);

  std::vector<std::vector<std::string>> tokens(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) tokens[i] = pipeline_tokens(corpus.documents[i].text, pcfg);

  CvResult result;
  result.k = k;
  result.class_names = corpus.classes;
  result.pooled = ConfusionCounts(kc);

  for (int fold = 0; fold < k; ++fold) {
    std::vector<int> train_idx, test_idx;
    for (int i = 0; i < n; ++i)
      (folds.fold_of[i] == fold ? test_idx : train_idx).push_back(i);
    if (train_idx.empty() || test_idx.empty())
      throw RuntimeError("run_cv: fold " + std::to_string(fold) + " has an empty split");

    std::vector<std::vector<std::string>> train_tokens;
    train_tokens.reserve(train_idx.size());
    for (const int i : train_idx) train_tokens.push_back(tokens[i]);
    const Vocabulary vocab = build_vocabulary(train_tokens, pcfg);

    std::vector<LabeledVector> train_data;
    train_data.reserve(train_idx.size());
    for (const int i : train_idx)
      train_data.push_back({vectorize(tokens[i], vocab), labels[i]});

    std::vector<int> preds;
    preds.reserve(test_idx.size());
    double seconds = 0.0;

    if (kind == ModelKind::svm) {
      SvmConfig fold_cfg = scfg;
      fold_cfg.shuffle_seed = mix_seed(seed, 1000 + static_cast<std::uint64_t>(fold));
      const auto t0 = std::chrono::steady_clock::now();
      const SvmModel model = train_svm(train_data, vocab.p(), corpus.classes, fold_cfg);
      const auto t1 = std::chrono::steady_clock::now();
      seconds = std::chrono::duration<double>(t1 - t0).count();
      for (const int i : test_idx)
        preds.push_back(predict(model, augment_bias(vectorize(tokens[i], vocab), vocab.p())));
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      const RvmModel model = train_rvm(train_data, corpus.classes, vocab.p(), rcfg);
      const auto t1 = std::chrono::steady_clock::now();
      seconds = std::chrono::duration<double>(t1 - t0).count();
      for (const int i : test_idx) preds.push_back(predict(model, vectorize(tokens[i], vocab)));
    }

    std::vector<int> truth;
    truth.reserve(test_idx.size());
    for (const int i : test_idx) truth.push_back(labels[i]);

    const ConfusionCounts counts = confusion(preds, truth, kc);
    result.fold_metrics.push_back(compute_metrics(counts));
    result.train_seconds.push_back(seconds);
    accumulate(result.pooled, counts);
  }
  return result;
}

struct DatasetSpecRow {
  std::string id;
  std::string source;  // reuters | ng20 | tsv
  std::string path;
  int n_docs = 0;
  int n_classes = 0;
  std::uint64_t seed = 0;
};

// Manifest format: one dataset per line,
//   <id> <source> <path> <n_docs> <n_classes> [seed]
// with '#' comments and blank lines ignored. Paths must not contain spaces;
// ids must not contain commas (they become CSV fields).
inline std::vector<DatasetSpecRow> parse_manifest(const std::string& text,
                                                  std::uint64_t default_seed) {
  std::vector<DatasetSpecRow> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first) || first[0] == '#') continue;

    DatasetSpecRow row;
    row.id = first;
    std::string n_docs_str, n_classes_str, seed_str;
    if (!(fields >> row.source >> row.path >> n_docs_str >> n_classes_str))
      throw ConfigError("manifest line " + std::to_string(lineno) +
                        ": expected <id> <source> <path> <n_docs> <n_classes> [seed]");
    const bool has_seed = static_cast<bool>(fields >> seed_str);
    std::string extra;
    if (fields >> extra)
      throw ConfigError("manifest line " + std::to_string(lineno) + ": trailing field '" +
                        extra + "'");
    if (row.id.find(',') != std::string::npos)
      throw ConfigError("manifest line " + std::to_string(lineno) +
                        ": dataset id must not contain a comma");
    if (row.source != "reuters" && row.source != "ng20" && row.source != "tsv")
      throw ConfigError("manifest line " + std::to_string(lineno) + ": unknown source '" +
                        row.source + "' (expected reuters, ng20, or tsv)");
    try {
      std::size_t used = 0;
      row.n_docs = std::stoi(n_docs_str, &used);
      if (used != n_docs_str.size()) throw std::invalid_argument(n_docs_str);
      row.n_classes = std::stoi(n_classes_str, &used);
      if (used != n_classes_str.size()) throw std::invalid_argument(n_classes_str);
      if (has_seed) {
        row.seed = std::stoull(seed_str, &used);
        if (used != seed_str.size()) throw std::invalid_argument(seed_str);
      } else {
        row.seed = default_seed;
      }
    } catch (const std::exception&) {
      throw ConfigError("manifest line " + std::to_string(lineno) + ": malformed number");
    }
    if (row.n_docs < 1 || row.n_classes < 1)
      throw ConfigError("manifest line " + std::to_string(lineno) +
                        ": n_docs and n_classes must be positive");
    rows.push_back(std::move(row));
  }
  return rows;
}

struct BenchmarkRow {
  std::string dataset;
  bool failed = false;
  std::string error;
  std::vector<Metrics> svm_folds, rvm_folds;
  std::vector<double> svm_seconds, rvm_seconds;
  double svm_micro = 0, svm_macro = 0, rvm_micro = 0, rvm_macro = 0;  // fold means
  double svm_total_seconds = 0, rvm_total_seconds = 0;
  TTestResult ttest;  // rvm vs svm on per-fold micro-F1
};

struct BenchmarkReport {
  int k = 0;
  std::vector<BenchmarkRow> rows;
};

inline Corpus load_for_source(const std::string& source, const std::string& path) {
  if (source == "reuters") return load_reuters21578(path);
  if (source == "ng20") return load_20newsgroups(path);
  if (source == "tsv") return load_tsv(path);
  throw ConfigError("unknown source: " + source);
}

// Runs both models over every manifest row. A failure in one dataset marks
// that row failed and the remaining rows still run. The t-test pairs per-fold
// micro-F1 with rvm first, so positive t favors the rvm.
inline BenchmarkReport run_benchmark(const std::vector<DatasetSpecRow>& specs,
                                     const PipelineConfig& pcfg, const SvmConfig& scfg,
                                     const RvmConfig& rcfg, int k) {
  BenchmarkReport report;
  report.k = k;
  for (const DatasetSpecRow& spec : specs) {
    BenchmarkRow row;
    row.dataset = spec.id;
    try {
      Corpus corpus = load_for_source(spec.source, spec.path);
      corpus = sample_subset(corpus, SubsetSpec{spec.n_docs, spec.n_classes, spec.seed});
      const CvResult svm_cv = run_cv(corpus, ModelKind::svm, pcfg, scfg, rcfg, k, spec.seed);
      const CvResult rvm_cv = run_cv(corpus, ModelKind::rvm, pcfg, scfg, rcfg, k, spec.seed);

      row.svm_folds = svm_cv.fold_metrics;
      row.rvm_folds = rvm_cv.fold_metrics;
      row.svm_seconds = svm_cv.train_seconds;
      row.rvm_seconds = rvm_cv.train_seconds;

      std::vector<double> svm_micro, rvm_micro, svm_macro, rvm_macro;
      for (const Metrics& m : svm_cv.fold_metrics) {
        svm_micro.push_back(m.micro_f1);
        svm_macro.push_back(m.macro_f1);
      }
      for (const Metrics& m : rvm_cv.fold_metrics) {
        rvm_micro.push_back(m.micro_f1);
        rvm_macro.push_back(m.macro_f1);
      }
      row.svm_micro = mean_of(svm_micro);
      row.svm_macro = mean_of(svm_macro);
      row.rvm_micro = mean_of(rvm_micro);
      row.rvm_macro = mean_of(rvm_macro);
      for (const double s : svm_cv.train_seconds) row.svm_total_seconds += s;
      for (const double s : rvm_cv.train_seconds) row.rvm_total_seconds += s;
      row.ttest = paired_t_test(rvm_micro, svm_micro);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace eval_detail {

inline std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

inline std::string shortest(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace eval_detail

// Plain-text summary table. F1 cells are percentages with two decimals
// (0.8020 renders as 80.20); time cells are seconds with one decimal.
inline std::string render_benchmark_table(const BenchmarkReport& report) {
  using eval_detail::fixed;
  using eval_detail::pad;

  static const char* headers[] = {"dataset", "svm-micro", "svm-macro", "rvm-micro",
                                  "rvm-macro", "svm-s",     "rvm-s",     "t",
                                  "df",      "p",         "sig"};
  constexpr int n_cols = 11;

  std::vector<std::vector<std::string>> grid;
  grid.emplace_back(headers, headers + n_cols);
  for (const BenchmarkRow& row : report.rows) {
    if (row.failed) {
      grid.push_back({row.dataset, "FAILED: " + row.error});
      continue;
    }
    char pbuf[64];
    std::snprintf(pbuf, sizeof(pbuf), "%.4g", row.ttest.p);
    char tbuf[64];
    std::snprintf(tbuf, sizeof(tbuf), "%.4f", row.ttest.t);
    grid.push_back({row.dataset, fixed(100.0 * row.svm_micro, 2), fixed(100.0 * row.svm_macro, 2),
                    fixed(100.0 * row.rvm_micro, 2), fixed(100.0 * row.rvm_macro, 2),
                    fixed(row.svm_total_seconds, 1), fixed(row.rvm_total_seconds, 1), tbuf,
                    std::to_string(row.ttest.df), pbuf, row.ttest.p < 0.05 ? "*" : ""});
  }

  std::vector<std::size_t> widths(n_cols, 0);
  for (const auto& r : grid)
    for (std::size_t c = 0; c < r.size() && c < n_cols; ++c)
      widths[c] = std::max(widths[c], r[c].size());

  std::string out;
  for (const auto& r : grid) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += "  ";
      out += (c + 1 < r.size() && c < n_cols) ? pad(r[c], widths[c]) : r[c];
    }
    out += '\n';
  }
  return out;
}

// Machine-readable per-fold results. One row per (dataset, model, fold) with
// full-precision values, then a comment stanza per dataset with the paired
// t-test so the table can be recomputed from the file alone.
inline std::string render_benchmark_csv(const BenchmarkReport& report) {
  using eval_detail::shortest;
  std::string out = "dataset,model,fold,micro_f1,macro_f1,train_seconds\n";
  for (const BenchmarkRow& row : report.rows) {
    if (row.failed) {
      std::string msg = row.error;
      for (char& ch : msg)
        if (ch == '\n' || ch == '\r' || ch == ',') ch = ' ';
      out += "# dataset=" + row.dataset + " FAILED " + msg + "\n";
      continue;
    }
    for (std::size_t f = 0; f < row.svm_folds.size(); ++f)
      out += row.dataset + ",svm," + std::to_string(f) + "," + shortest(row.svm_folds[f].micro_f1) +
             "," + shortest(row.svm_folds[f].macro_f1) + "," + shortest(row.svm_seconds[f]) + "\n";
    for (std::size_t f = 0; f < row.rvm_folds.size(); ++f)
      out += row.dataset + ",rvm," + std::to_string(f) + "," + shortest(row.rvm_folds[f].micro_f1) +
             "," + shortest(row.rvm_folds[f].macro_f1) + "," + shortest(row.rvm_seconds[f]) + "\n";
    out += "# dataset=" + row.dataset + " t=" + shortest(row.ttest.t) +
           " df=" + std::to_string(row.ttest.df) + " p=" + shortest(row.ttest.p) + "\n";
  }
  return out;
}

struct CsvRow {
  std::string dataset;
  std::string model;
  int fold = 0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double train_seconds = 0.0;
};

// Reads rows written by render_benchmark_csv; comment lines are skipped and
// the header line is required.
inline std::vector<CsvRow> parse_benchmark_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != "dataset,model,fold,micro_f1,macro_f1,train_seconds")
        throw RuntimeError("csv line " + std::to_string(lineno) + ": unrecognized header");
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 6)
      throw RuntimeError("csv line " + std::to_string(lineno) + ": expected 6 fields, got " +
                         std::to_string(fields.size()));
    CsvRow row;
    row.dataset = fields[0];
    row.model = fields[1];
    if (row.model != "svm" && row.model != "rvm")
      throw RuntimeError("csv line " + std::to_string(lineno) + ": unknown model '" + row.model +
                         "'");
    try {
      std::size_t used = 0;
      row.fold = std::stoi(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument(fields[2]);
      row.micro_f1 = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument(fields[3]);
      row.macro_f1 = std::stod(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument(fields[4]);
      row.train_seconds = std::stod(fields[5], &used);
      if (used != fields[5].size()) throw std::invalid_argument(fields[5]);
    } catch (const std::exception&) {
      throw RuntimeError("csv line " + std::to_string(lineno) + ": malformed number");
    }
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw RuntimeError("csv: missing header line");
  return rows;
}

}  // namespace tcb
