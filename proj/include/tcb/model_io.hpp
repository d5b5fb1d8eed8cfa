#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcb/corpus.hpp"
#include "tcb/errors.hpp"
#include "tcb/eval.hpp"
#include "tcb/preprocess.hpp"
#include "tcb/rvm.hpp"
#include "tcb/sparse_vector.hpp"
#include "tcb/svm.hpp"

namespace tcb {

namespace io_detail {

// 17 significant digits: enough for every IEEE double to round-trip exactly.
inline std::string g17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw RuntimeError(where + ": malformed number '" + s + "'");
  }
}

inline long long parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw RuntimeError(where + ": malformed integer '" + s + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw RuntimeError(where + ": malformed integer '" + s + "'");
  }
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// index:weight pair as written in vectors files and rvm relevance lines.
inline Entry parse_entry(const std::string& tok, const std::string& where) {
  const std::size_t colon = tok.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size())
    throw RuntimeError(where + ": expected index:weight, got '" + tok + "'");
  Entry e;
  e.index = static_cast<int>(parse_int(tok.substr(0, colon), where));
  e.weight = parse_double(tok.substr(colon + 1), where);
  return e;
}

// Line reader that tolerates CRLF and tracks 1-based line numbers.
struct LineReader {
  std::istringstream in;
  int lineno = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
};

}  // namespace io_detail

// Writes content to <path>.tmp then renames, so a failed run never leaves a
// partial file at the destination.
inline void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw ConfigError("failed while writing file: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ConfigError("cannot move temporary file into place: " + path);
  }
}

// In-memory form of a vectors file: the preprocessed, labeled corpus.
struct VectorsData {
  int p = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;
  std::vector<LabeledVector> docs;

  int k() const { return static_cast<int>(class_names.size()); }
  int n() const { return static_cast<int>(docs.size()); }
};

// Format: `p=<int> k=<int> n=<int>` header, `# seed=<u64>` comment, one line
// per document `<class_index> <index>:<weight> ...` (17 significant digits,
// all-zero documents carry no pairs), then a `#classes` sentinel followed by
// one class name per line.
inline std::string render_vectors(const VectorsData& data) {
  std::string out = "p=" + std::to_string(data.p) + " k=" + std::to_string(data.k()) +
                    " n=" + std::to_string(data.n()) + "\n";
  out += "# seed=" + std::to_string(data.seed) + "\n";
  for (const LabeledVector& d : data.docs) {
    out += std::to_string(d.class_index);
    for (const Entry& e : d.vector.entries)
      out += " " + std::to_string(e.index) + ":" + io_detail::g17(e.weight);
    out += "\n";
  }
  out += "#classes\n";
  for (const std::string& name : data.class_names) out += name + "\n";
  return out;
}

inline VectorsData parse_vectors(const std::string& text) {
  io_detail::LineReader reader(text);
  std::string line;
  if (!reader.next(line)) throw RuntimeError("vectors file: empty");

  VectorsData data;
  int k = 0, n = 0;
  {
    const auto fields = io_detail::split_ws(line);
    const std::string where = "vectors file line 1";
    if (fields.size() != 3 || fields[0].rfind("p=", 0) != 0 || fields[1].rfind("k=", 0) != 0 ||
        fields[2].rfind("n=", 0) != 0)
      throw RuntimeError(where + ": expected header 'p=<int> k=<int> n=<int>'");
    data.p = static_cast<int>(io_detail::parse_int(fields[0].substr(2), where));
    k = static_cast<int>(io_detail::parse_int(fields[1].substr(2), where));
    n = static_cast<int>(io_detail::parse_int(fields[2].substr(2), where));
    if (data.p < 0 || k < 1 || n < 0) throw RuntimeError(where + ": negative dimension");
  }

  bool in_classes = false;
  while (reader.next(line)) {
    const std::string where = "vectors file line " + std::to_string(reader.lineno);
    if (!in_classes && line == "#classes") {
      in_classes = true;
      continue;
    }
    if (!in_classes && !line.empty() && line[0] == '#') {
      if (line.rfind("# seed=", 0) == 0) data.seed = io_detail::parse_u64(line.substr(7), where);
      continue;
    }
    if (line.empty()) continue;

    if (in_classes) {
      data.class_names.push_back(line);
      continue;
    }

    const auto fields = io_detail::split_ws(line);
    LabeledVector doc;
    doc.class_index = static_cast<int>(io_detail::parse_int(fields[0], where));
    if (doc.class_index < 0 || doc.class_index >= k)
      throw RuntimeError(where + ": class index " + std::to_string(doc.class_index) +
                         " out of range [0," + std::to_string(k) + ")");
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const Entry e = io_detail::parse_entry(fields[i], where);
      if (e.index < 0 || e.index >= data.p)
        throw RuntimeError(where + ": feature index " + std::to_string(e.index) +
                           " out of range [0," + std::to_string(data.p) + ")");
      doc.vector.entries.push_back(e);
    }
    try {
      validate(doc.vector);
    } catch (const RuntimeError& e) {
      throw RuntimeError(where + ": " + e.what());
    }
    data.docs.push_back(std::move(doc));
  }

  if (static_cast<int>(data.docs.size()) != n)
    throw RuntimeError("vectors file: header declares n=" + std::to_string(n) + " but " +
                       std::to_string(data.docs.size()) + " document lines found");
  if (static_cast<int>(data.class_names.size()) != k)
    throw RuntimeError("vectors file: header declares k=" + std::to_string(k) + " but " +
                       std::to_string(data.class_names.size()) + " class names found");
  return data;
}

inline void write_vectors_file(const std::string& path, const VectorsData& data) {
  atomic_write_file(path, render_vectors(data));
}

inline VectorsData load_vectors_file(const std::string& path) {
  return parse_vectors(detail::read_file_bytes(path));
}

// Vocabulary file plus the pipeline settings needed to reproduce its
// tokenization at prediction time.
struct VocabData {
  Vocabulary vocab;
  PipelineConfig pipeline;
  std::uint64_t seed = 0;
};

// Format: `tcb-vocab v1` magic, one `# p=.. n=.. min_df=.. stem=.. stop=..
// seed=..` config comment, then `term<TAB>index<TAB>df` per line.
inline std::string render_vocab(const VocabData& data) {
  std::string out = "tcb-vocab v1\n";
  out += "# p=" + std::to_string(data.vocab.p()) + " n=" + std::to_string(data.vocab.n_train_docs) +
         " min_df=" + std::to_string(data.pipeline.min_df) +
         " stem=" + std::string(data.pipeline.stem ? "1" : "0") +
         " stop=" + data.pipeline.stopword_list + " seed=" + std::to_string(data.seed) + "\n";
  for (int i = 0; i < data.vocab.p(); ++i)
    out += data.vocab.terms[i] + "\t" + std::to_string(i) + "\t" +
           std::to_string(data.vocab.doc_freq[i]) + "\n";
  return out;
}

inline VocabData parse_vocab(const std::string& text) {
  io_detail::LineReader reader(text);
  std::string line;
  if (!reader.next(line) || line != "tcb-vocab v1")
    throw RuntimeError("vocabulary file: missing 'tcb-vocab v1' header");

  VocabData data;
  int p = -1;
  bool saw_config = false;
  std::vector<std::pair<std::string, std::pair<int, int>>> rows;  // term -> (index, df)

  while (reader.next(line)) {
    const std::string where = "vocabulary file line " + std::to_string(reader.lineno);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream in(line.substr(1));
      std::string kv;
      while (in >> kv) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "p")
          p = static_cast<int>(io_detail::parse_int(val, where));
        else if (key == "n")
          data.vocab.n_train_docs = static_cast<int>(io_detail::parse_int(val, where));
        else if (key == "min_df")
          data.pipeline.min_df = static_cast<int>(io_detail::parse_int(val, where));
        else if (key == "stem")
          data.pipeline.stem = io_detail::parse_int(val, where) != 0;
        else if (key == "stop")
          data.pipeline.stopword_list = val;
        else if (key == "seed")
          data.seed = io_detail::parse_u64(val, where);
      }
      saw_config = true;
      continue;
    }
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos)
      throw RuntimeError(where + ": expected term<TAB>index<TAB>df");
    const std::string term = line.substr(0, tab1);
    const int index = static_cast<int>(
        io_detail::parse_int(line.substr(tab1 + 1, tab2 - tab1 - 1), where));
    const int df = static_cast<int>(io_detail::parse_int(line.substr(tab2 + 1), where));
    if (term.empty() || index < 0 || df < 1) throw RuntimeError(where + ": invalid row");
    rows.push_back({term, {index, df}});
  }

  if (!saw_config) throw RuntimeError("vocabulary file: missing config comment line");
  if (p < 0 || static_cast<int>(rows.size()) != p)
    throw RuntimeError("vocabulary file: header declares p=" + std::to_string(p) + " but " +
                       std::to_string(rows.size()) + " term rows found");

  data.vocab.terms.assign(static_cast<std::size_t>(p), "");
  data.vocab.doc_freq.assign(static_cast<std::size_t>(p), 0);
  for (const auto& row : rows) {
    const int index = row.second.first;
    if (index >= p || !data.vocab.terms[static_cast<std::size_t>(index)].empty())
      throw RuntimeError("vocabulary file: index " + std::to_string(index) +
                         " out of range or duplicated");
    data.vocab.terms[static_cast<std::size_t>(index)] = row.first;
    data.vocab.doc_freq[static_cast<std::size_t>(index)] = row.second.second;
    data.vocab.index_of[row.first] = index;
  }
  if (static_cast<int>(data.vocab.index_of.size()) != p)
    throw RuntimeError("vocabulary file: duplicate terms");
  if (data.vocab.n_train_docs < 1)
    throw RuntimeError("vocabulary file: missing or invalid n");
  return data;
}

inline void write_vocab_file(const std::string& path, const VocabData& data) {
  atomic_write_file(path, render_vocab(data));
}

inline VocabData load_vocab_file(const std::string& path) {
  return parse_vocab(detail::read_file_bytes(path));
}

// A persisted model of either kind; `kind` selects which member is live.
struct LoadedModel {
  ModelKind kind = ModelKind::svm;
  SvmModel svm;
  RvmModel rvm;
  std::uint64_t seed = 0;
};

// Shared layout: `tcb-model v1 <svm|rvm>` magic, `# seed=<u64>`,
// `K=<int> p=<int>`, `#classes` + names. The svm body is a `#weights`
// sentinel and one dense row of p+1 values per class. The rvm body is one
// `#machine <c>` block per class holding `n_basis=<m>` and one line per
// basis: `bias <mu> <alpha>` or `rv <mu> <alpha> <index>:<w> ...`.
inline std::string render_model_svm(const SvmModel& model, std::uint64_t seed) {
  std::string out = "tcb-model v1 svm\n";
  out += "# seed=" + std::to_string(seed) + "\n";
  out += "K=" + std::to_string(model.K) + " p=" + std::to_string(model.p) + "\n";
  out += "#classes\n";
  for (const std::string& name : model.class_names) out += name + "\n";
  out += "#weights\n";
  for (const auto& row : model.W) {
    std::string line;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) line += " ";
      line += io_detail::g17(row[j]);
    }
    out += line + "\n";
  }
  return out;
}

inline std::string render_model_rvm(const RvmModel& model, std::uint64_t seed) {
  std::string out = "tcb-model v1 rvm\n";
  out += "# seed=" + std::to_string(seed) + "\n";
  out += "K=" + std::to_string(model.machines.size()) + " p=" + std::to_string(model.p) + "\n";
  out += "#classes\n";
  for (const std::string& name : model.class_names) out += name + "\n";
  for (std::size_t c = 0; c < model.machines.size(); ++c) {
    const RvmBinaryModel& m = model.machines[c];
    out += "#machine " + std::to_string(c) + "\n";
    out += "n_basis=" + std::to_string(m.active.size()) + "\n";
    std::size_t r = 0;
    for (std::size_t a = 0; a < m.active.size(); ++a) {
      if (m.active[a] == 0) {
        out += "bias " + io_detail::g17(m.weights_mu[a]) + " " + io_detail::g17(m.alphas[a]) + "\n";
      } else {
        std::string line = "rv " + io_detail::g17(m.weights_mu[a]) + " " +
                           io_detail::g17(m.alphas[a]);
        for (const Entry& e : m.relevance_vectors[r++].entries)
          line += " " + std::to_string(e.index) + ":" + io_detail::g17(e.weight);
        out += line + "\n";
      }
    }
  }
  return out;
}

inline LoadedModel parse_model(const std::string& text) {
  io_detail::LineReader reader(text);
  std::string line;
  if (!reader.next(line)) throw RuntimeError("model file: empty");
  bool is_svm = false;
  {
    const auto fields = io_detail::split_ws(line);
    if (fields.size() != 3 || fields[0] != "tcb-model" || fields[1] != "v1")
      throw RuntimeError("model file: missing 'tcb-model v1 <kind>' header");
    if (fields[2] != "svm" && fields[2] != "rvm")
      throw RuntimeError("model file: unknown kind '" + fields[2] + "'");
    is_svm = fields[2] == "svm";
  }

  LoadedModel model;
  model.kind = is_svm ? ModelKind::svm : ModelKind::rvm;

  int K = -1, p = -1;
  std::vector<std::string> class_names;

  // header comments + dimensions + class table
  while (reader.next(line)) {
    const std::string where = "model file line " + std::to_string(reader.lineno);
    if (line.empty()) continue;
    if (line == "#classes") break;
    if (line[0] == '#') {
      if (line.rfind("# seed=", 0) == 0) model.seed = io_detail::parse_u64(line.substr(7), where);
      continue;
    }
    const auto fields = io_detail::split_ws(line);
    if (fields.size() == 2 && fields[0].rfind("K=", 0) == 0 && fields[1].rfind("p=", 0) == 0) {
      K = static_cast<int>(io_detail::parse_int(fields[0].substr(2), where));
      p = static_cast<int>(io_detail::parse_int(fields[1].substr(2), where));
      continue;
    }
    throw RuntimeError(where + ": unexpected content before #classes");
  }
  if (K < 1 || p < 0) throw RuntimeError("model file: missing 'K=<int> p=<int>' line");

  while (static_cast<int>(class_names.size()) < K && reader.next(line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    class_names.push_back(line);
  }
  if (static_cast<int>(class_names.size()) != K)
    throw RuntimeError("model file: expected " + std::to_string(K) + " class names");

  if (is_svm) {
    model.svm.K = K;
    model.svm.p = p;
    model.svm.class_names = class_names;
    if (!reader.next(line) || line != "#weights")
      throw RuntimeError("model file: missing #weights sentinel");
    for (int c = 0; c < K; ++c) {
      if (!reader.next(line))
        throw RuntimeError("model file: expected " + std::to_string(K) + " weight rows");
      const std::string where = "model file line " + std::to_string(reader.lineno);
      const auto fields = io_detail::split_ws(line);
      if (static_cast<int>(fields.size()) != p + 1)
        throw RuntimeError(where + ": expected " + std::to_string(p + 1) + " weights, got " +
                           std::to_string(fields.size()));
      std::vector<double> row(fields.size());
      for (std::size_t j = 0; j < fields.size(); ++j)
        row[j] = io_detail::parse_double(fields[j], where);
      model.svm.W.push_back(std::move(row));
    }
    return model;
  }

  model.rvm.p = p;
  model.rvm.class_names = class_names;
  for (int c = 0; c < K; ++c) {
    if (!reader.next(line) || line != "#machine " + std::to_string(c))
      throw RuntimeError("model file: expected '#machine " + std::to_string(c) + "'");
    if (!reader.next(line) || line.rfind("n_basis=", 0) != 0)
      throw RuntimeError("model file: expected n_basis= after #machine");
    const int m = static_cast<int>(
        io_detail::parse_int(line.substr(8), "model file line " + std::to_string(reader.lineno)));
    if (m < 0) throw RuntimeError("model file: negative n_basis");
    RvmBinaryModel machine;
    int next_id = 1;
    for (int b = 0; b < m; ++b) {
      if (!reader.next(line)) throw RuntimeError("model file: truncated machine block");
      const std::string where = "model file line " + std::to_string(reader.lineno);
      const auto fields = io_detail::split_ws(line);
      if (fields.size() < 3 || (fields[0] != "bias" && fields[0] != "rv"))
        throw RuntimeError(where + ": expected 'bias <mu> <alpha>' or 'rv <mu> <alpha> ...'");
      machine.weights_mu.push_back(io_detail::parse_double(fields[1], where));
      machine.alphas.push_back(io_detail::parse_double(fields[2], where));
      if (fields[0] == "bias") {
        if (fields.size() != 3) throw RuntimeError(where + ": bias line carries no entries");
        machine.active.push_back(0);
      } else {
        machine.active.push_back(next_id++);
        SparseVector rv;
        for (std::size_t i = 3; i < fields.size(); ++i) {
          const Entry e = io_detail::parse_entry(fields[i], where);
          if (e.index < 0 || e.index >= p)
            throw RuntimeError(where + ": feature index " + std::to_string(e.index) +
                               " out of range [0," + std::to_string(p) + ")");
          rv.entries.push_back(e);
        }
        try {
          validate(rv);
        } catch (const RuntimeError& e) {
          throw RuntimeError(where + ": " + e.what());
        }
        machine.relevance_vectors.push_back(std::move(rv));
      }
    }
    model.rvm.machines.push_back(std::move(machine));
  }
  return model;
}

inline void write_model_file(const std::string& path, const SvmModel& model, std::uint64_t seed) {
  atomic_write_file(path, render_model_svm(model, seed));
}

inline void write_model_file(const std::string& path, const RvmModel& model, std::uint64_t seed) {
  atomic_write_file(path, render_model_rvm(model, seed));
}

inline LoadedModel load_model_file(const std::string& path) {
  return parse_model(detail::read_file_bytes(path));
}

}  // namespace tcb
