#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tcb/errors.hpp"
#include "tcb/random.hpp"

namespace tcb {

struct RawDocument {
  std::string id;     // non-empty, unique within a Corpus
  std::string text;
  std::string label;  // non-empty, member of the owning Corpus class set
};

// Immutable after construction: documents sorted lexicographically by id,
// classes sorted distinct labels.
struct Corpus {
  std::vector<RawDocument> documents;
  std::vector<std::string> classes;

  int n_docs() const { return static_cast<int>(documents.size()); }
  int n_classes() const { return static_cast<int>(classes.size()); }

  int class_index_of(const std::string& label) const {
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label)
      throw RuntimeError("label not in corpus class set: " + label);
    return static_cast<int>(it - classes.begin());
  }
};

struct SubsetSpec {
  int n_docs;
  int n_classes;
  std::uint64_t seed;
};

namespace detail {

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Sorts by id, derives the class list, and checks the Corpus invariants.
inline Corpus finalize_corpus(std::vector<RawDocument> docs) {
  for (const RawDocument& d : docs) {
    if (d.id.empty()) throw RuntimeError("document with empty id");
    if (d.label.empty()) throw RuntimeError("document with empty label: id " + d.id);
  }
  std::sort(docs.begin(), docs.end(),
            [](const RawDocument& a, const RawDocument& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < docs.size(); ++i)
    if (docs[i].id == docs[i - 1].id) throw RuntimeError("duplicate document id: " + docs[i].id);

  Corpus corpus;
  corpus.classes.reserve(docs.size());
  for (const RawDocument& d : docs) corpus.classes.push_back(d.label);
  std::sort(corpus.classes.begin(), corpus.classes.end());
  corpus.classes.erase(std::unique(corpus.classes.begin(), corpus.classes.end()),
                       corpus.classes.end());
  corpus.documents = std::move(docs);
  return corpus;
}

// Decodes &lt; &gt; &amp; and decimal &#N; references; anything else is left
// verbatim (the tokenizer treats it as a boundary anyway). The distribution's
// &#3; end-of-text marks decode to control bytes and are tolerated downstream.
inline std::string decode_sgml_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 8) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "lt") {
      out.push_back('<');
    } else if (name == "gt") {
      out.push_back('>');
    } else if (name == "amp") {
      out.push_back('&');
    } else if (!name.empty() && name[0] == '#') {
      int code = 0;
      bool ok = name.size() > 1;
      for (std::size_t k = 1; k < name.size(); ++k) {
        if (name[k] < '0' || name[k] > '9') {
          ok = false;
          break;
        }
        code = code * 10 + (name[k] - '0');
      }
      if (!ok || code > 255) {
        out.append(s.substr(i, semi - i + 1));
      } else {
        out.push_back(static_cast<char>(code));
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
      i = semi + 1;
      continue;
    }
    i = semi + 1;
  }
  return out;
}

// Content of the first <tag>...</tag> region inside element, or empty.
inline std::string_view element_content(std::string_view element, std::string_view open,
                                        std::string_view close) {
  const std::size_t start = element.find(open);
  if (start == std::string_view::npos) return {};
  const std::size_t body = start + open.size();
  const std::size_t end = element.find(close, body);
  if (end == std::string_view::npos) return {};
  return element.substr(body, end - body);
}

}  // namespace detail

struct ReutersStats {
  int elements = 0;  // REUTERS elements parsed
  int retained = 0;  // exactly one topic
  int skipped = 0;   // zero or multiple topics
};

// Loads Reuters-21578 SGML from a single data file or a directory of .sgm
// files. Only documents with exactly one topic are kept; label is that topic
// and text is TITLE concatenated with BODY. retained + skipped = elements.
inline Corpus load_reuters21578(const std::filesystem::path& path, ReutersStats* stats = nullptr) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".sgm")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no .sgm files in directory: " + path.string());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw ConfigError("unreadable path: " + path.string());
  }

  ReutersStats local;
  std::vector<RawDocument> docs;
  for (const fs::path& file : files) {
    const std::string bytes = detail::read_file_bytes(file);
    const std::string_view sv = bytes;
    std::size_t pos = 0;
    int ordinal = 0;
    for (;;) {
      const std::size_t open = sv.find("<REUTERS", pos);
      if (open == std::string_view::npos) break;
      const std::size_t open_end = sv.find('>', open);
      const std::size_t close = sv.find("</REUTERS>", open);
      if (open_end == std::string_view::npos || close == std::string_view::npos ||
          close < open_end)
        throw RuntimeError("malformed SGML: unterminated REUTERS element at byte offset " +
                           std::to_string(open) + " in " + file.string());
      ++local.elements;
      ++ordinal;

      const std::string_view attrs = sv.substr(open, open_end - open);
      std::string id;
      const std::size_t newid = attrs.find("NEWID=\"");
      if (newid != std::string_view::npos) {
        const std::size_t vstart = newid + 7;
        const std::size_t vend = attrs.find('"', vstart);
        if (vend != std::string_view::npos) id = std::string(attrs.substr(vstart, vend - vstart));
      }
      if (id.empty()) id = file.filename().string() + "#" + std::to_string(ordinal);

      const std::string_view element = sv.substr(open_end + 1, close - open_end - 1);
      const std::string_view topics = detail::element_content(element, "<TOPICS>", "</TOPICS>");
      std::vector<std::string> topic_list;
      std::size_t tpos = 0;
      for (;;) {
        const std::size_t d = topics.find("<D>", tpos);
        if (d == std::string_view::npos) break;
        const std::size_t dend = topics.find("</D>", d);
        if (dend == std::string_view::npos) break;
        topic_list.push_back(detail::decode_sgml_entities(topics.substr(d + 3, dend - d - 3)));
        tpos = dend + 4;
      }

      if (topic_list.size() == 1) {
        const std::string_view title = detail::element_content(element, "<TITLE>", "</TITLE>");
        const std::string_view body = detail::element_content(element, "<BODY>", "</BODY>");
        RawDocument doc;
        doc.id = std::move(id);
        doc.label = topic_list[0];
        doc.text = detail::decode_sgml_entities(title);
        if (!title.empty() && !body.empty()) doc.text += '\n';
        doc.text += detail::decode_sgml_entities(body);
        docs.push_back(std::move(doc));
        ++local.retained;
      } else {
        ++local.skipped;
      }
      pos = close + 10;
    }
  }
  if (stats) *stats = local;
  return detail::finalize_corpus(std::move(docs));
}

// Loads a directory-per-class, file-per-document tree. Header lines up to the
// first blank line are dropped (they would leak the class). A class directory
// with no files is dropped with a warning.
inline Corpus load_20newsgroups(const std::filesystem::path& path,
                                std::vector<std::string>* warnings = nullptr) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(path)) throw ConfigError("not a directory: " + path.string());

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(path))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());

  std::vector<RawDocument> docs;
  for (const fs::path& dir : class_dirs) {
    const std::string cls = dir.filename().string();
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      if (warnings) warnings->push_back("class directory has no documents, dropped: " + cls);
      continue;
    }
    for (const fs::path& file : files) {
      const std::string bytes = detail::read_file_bytes(file);
      // Body starts after the first blank line; a file without one is all
      // headers and yields an empty body.
      std::size_t body_start = bytes.size();
      std::size_t line_start = 0;
      while (line_start <= bytes.size()) {
        std::size_t eol = bytes.find('\n', line_start);
        const std::size_t line_end = (eol == std::string::npos) ? bytes.size() : eol;
        std::string_view line(bytes.data() + line_start, line_end - line_start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
          body_start = (eol == std::string::npos) ? bytes.size() : eol + 1;
          break;
        }
        if (eol == std::string::npos) break;
        line_start = eol + 1;
      }
      docs.push_back({cls + "/" + file.filename().string(), bytes.substr(body_start), cls});
    }
  }
  return detail::finalize_corpus(std::move(docs));
}

// One record per line: id TAB label TAB text. Blank lines are skipped; extra
// tabs belong to the text field.
inline Corpus load_tsv(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  std::vector<RawDocument> docs;
  std::size_t line_start = 0;
  int line_no = 0;
  while (line_start < bytes.size()) {
    std::size_t eol = bytes.find('\n', line_start);
    if (eol == std::string::npos) eol = bytes.size();
    ++line_no;
    std::string_view line(bytes.data() + line_start, eol - line_start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line_start = eol + 1;
    if (line.empty()) continue;

    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = (tab1 == std::string_view::npos) ? std::string_view::npos
                                                              : line.find('\t', tab1 + 1);
    if (tab1 == std::string_view::npos || tab2 == std::string_view::npos)
      throw RuntimeError("line " + std::to_string(line_no) +
                         ": expected 3 tab-separated fields (id, label, text)");
    RawDocument doc;
    doc.id = std::string(line.substr(0, tab1));
    doc.label = std::string(line.substr(tab1 + 1, tab2 - tab1 - 1));
    doc.text = std::string(line.substr(tab2 + 1));
    if (doc.id.empty() || doc.label.empty())
      throw RuntimeError("line " + std::to_string(line_no) + ": empty id or label");
    docs.push_back(std::move(doc));
  }
  return detail::finalize_corpus(std::move(docs));
}

// Deterministic subset: the n_classes most populous classes (ties
// lexicographic), floor(n_docs / n_classes) documents per class with the
// remainder going to the largest classes, sampled per class by a seeded
// shuffle. Same corpus and parameters give an identical document list.
inline Corpus sample_subset(const Corpus& corpus, const SubsetSpec& spec) {
  if (spec.n_classes < 1) throw ConfigError("sample_subset: n_classes must be positive");
  if (spec.n_docs < spec.n_classes)
    throw ConfigError("sample_subset: n_docs must be >= n_classes");
  if (spec.n_classes > corpus.n_classes())
    throw ConfigError("sample_subset: requested " + std::to_string(spec.n_classes) +
                      " classes, corpus has " + std::to_string(corpus.n_classes()));

  std::unordered_map<std::string, std::vector<int>> by_class;
  for (int i = 0; i < corpus.n_docs(); ++i)
    by_class[corpus.documents[i].label].push_back(i);

  // Most documents first, name as tie-break; the first n_classes win.
  std::vector<std::string> ranked = corpus.classes;
  std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
    const std::size_t ca = by_class[a].size(), cb = by_class[b].size();
    if (ca != cb) return ca > cb;
    return a < b;
  });
  ranked.resize(spec.n_classes);

  const int base = spec.n_docs / spec.n_classes;
  const int remainder = spec.n_docs % spec.n_classes;
  std::vector<int> quota(spec.n_classes, base);
  for (int i = 0; i < remainder; ++i) ++quota[i];  // ranked order: largest classes first

  std::string deficient;
  for (int c = 0; c < spec.n_classes; ++c)
    if (static_cast<int>(by_class[ranked[c]].size()) < quota[c])
      deficient += (deficient.empty() ? "" : ", ") + ranked[c] + " (" +
                   std::to_string(by_class[ranked[c]].size()) + " < " +
                   std::to_string(quota[c]) + ")";
  if (!deficient.empty())
    throw ConfigError("sample_subset: classes with too few documents: " + deficient);

  std::vector<RawDocument> picked;
  picked.reserve(spec.n_docs);
  for (int c = 0; c < spec.n_classes; ++c) {
    std::vector<int> pool = by_class[ranked[c]];
    Rng rng(mix_seed(spec.seed, fnv1a(ranked[c])));
    rng.shuffle(pool);
    for (int i = 0; i < quota[c]; ++i) picked.push_back(corpus.documents[pool[i]]);
  }
  return detail::finalize_corpus(std::move(picked));
}

}  // namespace tcb
