#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tcb/errors.hpp"
#include "tcb/porter.hpp"
#include "tcb/sparse_vector.hpp"
#include "tcb/stopwords.hpp"

namespace tcb {

struct PipelineConfig {
  int min_df = 2;
  bool stem = true;
  std::string stopword_list = "smart";
};

// Lowercased maximal runs of ASCII letters; every other byte is a boundary.
// Tokens shorter than 2 characters are dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80 && std::isalpha(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      if (cur.size() >= 2) tokens.push_back(cur);
      cur.clear();
    }
  }
  if (cur.size() >= 2) tokens.push_back(cur);
  return tokens;
}

inline std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                                 const std::unordered_set<std::string>& list) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const std::string& t : tokens)
    if (!list.count(t)) kept.push_back(t);
  return kept;
}

inline std::string stem(const std::string& token) { return porter_stem(token); }

// tokenize + stop-word removal + optional stemming, the whole per-document
// text path shared by prepare, cross-validation and predict.
inline std::vector<std::string> pipeline_tokens(std::string_view text, const PipelineConfig& cfg) {
  std::vector<std::string> tokens = remove_stopwords(tokenize(text), stopword_list(cfg.stopword_list));
  if (cfg.stem)
    for (std::string& t : tokens) t = porter_stem(t);
  return tokens;
}

struct Vocabulary {
  std::vector<std::string> terms;                   // lexicographic, dense indices 0..p-1
  std::unordered_map<std::string, int> index_of;
  std::vector<int> doc_freq;                        // parallel to terms
  int n_train_docs = 0;

  int p() const { return static_cast<int>(terms.size()); }
};

// Builds the vocabulary from training-fold token lists only: terms with
// document frequency >= min_df, ordered lexicographically.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& docs,
                                   const PipelineConfig& cfg) {
  if (docs.empty()) throw RuntimeError("build_vocabulary: empty training set");
  if (cfg.min_df < 1) throw ConfigError("build_vocabulary: min_df must be >= 1");
  if (cfg.min_df > static_cast<int>(docs.size()))
    throw ConfigError("build_vocabulary: min_df " + std::to_string(cfg.min_df) +
                      " exceeds training document count " + std::to_string(docs.size()));

  std::unordered_map<std::string, int> df;
  std::unordered_set<std::string> seen;
  for (const auto& tokens : docs) {
    seen.clear();
    for (const std::string& t : tokens)
      if (seen.insert(t).second) ++df[t];
  }

  Vocabulary vocab;
  vocab.n_train_docs = static_cast<int>(docs.size());
  for (const auto& [term, count] : df)
    if (count >= cfg.min_df) vocab.terms.push_back(term);
  std::sort(vocab.terms.begin(), vocab.terms.end());
  vocab.doc_freq.resize(vocab.terms.size());
  for (int i = 0; i < vocab.p(); ++i) {
    vocab.index_of.emplace(vocab.terms[i], i);
    vocab.doc_freq[i] = df[vocab.terms[i]];
  }
  return vocab;
}

// Log-TF x IDF, L2-normalized: weight = (1 + ln tf) * ln(N / df). Terms with
// df = N contribute zero and are dropped; out-of-vocabulary terms are
// ignored. An all-zero result is returned as the empty vector.
inline SparseVector vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::unordered_map<int, int> tf;
  for (const std::string& t : tokens) {
    const auto it = vocab.index_of.find(t);
    if (it != vocab.index_of.end()) ++tf[it->second];
  }

  SparseVector v;
  v.entries.reserve(tf.size());
  for (const auto& [index, count] : tf) {
    const double idf = std::log(static_cast<double>(vocab.n_train_docs) / vocab.doc_freq[index]);
    const double w = (1.0 + std::log(static_cast<double>(count))) * idf;
    if (w > 0.0) v.entries.push_back({index, w});
  }
  std::sort(v.entries.begin(), v.entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });

  double norm = std::sqrt(squared_norm(v));
  if (norm > 0.0)
    for (Entry& e : v.entries) e.weight /= norm;
  return v;
}

}  // namespace tcb
