#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tcb/errors.hpp"

namespace tcb {

// One feature of a sparse vector.
struct Entry {
  int index;
  double weight;
};

// Sparse feature vector with strictly increasing indices and finite weights.
// Vectors produced by the TF-IDF pipeline additionally have non-negative
// weights and unit L2 norm (or are exactly all-zero); hand-built vectors in
// solver fixtures need only the ordering and finiteness.
struct SparseVector {
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
};

// Throws when indices are not strictly increasing or a weight is not finite.
inline void validate(const SparseVector& x) {
  int prev = -1;
  for (const Entry& e : x.entries) {
    if (e.index <= prev) throw RuntimeError("sparse vector indices not strictly increasing");
    if (!std::isfinite(e.weight)) throw RuntimeError("sparse vector weight not finite");
    prev = e.index;
  }
}

inline double squared_norm(const SparseVector& x) {
  double s = 0.0;
  for (const Entry& e : x.entries) s += e.weight * e.weight;
  return s;
}

// Training pair: a vectorized document and its class index.
struct LabeledVector {
  SparseVector vector;
  int class_index;
};

}  // namespace tcb
