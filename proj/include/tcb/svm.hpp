#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tcb/errors.hpp"
#include "tcb/numerics.hpp"
#include "tcb/random.hpp"
#include "tcb/sparse_vector.hpp"

namespace tcb {

struct SvmConfig {
  double C = 1.0;
  double tol = 1e-3;        // stop when the worst per-example KKT violation drops below this
  int max_epochs = 200;
  std::uint64_t shuffle_seed = 0;
};

// Single-machine multi-class model: one weight vector per class. The offset
// is realized as a constant feature appended at training time, so p is the
// input feature dimension while each weight row has p+1 entries (bias last).
// decision_scores stays a pure dot product; callers append the bias entry to
// query vectors via augment_bias.
struct SvmModel {
  int K = 0;
  int p = 0;
  std::vector<std::vector<double>> W;  // K rows of length p+1
  std::vector<std::string> class_names;
  int epochs_run = 0;
  bool converged = false;  // KKT stop fired before max_epochs
};

// Dual multipliers: for every example i, sum_c tau[i][c] = 0 and
// tau[i][c] <= C·[c == y_i].
struct DualState {
  std::vector<std::vector<double>> tau;  // N x K
  double objective = 0.0;                // see dual_objective
};

// Copy of x with the constant bias feature (index p, value 1) appended.
inline SparseVector augment_bias(const SparseVector& x, int p) {
  if (!x.entries.empty() && x.entries.back().index >= p)
    throw RuntimeError("augment_bias: feature index " + std::to_string(x.entries.back().index) +
                       " >= p=" + std::to_string(p));
  SparseVector out = x;
  out.entries.push_back({p, 1.0});
  return out;
}

// Dual objective in maximization convention: the all-zero state scores 0 and
// coordinate descent never decreases it. Recomputed from scratch (weights are
// rebuilt from tau), so it doubles as the oracle for the incremental solver.
inline double dual_objective(const DualState& state, const std::vector<LabeledVector>& data,
                             int p) {
  const int n = static_cast<int>(data.size());
  if (static_cast<int>(state.tau.size()) != n)
    throw RuntimeError("dual_objective: tau/data size mismatch");
  if (n == 0) return 0.0;
  const int k = static_cast<int>(state.tau[0].size());

  std::vector<std::vector<double>> w(k, std::vector<double>(static_cast<std::size_t>(p) + 1, 0.0));
  double linear = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < k; ++m) {
      const double t = state.tau[i][m];
      if (t != 0.0) {
        for (const Entry& e : data[i].vector.entries) w[m][e.index] += t * e.weight;
        w[m][p] += t;  // bias feature
      }
      if (m != data[i].class_index) linear += t;  // e_i^m = 1 off the true class
    }
  }
  double quad = 0.0;
  for (int m = 0; m < k; ++m)
    for (const double v : w[m]) quad += v * v;
  return -(0.5 * quad + linear);
}

// Trains by dual coordinate descent: each epoch visits examples in
// seeded-shuffled order and solves the per-example subproblem exactly by
// sorted water-filling over the K multipliers. on_epoch (when set) receives
// the multiplier state after every epoch.
inline SvmModel train_svm(
    const std::vector<LabeledVector>& data, int p, std::vector<std::string> class_names,
    const SvmConfig& cfg, DualState* final_state = nullptr,
    const std::function<void(int epoch, const DualState&)>& on_epoch = nullptr) {
  const int n = static_cast<int>(data.size());
  const int k = static_cast<int>(class_names.size());
  if (n == 0) throw ConfigError("train_svm: empty training data");
  if (k < 2) throw ConfigError("train_svm: need at least 2 classes");
  if (cfg.C <= 0.0 || cfg.tol <= 0.0) throw ConfigError("train_svm: C and tol must be positive");

  std::vector<char> present(static_cast<std::size_t>(k), 0);
  for (const LabeledVector& d : data) {
    if (d.class_index < 0 || d.class_index >= k)
      throw RuntimeError("train_svm: class index out of range");
    present[static_cast<std::size_t>(d.class_index)] = 1;
    validate(d.vector);
    if (!d.vector.entries.empty() && d.vector.entries.back().index >= p)
      throw RuntimeError("train_svm: feature index " +
                         std::to_string(d.vector.entries.back().index) +
                         " >= p=" + std::to_string(p));
  }
  if (std::count(present.begin(), present.end(), 1) < 2)
    throw ConfigError("train_svm: training data contains a single class");

  std::vector<SparseVector> xs(static_cast<std::size_t>(n));
  std::vector<double> sq(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    xs[i] = augment_bias(data[i].vector, p);
    sq[i] = squared_norm(xs[i]);  // >= 1 because of the bias entry
  }

  SvmModel model;
  model.K = k;
  model.p = p;
  model.class_names = std::move(class_names);
  model.W.assign(static_cast<std::size_t>(k),
                 std::vector<double>(static_cast<std::size_t>(p) + 1, 0.0));

  DualState state;
  state.tau.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k), 0.0));

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(cfg.shuffle_seed);

  std::vector<double> G(static_cast<std::size_t>(k)), B(static_cast<std::size_t>(k)),
      D(static_cast<std::size_t>(k));

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double max_violation = 0.0;

    for (const int i : order) {
      const int yi = data[i].class_index;
      const double A = sq[i];
      std::vector<double>& tau_i = state.tau[i];

      for (int m = 0; m < k; ++m) {
        double s = (m == yi) ? 0.0 : 1.0;  // e_i^m
        for (const Entry& e : xs[i].entries) s += model.W[m][e.index] * e.weight;
        G[m] = s;
      }

      double max_g = -std::numeric_limits<double>::infinity();
      double min_g_free = std::numeric_limits<double>::infinity();
      for (int m = 0; m < k; ++m) {
        const double bound = (m == yi) ? cfg.C : 0.0;
        if (G[m] > max_g) max_g = G[m];
        if (tau_i[m] < bound && G[m] < min_g_free) min_g_free = G[m];
      }
      const double violation = max_g - min_g_free;
      if (violation > max_violation) max_violation = violation;
      if (violation <= 1e-12) continue;  // example already optimal

      for (int m = 0; m < k; ++m) {
        B[m] = G[m] - A * tau_i[m];
        D[m] = B[m];
      }
      D[yi] += A * cfg.C;
      std::sort(D.begin(), D.end(), std::greater<double>());

      double beta = D[0] - A * cfg.C;
      int r = 1;
      for (; r < k && beta < r * D[r]; ++r) beta += D[r];
      beta /= r;

      // D is reused as scratch for the fresh multipliers. The true-class
      // coordinate, when it stays under its bound, is rebuilt as minus the
      // sum of the others; the row then satisfies sum-to-zero exactly and
      // released examples return to exact zeros instead of rounding dust.
      double sum_others = 0.0;
      for (int m = 0; m < k; ++m) {
        if (m == yi) continue;
        D[m] = std::min(0.0, (beta - B[m]) / A);
        sum_others += D[m];
      }
      double fresh_yi = std::min(cfg.C, (beta - B[yi]) / A);
      if (fresh_yi < cfg.C) fresh_yi = std::min(cfg.C, 0.0 - sum_others);
      D[yi] = fresh_yi;

      for (int m = 0; m < k; ++m) {
        const double delta = D[m] - tau_i[m];
        if (delta != 0.0) {
          tau_i[m] = D[m];
          for (const Entry& e : xs[i].entries) model.W[m][e.index] += delta * e.weight;
        }
      }
    }

    model.epochs_run = epoch;
    if (on_epoch) {
      state.objective = dual_objective(state, data, p);
      on_epoch(epoch, state);
    }
    if (max_violation < cfg.tol) {
      model.converged = true;
      break;
    }
  }

  if (final_state) {
    state.objective = dual_objective(state, data, p);
    *final_state = std::move(state);
  }
  return model;
}

// Pure per-class dot product over x's entries. Valid indices are 0..p
// inclusive: index p addresses the bias slot for callers that augmented x.
inline std::vector<double> decision_scores(const SvmModel& model, const SparseVector& x) {
  if (!x.entries.empty() && x.entries.back().index > model.p)
    throw RuntimeError("decision_scores: feature index " +
                       std::to_string(x.entries.back().index) +
                       " exceeds model dimension p=" + std::to_string(model.p));
  std::vector<double> scores(static_cast<std::size_t>(model.K), 0.0);
  for (int m = 0; m < model.K; ++m) {
    double s = 0.0;
    for (const Entry& e : x.entries) s += model.W[m][e.index] * e.weight;
    scores[m] = s;
  }
  return scores;
}

// Argmax of decision_scores; the smallest class index wins ties.
inline int predict(const SvmModel& model, const SparseVector& x) {
  const std::vector<double> scores = decision_scores(model, x);
  int best = 0;
  for (int m = 1; m < model.K; ++m)
    if (scores[m] > scores[best]) best = m;
  return best;
}

// Examples whose multiplier row is not identically zero, i.e. the support
// set; non-support examples snap to exact zeros at convergence.
inline int support_count(const DualState& state) {
  int count = 0;
  for (const auto& row : state.tau)
    for (const double t : row)
      if (t != 0.0) {
        ++count;
        break;
      }
  return count;
}

}  // namespace tcb
