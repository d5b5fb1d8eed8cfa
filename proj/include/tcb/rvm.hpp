#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tcb/errors.hpp"
#include "tcb/numerics.hpp"
#include "tcb/sparse_vector.hpp"

namespace tcb {

struct RvmConfig {
  double alpha_init = 1.0;
  double alpha_prune = 1e9;  // precision above this retires a basis function
  int max_outer = 500;
  int irls_max = 50;
  double tol_alpha = 1e-3;  // outer stop: max |delta log alpha| over survivors
  double tol_irls = 1e-6;   // inner stop: inf-norm of the penalized gradient
};

// N x (M+1) design over linear kernel values: column 0 is the constant bias,
// column j is dot(x_i, x_j) for basis document j (1-based over train docs).
inline DenseMatrix design_matrix(const std::vector<SparseVector>& docs) {
  const int n = static_cast<int>(docs.size());
  if (n == 0) throw RuntimeError("design_matrix: no documents");
  const DenseMatrix gram = gram_matrix(docs);
  DenseMatrix phi(n, n + 1);
  for (int i = 0; i < n; ++i) {
    phi.at(i, 0) = 1.0;
    for (int j = 0; j < n; ++j) phi.at(i, j + 1) = gram.at(i, j);
  }
  return phi;
}

namespace rvm_detail {

// log(1 + e^u) without overflow for large |u|.
inline double softplus(double u) {
  if (u > 35.0) return u + std::log1p(std::exp(-u));
  if (u < -35.0) return std::exp(u);
  return std::log1p(std::exp(u));
}

// Bernoulli log-likelihood of targets under sigmoid(Phi w) minus the
// quadratic prior penalty (1/2) sum_i alpha_i w_i^2.
inline double penalized_ll(const DenseMatrix& phi, const std::vector<int>& targets,
                           const std::vector<double>& alpha, const std::vector<double>& w) {
  const int n = phi.rows;
  const int m = phi.cols;
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = 0.0;
    for (int j = 0; j < m; ++j) z += phi.at(i, j) * w[j];
    // t=1: log sigmoid(z) = -softplus(-z); t=0: log(1 - sigmoid(z)) = -softplus(z)
    ll -= targets[i] == 1 ? softplus(-z) : softplus(z);
  }
  for (int j = 0; j < m; ++j) ll -= 0.5 * alpha[j] * w[j] * w[j];
  return ll;
}

}  // namespace rvm_detail

struct IrlsResult {
  std::vector<double> mu;          // posterior mode
  DenseMatrix sigma{0, 0};         // inverse Hessian at the mode
  int steps = 0;                   // accepted Newton steps
  std::vector<double> ll_trace;    // penalized log-likelihood, initial point then each accepted step
  std::vector<double> jitter_log;  // diagonal boosts any Hessian factorization needed
};

// Finds the mode of the penalized Bernoulli likelihood by Newton iterations
// with step halving (up to 16 halvings per step; a step is accepted only if
// it does not decrease the objective). Stops when the gradient inf-norm
// falls below tol_irls or after cfg.irls_max steps.
inline IrlsResult irls_posterior_mode(const DenseMatrix& phi, const std::vector<int>& targets,
                                      const std::vector<double>& alpha, const RvmConfig& cfg,
                                      const std::vector<double>* warm_start = nullptr) {
  const int n = phi.rows;
  const int m = phi.cols;
  if (static_cast<int>(targets.size()) != n)
    throw RuntimeError("irls_posterior_mode: targets/design size mismatch");
  if (static_cast<int>(alpha.size()) != m)
    throw RuntimeError("irls_posterior_mode: alpha/design size mismatch");
  for (const int t : targets)
    if (t != 0 && t != 1) throw RuntimeError("irls_posterior_mode: targets must be 0/1");

  IrlsResult res;
  res.mu.assign(static_cast<std::size_t>(m), 0.0);
  if (warm_start) {
    if (static_cast<int>(warm_start->size()) != m)
      throw RuntimeError("irls_posterior_mode: warm start size mismatch");
    res.mu = *warm_start;
  }

  double ll = rvm_detail::penalized_ll(phi, targets, alpha, res.mu);
  res.ll_trace.push_back(ll);

  std::vector<double> z(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n)),
      g(static_cast<std::size_t>(m)), step(static_cast<std::size_t>(m)),
      trial(static_cast<std::size_t>(m));
  DenseMatrix hess(m, m);

  auto fill_hessian = [&](DenseMatrix& h) {
    std::fill(h.values.begin(), h.values.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double b = y[i] * (1.0 - y[i]);
      if (b == 0.0) continue;
      const double* row = &phi.values[static_cast<std::size_t>(i) * m];
      for (int a = 0; a < m; ++a) {
        const double ba = b * row[a];
        if (ba == 0.0) continue;
        double* hrow = &h.values[static_cast<std::size_t>(a) * m];
        for (int c = a; c < m; ++c) hrow[c] += ba * row[c];
      }
    }
    for (int a = 0; a < m; ++a) {
      h.at(a, a) += alpha[a];
      for (int c = a + 1; c < m; ++c) h.at(c, a) = h.at(a, c);
    }
  };

  auto fill_z_y_g = [&]() {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      const double* row = &phi.values[static_cast<std::size_t>(i) * m];
      for (int j = 0; j < m; ++j) s += row[j] * res.mu[j];
      z[i] = s;
      y[i] = sigmoid(s);
    }
    for (int j = 0; j < m; ++j) g[j] = -alpha[j] * res.mu[j];
    for (int i = 0; i < n; ++i) {
      const double r = targets[i] - y[i];
      const double* row = &phi.values[static_cast<std::size_t>(i) * m];
      for (int j = 0; j < m; ++j) g[j] += r * row[j];
    }
  };

  for (int it = 0; it < cfg.irls_max; ++it) {
    fill_z_y_g();
    double gmax = 0.0;
    for (const double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax < cfg.tol_irls) break;

    fill_hessian(hess);
    CholeskyFactor chol;
    try {
      chol = cholesky(hess, &res.jitter_log);
    } catch (const NotPositiveDefinite& e) {
      throw RuntimeError("irls iteration " + std::to_string(it + 1) + ": " + e.what());
    }
    step = solve(chol, g);

    double eta = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 16; ++h) {
      for (int j = 0; j < m; ++j) trial[j] = res.mu[j] + eta * step[j];
      const double ll_try = rvm_detail::penalized_ll(phi, targets, alpha, trial);
      if (ll_try >= ll) {
        res.mu = trial;
        ll = ll_try;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // no improving step length; treat the point as the mode
    ++res.steps;
    res.ll_trace.push_back(ll);
  }

  // Posterior covariance from the Hessian at the returned mode.
  fill_z_y_g();
  fill_hessian(hess);
  try {
    res.sigma = inverse_spd(cholesky(hess, &res.jitter_log));
  } catch (const NotPositiveDefinite& e) {
    throw RuntimeError("irls covariance: " + std::string(e.what()));
  }
  return res;
}

struct AlphaUpdate {
  std::vector<double> alpha;  // updated precisions, parallel to the input
  std::vector<double> gamma;  // well-determinedness gamma_i = 1 - alpha_i * Sigma_ii
  std::vector<char> prune;    // 1 where the basis should be retired
};

// Type-II update alpha_i' = gamma_i / mu_i^2. A basis is pruned when its new
// precision exceeds alpha_prune or its weight is exactly zero. The bias
// (position 0 when first_is_bias) is never pruned, only clamped.
inline AlphaUpdate update_alphas(const std::vector<double>& alpha, const std::vector<double>& mu,
                                 const DenseMatrix& sigma, const RvmConfig& cfg,
                                 bool first_is_bias) {
  const int m = static_cast<int>(alpha.size());
  if (static_cast<int>(mu.size()) != m || sigma.rows != m || sigma.cols != m)
    throw RuntimeError("update_alphas: dimension mismatch");
  AlphaUpdate upd;
  upd.alpha.assign(static_cast<std::size_t>(m), 0.0);
  upd.gamma.assign(static_cast<std::size_t>(m), 0.0);
  upd.prune.assign(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    const double gamma_raw = 1.0 - alpha[i] * sigma.at(i, i);
    upd.gamma[i] = gamma_raw;  // raw diagnostic; in exact arithmetic it lies in [0,1]
    const double gamma = std::max(gamma_raw, 0.0);
    const double musq = mu[i] * mu[i];
    if (i == 0 && first_is_bias) {
      double fresh = musq > 0.0 ? gamma / musq : cfg.alpha_prune;
      if (!std::isfinite(fresh) || fresh > cfg.alpha_prune) fresh = cfg.alpha_prune;
      upd.alpha[i] = fresh;
      continue;
    }
    if (musq == 0.0) {
      upd.prune[i] = 1;
      upd.alpha[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double fresh = gamma / musq;
    if (!std::isfinite(fresh) || fresh > cfg.alpha_prune) {
      upd.prune[i] = 1;
      upd.alpha[i] = fresh;
    } else {
      upd.alpha[i] = fresh;
    }
  }
  return upd;
}

// One-vs-rest binary machine. active holds design-column ids (0 = bias,
// j >= 1 = train doc j-1); weights_mu and alphas are parallel to active, and
// relevance_vectors holds the retained documents in active order.
struct RvmBinaryModel {
  std::vector<int> active;
  std::vector<double> weights_mu;
  std::vector<double> alphas;
  std::vector<SparseVector> relevance_vectors;
  int outer_iters = 0;
  std::vector<int> prune_history;  // bases retired at each outer iteration
};

struct RvmModel {
  int p = 0;
  std::vector<std::string> class_names;
  std::vector<RvmBinaryModel> machines;  // one per class, class order
};

// Diagnostics captured per outer iteration for solver verification.
struct RvmTraceOuter {
  std::vector<double> ll_trace;
  std::vector<double> gamma;
  int active_after = 0;
  bool sigma_chol_ok = false;
};

struct RvmTrace {
  std::vector<RvmTraceOuter> outers;
};

namespace rvm_detail {

inline DenseMatrix drop_columns(const DenseMatrix& phi, const std::vector<char>& prune) {
  int kept = 0;
  for (const char f : prune)
    if (!f) ++kept;
  DenseMatrix out(phi.rows, kept);
  for (int i = 0; i < phi.rows; ++i) {
    int c = 0;
    for (int j = 0; j < phi.cols; ++j)
      if (!prune[j]) out.at(i, c++) = phi.at(i, j);
  }
  return out;
}

}  // namespace rvm_detail

// Trains one binary machine on a shared design matrix. Alternates IRLS mode
// finding with type-II precision updates, pruning high-precision bases, until
// the surviving log-precisions settle (tol_alpha) or max_outer is reached.
inline RvmBinaryModel train_rvm_binary(const DenseMatrix& phi_full,
                                       const std::vector<SparseVector>& docs,
                                       const std::vector<int>& targets, const RvmConfig& cfg,
                                       RvmTrace* trace = nullptr) {
  const int n = phi_full.rows;
  if (static_cast<int>(targets.size()) != n)
    throw RuntimeError("train_rvm_binary: targets/design size mismatch");
  const bool has_pos = std::find(targets.begin(), targets.end(), 1) != targets.end();
  const bool has_neg = std::find(targets.begin(), targets.end(), 0) != targets.end();
  if (!has_pos || !has_neg)
    throw ConfigError("train_rvm_binary: targets must contain both classes");

  DenseMatrix phi = phi_full;
  std::vector<int> active(static_cast<std::size_t>(phi.cols));
  for (int j = 0; j < phi.cols; ++j) active[j] = j;
  std::vector<double> alpha(active.size(), cfg.alpha_init);
  std::vector<double> mu(active.size(), 0.0);

  RvmBinaryModel model;
  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const IrlsResult irls = irls_posterior_mode(phi, targets, alpha, cfg, &mu);
    mu = irls.mu;

    const AlphaUpdate upd = update_alphas(alpha, mu, irls.sigma, cfg, active[0] == 0);

    double delta = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (upd.prune[i]) continue;
      if (upd.alpha[i] > 0.0 && alpha[i] > 0.0)
        delta = std::max(delta, std::abs(std::log(upd.alpha[i]) - std::log(alpha[i])));
      else if (upd.alpha[i] != alpha[i])
        delta = std::numeric_limits<double>::infinity();
    }

    if (trace) {
      RvmTraceOuter rec;
      rec.ll_trace = irls.ll_trace;
      rec.gamma = upd.gamma;
      DenseMatrix sigma_l;
      rec.sigma_chol_ok = detail::cholesky_in_place(irls.sigma, sigma_l) == -1;
      int kept = 0;
      for (const char f : upd.prune)
        if (!f) ++kept;
      rec.active_after = kept;
      trace->outers.push_back(rec);
    }

    int pruned = 0;
    for (const char f : upd.prune) pruned += f ? 1 : 0;
    model.prune_history.push_back(pruned);

    if (pruned > 0) {
      std::vector<int> next_active;
      std::vector<double> next_alpha, next_mu;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (upd.prune[i]) continue;
        next_active.push_back(active[i]);
        next_alpha.push_back(upd.alpha[i]);
        next_mu.push_back(mu[i]);
      }
      phi = rvm_detail::drop_columns(phi, upd.prune);
      active = std::move(next_active);
      alpha = std::move(next_alpha);
      mu = std::move(next_mu);
    } else {
      for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = upd.alpha[i];
    }

    model.outer_iters = outer;
    if (delta < cfg.tol_alpha) break;
  }

  model.active = active;
  model.weights_mu = mu;
  model.alphas = alpha;
  for (const int id : active)
    if (id >= 1) model.relevance_vectors.push_back(docs[static_cast<std::size_t>(id) - 1]);
  return model;
}

// One-vs-rest training: the design matrix is built once and shared by all
// class machines. Fully deterministic (no randomness anywhere).
inline RvmModel train_rvm(const std::vector<LabeledVector>& data,
                          std::vector<std::string> class_names, int p, const RvmConfig& cfg,
                          std::vector<RvmTrace>* traces = nullptr) {
  const int n = static_cast<int>(data.size());
  const int k = static_cast<int>(class_names.size());
  if (n == 0) throw ConfigError("train_rvm: empty training data");
  if (k < 2) throw ConfigError("train_rvm: need at least 2 classes");

  std::vector<SparseVector> docs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (data[i].class_index < 0 || data[i].class_index >= k)
      throw RuntimeError("train_rvm: class index out of range");
    validate(data[i].vector);
    docs[i] = data[i].vector;
  }

  const DenseMatrix phi = design_matrix(docs);

  RvmModel model;
  model.p = p;
  model.class_names = std::move(class_names);
  if (traces) traces->assign(static_cast<std::size_t>(k), RvmTrace{});
  for (int c = 0; c < k; ++c) {
    std::vector<int> targets(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) targets[i] = data[i].class_index == c ? 1 : 0;
    model.machines.push_back(
        train_rvm_binary(phi, docs, targets, cfg, traces ? &(*traces)[c] : nullptr));
  }
  return model;
}

// Sigmoid score of one binary machine on a raw (un-augmented) vector.
inline double rvm_binary_score(const RvmBinaryModel& machine, const SparseVector& x) {
  double s = 0.0;
  std::size_t r = 0;
  for (std::size_t a = 0; a < machine.active.size(); ++a) {
    if (machine.active[a] == 0)
      s += machine.weights_mu[a];
    else
      s += machine.weights_mu[a] * dot(x, machine.relevance_vectors[r++]);
  }
  return sigmoid(s);
}

// Per-class sigmoid scores normalized to sum to one.
inline std::vector<double> predict_proba(const RvmModel& model, const SparseVector& x) {
  std::vector<double> probs(model.machines.size(), 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < model.machines.size(); ++c) {
    probs[c] = rvm_binary_score(model.machines[c], x);
    total += probs[c];
  }
  if (total > 0.0)
    for (double& v : probs) v /= total;
  return probs;
}

// Argmax of predict_proba; the smallest class index wins ties.
inline int predict(const RvmModel& model, const SparseVector& x) {
  const std::vector<double> probs = predict_proba(model, x);
  int best = 0;
  for (int c = 1; c < static_cast<int>(probs.size()); ++c)
    if (probs[c] > probs[best]) best = c;
  return best;
}

// Distinct documents retained as relevance vectors across all machines.
inline int relevance_vector_count(const RvmModel& model) {
  std::vector<char> used;
  for (const RvmBinaryModel& machine : model.machines)
    for (const int id : machine.active)
      if (id >= 1) {
        if (static_cast<std::size_t>(id) > used.size()) used.resize(static_cast<std::size_t>(id), 0);
        used[static_cast<std::size_t>(id) - 1] = 1;
      }
  return static_cast<int>(std::count(used.begin(), used.end(), 1));
}

}  // namespace tcb
