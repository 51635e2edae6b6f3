#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "icda/matrix.hpp"

namespace icda {

// Row split of a training batch into samples of previously learned classes
// (label < c_old) and samples of the classes added by the current increment.
struct BatchPartition {
  std::vector<std::size_t> old_rows;
  std::vector<std::size_t> new_rows;
  std::size_t c_old = 0;
  std::size_t c_new = 0;

  std::size_t head_classes() const { return c_old + c_new; }
  bool has_old() const { return !old_rows.empty(); }
  bool has_new() const { return !new_rows.empty(); }
};

// Throws DomainError when a label falls outside [0, c_old + c_new).
BatchPartition partition_batch(std::span<const std::size_t> labels, std::size_t c_old,
                               std::size_t c_new);

// Weights of the combined objective  alpha*L_n + beta*L_md + gamma*L_o, and the
// distillation temperature.
struct LossWeights {
  double alpha = 0.25;
  double beta = 0.45;
  double gamma = 0.30;
  double tau = 2.0;

  void validate() const;
};

// Prior over the old classes used by the Bayes posterior.
class ClassPrior {
 public:
  explicit ClassPrior(std::vector<double> p);
  static ClassPrior uniform(std::size_t n);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const { return p_; }

 private:
  std::vector<double> p_;
};

// Old-class label frequencies among the old rows of a batch. Falls back to
// uniform when some old class has no sample in the batch.
ClassPrior empirical_prior(std::span<const std::size_t> labels, const BatchPartition& part);

struct LossValue {
  double value = 0.0;
  Matrix grad;  // dL/dlogits, same shape as the logits
};

// Temperature-scaled cross-entropy over the old-class slice, averaged over
// the old rows.
LossValue loss_old(const Matrix& logits, const BatchPartition& part,
                   std::span<const std::size_t> labels, double tau);

// KL(one-hot || softmax) for the new rows at unit temperature; equal to the
// mean of -log p(true class). The softmax spans the full head so that
// single-class increments still receive a learning signal.
LossValue loss_new(const Matrix& logits, const BatchPartition& part,
                   std::span<const std::size_t> labels);

// posterior_i = L1_i * L2_i * prior_i / sum_k L1_k * L2_k * prior_k.
// Throws DomainError on negative likelihoods or an all-zero evidence term.
std::vector<double> bayes_posterior(std::span<const double> likelihood_a,
                                    std::span<const double> likelihood_b, const ClassPrior& prior);

// Mutual distillation loss. For every old row the first likelihood is its
// tempered old-slice softmax; the second is the mean tempered old-slice
// softmax of the new rows. Gradients flow through both. Throws
// InsufficientPartition when either side of the batch is empty.
LossValue loss_md(const Matrix& logits, const BatchPartition& part,
                  std::span<const std::size_t> labels, double tau, const ClassPrior& prior);

struct LossComponents {
  double old_term = 0.0;
  double new_term = 0.0;
  double md_term = 0.0;
};

// alpha*new_term + beta*md_term + gamma*old_term.
double combine(const LossComponents& c, const LossWeights& w);

struct CombinedLoss {
  double value = 0.0;
  LossComponents components;
  Matrix grad;
};

// alpha*L_n + beta*L_md + gamma*L_o with the matching gradient combination.
CombinedLoss loss_cl(const Matrix& logits, const BatchPartition& part,
                     std::span<const std::size_t> labels, const LossWeights& weights,
                     const ClassPrior& prior);

// Plain categorical cross-entropy over the whole head (tau = 1), batch mean.
LossValue cross_entropy(const Matrix& logits, std::span<const std::size_t> labels);

// Evaluation counters, used to verify loss routing.
struct LossCallCounters {
  std::atomic<std::uint64_t> old_calls{0};
  std::atomic<std::uint64_t> new_calls{0};
  std::atomic<std::uint64_t> md_calls{0};
  std::atomic<std::uint64_t> ce_calls{0};

  void reset() {
    old_calls = 0;
    new_calls = 0;
    md_calls = 0;
    ce_calls = 0;
  }
};

LossCallCounters& loss_call_counters();

}  // namespace icda
