#include "icda/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "icda/nn.hpp"

namespace icda {

namespace {

constexpr double kLogFloor = 1e-12;

double safe_log(double p) { return std::log(std::max(p, kLogFloor)); }

void check_labels(const Matrix& logits, const BatchPartition& part,
                  std::span<const std::size_t> labels) {
  if (labels.size() != logits.rows()) {
    throw ShapeError("label count " + std::to_string(labels.size()) + " != batch rows " +
                     std::to_string(logits.rows()));
  }
  if (logits.cols() != part.head_classes()) {
    throw ShapeError("logits have " + std::to_string(logits.cols()) + " columns, partition has " +
                     std::to_string(part.head_classes()) + " classes");
  }
}

}  // namespace

LossCallCounters& loss_call_counters() {
  static LossCallCounters counters;
  return counters;
}

BatchPartition partition_batch(std::span<const std::size_t> labels, std::size_t c_old,
                               std::size_t c_new) {
  BatchPartition p;
  p.c_old = c_old;
  p.c_new = c_new;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= c_old + c_new) {
      throw DomainError("label " + std::to_string(labels[r]) + " at row " + std::to_string(r) +
                        " outside head of " + std::to_string(c_old + c_new) + " classes");
    }
    (labels[r] < c_old ? p.old_rows : p.new_rows).push_back(r);
  }
  return p;
}

void LossWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0)) {
    throw DomainError("loss weights must be nonnegative");
  }
  if (!(tau > 0.0)) throw DomainError("temperature must be positive");
}

ClassPrior::ClassPrior(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw DomainError("class prior over zero classes");
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) throw DomainError("class prior has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("class prior does not sum to 1");
}

ClassPrior ClassPrior::uniform(std::size_t n) {
  if (n == 0) throw DomainError("class prior over zero classes");
  return ClassPrior(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ClassPrior empirical_prior(std::span<const std::size_t> labels, const BatchPartition& part) {
  std::vector<double> counts(part.c_old, 0.0);
  for (std::size_t r : part.old_rows) counts[labels[r]] += 1.0;
  if (part.old_rows.empty() || std::any_of(counts.begin(), counts.end(),
                                           [](double c) { return c == 0.0; })) {
    return ClassPrior::uniform(part.c_old);
  }
  const double n = static_cast<double>(part.old_rows.size());
  for (double& c : counts) c /= n;
  // Division may leave the sum a few ulps away from 1; fold the residual
  // into the largest entry.
  double sum = 0.0;
  for (double c : counts) sum += c;
  *std::max_element(counts.begin(), counts.end()) += 1.0 - sum;
  return ClassPrior(std::move(counts));
}

LossValue loss_old(const Matrix& logits, const BatchPartition& part,
                   std::span<const std::size_t> labels, double tau) {
  ++loss_call_counters().old_calls;
  check_labels(logits, part, labels);
  if (part.c_old == 0 || part.old_rows.empty()) {
    throw InsufficientPartition("loss_old needs old-class rows");
  }
  LossValue out{0.0, Matrix(logits.rows(), logits.cols())};
  const double inv_n = 1.0 / static_cast<double>(part.old_rows.size());
  for (std::size_t r : part.old_rows) {
    const auto p = softmax_temp(logits.row(r), tau, 0, part.c_old);
    const std::size_t y = labels[r];
    out.value -= safe_log(p[y]) * inv_n;
    for (std::size_t j = 0; j < part.c_old; ++j) {
      out.grad(r, j) = (p[j] - (j == y ? 1.0 : 0.0)) / tau * inv_n;
    }
  }
  return out;
}

LossValue loss_new(const Matrix& logits, const BatchPartition& part,
                   std::span<const std::size_t> labels) {
  ++loss_call_counters().new_calls;
  check_labels(logits, part, labels);
  if (part.c_new == 0 || part.new_rows.empty()) {
    throw DomainError("loss_new needs new-class rows");
  }
  LossValue out{0.0, Matrix(logits.rows(), logits.cols())};
  const double inv_n = 1.0 / static_cast<double>(part.new_rows.size());
  const std::size_t width = logits.cols();
  for (std::size_t r : part.new_rows) {
    const auto p = softmax_temp(logits.row(r), 1.0, 0, width);
    const std::size_t y = labels[r];
    // With a one-hot target every 0*log(0/p) term vanishes and
    // KL(q||p) reduces to -log p_y.
    out.value -= safe_log(p[y]) * inv_n;
    for (std::size_t j = 0; j < width; ++j) {
      out.grad(r, j) = (p[j] - (j == y ? 1.0 : 0.0)) * inv_n;
    }
  }
  return out;
}

std::vector<double> bayes_posterior(std::span<const double> likelihood_a,
                                    std::span<const double> likelihood_b,
                                    const ClassPrior& prior) {
  const std::size_t n = prior.size();
  if (likelihood_a.size() != n || likelihood_b.size() != n) {
    throw ShapeError("bayes_posterior: likelihood lengths must equal the prior length");
  }
  std::vector<double> post(n);
  double evidence = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(likelihood_a[i] >= 0.0) || !(likelihood_b[i] >= 0.0)) {
      throw DomainError("bayes_posterior: likelihoods must be nonnegative");
    }
    post[i] = likelihood_a[i] * likelihood_b[i] * prior[i];
    evidence += post[i];
  }
  if (!(evidence > 0.0) || !std::isfinite(evidence)) {
    throw DomainError("bayes_posterior: degenerate evidence (all joint terms are zero)");
  }
  for (double& v : post) v /= evidence;
  return post;
}

LossValue loss_md(const Matrix& logits, const BatchPartition& part,
                  std::span<const std::size_t> labels, double tau, const ClassPrior& prior) {
  ++loss_call_counters().md_calls;
  check_labels(logits, part, labels);
  if (part.old_rows.empty() || part.new_rows.empty()) {
    throw InsufficientPartition("insufficient partition: loss_md needs both old and new rows");
  }
  const std::size_t c_o = part.c_old;
  if (c_o == 0) throw InsufficientPartition("insufficient partition: no old classes");
  if (prior.size() != c_o) throw ShapeError("loss_md: prior length != old class count");

  // Likelihood of the new rows: mean tempered old-slice softmax.
  std::vector<std::vector<double>> q;
  q.reserve(part.new_rows.size());
  std::vector<double> joint_new(c_o, 0.0);
  const double inv_nn = 1.0 / static_cast<double>(part.new_rows.size());
  for (std::size_t s : part.new_rows) {
    q.push_back(softmax_temp(logits.row(s), tau, 0, c_o));
    for (std::size_t k = 0; k < c_o; ++k) joint_new[k] += q.back()[k] * inv_nn;
  }

  LossValue out{0.0, Matrix(logits.rows(), logits.cols())};
  const double inv_no = 1.0 / static_cast<double>(part.old_rows.size());
  // dL/dlog(L2_k), accumulated over old rows.
  std::vector<double> g_joint(c_o, 0.0);
  for (std::size_t r : part.old_rows) {
    const auto p = softmax_temp(logits.row(r), tau, 0, c_o);
    const auto post = bayes_posterior(p, joint_new, prior);
    const std::size_t y = labels[r];
    out.value -= safe_log(post[y]) * inv_no;
    for (std::size_t k = 0; k < c_o; ++k) {
      const double d = (post[k] - (k == y ? 1.0 : 0.0)) * inv_no;
      // Softmax Jacobian collapses because post and the one-hot both sum to 1.
      out.grad(r, k) = d / tau;
      g_joint[k] += d;
    }
  }
  for (std::size_t si = 0; si < part.new_rows.size(); ++si) {
    const auto& qs = q[si];
    std::vector<double> u(c_o);
    double dot = 0.0;
    for (std::size_t k = 0; k < c_o; ++k) {
      u[k] = g_joint[k] / joint_new[k] * inv_nn;
      dot += qs[k] * u[k];
    }
    const std::size_t s = part.new_rows[si];
    for (std::size_t j = 0; j < c_o; ++j) out.grad(s, j) = qs[j] * (u[j] - dot) / tau;
  }
  return out;
}

double combine(const LossComponents& c, const LossWeights& w) {
  return w.alpha * c.new_term + w.beta * c.md_term + w.gamma * c.old_term;
}

CombinedLoss loss_cl(const Matrix& logits, const BatchPartition& part,
                     std::span<const std::size_t> labels, const LossWeights& weights,
                     const ClassPrior& prior) {
  weights.validate();
  const LossValue ln = loss_new(logits, part, labels);
  const LossValue lmd = loss_md(logits, part, labels, weights.tau, prior);
  const LossValue lo = loss_old(logits, part, labels, weights.tau);
  CombinedLoss out;
  out.components = {lo.value, ln.value, lmd.value};
  out.value = combine(out.components, weights);
  out.grad = Matrix(logits.rows(), logits.cols());
  auto& g = out.grad.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = weights.alpha * ln.grad.data()[i] + weights.beta * lmd.grad.data()[i] +
           weights.gamma * lo.grad.data()[i];
  }
  return out;
}

LossValue cross_entropy(const Matrix& logits, std::span<const std::size_t> labels) {
  ++loss_call_counters().ce_calls;
  if (labels.size() != logits.rows()) throw ShapeError("cross_entropy: label count mismatch");
  if (logits.rows() == 0 || logits.cols() == 0) throw DomainError("cross_entropy: empty batch");
  LossValue out{0.0, Matrix(logits.rows(), logits.cols())};
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const std::size_t y = labels[r];
    if (y >= logits.cols()) throw DomainError("cross_entropy: label outside head");
    const auto p = softmax_temp(logits.row(r), 1.0, 0, logits.cols());
    out.value -= safe_log(p[y]) * inv_n;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      out.grad(r, j) = (p[j] - (j == y ? 1.0 : 0.0)) * inv_n;
    }
  }
  return out;
}

}  // namespace icda
