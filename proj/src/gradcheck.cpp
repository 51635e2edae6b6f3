#include "icda/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "icda/losses.hpp"
#include "icda/nn.hpp"
#include "icda/seed.hpp"

namespace icda {

namespace {

struct Problem {
  Model model;
  Matrix inputs;
  std::vector<std::size_t> labels;
  BatchPartition part;
  LossWeights weights;
  ClassPrior prior = ClassPrior::uniform(1);
};

// Distance of the closest hidden pre-activation to the relu kink.
double kink_margin(const Model& m, const Matrix& x) {
  const auto fwd = forward(m, x);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t li = 0; li + 1 < m.layers.size(); ++li) {
    for (double z : fwd.cache.pre[li].data()) margin = std::min(margin, std::abs(z));
  }
  return margin;
}

Problem random_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> depth(0, 2), width(2, 32), in_dim(2, 8),
      n_old(1, 4), n_new(1, 3), extra(0, 6);
  std::uniform_real_distribution<double> tau(0.5, 3.0), bias(-0.5, 0.5), unit(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  while (true) {
    Problem p;
    std::vector<std::size_t> hidden(depth(rng));
    for (auto& h : hidden) h = width(rng);
    const std::size_t d = in_dim(rng);
    const std::size_t c_o = n_old(rng), c_n = n_new(rng);
    p.model = make_model(d, hidden, rng());
    p.model = expand_head(p.model, c_o + c_n, 0, rng());
    for (auto& l : p.model.layers) {
      for (double& b : l.bias) b = bias(rng);
    }
    const std::size_t n_rows_old = 2 + extra(rng) / 2, n_rows_new = 2 + extra(rng) / 2;
    p.inputs = Matrix(n_rows_old + n_rows_new, d);
    for (double& v : p.inputs.data()) v = n01(rng);
    std::uniform_int_distribution<std::size_t> old_label(0, c_o - 1), new_label(c_o, c_o + c_n - 1);
    for (std::size_t r = 0; r < n_rows_old + n_rows_new; ++r) {
      p.labels.push_back(r < n_rows_old ? old_label(rng) : new_label(rng));
    }
    std::shuffle(p.labels.begin(), p.labels.end(), rng);
    p.part = partition_batch(p.labels, c_o, c_n);
    p.weights = LossWeights{0.1 + unit(rng), 0.1 + unit(rng), 0.1 + unit(rng), tau(rng)};
    std::vector<double> pr(c_o);
    double s = 0.0;
    for (double& v : pr) s += (v = 0.2 + unit(rng));
    for (double& v : pr) v /= s;
    double sum = 0.0;
    for (double v : pr) sum += v;
    pr.front() += 1.0 - sum;
    p.prior = ClassPrior(std::move(pr));
    if (kink_margin(p.model, p.inputs) > 1e-3) return p;
  }
}

using LossFn = std::function<LossValue(const Matrix&)>;

double check_one(const Problem& p, const LossFn& fn, double step, bool corrupt,
                 std::size_t& entries) {
  const auto fwd = forward(p.model, p.inputs);
  Gradients g = backward(p.model, fwd.cache, fn(fwd.logits).grad);
  if (corrupt) {
    for (auto& w : g.weight) {
      for (double& v : w.data()) v = v * 1.05 + 1e-3;
    }
  }
  Model m = p.model;
  double worst = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + step;
    const double up = fn(logits(m, p.inputs)).value;
    param = saved - step;
    const double down = fn(logits(m, p.inputs)).value;
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
    ++entries;
  };
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    auto& w = m.layers[li].weight.data();
    for (std::size_t i = 0; i < w.size(); ++i) probe(w[i], g.weight[li].data()[i]);
    auto& b = m.layers[li].bias;
    for (std::size_t i = 0; i < b.size(); ++i) probe(b[i], g.bias[li][i]);
  }
  return worst;
}

}  // namespace

GradcheckResult run_gradcheck(const GradcheckOptions& opts) {
  std::mt19937_64 rng(derive_seed(opts.seed, "gradcheck"));
  GradcheckResult res;
  res.losses = {{"L_o", 0.0, 0}, {"L_n", 0.0, 0}, {"L_md", 0.0, 0}, {"L_cl", 0.0, 0}};
  for (std::size_t c = 0; c < opts.configs; ++c) {
    const Problem p = random_problem(rng);
    const std::vector<LossFn> fns = {
        [&](const Matrix& l) { return loss_old(l, p.part, p.labels, p.weights.tau); },
        [&](const Matrix& l) { return loss_new(l, p.part, p.labels); },
        [&](const Matrix& l) { return loss_md(l, p.part, p.labels, p.weights.tau, p.prior); },
        [&](const Matrix& l) {
          auto cl = loss_cl(l, p.part, p.labels, p.weights, p.prior);
          return LossValue{cl.value, std::move(cl.grad)};
        }};
    for (std::size_t k = 0; k < fns.size(); ++k) {
      const bool corrupt = opts.corrupt_gradient && res.losses[k].name == "L_md";
      res.losses[k].max_rel_error = std::max(
          res.losses[k].max_rel_error, check_one(p, fns[k], opts.step, corrupt, res.losses[k].entries));
    }
    ++res.configs;
  }
  res.passed = std::all_of(res.losses.begin(), res.losses.end(), [&](const LossCheck& l) {
    return std::isfinite(l.max_rel_error) && l.max_rel_error <= opts.tolerance;
  });
  return res;
}

}  // namespace icda
