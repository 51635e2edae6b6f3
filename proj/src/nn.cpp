#include "icda/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace icda {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw DomainError("unknown activation '" + s + "'");
}

void Model::validate() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias length " +
                       std::to_string(l.bias.size()) + " != output dim " +
                       std::to_string(l.out_dim()));
    }
    if (i + 1 < layers.size() && layers[i + 1].in_dim() != l.out_dim()) {
      throw ShapeError("layer " + std::to_string(i + 1) + ": input dim " +
                       std::to_string(layers[i + 1].in_dim()) + " != layer " +
                       std::to_string(i) + " output dim " + std::to_string(l.out_dim()));
    }
  }
  if (class_domains.size() != head_classes()) {
    throw ShapeError("class_domains length " + std::to_string(class_domains.size()) +
                     " != head classes " + std::to_string(head_classes()));
  }
}

namespace {

void fill_uniform(std::span<double> out, std::size_t fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : out) v = dist(rng);
}

}  // namespace

Model make_model(std::size_t input_dim, std::span<const std::size_t> hidden, std::uint64_t seed) {
  if (input_dim == 0) throw DomainError("input dimension must be positive");
  Model m;
  m.rng_seed = seed;
  std::mt19937_64 rng(seed);
  std::size_t in = input_dim;
  for (std::size_t width : hidden) {
    if (width == 0) throw DomainError("hidden width must be positive");
    DenseLayer l{Matrix(width, in), std::vector<double>(width, 0.0), Activation::relu};
    fill_uniform(l.weight.data(), in, rng);
    m.layers.push_back(std::move(l));
    in = width;
  }
  m.layers.push_back(DenseLayer{Matrix(0, in), {}, Activation::identity});
  return m;
}

ForwardResult forward(const Model& model, const Matrix& batch) {
  ForwardResult out;
  Matrix x = batch;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const DenseLayer& layer = model.layers[li];
    if (x.cols() != layer.in_dim()) {
      throw ShapeError("layer " + std::to_string(li) + ": expected input dim " +
                       std::to_string(layer.in_dim()) + ", got " + std::to_string(x.cols()));
    }
    const std::size_t n = x.rows();
    const std::size_t out_dim = layer.out_dim();
    Matrix z(n, out_dim);
    for (std::size_t r = 0; r < n; ++r) {
      auto xr = x.row(r);
      for (std::size_t o = 0; o < out_dim; ++o) {
        auto w = layer.weight.row(o);
        double acc = layer.bias[o];
        for (std::size_t k = 0; k < xr.size(); ++k) acc += w[k] * xr[k];
        z(r, o) = acc;
      }
    }
    Matrix a = z;
    if (layer.activation == Activation::relu) {
      for (double& v : a.data()) v = v > 0.0 || std::isnan(v) ? v : 0.0;  // NaN propagates
    }
    out.cache.inputs.push_back(std::move(x));
    out.cache.pre.push_back(std::move(z));
    x = std::move(a);
  }
  out.logits = std::move(x);
  return out;
}

Matrix logits(const Model& model, const Matrix& batch) { return forward(model, batch).logits; }

std::vector<double> softmax_temp(std::span<const double> logits_row, double tau, std::size_t begin,
                                 std::size_t end) {
  if (!(tau > 0.0)) throw DomainError("softmax temperature must be positive");
  if (begin >= end) throw DomainError("softmax over an empty slice");
  if (end > logits_row.size()) throw DomainError("softmax slice exceeds logits length");
  double mx = logits_row[begin];
  for (std::size_t j = begin; j < end; ++j) mx = std::max(mx, logits_row[j]);
  std::vector<double> p(end - begin);
  double sum = 0.0;
  for (std::size_t j = begin; j < end; ++j) {
    p[j - begin] = std::exp((logits_row[j] - mx) / tau);
    sum += p[j - begin];
  }
  for (double& v : p) v /= sum;
  return p;
}

Model expand_head(const Model& model, std::size_t n_new, int domain, std::uint64_t seed) {
  if (n_new < 1) throw DomainError("expand_head needs at least one new class");
  Model m = model;
  DenseLayer& head = m.layers.back();
  const std::size_t fan_in = head.in_dim();
  std::vector<double> rows(n_new * fan_in);
  std::mt19937_64 rng(seed);
  fill_uniform(rows, fan_in, rng);
  head.weight.append_rows(n_new, rows);
  head.bias.insert(head.bias.end(), n_new, 0.0);
  m.class_domains.insert(m.class_domains.end(), n_new, domain);
  return m;
}

Gradients zero_gradients_like(const Model& model) {
  Gradients g;
  for (const auto& l : model.layers) {
    g.weight.emplace_back(l.weight.rows(), l.weight.cols());
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

Gradients backward(const Model& model, const ForwardCache& cache, const Matrix& dL_dlogits) {
  const std::size_t nl = model.layers.size();
  if (cache.inputs.size() != nl || cache.pre.size() != nl) {
    throw ShapeError("forward cache does not match model depth");
  }
  const std::size_t n = cache.batch();
  if (dL_dlogits.rows() != n || dL_dlogits.cols() != model.head_classes()) {
    throw ShapeError("dL_dlogits is " + std::to_string(dL_dlogits.rows()) + "x" +
                     std::to_string(dL_dlogits.cols()) + ", logits are " + std::to_string(n) +
                     "x" + std::to_string(model.head_classes()));
  }
  Gradients g = zero_gradients_like(model);
  Matrix delta = dL_dlogits;
  for (std::size_t li = nl; li-- > 0;) {
    const DenseLayer& layer = model.layers[li];
    if (layer.activation == Activation::relu) {
      const Matrix& z = cache.pre[li];
      for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!(z.data()[i] > 0.0)) delta.data()[i] = 0.0;
      }
    }
    const Matrix& x = cache.inputs[li];
    Matrix& gw = g.weight[li];
    auto& gb = g.bias[li];
    for (std::size_t r = 0; r < n; ++r) {
      auto d = delta.row(r);
      auto xr = x.row(r);
      for (std::size_t o = 0; o < d.size(); ++o) {
        if (d[o] == 0.0) continue;
        gb[o] += d[o];
        auto gwr = gw.row(o);
        for (std::size_t k = 0; k < xr.size(); ++k) gwr[k] += d[o] * xr[k];
      }
    }
    if (li == 0) break;
    Matrix prev(n, layer.in_dim());
    for (std::size_t r = 0; r < n; ++r) {
      auto d = delta.row(r);
      auto pr = prev.row(r);
      for (std::size_t o = 0; o < d.size(); ++o) {
        if (d[o] == 0.0) continue;
        auto w = layer.weight.row(o);
        for (std::size_t k = 0; k < pr.size(); ++k) pr[k] += d[o] * w[k];
      }
    }
    delta = std::move(prev);
  }
  return g;
}

AdadeltaState make_adadelta_state(const Model& model, double rho, double epsilon) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("adadelta rho must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw DomainError("adadelta epsilon must be positive");
  AdadeltaState s;
  s.rho = rho;
  s.epsilon = epsilon;
  for (const auto& l : model.layers) {
    s.sq_grad_w.emplace_back(l.weight.rows(), l.weight.cols());
    s.sq_update_w.emplace_back(l.weight.rows(), l.weight.cols());
    s.sq_grad_b.emplace_back(l.bias.size(), 0.0);
    s.sq_update_b.emplace_back(l.bias.size(), 0.0);
  }
  return s;
}

namespace {

void check_finite(const Gradients& g) {
  for (std::size_t li = 0; li < g.weight.size(); ++li) {
    const Matrix& w = g.weight[li];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        if (!std::isfinite(w(r, c))) {
          throw NumericError("non-finite gradient at layers[" + std::to_string(li) + "].weight[" +
                             std::to_string(r) + "," + std::to_string(c) + "]");
        }
      }
    }
    for (std::size_t o = 0; o < g.bias[li].size(); ++o) {
      if (!std::isfinite(g.bias[li][o])) {
        throw NumericError("non-finite gradient at layers[" + std::to_string(li) + "].bias[" +
                           std::to_string(o) + "]");
      }
    }
  }
}

void update(std::span<double> x, std::span<const double> g, std::span<double> eg2,
            std::span<double> edx2, double rho, double eps) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    eg2[i] = rho * eg2[i] + (1.0 - rho) * g[i] * g[i];
    const double dx = -(std::sqrt(edx2[i] + eps) / std::sqrt(eg2[i] + eps)) * g[i];
    edx2[i] = rho * edx2[i] + (1.0 - rho) * dx * dx;
    x[i] += dx;
  }
}

}  // namespace

void adadelta_step(Model& model, const Gradients& grads, AdadeltaState& state) {
  const std::size_t nl = model.layers.size();
  if (grads.weight.size() != nl || grads.bias.size() != nl || state.sq_grad_w.size() != nl) {
    throw ShapeError("adadelta: gradient/state depth does not match model");
  }
  for (std::size_t li = 0; li < nl; ++li) {
    const auto& l = model.layers[li];
    if (grads.weight[li].rows() != l.weight.rows() || grads.weight[li].cols() != l.weight.cols() ||
        grads.bias[li].size() != l.bias.size() ||
        state.sq_grad_w[li].size() != l.weight.size() ||
        state.sq_grad_b[li].size() != l.bias.size()) {
      throw ShapeError("adadelta: shape mismatch at layers[" + std::to_string(li) + "]");
    }
  }
  check_finite(grads);
  for (std::size_t li = 0; li < nl; ++li) {
    auto& l = model.layers[li];
    update(l.weight.data(), grads.weight[li].data(), state.sq_grad_w[li].data(),
           state.sq_update_w[li].data(), state.rho, state.epsilon);
    update(l.bias, grads.bias[li], state.sq_grad_b[li], state.sq_update_b[li], state.rho,
           state.epsilon);
  }
}

}  // namespace icda
