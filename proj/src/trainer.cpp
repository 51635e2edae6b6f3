#include "icda/trainer.hpp"

#include <cmath>
#include <iostream>

#include "icda/errors.hpp"
#include "icda/seed.hpp"

namespace icda {

std::string to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::lcl: return "lcl";
    case BaselineMode::lcl_no_md: return "lcl_no_md";
    case BaselineMode::naive_finetune: return "naive_finetune";
  }
  return "lcl";
}

BaselineMode baseline_mode_from_string(const std::string& s) {
  if (s == "lcl") return BaselineMode::lcl;
  if (s == "lcl_no_md") return BaselineMode::lcl_no_md;
  if (s == "naive_finetune") return BaselineMode::naive_finetune;
  throw DomainError("unknown baseline_mode '" + s + "' (lcl, lcl_no_md, naive_finetune)");
}

void TrainConfig::validate() const {
  weights.validate();
  if (epochs_per_increment < 1) throw DomainError("epochs_per_increment must be >= 1");
  if (batch_size < 2) throw DomainError("batch_size must be >= 2");
  if (!(quota_fraction > 0.0 && quota_fraction <= 1.0)) {
    throw DomainError("quota_fraction must lie in (0, 1]");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw DomainError("hidden layer widths must be positive");
  }
  if (!(adadelta_rho >= 0.0 && adadelta_rho < 1.0)) throw DomainError("adadelta rho in [0, 1)");
  if (!(adadelta_epsilon > 0.0)) throw DomainError("adadelta epsilon must be positive");
}

LossWeights TrainConfig::effective_weights() const {
  LossWeights w = weights;
  if (baseline_mode == BaselineMode::lcl_no_md) w.beta = 0.0;
  return w;
}

Prediction predict(const Model& model, const Dataset& samples) {
  Prediction out;
  const Matrix l = logits(model, features_matrix(samples));
  out.scores = Matrix(l.rows(), l.cols());
  out.classes.reserve(l.rows());
  for (std::size_t r = 0; r < l.rows(); ++r) {
    const auto p = softmax_temp(l.row(r), 1.0);
    std::copy(p.begin(), p.end(), out.scores.row(r).begin());
    std::size_t best = 0;
    for (std::size_t j = 1; j < l.cols(); ++j) {
      if (l(r, j) > l(r, best)) best = j;
    }
    out.classes.push_back(best);
  }
  return out;
}

namespace {

struct RunningMean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(const std::optional<double>& v) {
    if (!v) return;
    sum += *v;
    ++n;
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

}  // namespace

IncrementalTrainer::IncrementalTrainer(TrainConfig cfg, std::size_t input_dim)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::uint64_t init_seed = derive_seed(cfg_.seed, "init");
  model_ = make_model(input_dim, cfg_.hidden, init_seed);
  memory_.selection_seed = derive_seed(cfg_.seed, "exemplars");
  history_.config = cfg_;
  history_.manifest.seed = cfg_.seed;
  history_.manifest.sub_seeds = {{"init", init_seed},
                                 {"exemplars", memory_.selection_seed},
                                 {"shuffle", derive_seed(cfg_.seed, "shuffle")},
                                 {"head", derive_seed(cfg_.seed, "head")}};
  switch (cfg_.baseline_mode) {
    case BaselineMode::lcl: history_.manifest.tag = "lcl"; break;
    case BaselineMode::lcl_no_md: history_.manifest.tag = "ablation:no_md"; break;
    case BaselineMode::naive_finetune: history_.manifest.tag = "baseline:naive_finetune"; break;
  }
}

IncrementalTrainer::BatchLoss IncrementalTrainer::train_batch(const TrainingBatch& batch,
                                                              bool first_increment,
                                                              AdadeltaState& opt,
                                                              EpochTrace& trace) {
  auto fwd = forward(model_, batch.features);
  BatchLoss out;
  double& value = out.value;
  Matrix grad;
  const bool plain_ce = first_increment || cfg_.baseline_mode == BaselineMode::naive_finetune;
  if (plain_ce) {
    auto ce = cross_entropy(fwd.logits, batch.labels);
    value = ce.value;
    grad = std::move(ce.grad);
    out.ce = ce.value;
  } else {
    const LossWeights w = cfg_.effective_weights();
    const BatchPartition& part = batch.partition;
    if (part.has_old() && part.has_new()) {
      const ClassPrior prior = empirical_prior(batch.labels, part);
      auto cl = loss_cl(fwd.logits, part, batch.labels, w, prior);
      value = cl.value;
      grad = std::move(cl.grad);
      out.old_term = cl.components.old_term;
      out.new_term = cl.components.new_term;
      out.md_term = cl.components.md_term;
    } else {
      // One side is missing: L_md cannot couple old and new rows.
      ++trace.md_skipped;
      if (cfg_.verbose) {
        std::clog << "insufficient partition: L_md skipped (increment " << trace.increment
                  << ", epoch " << trace.epoch << ")\n";
      }
      auto part_loss = part.has_new() ? loss_new(fwd.logits, part, batch.labels)
                                      : loss_old(fwd.logits, part, batch.labels, w.tau);
      const double scale = part.has_new() ? w.alpha : w.gamma;
      (part.has_new() ? out.new_term : out.old_term) = part_loss.value;
      value = scale * part_loss.value;
      grad = std::move(part_loss.grad);
      for (double& g : grad.data()) g *= scale;
    }
  }
  if (!std::isfinite(value)) throw NumericError("non-finite loss");
  const Gradients g = backward(model_, fwd.cache, grad);
  adadelta_step(model_, g, opt);
  return out;
}

const IncrementRecord& IncrementalTrainer::run_increment(const IncrementSpec& inc) {
  const std::size_t index = history_.increments.size();
  const std::size_t c_old = model_.head_classes();
  const std::size_t c_new = inc.new_class_ids.size();
  if (c_new == 0) throw DomainError("increment adds no classes");
  for (std::size_t k = 0; k < c_new; ++k) {
    if (inc.new_class_ids[k] != c_old + k) {
      throw DomainError("increment " + std::to_string(index + 1) +
                        ": new class ids must continue the head at " + std::to_string(c_old));
    }
  }
  model_ = expand_head(model_, c_new, inc.domain, derive_seed(cfg_.seed, "head", index));
  AdadeltaState opt = make_adadelta_state(model_, cfg_.adadelta_rho, cfg_.adadelta_epsilon);

  const bool naive = cfg_.baseline_mode == BaselineMode::naive_finetune;
  const bool first_increment = c_old == 0 && memory_.empty();
  const RehearsalMemory no_memory;
  const RehearsalMemory& replay = naive ? no_memory : memory_;

  for (std::size_t epoch = 0; epoch < cfg_.epochs_per_increment; ++epoch) {
    EpochTrace trace;
    trace.increment = index + 1;
    trace.epoch = epoch + 1;
    RunningMean total, ce, old_term, new_term, md_term;
    const auto batches = build_increment_batches(inc.train, replay, cfg_.batch_size, c_old, c_new,
                                                 derive_seed(cfg_.seed, "shuffle", index, epoch));
    for (std::size_t b = 0; b < batches.size(); ++b) {
      try {
        const BatchLoss l = train_batch(batches[b], first_increment, opt, trace);
        total.add(l.value);
        ce.add(l.ce);
        old_term.add(l.old_term);
        new_term.add(l.new_term);
        md_term.add(l.md_term);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (increment " + std::to_string(index + 1) +
                           ", epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(b + 1) + ")");
      }
    }
    trace.batches = batches.size();
    trace.total = total.mean().value_or(0.0);
    trace.ce = ce.mean();
    trace.old_term = old_term.mean();
    trace.new_term = new_term.mean();
    trace.md_term = md_term.mean();
    history_.traces.push_back(trace);
  }

  if (!naive) {
    for (std::size_t c : inc.new_class_ids) {
      std::size_t size = 0;
      for (const auto& s : inc.train) size += s.label == c ? 1 : 0;
      const std::size_t cls[1] = {c};
      memory_ = update_memory(std::move(memory_), inc.train, cls,
                              quota_for(cfg_.quota_fraction, size));
      std::vector<std::uint64_t> ids;
      for (const auto& s : memory_.buckets.at(c).exemplars) ids.push_back(s.id);
      history_.manifest.exemplar_ids[c] = std::move(ids);
    }
  }

  seen_test_.insert(seen_test_.end(), inc.test.begin(), inc.test.end());
  class_group_.insert(class_group_.end(), c_new, index);

  IncrementRecord rec;
  rec.increment = index + 1;
  rec.domain = inc.domain;
  rec.classes_seen = model_.head_classes();
  rec.test_samples = seen_test_.size();
  rec.memory_size = memory_.total();
  if (!seen_test_.empty()) {
    const Prediction pred = predict(model_, seen_test_);
    std::vector<std::size_t> labels;
    labels.reserve(seen_test_.size());
    for (const auto& s : seen_test_) labels.push_back(s.label);
    rec.report = classification_metrics(confusion(pred.classes, labels, rec.classes_seen));
    rec.report.auc.resize(rec.classes_seen);
    for (std::size_t c = 0; c < rec.classes_seen; ++c) {
      std::vector<double> scores(labels.size());
      std::vector<int> pos(labels.size());
      bool any_pos = false, any_neg = false;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        scores[i] = pred.scores(i, c);
        pos[i] = labels[i] == c ? 1 : 0;
        (pos[i] ? any_pos : any_neg) = true;
      }
      if (any_pos && any_neg) rec.report.auc[c] = roc_auc(scores, pos).auc;
    }
    std::vector<std::size_t> hit(index + 1, 0), seen(index + 1, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::size_t grp = class_group_[labels[i]];
      ++seen[grp];
      hit[grp] += pred.classes[i] == labels[i] ? 1 : 0;
    }
    for (std::size_t g = 0; g <= index; ++g) {
      rec.group_accuracy.push_back(
          seen[g] ? static_cast<double>(hit[g]) / static_cast<double>(seen[g]) : 0.0);
    }
  }
  if (cfg_.verbose) {
    std::clog << "increment " << rec.increment << ": classes=" << rec.classes_seen
              << " acc=" << rec.report.accuracy << " f1=" << rec.report.f1 << '\n';
  }
  history_.increments.push_back(std::move(rec));
  return history_.increments.back();
}

ScheduleResult run_schedule(const TaskStream& stream, const TrainConfig& cfg) {
  stream.validate();
  IncrementalTrainer trainer(cfg, stream.feature_dim());
  for (const auto& inc : stream.increments) trainer.run_increment(inc);
  return {trainer.history(), trainer.model()};
}

}  // namespace icda
