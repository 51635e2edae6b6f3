#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icda/data.hpp"
#include "icda/losses.hpp"
#include "icda/metrics.hpp"
#include "icda/nn.hpp"
#include "icda/rehearsal.hpp"

namespace icda {

enum class BaselineMode {
  lcl,             // full continual-learning objective
  lcl_no_md,       // same with the mutual distillation weight forced to 0
  naive_finetune,  // cross-entropy on new-class data only, no rehearsal
};

std::string to_string(BaselineMode m);
BaselineMode baseline_mode_from_string(const std::string& s);

struct TrainConfig {
  LossWeights weights;
  std::size_t epochs_per_increment = 5;
  std::size_t batch_size = 16;
  double quota_fraction = 0.25;
  std::uint64_t seed = 7;
  BaselineMode baseline_mode = BaselineMode::lcl;
  std::vector<std::size_t> hidden{64, 32};
  double adadelta_rho = 0.95;
  double adadelta_epsilon = 1e-6;
  bool verbose = false;

  void validate() const;
  // Weights actually used for training (beta is zeroed in the ablation).
  LossWeights effective_weights() const;
};

// Mean loss components of one epoch. A component is empty when no batch of
// the epoch evaluated it.
struct EpochTrace {
  std::size_t increment = 0;  // 1-based
  std::size_t epoch = 0;      // 1-based
  std::size_t batches = 0;
  double total = 0.0;
  std::optional<double> ce, old_term, new_term, md_term;
  std::size_t md_skipped = 0;  // batches where L_md was skipped for lack of one side
};

struct IncrementRecord {
  std::size_t increment = 0;  // 1-based
  int domain = 0;
  std::size_t classes_seen = 0;
  std::size_t test_samples = 0;
  std::size_t memory_size = 0;
  EvalReport report;
  // Accuracy on the test samples of each increment seen so far (index 0 is
  // increment 1).
  std::vector<double> group_accuracy;
};

struct RunManifest {
  std::uint64_t seed = 0;
  std::map<std::string, std::uint64_t> sub_seeds;
  std::string feature_extractor = "trained";  // all layers are updated in every increment
  std::map<std::size_t, std::vector<std::uint64_t>> exemplar_ids;
  std::string tag;
};

struct RunHistory {
  TrainConfig config;
  RunManifest manifest;
  std::vector<IncrementRecord> increments;
  std::vector<EpochTrace> traces;
};

struct Prediction {
  std::vector<std::size_t> classes;
  Matrix scores;  // softmax over the full head at unit temperature
};

// Argmax of the full-head softmax; ties resolve to the lowest class id.
Prediction predict(const Model& model, const Dataset& samples);

// Holds the evolving model and rehearsal memory across increments.
class IncrementalTrainer {
 public:
  IncrementalTrainer(TrainConfig cfg, std::size_t input_dim);

  // Expands the head, trains for the configured epochs on rehearsal-mixed
  // batches, stores exemplars of the new classes and evaluates every class
  // learned so far on the union of the test sets seen so far.
  const IncrementRecord& run_increment(const IncrementSpec& inc);

  const Model& model() const { return model_; }
  const RehearsalMemory& memory() const { return memory_; }
  const RunHistory& history() const { return history_; }

 private:
  struct BatchLoss {
    double value = 0.0;
    std::optional<double> ce, old_term, new_term, md_term;
  };
  BatchLoss train_batch(const TrainingBatch& batch, bool first_increment, AdadeltaState& opt,
                        EpochTrace& trace);

  TrainConfig cfg_;
  Model model_;
  RehearsalMemory memory_;
  RunHistory history_;
  Dataset seen_test_;
  std::vector<std::size_t> class_group_;  // class id -> increment index (0-based)
};

struct ScheduleResult {
  RunHistory history;
  Model model;
};

ScheduleResult run_schedule(const TaskStream& stream, const TrainConfig& cfg);

}  // namespace icda
