#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace icda {

// counts[t][p]: samples of true class t predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 0)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t n_classes() const { return n_; }
  std::uint64_t& at(std::size_t t, std::size_t p) { return counts_[t * n_ + p]; }
  std::uint64_t at(std::size_t t, std::size_t p) const { return counts_[t * n_ + p]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;

  std::string to_csv() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                          std::size_t n_classes);

// One-vs-rest counts and rates of a single class. A rate is empty when its
// denominator is zero.
struct ClassMetrics {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> tpr, tnr, ppv, f1;
  double accuracy = 0.0;  // one-vs-rest (TP + TN) / total
};

// Macro-averaged metrics. Each macro value is the mean over classes where the
// metric is defined; `warnings` counts (class, metric) pairs left out.
struct EvalReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double tpr = 0.0, tnr = 0.0, ppv = 0.0, f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::optional<double>> auc;  // one-vs-rest per class, when computed
  std::size_t warnings = 0;
  std::vector<std::string> warning_messages;
};

EvalReport classification_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Threshold sweep over the distinct scores (descending); tied scores move
// together, giving a diagonal segment. AUC by the trapezoid rule.
// `positive` holds 1 for the positive class and 0 otherwise.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> positive);

// (leading - lagging) / lagging * 100.
double relative_percentage(double leading, double lagging);

}  // namespace icda
