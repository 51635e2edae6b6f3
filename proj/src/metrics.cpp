#include "icda/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "icda/errors.hpp"

namespace icda {

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream os;
  os << "true\\pred";
  for (std::size_t p = 0; p < n_; ++p) os << ',' << p;
  os << '\n';
  for (std::size_t t = 0; t < n_; ++t) {
    os << t;
    for (std::size_t p = 0; p < n_; ++p) os << ',' << at(t, p);
    os << '\n';
  }
  return os.str();
}

ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                          std::size_t n_classes) {
  if (preds.size() != labels.size()) throw ShapeError("confusion: prediction/label count mismatch");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= n_classes || labels[i] >= n_classes) {
      throw DomainError("confusion: class id outside [0, " + std::to_string(n_classes) + ")");
    }
    ++cm.at(labels[i], preds[i]);
  }
  return cm;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport classification_metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw DomainError("classification_metrics: empty confusion matrix");
  const std::size_t n = cm.n_classes();
  EvalReport rep;
  rep.confusion = cm;
  rep.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);

  std::vector<std::uint64_t> row(n, 0), col(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t p = 0; p < n; ++p) {
      row[t] += cm.at(t, p);
      col[p] += cm.at(t, p);
    }
  }
  double sums[4] = {0, 0, 0, 0};
  std::size_t defined[4] = {0, 0, 0, 0};
  static constexpr const char* kNames[4] = {"tpr", "tnr", "ppv", "f1"};
  for (std::size_t c = 0; c < n; ++c) {
    ClassMetrics m;
    m.tp = cm.at(c, c);
    m.fn = row[c] - m.tp;
    m.fp = col[c] - m.tp;
    m.tn = total - m.tp - m.fn - m.fp;
    m.tpr = ratio(m.tp, m.tp + m.fn);
    m.tnr = ratio(m.tn, m.tn + m.fp);
    m.ppv = ratio(m.tp, m.tp + m.fp);
    // 2*PPV*TPR/(PPV+TPR) written over counts, so TP = 0 with support gives 0.
    m.f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
    const std::optional<double>* vals[4] = {&m.tpr, &m.tnr, &m.ppv, &m.f1};
    for (int k = 0; k < 4; ++k) {
      if (vals[k]->has_value()) {
        sums[k] += **vals[k];
        ++defined[k];
      } else {
        ++rep.warnings;
        rep.warning_messages.push_back("class " + std::to_string(c) + ": " + kNames[k] +
                                       " undefined, excluded from macro average");
      }
    }
    rep.per_class.push_back(m);
  }
  double* macro[4] = {&rep.tpr, &rep.tnr, &rep.ppv, &rep.f1};
  for (int k = 0; k < 4; ++k) {
    *macro[k] = defined[k] ? sums[k] / static_cast<double>(defined[k]) : 0.0;
  }
  return rep;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> positive) {
  if (scores.size() != positive.size()) throw ShapeError("roc_auc: score/label count mismatch");
  std::uint64_t n_pos = 0;
  for (int p : positive) n_pos += p != 0 ? 1 : 0;
  const std::uint64_t n_neg = positive.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("roc_auc needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::uint64_t tp = 0, fp = 0;
  double area2 = 0.0;  // twice the area, in count units
  for (std::size_t i = 0; i < order.size();) {
    const double thr = scores[order[i]];
    const std::uint64_t tp0 = tp, fp0 = fp;
    while (i < order.size() && scores[order[i]] == thr) {
      (positive[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    area2 += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos), thr});
  }
  curve.auc = area2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return curve;
}

double relative_percentage(double leading, double lagging) {
  if (!(lagging > 0.0)) throw DomainError("relative_percentage needs a positive lagging score");
  return (leading - lagging) / lagging * 100.0;
}

}  // namespace icda
