#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <limits>

#include "icda/errors.hpp"
#include "icda/serialize.hpp"
#include "icda/trainer.hpp"

using namespace icda;

namespace {

TrainConfig config(BaselineMode mode, std::uint64_t seed = 7) {
  TrainConfig c;
  c.baseline_mode = mode;
  c.seed = seed;
  return c;
}

const TaskStream& default_stream() {
  static const TaskStream s = generate_synthetic_stream(SyntheticSpec{}, 7);
  return s;
}

}  // namespace

TEST_CASE("predict: argmax with lowest-id tie-break") {
  Model m;
  m.layers.push_back({Matrix(5, 2, std::vector<double>{0, 0, 0, 0, 0, 0, 1, 1, 0, 0}),
                      {0, 0, 0, 0, 0},
                      Activation::identity});
  m.class_domains.assign(5, 0);
  Dataset d = {Sample{{2.0, 1.0}, 3, 0, 0}, Sample{{0.0, 0.0}, 0, 0, 1}};
  const Prediction p = predict(m, d);
  CHECK(p.classes[0] == 3);
  CHECK(p.classes[1] == 0);  // all logits tie
  double s = 0.0;
  for (double v : p.scores.row(0)) s += v;
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("increment 1 only uses plain cross-entropy") {
  auto& calls = loss_call_counters();
  calls.reset();
  IncrementalTrainer tr(config(BaselineMode::lcl), default_stream().feature_dim());
  const auto& rec = tr.run_increment(default_stream().increments[0]);
  CHECK(calls.old_calls == 0);
  CHECK(calls.md_calls == 0);
  CHECK(calls.ce_calls > 0);
  CHECK(rec.classes_seen == 2);
  CHECK(tr.memory().total() == 2 * quota_for(0.25, 60));
  tr.run_increment(default_stream().increments[1]);
  CHECK(calls.md_calls > 0);
  CHECK(calls.old_calls > 0);
}

TEST_CASE("schedule: head grows per increment, reports cover all classes seen") {
  const auto res = run_schedule(default_stream(), config(BaselineMode::lcl));
  REQUIRE(res.history.increments.size() == 11);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < 11; ++i) {
    const auto& rec = res.history.increments[i];
    expected += default_stream().increments[i].new_class_ids.size();
    CHECK(rec.classes_seen == expected);
    CHECK(rec.report.confusion.n_classes() == expected);
    CHECK(rec.group_accuracy.size() == i + 1);
  }
  CHECK(res.model.head_classes() == 12);
  CHECK(res.model.class_domains == std::vector<int>{0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  for (const auto& t : res.history.traces) {
    for (const auto& v : {t.ce, t.old_term, t.new_term, t.md_term}) {
      if (v) {
        CHECK(std::isfinite(*v));
        CHECK(*v >= 0.0);
      }
    }
  }
  CHECK(res.history.manifest.exemplar_ids.size() == 12);
  CHECK(res.history.manifest.feature_extractor == "trained");
}

TEST_CASE("naive fine-tuning forgets, L_cl retains increment-1 classes") {
  const auto naive = run_schedule(default_stream(), config(BaselineMode::naive_finetune));
  const auto lcl = run_schedule(default_stream(), config(BaselineMode::lcl));
  const double naive_first = naive.history.increments.back().group_accuracy.front();
  const double lcl_first = lcl.history.increments.back().group_accuracy.front();
  CHECK(naive_first < 0.5);
  CHECK(lcl_first > naive_first);
  CHECK(naive.history.manifest.exemplar_ids.empty());
  CHECK(naive.history.manifest.tag == "baseline:naive_finetune");
}

TEST_CASE("identical config and seed give identical histories") {
  const auto a = run_schedule(default_stream(), config(BaselineMode::lcl, 3));
  const auto b = run_schedule(default_stream(), config(BaselineMode::lcl, 3));
  CHECK(history_to_json(a.history).dump() == history_to_json(b.history).dump());
  CHECK(a.model == b.model);
  const auto c = run_schedule(default_stream(), config(BaselineMode::lcl, 4));
  CHECK_FALSE(a.model == c.model);
}

TEST_CASE("single-increment stream behaves as plain supervised training") {
  SyntheticSpec spec;
  spec.classes_per_domain = {4};
  spec.increments_per_domain = {1};
  spec.cluster_spread = 0.05;
  const auto s = generate_synthetic_stream(spec, 2);
  auto& calls = loss_call_counters();
  calls.reset();
  TrainConfig cfg = config(BaselineMode::lcl);
  cfg.epochs_per_increment = 20;
  const auto res = run_schedule(s, cfg);
  CHECK(calls.new_calls == 0);
  CHECK(calls.md_calls == 0);
  CHECK(res.history.increments.back().report.accuracy == 1.0);
}

TEST_CASE("near-zero spread stream is classified perfectly after the first increment") {
  SyntheticSpec spec;
  spec.cluster_spread = 0.01;
  const auto s = generate_synthetic_stream(spec, 6);
  TrainConfig cfg = config(BaselineMode::lcl);
  cfg.epochs_per_increment = 10;
  IncrementalTrainer tr(cfg, s.feature_dim());
  CHECK(tr.run_increment(s.increments[0]).report.accuracy == 1.0);
}

TEST_CASE("run_increment rejects non-contiguous classes and reports numeric failure") {
  IncrementalTrainer tr(config(BaselineMode::lcl), default_stream().feature_dim());
  CHECK_THROWS_AS(tr.run_increment(default_stream().increments[1]), DomainError);

  IncrementSpec bad = default_stream().increments[0];
  bad.train[3].features[0] = std::numeric_limits<double>::quiet_NaN();
  IncrementalTrainer tr2(config(BaselineMode::lcl), default_stream().feature_dim());
  try {
    tr2.run_increment(bad);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("increment 1, epoch 1") != std::string::npos);
  }
}

TEST_CASE("ablation config zeroes beta and tags the history") {
  const TrainConfig c = config(BaselineMode::lcl_no_md);
  CHECK(c.effective_weights().beta == 0.0);
  CHECK(c.effective_weights().alpha == 0.25);
  IncrementalTrainer tr(c, 4);
  CHECK(tr.history().manifest.tag == "ablation:no_md");
}

TEST_CASE("default stream finishes well inside two minutes") {
  const auto t0 = std::chrono::steady_clock::now();
  run_schedule(default_stream(), config(BaselineMode::lcl));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 120.0);
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = TrainConfig{};
  c.epochs_per_increment = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = TrainConfig{};
  c.quota_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), DomainError);
  CHECK(baseline_mode_from_string("naive_finetune") == BaselineMode::naive_finetune);
  CHECK_THROWS_AS(baseline_mode_from_string("icarl"), DomainError);
}

TEST_CASE("model json round-trip") {
  const auto res = run_schedule(default_stream(), config(BaselineMode::lcl));
  const Model back = model_from_json(json::parse(model_to_json(res.model).dump()));
  CHECK(back == res.model);
}
