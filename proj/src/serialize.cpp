#include "icda/serialize.hpp"

#include <charconv>
#include <sstream>

#include "icda/errors.hpp"

namespace icda {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

json model_to_json(const Model& model) {
  json j;
  j["format"] = "icda-model";
  j["version"] = 1;
  j["rng_seed"] = model.rng_seed;
  j["class_domains"] = model.class_domains;
  json layers = json::array();
  for (const auto& l : model.layers) {
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"activation", to_string(l.activation)},
                      {"weight", l.weight.data()},
                      {"bias", l.bias}});
  }
  j["layers"] = std::move(layers);
  return j;
}

Model model_from_json(const json& j) {
  if (j.value("format", "") != "icda-model") throw DomainError("not an icda model file");
  Model m;
  m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  m.class_domains = j.at("class_domains").get<std::vector<int>>();
  for (const auto& lj : j.at("layers")) {
    DenseLayer l;
    l.weight = Matrix(lj.at("rows").get<std::size_t>(), lj.at("cols").get<std::size_t>(),
                      lj.at("weight").get<std::vector<double>>());
    l.bias = lj.at("bias").get<std::vector<double>>();
    l.activation = activation_from_string(lj.at("activation").get<std::string>());
    m.layers.push_back(std::move(l));
  }
  m.validate();
  return m;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json report_to_json(const EvalReport& r) {
  json j;
  j["averaging"] = "macro";
  j["accuracy"] = r.accuracy;
  j["tpr"] = r.tpr;
  j["tnr"] = r.tnr;
  j["ppv"] = r.ppv;
  j["f1"] = r.f1;
  j["warnings"] = r.warnings;
  j["warning_messages"] = r.warning_messages;
  json pc = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    json e{{"class", c},         {"tp", m.tp},         {"fp", m.fp},
           {"fn", m.fn},         {"tn", m.tn},         {"accuracy", m.accuracy},
           {"tpr", opt(m.tpr)},  {"tnr", opt(m.tnr)},  {"ppv", opt(m.ppv)},
           {"f1", opt(m.f1)}};
    if (c < r.auc.size()) e["auc"] = opt(r.auc[c]);
    pc.push_back(std::move(e));
  }
  j["per_class"] = std::move(pc);
  json cm = json::array();
  for (std::size_t t = 0; t < r.confusion.n_classes(); ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < r.confusion.n_classes(); ++p) row.push_back(r.confusion.at(t, p));
    cm.push_back(std::move(row));
  }
  j["confusion"] = std::move(cm);
  return j;
}

json train_config_to_json(const TrainConfig& cfg) {
  return {{"alpha", cfg.weights.alpha},
          {"beta", cfg.weights.beta},
          {"gamma", cfg.weights.gamma},
          {"tau", cfg.weights.tau},
          {"epochs_per_increment", cfg.epochs_per_increment},
          {"batch_size", cfg.batch_size},
          {"quota_fraction", cfg.quota_fraction},
          {"seed", cfg.seed},
          {"baseline_mode", to_string(cfg.baseline_mode)},
          {"hidden", cfg.hidden},
          {"adadelta_rho", cfg.adadelta_rho},
          {"adadelta_epsilon", cfg.adadelta_epsilon}};
}

json manifest_to_json(const RunManifest& m, const TrainConfig& cfg) {
  json j;
  j["tag"] = m.tag;
  j["seed"] = m.seed;
  j["sub_seeds"] = m.sub_seeds;
  j["feature_extractor"] = m.feature_extractor;
  j["config"] = train_config_to_json(cfg);
  json ex = json::object();
  for (const auto& [c, ids] : m.exemplar_ids) ex[std::to_string(c)] = ids;
  j["exemplar_ids"] = std::move(ex);
  return j;
}

json history_to_json(const RunHistory& h) {
  json j;
  j["format"] = "icda-history";
  j["version"] = 1;
  j["tag"] = h.manifest.tag;
  j["manifest"] = manifest_to_json(h.manifest, h.config);
  json incs = json::array();
  for (const auto& rec : h.increments) {
    incs.push_back({{"increment", rec.increment},
                    {"domain", rec.domain},
                    {"classes_seen", rec.classes_seen},
                    {"test_samples", rec.test_samples},
                    {"memory_size", rec.memory_size},
                    {"group_accuracy", rec.group_accuracy},
                    {"report", report_to_json(rec.report)}});
  }
  j["increments"] = std::move(incs);
  json traces = json::array();
  for (const auto& t : h.traces) {
    traces.push_back({{"increment", t.increment},
                      {"epoch", t.epoch},
                      {"batches", t.batches},
                      {"total", t.total},
                      {"ce", opt(t.ce)},
                      {"L_o", opt(t.old_term)},
                      {"L_n", opt(t.new_term)},
                      {"L_md", opt(t.md_term)},
                      {"md_skipped", t.md_skipped}});
  }
  j["traces"] = std::move(traces);
  return j;
}

std::string curves_csv(const RunHistory& h) {
  std::ostringstream os;
  os << "increment,domain,classes_seen,accuracy,tpr,tnr,ppv,f1,acc_increment_1,acc_latest,"
        "L_o,L_n,L_md,ce\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& rec : h.increments) {
    const EpochTrace* last = nullptr;
    for (const auto& t : h.traces) {
      if (t.increment == rec.increment) last = &t;
    }
    const auto& r = rec.report;
    os << rec.increment << ',' << rec.domain << ',' << rec.classes_seen << ','
       << format_double(r.accuracy) << ',' << format_double(r.tpr) << ','
       << format_double(r.tnr) << ',' << format_double(r.ppv) << ',' << format_double(r.f1)
       << ','
       << (rec.group_accuracy.empty() ? "" : format_double(rec.group_accuracy.front())) << ','
       << (rec.group_accuracy.empty() ? "" : format_double(rec.group_accuracy.back())) << ','
       << (last ? cell(last->old_term) : "") << ',' << (last ? cell(last->new_term) : "") << ','
       << (last ? cell(last->md_term) : "") << ',' << (last ? cell(last->ce) : "") << '\n';
  }
  return os.str();
}

}  // namespace icda
