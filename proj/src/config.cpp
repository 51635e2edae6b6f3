#include "icda/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "icda/errors.hpp"

namespace icda {

using json = nlohmann::json;

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& section) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

SyntheticSpec parse_synthetic(const json& j) {
  reject_unknown(j,
                 {"classes_per_domain", "increments_per_domain", "dims", "cluster_spread",
                  "train_per_class", "test_per_class", "domain_shift", "pair_radius",
                  "sibling_radius"},
                 "stream.synthetic");
  SyntheticSpec s;
  read(j, "classes_per_domain", s.classes_per_domain);
  read(j, "increments_per_domain", s.increments_per_domain);
  read(j, "dims", s.dims);
  read(j, "cluster_spread", s.cluster_spread);
  read(j, "train_per_class", s.train_per_class);
  read(j, "test_per_class", s.test_per_class);
  read(j, "domain_shift", s.domain_shift);
  read(j, "pair_radius", s.pair_radius);
  read(j, "sibling_radius", s.sibling_radius);
  s.validate();
  return s;
}

TrainConfig parse_train(const json& j) {
  reject_unknown(j,
                 {"alpha", "beta", "gamma", "tau", "epochs_per_increment", "batch_size",
                  "quota_fraction", "seed", "baseline_mode", "hidden", "adadelta_rho",
                  "adadelta_epsilon", "verbose"},
                 "train");
  TrainConfig t;
  read(j, "alpha", t.weights.alpha);
  read(j, "beta", t.weights.beta);
  read(j, "gamma", t.weights.gamma);
  read(j, "tau", t.weights.tau);
  read(j, "epochs_per_increment", t.epochs_per_increment);
  read(j, "batch_size", t.batch_size);
  read(j, "quota_fraction", t.quota_fraction);
  read(j, "seed", t.seed);
  if (j.contains("baseline_mode")) {
    t.baseline_mode = baseline_mode_from_string(j.at("baseline_mode").get<std::string>());
  }
  read(j, "hidden", t.hidden);
  read(j, "adadelta_rho", t.adadelta_rho);
  read(j, "adadelta_epsilon", t.adadelta_epsilon);
  read(j, "verbose", t.verbose);
  t.validate();
  return t;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  try {
    const json root = json::parse(text);
    if (!root.is_object()) throw ConfigError("config root must be an object");
    reject_unknown(root, {"schema_version", "stream", "train", "output"}, "<root>");
    if (!root.contains("schema_version")) throw ConfigError("missing schema_version");
    cfg.schema_version = root.at("schema_version").get<int>();
    if (cfg.schema_version != kConfigSchemaVersion) {
      throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));
    }
    if (root.contains("train")) cfg.train = parse_train(root.at("train"));
    cfg.stream_seed = cfg.train.seed;

    if (!root.contains("stream")) throw ConfigError("missing section 'stream'");
    const json& stream = root.at("stream");
    reject_unknown(stream, {"synthetic", "csv", "seed"}, "stream");
    read(stream, "seed", cfg.stream_seed);
    const bool has_syn = stream.contains("synthetic");
    const bool has_csv = stream.contains("csv");
    if (has_syn == has_csv) {
      throw ConfigError("stream needs exactly one source: 'synthetic' or 'csv'");
    }
    if (has_syn) cfg.synthetic = parse_synthetic(stream.at("synthetic"));
    if (has_csv) {
      const json& incs = stream.at("csv").at("increments");
      if (!incs.is_array() || incs.empty()) throw ConfigError("stream.csv.increments is empty");
      for (const auto& ij : incs) {
        reject_unknown(ij, {"train", "test", "train_fraction"}, "stream.csv.increments[]");
        CsvIncrementSource src;
        src.train = base_dir / ij.at("train").get<std::string>();
        if (ij.contains("test")) src.test = base_dir / ij.at("test").get<std::string>();
        read(ij, "train_fraction", src.train_fraction);
        for (const auto& p : {std::optional(src.train), src.test}) {
          if (p && !std::filesystem::exists(*p)) {
            throw ConfigError("missing CSV file: " + p->string());
          }
        }
        if (!src.test && !(src.train_fraction > 0.0 && src.train_fraction < 1.0)) {
          throw ConfigError("train_fraction must lie in (0, 1)");
        }
        cfg.csv_increments.push_back(std::move(src));
      }
    }
    if (root.contains("output")) {
      const json& out = root.at("output");
      reject_unknown(out, {"dir", "formats"}, "output");
      if (out.contains("dir")) cfg.output_dir = out.at("dir").get<std::string>();
      read(out, "formats", cfg.formats);
      for (const auto& f : cfg.formats) {
        if (f != "json" && f != "csv") throw ConfigError("unknown report format '" + f + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* root = std::getenv("ICDA_OUTPUT_ROOT"); root && *root &&
                                                          cfg.output_dir.is_relative()) {
    return std::filesystem::path(root) / cfg.output_dir;
  }
  return cfg.output_dir;
}

TaskStream build_stream(const RunConfig& cfg) {
  if (cfg.synthetic) return generate_synthetic_stream(*cfg.synthetic, cfg.stream_seed);
  TaskStream stream;
  std::uint64_t next_id = 0;
  std::optional<int> first_domain;
  stream.stage_boundary = cfg.csv_increments.size();
  for (std::size_t i = 0; i < cfg.csv_increments.size(); ++i) {
    const auto& src = cfg.csv_increments[i];
    IncrementSpec inc;
    Dataset train = load_csv_dataset(src.train);
    if (src.test) {
      inc.train = std::move(train);
      inc.test = load_csv_dataset(*src.test);
    } else {
      auto parts = split(train, src.train_fraction, cfg.stream_seed + i);
      inc.train = std::move(parts.train);
      inc.test = std::move(parts.test);
    }
    if (inc.train.empty()) throw ConfigError(src.train.string() + ": no samples");
    std::set<std::size_t> labels;
    std::set<int> domains;
    for (auto* set : {&inc.train, &inc.test}) {
      for (auto& s : *set) {
        labels.insert(s.label);
        domains.insert(s.domain);
        s.id = next_id++;
      }
    }
    if (domains.size() != 1) {
      throw ConfigError(src.train.string() + ": an increment must come from a single domain");
    }
    inc.domain = *domains.begin();
    inc.new_class_ids.assign(labels.begin(), labels.end());
    if (!first_domain) first_domain = inc.domain;
    if (inc.domain != *first_domain && stream.stage_boundary == cfg.csv_increments.size()) {
      stream.stage_boundary = i;
    }
    stream.increments.push_back(std::move(inc));
  }
  try {
    stream.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("csv stream: ") + e.what());
  }
  return stream;
}

}  // namespace icda
