#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "icda/data.hpp"
#include "icda/trainer.hpp"

namespace icda {

inline constexpr int kConfigSchemaVersion = 1;

// One increment read from CSV: either a separate test file or a stratified
// split of `train` with `train_fraction`.
struct CsvIncrementSource {
  std::filesystem::path train;
  std::optional<std::filesystem::path> test;
  double train_fraction = 0.7;
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  std::optional<SyntheticSpec> synthetic;
  std::vector<CsvIncrementSource> csv_increments;
  std::uint64_t stream_seed = 0;
  TrainConfig train;
  std::filesystem::path output_dir = "runs/default";
  std::vector<std::string> formats{"json", "csv"};

  bool wants(const std::string& format) const;
};

// Reads and validates a JSON run configuration. Relative CSV paths resolve
// against the config file's directory. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);

// Output directory after applying the ICDA_OUTPUT_ROOT override, which
// re-roots relative output directories.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

TaskStream build_stream(const RunConfig& cfg);

}  // namespace icda
