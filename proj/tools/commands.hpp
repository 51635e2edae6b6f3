#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace icda::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

int cmd_tau_sweep(const std::filesystem::path& config_path, const std::vector<double>& taus,
                  std::ostream& out, std::ostream& err);

int cmd_gradcheck(std::uint64_t seed, bool inject_fault, std::ostream& out, std::ostream& err);

int cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& csv_path,
             std::ostream& out, std::ostream& err);

}  // namespace icda::cli
