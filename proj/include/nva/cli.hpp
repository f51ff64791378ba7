#pragma once

#include "nva/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nva {

enum ExitCode { exit_ok = 0, exit_failure = 1, exit_config = 2 };

// Configs from --config or --preset with the seed override applied (flag, then NVA_SEED).
std::vector<ExperimentConfig> resolve_experiments(const std::optional<std::string>& config_path,
                                                  const std::optional<std::string>& preset_name,
                                                  const std::optional<std::uint64_t>& seed_flag);

int cmd_optimize(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out,
                 std::ostream& os);
int cmd_bench(const std::vector<ExperimentConfig>& experiments, const std::filesystem::path& out,
              std::size_t jobs, std::ostream& os);
int cmd_list_problems(std::ostream& os);
int cmd_report(const std::filesystem::path& dir, std::ostream& os, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace nva
