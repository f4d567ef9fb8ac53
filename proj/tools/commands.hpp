#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qcap/config.hpp"

namespace qcap::cli {

const std::vector<std::string>& subcommands();

/// Runs one subcommand, writing its artifacts and manifest.json into `out`.
void run(const std::string& subcommand, const ExperimentConfig& cfg,
         const std::filesystem::path& out);

/// 2 for configuration errors, 3 for violated preconditions, 4 for numerical failures.
int exit_code(ErrorKind kind) noexcept;

}  // namespace qcap::cli
