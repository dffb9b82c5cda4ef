#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wickshe/app/config.hpp"
#include "wickshe/app/report.hpp"

namespace wickshe::app {

// A module error raised inside a subcommand, prefixed with the subcommand name.
class SubcommandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] const std::vector<std::string>& subcommand_names();

// Runs one subcommand, writing its CSV files and report.json into
// cfg.output_dir (created if needed).
[[nodiscard]] RunReport run_subcommand(const std::string& name, const RunConfig& cfg, int threads);

}  // namespace wickshe::app
