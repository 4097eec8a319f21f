#pragma once

#include "kmcli/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kmcli {

struct CliOptions {
    std::string command;
    std::optional<std::filesystem::path> config;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    std::optional<double> scale;
    std::optional<std::string> estimators;
    std::optional<std::string> orientation;
    std::optional<int> repeats;
    std::optional<std::string> figure;
    std::optional<int> replicates;
    unsigned threads = 0;
};

/// Config file contents with command-line overrides folded in; this is what
/// the config hash covers.
json effective_config(const CliOptions& opts);

void cmd_generate(const CliOptions& opts);
void cmd_estimate(const CliOptions& opts);
void cmd_recover(const CliOptions& opts);
void cmd_bench(const CliOptions& opts);
void cmd_reproduce(const CliOptions& opts);

/// Parses argv, dispatches, and maps errors onto exit codes:
/// 0 success, 2 config, 3 numeric/precondition, 4 I/O.
int run_cli(int argc, const char* const* argv);

}  // namespace kmcli
