#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace gelfand::cli {

enum ExitCode : int {
    kOk = 0,
    kIoError = 1,
    kConfigError = 2,
    kPreconditionFailure = 3,
    kEnvelopeBreach = 4,
    kOverflow = 5,
};

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

struct RunOutcome {
    int exit_code = kOk;
    std::string message;
    std::filesystem::path out_dir;
    nlohmann::json manifest;
};

/// Validates the configuration, fills in defaults and returns the resolved document.
/// A manifest written by a previous run is accepted in place of a configuration.
nlohmann::json resolve_config(const nlohmann::json& doc, const std::optional<std::uint64_t>& seed_override);

RunOutcome run(const RunOptions& opt);
RunOutcome run(const nlohmann::json& config, const std::filesystem::path& out_dir, bool quiet = true);

}  // namespace gelfand::cli
