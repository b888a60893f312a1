#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdlm/mcmc.hpp"

namespace fdlm::cli {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& problem) : Error(field + ": " + problem), field_(field) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct KernelBlock {
    OuParams params;
    bool estimate = false;
};

struct RunConfig {
    std::uint64_t seed = 1;
    int chains = 1;
    std::filesystem::path output = "fdlm_out";
    std::optional<std::filesystem::path> input;
    bool log_transform = false;

    std::size_t grid_size = 24;
    std::optional<std::vector<double>> grid_points;

    std::vector<double> m0{0.0};  // one value broadcasts over the grid
    OuParams c0{2.0, 1.0};
    KernelBlock v{OuParams::from_log_beta(2.76e-4, -2.83), true};
    KernelBlock w{OuParams::from_log_beta(2.14e-4, -3.23), true};

    PriorSpec prior;
    SamplerConfig sampler;
    double band_level = 0.9;

    std::size_t sim_days = 300;
    std::string start_date = "2006-01-01";

    [[nodiscard]] Grid grid() const;
    /// Functional local level model on grid() (F = G = I).
    [[nodiscard]] FdlmSpec spec() const;
    /// Canonical form of every effective setting; the manifest hash is taken over its dump.
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Parses and validates a config document. Missing keys keep their defaults; unknown keys are errors.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Cross-field checks that depend on which subcommand will run.
void validate_for(const RunConfig& cfg, const std::string& command);

}  // namespace fdlm::cli
