#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "ivoct/augmentation.hpp"
#include "ivoct/model.hpp"
#include "ivoct/phantom.hpp"

namespace ivoct::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Paths {
    std::filesystem::path data_root;
    std::filesystem::path output_dir;
    std::filesystem::path checkpoint;
    std::filesystem::path weights_cache;  // empty: IVOCT_WEIGHTS_CACHE

    friend bool operator==(const Paths&, const Paths&) = default;
};

/// Everything a run needs, read from an INI file with the sections
/// [phantom], [augment], [model], [train] and [paths]. Missing keys keep
/// their defaults; unknown sections or keys are rejected.
struct RunConfig {
    std::optional<phantom::PhantomSpec> phantom;
    augment::AugmentConfig augment;
    model::ModelConfig model;
    model::TrainConfig train;
    std::uint64_t init_seed = 0;  // [model] init_seed, head and scratch initialization
    Paths paths;

    /// Cross-section consistency: representations agree and the model input
    /// equals the crop size. Throws ConfigError.
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Defaults with the model input taken from the crop size.
RunConfig default_run_config();

RunConfig parse_run_config(std::istream& in, const std::string& source_name = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Full INI text, every key present; parse_run_config(format_run_config(c)) == c.
std::string format_run_config(const RunConfig& config);

}  // namespace ivoct::config
