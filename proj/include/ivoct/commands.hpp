#pragma once

// Subcommand implementations behind the `ivoct` executable. Each reports
// progress on `log` and throws on failure; main() turns exceptions into a
// one-line diagnostic and a nonzero exit code.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ivoct/config.hpp"
#include "ivoct/dataset.hpp"
#include "ivoct/evaluation.hpp"

namespace ivoct::commands {

namespace fs = std::filesystem;

/// Phantom generation from the [phantom] section of a config file.
dataset::Manifest run_synth(const fs::path& spec_file, const fs::path& out_dir, std::ostream& log);

struct ConvertOptions {
    fs::path manifest;
    Representation to = Representation::Cartesian;
    std::size_t side = 600;           // polar -> cartesian
    std::size_t depth_samples = 512;  // cartesian -> polar
    std::size_t num_ascans = 360;
    fs::path out_dir;
    unsigned threads = 0;
};
/// Writes out_dir/images/*.png and out_dir/manifest.csv.
dataset::Manifest run_convert(const ConvertOptions& options, std::ostream& log);

/// Writes out_dir/train.csv and out_dir/test.csv.
dataset::SplitResult run_split(const fs::path& manifest, std::size_t test_patients, std::uint64_t seed,
                               const fs::path& out_dir, std::ostream& log);

/// Trains the configured model and saves the checkpoint at `checkpoint`.
void run_train(const config::RunConfig& config, const fs::path& train_manifest, const fs::path& checkpoint,
               std::ostream& log);

/// Evaluates a checkpoint and writes the report.
eval::MetricsReport run_eval(const fs::path& checkpoint, const fs::path& test_manifest, const fs::path& report,
                             std::ostream& log);

eval::ScatterOutput run_plot(const std::vector<fs::path>& reports, const fs::path& image, std::ostream& log);

}  // namespace ivoct::commands
