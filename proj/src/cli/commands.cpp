#include "ivoct/commands.hpp"

#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

#include "ivoct/evaluate.hpp"
#include "ivoct/geometry.hpp"
#include "ivoct/image_io.hpp"
#include "ivoct/model.hpp"
#include "ivoct/parallel.hpp"
#include "ivoct/phantom.hpp"

namespace ivoct::commands {

namespace {

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

/// Refuses to overwrite one of the command's own inputs.
void guard_output(const fs::path& output, const fs::path& input) {
    std::error_code ec;
    if (fs::exists(output) && fs::equivalent(output, input, ec)) {
        throw std::runtime_error("refusing to overwrite input file '" + input.string() + "'");
    }
}

std::string frame_filename(const dataset::FrameRecord& r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_f%04llu.png", static_cast<unsigned long long>(r.frame_id));
    return r.patient_id + buf;
}

}  // namespace

dataset::Manifest run_synth(const fs::path& spec_file, const fs::path& out_dir, std::ostream& log) {
    const auto cfg = config::load_run_config(spec_file);
    if (!cfg.phantom) throw config::ConfigError(spec_file.string() + ": no [phantom] section");
    const auto manifest = phantom::generate_dataset(*cfg.phantom, out_dir);
    log << "synth: " << manifest.size() << " frames, " << manifest.patients().size() << " patients, "
        << "no_plaque fraction " << dataset::class_balance(manifest) << " -> " << (out_dir / "manifest.csv").string()
        << '\n';
    return manifest;
}

dataset::Manifest run_convert(const ConvertOptions& options, std::ostream& log) {
    const auto input = dataset::load_manifest(options.manifest);
    if (input.representation() == options.to) {
        throw std::invalid_argument("manifest is already " + std::string(to_string(options.to)));
    }
    const fs::path manifest_out = options.out_dir / "manifest.csv";
    guard_output(manifest_out, options.manifest);
    fs::create_directories(options.out_dir / "images");

    std::vector<dataset::FrameRecord> records = input.records();
    std::mutex cache_mutex;
    std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const geometry::ScanConverter>> converters;
    auto converter_for = [&](const PolarImage& p) {
        std::lock_guard lock(cache_mutex);
        auto& slot = converters[{p.depth_samples(), p.num_ascans()}];
        if (!slot) slot = std::make_shared<geometry::ScanConverter>(p.depth_samples(), p.num_ascans(), options.side);
        return slot;
    };

    parallel_for(records.size(), options.threads, [&](std::size_t i) {
        auto& record = records[i];
        const BScan scan = dataset::load_bscan(input, record);
        Image out;
        if (options.to == Representation::Cartesian) {
            const auto& polar = std::get<PolarImage>(scan);
            out = converter_for(polar)->apply(polar).pixels();
        } else {
            out = geometry::cartesian_to_polar(std::get<CartesianImage>(scan), options.depth_samples,
                                               options.num_ascans)
                      .samples();
        }
        const fs::path rel = fs::path("images") / frame_filename(record);
        const fs::path target = options.out_dir / rel;
        guard_output(target, input.resolve(record));
        write_grayscale_png(target, out);
        record.image_path = rel;
        record.representation = options.to;
    });

    dataset::Manifest converted(std::move(records), options.out_dir);
    dataset::write_manifest(converted, manifest_out);
    log << "convert: " << converted.size() << " frames -> " << to_string(options.to) << ", "
        << manifest_out.string() << '\n';
    return converted;
}

dataset::SplitResult run_split(const fs::path& manifest, std::size_t test_patients, std::uint64_t seed,
                               const fs::path& out_dir, std::ostream& log) {
    const auto input = dataset::load_manifest(manifest);
    auto split = dataset::patient_split(input, test_patients, seed);
    guard_output(out_dir / "train.csv", manifest);
    guard_output(out_dir / "test.csv", manifest);
    fs::create_directories(out_dir);
    dataset::write_manifest(split.train, out_dir / "train.csv");
    dataset::write_manifest(split.test, out_dir / "test.csv");
    log << "split: train " << split.train.patients().size() << " patients / " << split.train.size()
        << " frames, test " << split.test.patients().size() << " patients / " << split.test.size() << " frames\n";
    return split;
}

void run_train(const config::RunConfig& config, const fs::path& train_manifest, const fs::path& checkpoint,
               std::ostream& log) {
    config.validate();
    const auto manifest = dataset::load_manifest(train_manifest);
    if (manifest.representation() != config.train.representation) {
        throw model::TrainingError("representation mismatch: manifest is " +
                                   std::string(to_string(manifest.representation())) + " but config says " +
                                   std::string(to_string(config.train.representation)));
    }
    const auto issues = dataset::validate_dataset(manifest);
    if (!issues.empty()) {
        throw std::runtime_error(std::to_string(issues.size()) + " invalid records, first: " +
                                 issues.front().patient_id + "/" + std::to_string(issues.front().frame_id) + ": " +
                                 issues.front().message);
    }

    auto net = model::build_model(config.model, {config.paths.weights_cache, config.init_seed});
    log << "train: " << display_name(config.model.backbone) << (config.model.pretrained ? " pretrained" : " scratch")
        << ", " << net.parameter_count() << " parameters, " << manifest.size() << " frames ("
        << to_string(manifest.representation()) << "), lr "
        << config.train.effective_learning_rate(config.model.pretrained) << '\n';

    model::TrainObserver observer;
    observer.on_epoch = [&](const model::EpochStats& s) {
        log << "  epoch " << s.epoch << "/" << config.train.epochs << "  loss " << s.loss << "  acc "
            << percent(s.accuracy) << '\n'
            << std::flush;
    };
    observer.on_warning = [&](std::string_view w) { log << "warning: " << w << '\n'; };
    auto trained = model::train(std::move(net), manifest, config.augment, config.train, observer);
    model::save_checkpoint(trained, checkpoint);
    log << "train: checkpoint -> " << checkpoint.string() << '\n';
}

eval::MetricsReport run_eval(const fs::path& checkpoint, const fs::path& test_manifest, const fs::path& report,
                             std::ostream& log) {
    const auto model = model::load_checkpoint(checkpoint);
    const auto manifest = dataset::load_manifest(test_manifest);
    augment::AugmentConfig aug;
    if (model.augment_config()) {
        aug = *model.augment_config();
    } else {
        aug.representation = manifest.representation();
        aug.crop_to = model.config().input_size;
    }
    const auto result = eval::evaluate(model, manifest, aug);
    eval::write_report(result.report, report);
    log << eval::summarize(result.report) << '\n';
    return result.report;
}

eval::ScatterOutput run_plot(const std::vector<fs::path>& reports, const fs::path& image, std::ostream& log) {
    if (reports.empty()) throw std::invalid_argument("plot needs at least one report");
    std::vector<eval::MetricsReport> loaded;
    loaded.reserve(reports.size());
    for (const auto& r : reports) loaded.push_back(eval::read_report(r));
    const auto out = eval::scatter_plot(loaded, image);
    log << "plot: " << out.markers_drawn << " markers -> " << out.image.string() << ", " << out.csv.string() << '\n';
    return out;
}

}  // namespace ivoct::commands
