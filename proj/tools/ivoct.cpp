#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ivoct/commands.hpp"

namespace fs = std::filesystem;
using namespace ivoct;

int main(int argc, char** argv) {
    CLI::App app{"IVOCT plaque classification pipeline"};
    app.require_subcommand(0, 1);

    bool print_config = false;
    fs::path print_config_from;
    app.add_flag("--print-config", print_config, "Print the run configuration (defaults, or --config) and exit");
    app.add_option("--config", print_config_from, "Config file to resolve for --print-config")
        ->check(CLI::ExistingFile);

    fs::path spec_file, out_dir;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic phantom dataset");
    synth->add_option("--spec", spec_file, "Config file with a [phantom] section")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", out_dir, "Output directory")->required();

    commands::ConvertOptions convert_opts;
    std::string convert_to;
    auto* convert = app.add_subcommand("convert", "Convert a manifest between polar and cartesian");
    convert->add_option("--manifest", convert_opts.manifest, "Input manifest")->required()->check(CLI::ExistingFile);
    convert->add_option("--to", convert_to, "Target representation")
        ->required()
        ->check(CLI::IsMember({"cartesian", "polar"}));
    convert->add_option("--side", convert_opts.side, "Cartesian side length in pixels")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{8}, std::size_t{1} << 14));
    convert->add_option("--depth", convert_opts.depth_samples, "Polar depth samples")->capture_default_str();
    convert->add_option("--ascans", convert_opts.num_ascans, "Polar A-scans per frame")->capture_default_str();
    convert->add_option("--threads", convert_opts.threads, "Worker threads (0 = all cores)")->capture_default_str();
    convert->add_option("--out", convert_opts.out_dir, "Output directory")->required();

    fs::path split_manifest;
    std::size_t test_patients = 0;
    std::uint64_t split_seed = 0;
    auto* split = app.add_subcommand("split", "Patient-level train/test split");
    split->add_option("--manifest", split_manifest, "Input manifest")->required()->check(CLI::ExistingFile);
    split->add_option("--test-patients", test_patients, "Number of test patients")->required();
    split->add_option("--seed", split_seed, "Split seed")->required();
    split->add_option("--out", out_dir, "Output directory for train.csv and test.csv")->required();

    fs::path config_file, train_manifest, checkpoint;
    auto* train = app.add_subcommand("train", "Train a classifier and save a checkpoint");
    train->add_option("--config", config_file, "Run configuration")->required()->check(CLI::ExistingFile);
    train->add_option("--train-manifest", train_manifest, "Training manifest")->required()->check(CLI::ExistingFile);
    train->add_option("--out", checkpoint, "Checkpoint path")->required();

    fs::path test_manifest, report;
    auto* evaluate = app.add_subcommand("eval", "Evaluate a checkpoint on a test manifest");
    evaluate->add_option("--ckpt", checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--test-manifest", test_manifest, "Test manifest")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out", report, "Report path")->required();

    std::vector<fs::path> reports;
    fs::path plot_out;
    auto* plot = app.add_subcommand("plot", "Sensitivity vs 1-specificity scatter plot");
    plot->add_option("--reports", reports, "Report files")->required()->expected(1, -1)->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "Image path (a .csv is written alongside)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_config) {
            const auto cfg =
                print_config_from.empty() ? config::default_run_config() : config::load_run_config(print_config_from);
            std::cout << config::format_run_config(cfg);
            return 0;
        }
        if (synth->parsed()) {
            commands::run_synth(spec_file, out_dir, std::cout);
        } else if (convert->parsed()) {
            convert_opts.to = parse_representation(convert_to);
            commands::run_convert(convert_opts, std::cout);
        } else if (split->parsed()) {
            commands::run_split(split_manifest, test_patients, split_seed, out_dir, std::cout);
        } else if (train->parsed()) {
            commands::run_train(config::load_run_config(config_file), train_manifest, checkpoint, std::cout);
        } else if (evaluate->parsed()) {
            commands::run_eval(checkpoint, test_manifest, report, std::cout);
        } else if (plot->parsed()) {
            commands::run_plot(reports, plot_out, std::cout);
        } else {
            std::cerr << app.help();
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
