#include "ivoct/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>

#include "ivoct/network.hpp"
#include "ivoct/parallel.hpp"
#include "ivoct/random.hpp"
#include "serialization.hpp"
#include "tensor_archive.hpp"

namespace ivoct::model {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr int kPredictBatch = 16;
constexpr std::uint32_t kWeightsSchemaVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

NamedTensors state_of(const torch::nn::Module& module) {
    NamedTensors out;
    for (const auto& p : module.named_parameters(true)) out.emplace_back(p.key(), p.value());
    for (const auto& b : module.named_buffers(true)) out.emplace_back(b.key(), b.value());
    return out;
}

/// Copies every parameter and buffer of `module` from `source`; extra
/// source entries are ignored. Problems are reported as `Error`.
template <typename Error>
void load_state(const torch::nn::Module& module, const NamedTensors& source, const std::string& what) {
    std::map<std::string, const torch::Tensor*> by_name;
    for (const auto& [name, tensor] : source) by_name[name] = &tensor;
    torch::NoGradGuard no_grad;
    for (auto& [name, target] : state_of(module)) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw Error(what + ": missing tensor '" + name + "'");
        const torch::Tensor& src = *it->second;
        if (src.sizes() != target.sizes()) {
            throw Error(what + ": shape mismatch for '" + name + "'");
        }
        target.copy_(src.to(target.scalar_type()));
    }
}

std::shared_ptr<BackboneModule> backbone_of(const TrainedModel& model) {
    return network_of(model)->backbone;
}

std::unique_ptr<detail::NetworkHolder> make_network(const ModelConfig& config) {
    auto holder = std::make_unique<detail::NetworkHolder>(
        detail::NetworkHolder{Network(make_backbone(config.backbone), config.dropout_p, config.num_classes)});
    holder->net->eval();
    return holder;
}

void check_model_input(const TrainedModel& model, const augment::AugmentConfig& augment) {
    if (augment.crop_to != model.config().input_size) {
        throw ModelError("shape mismatch after transform: crop " + std::to_string(augment.crop_to.rows) + "x" +
                         std::to_string(augment.crop_to.cols) + " but model expects " +
                         std::to_string(model.config().input_size.rows) + "x" +
                         std::to_string(model.config().input_size.cols));
    }
}

Normalization dataset_normalization(const std::vector<BScan>& scans) {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& scan : scans) {
        for (float v : grid_of(scan).pixels()) {
            sum += v;
            sum_sq += static_cast<double>(v) * v;
        }
        count += grid_of(scan).size();
    }
    const double mean = sum / static_cast<double>(count);
    const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
    const auto m = static_cast<float>(mean);
    const auto s = static_cast<float>(std::max(std::sqrt(var), 1e-6));
    return Normalization{{m, m, m}, {s, s, s}};
}

}  // namespace

// ---------------------------------------------------------------- configs

void ModelConfig::validate() const {
    if (!(dropout_p >= 0.0 && dropout_p <= 1.0)) throw std::invalid_argument("dropout_p must be in [0, 1]");
    if (backbone == Backbone::SmallTest && pretrained) {
        throw std::invalid_argument("small_test has no pretrained weights");
    }
    if (num_classes != 2) throw std::invalid_argument("num_classes must be 2");
    if (input_size.rows < 8 || input_size.cols < 8) throw std::invalid_argument("input_size must be at least 8x8");
}

std::string_view to_string(Optimizer optimizer) {
    switch (optimizer) {
        case Optimizer::SgdMomentum: return "sgd";
        case Optimizer::Adam: return "adam";
    }
    return "?";
}

Optimizer parse_optimizer(std::string_view token) {
    if (token == "sgd") return Optimizer::SgdMomentum;
    if (token == "adam") return Optimizer::Adam;
    throw std::invalid_argument("unknown optimizer '" + std::string(token) + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (learning_rate && !(*learning_rate > 0.0 && std::isfinite(*learning_rate))) {
        throw std::invalid_argument("learning_rate must be positive");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
}

double TrainConfig::effective_learning_rate(bool pretrained) const {
    if (learning_rate) return *learning_rate;
    return pretrained ? 1e-4 : 1e-3;
}

Normalization pretrained_normalization(Backbone backbone) {
    switch (backbone) {
        case Backbone::ResNet50:
        case Backbone::ResNet101:
            return Normalization{{0.485f, 0.456f, 0.406f}, {0.229f, 0.224f, 0.225f}};
        case Backbone::InceptionV3:
        case Backbone::InceptionResNetV2:
        case Backbone::SmallTest:
            return Normalization{{0.5f, 0.5f, 0.5f}, {0.5f, 0.5f, 0.5f}};
    }
    return {};
}

void configure_strict_determinism(bool strict) {
    if (strict) {
        torch::set_num_threads(1);
        at::globalContext().setDeterministicAlgorithms(true, false);
    } else {
        torch::set_num_threads(static_cast<int>(resolve_thread_count(0)));
        at::globalContext().setDeterministicAlgorithms(false, false);
    }
}

// ---------------------------------------------------------------- TrainedModel

TrainedModel::TrainedModel(ModelConfig config, std::unique_ptr<detail::NetworkHolder> network,
                           Normalization normalization)
    : config_(std::move(config)), network_(std::move(network)), normalization_(normalization) {}

TrainedModel::~TrainedModel() = default;
TrainedModel::TrainedModel(TrainedModel&&) noexcept = default;
TrainedModel& TrainedModel::operator=(TrainedModel&&) noexcept = default;

TrainedModel TrainedModel::clone() const {
    TrainedModel copy(config_, make_network(config_), normalization_);
    load_state<ModelError>(*network_of(copy), state_of(*network_of(*this)), "clone");
    copy.history_ = history_;
    copy.train_config_ = train_config_;
    copy.augment_config_ = augment_config_;
    return copy;
}

std::optional<Representation> TrainedModel::representation() const {
    if (!train_config_) return std::nullopt;
    return train_config_->representation;
}

std::int64_t TrainedModel::parameter_count() const {
    std::int64_t total = 0;
    for (const auto& p : network_of(*this)->parameters()) total += p.numel();
    return total;
}

std::vector<LayerDescriptor> TrainedModel::describe() const {
    const Network& net = network_of(*this);
    return {
        {"backbone", "backbone", 0.0, 3, net->backbone->feature_dim()},
        {"head_dropout", "dropout", net->head_dropout->options.p(), net->backbone->feature_dim(),
         net->backbone->feature_dim()},
        {"head_fc", "linear", 0.0, net->head_fc->options.in_features(), net->head_fc->options.out_features()},
    };
}

void TrainedModel::set_training_record(TrainConfig tc, augment::AugmentConfig aug, TrainingHistory history) {
    train_config_ = std::move(tc);
    augment_config_ = std::move(aug);
    history_ = std::move(history);
}

// ---------------------------------------------------------------- weights

fs::path weights_file(const fs::path& cache_dir, Backbone backbone) {
    return cache_dir / (std::string(to_string(backbone)) + ".ivw");
}

fs::path resolve_weights_cache(const fs::path& explicit_dir) {
    if (!explicit_dir.empty()) return explicit_dir;
    if (const char* env = std::getenv(kWeightsCacheEnv); env != nullptr && *env != '\0') return fs::path(env);
    throw PretrainedWeightsError(std::string("no weights cache configured; set ") + kWeightsCacheEnv);
}

namespace {

void load_pretrained(BackboneModule& backbone, Backbone kind, const fs::path& cache) {
    const fs::path file = weights_file(cache, kind);
    if (!fs::exists(file)) {
        throw PretrainedWeightsError("pretrained weights for " + std::string(to_string(kind)) + " not found at '" +
                                     file.string() + "'");
    }
    TensorArchive archive;
    try {
        archive = read_tensor_archive(file);
    } catch (const CheckpointError& e) {
        throw PretrainedWeightsError(std::string("unreadable pretrained weights: ") + e.what());
    }
    if (archive.kind != "weights") {
        throw PretrainedWeightsError("'" + file.string() + "' is not a weights archive");
    }
    if (archive.meta.contains("backbone") &&
        archive.meta.at("backbone").get<std::string>() != to_string(kind)) {
        throw PretrainedWeightsError("'" + file.string() + "' holds weights for " +
                                     archive.meta.at("backbone").get<std::string>());
    }
    load_state<PretrainedWeightsError>(backbone, archive.tensors, "pretrained weights '" + file.string() + "'");
}

}  // namespace

TrainedModel build_model(const ModelConfig& config, const BuildOptions& options) {
    config.validate();
    torch::manual_seed(options.init_seed);
    auto holder = make_network(config);
    Normalization normalization;
    if (config.pretrained) {
        load_pretrained(*holder->net->backbone, config.backbone, resolve_weights_cache(options.weights_cache));
        normalization = pretrained_normalization(config.backbone);
    }
    return TrainedModel(config, std::move(holder), normalization);
}

void save_backbone_weights(const TrainedModel& model, const fs::path& path) {
    TensorArchive archive;
    archive.kind = "weights";
    archive.schema_version = kWeightsSchemaVersion;
    archive.meta = {{"backbone", std::string(to_string(model.config().backbone))}};
    archive.tensors = state_of(*backbone_of(model));
    write_tensor_archive(archive, path);
}

double backbone_parameter_distance(const TrainedModel& a, const TrainedModel& b) {
    const auto pa = backbone_of(a)->named_parameters(true);
    const auto pb = backbone_of(b)->named_parameters(true);
    if (a.config().backbone != b.config().backbone || pa.size() != pb.size()) {
        throw ModelError("backbone_parameter_distance needs models of the same architecture");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const auto diff = (pa[i].value().detach().to(torch::kFloat64) - pb[i].value().detach().to(torch::kFloat64));
        sum += diff.pow(2).sum().item<double>();
    }
    return std::sqrt(sum);
}

// ---------------------------------------------------------------- training

TrainedModel train(TrainedModel model, const dataset::Manifest& train_set, const augment::AugmentConfig& augment,
                   const TrainConfig& config, const TrainObserver& observer) {
    config.validate();
    augment.validate();
    if (train_set.representation() != config.representation) {
        throw TrainingError("representation mismatch: training manifest is " +
                            std::string(to_string(train_set.representation())) + " but train config says " +
                            std::string(to_string(config.representation)));
    }
    if (augment.representation != config.representation) {
        throw TrainingError("representation mismatch: augmentation is " +
                            std::string(to_string(augment.representation)) + " but train config says " +
                            std::string(to_string(config.representation)));
    }
    if (model.representation() && *model.representation() != config.representation) {
        throw TrainingError("representation mismatch: model was trained on " +
                            std::string(to_string(*model.representation())));
    }
    check_model_input(model, augment);

    configure_strict_determinism(config.strict_deterministic);
    const unsigned workers = config.strict_deterministic ? 1u : resolve_thread_count(config.num_workers);

    const auto& records = train_set.records();
    const std::size_t n = records.size();
    std::vector<BScan> samples(n, BScan{PolarImage(Image(2, 4))});
    std::vector<std::int64_t> targets(n);
    parallel_for(n, workers, [&](std::size_t i) {
        samples[i] = augment::resize_scan(dataset::load_bscan(train_set, records[i]), augment);
        targets[i] = records[i].label == Label::Plaque ? 1 : 0;
    });

    TrainingHistory history;
    auto warn = [&](std::string message) {
        if (observer.on_warning) observer.on_warning(message);
        history.warnings.push_back(std::move(message));
    };
    const auto plaque = static_cast<std::size_t>(std::count(targets.begin(), targets.end(), 1));
    if (plaque == 0) warn("training set contains no PLAQUE frames");
    if (plaque == n) warn("training set contains no NO_PLAQUE frames");

    const Normalization normalization = model.config().pretrained ? pretrained_normalization(model.config().backbone)
                                                                   : dataset_normalization(samples);

    torch::manual_seed(config.seed);
    Network net = network_of(model);
    net->train();
    std::vector<torch::Tensor> trainable;
    if (config.freeze_backbone) {
        for (auto& p : net->backbone->parameters()) p.set_requires_grad(false);
        for (auto& p : net->head_fc->parameters()) trainable.push_back(p);
    } else {
        for (auto& p : net->parameters()) {
            p.set_requires_grad(true);
            trainable.push_back(p);
        }
    }
    const double lr = config.effective_learning_rate(model.config().pretrained);
    std::unique_ptr<torch::optim::Optimizer> optimizer;
    if (config.optimizer == Optimizer::Adam) {
        optimizer = std::make_unique<torch::optim::Adam>(trainable, torch::optim::AdamOptions(lr));
    } else {
        optimizer = std::make_unique<torch::optim::SGD>(trainable,
                                                        torch::optim::SGDOptions(lr).momentum(config.momentum));
    }

    const Rng shuffle_root = Rng(config.seed).split(kShuffleStream);
    const Rng augment_root(augment.seed);
    std::vector<std::size_t> order(n);
    const auto batch_size = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        net->train();
        if (config.freeze_backbone) net->backbone->eval();

        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle = shuffle_root.split(static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
        const Rng epoch_rng = augment_root.split(static_cast<std::uint64_t>(epoch));

        double loss_sum = 0.0;
        std::int64_t correct = 0;
        for (std::size_t start = 0, batch_index = 0; start < n; start += batch_size, ++batch_index) {
            const std::size_t count = std::min(batch_size, n - start);
            std::vector<Image> crops(count);
            std::vector<std::int64_t> batch_targets(count);
            parallel_for(count, workers, [&](std::size_t j) {
                const std::size_t idx = order[start + j];
                Rng rng = epoch_rng.split(idx);
                crops[j] = augment::train_transform(samples[idx], augment, rng);
                batch_targets[j] = targets[idx];
            });
            const auto input = to_input_tensor(crops, normalization);
            const auto target = torch::tensor(batch_targets, torch::kInt64);

            optimizer->zero_grad();
            const auto logits = net->forward(input);
            const auto loss = torch::nn::functional::cross_entropy(logits, target);
            const double loss_value = loss.item<double>();
            if (!std::isfinite(loss_value)) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                    std::to_string(batch_index + 1));
            }
            loss.backward();
            optimizer->step();

            loss_sum += loss_value * static_cast<double>(count);
            correct += logits.argmax(1).eq(target).sum().item<std::int64_t>();
        }
        EpochStats stats{epoch + 1, loss_sum / static_cast<double>(n),
                         static_cast<double>(correct) / static_cast<double>(n)};
        history.epochs.push_back(stats);
        if (observer.on_epoch) observer.on_epoch(stats);
    }

    for (auto& p : net->parameters()) p.set_requires_grad(true);
    net->eval();
    model.set_normalization(normalization);
    model.set_training_record(config, augment, std::move(history));
    return model;
}

// ---------------------------------------------------------------- inference

std::vector<std::array<double, 2>> predict_class_probabilities(const TrainedModel& model, std::span<const BScan> images,
                                                               const augment::AugmentConfig& augment) {
    augment.validate();
    check_model_input(model, augment);
    if (model.representation()) {
        for (const auto& scan : images) {
            if (representation_of(scan) != *model.representation()) {
                throw ModelError("representation mismatch: model was trained on " +
                                 std::string(to_string(*model.representation())) + " images");
            }
        }
    }
    std::vector<std::array<double, 2>> out;
    out.reserve(images.size());
    for (std::size_t start = 0; start < images.size(); start += kPredictBatch) {
        const std::size_t count = std::min<std::size_t>(kPredictBatch, images.size() - start);
        std::vector<Image> crops;
        crops.reserve(count);
        for (std::size_t j = 0; j < count; ++j) crops.push_back(augment::eval_transform(images[start + j], augment));
        const auto probs =
            torch::softmax(forward_logits(model, to_input_tensor(crops, model.normalization())).to(torch::kFloat64), 1);
        const auto acc = probs.accessor<double, 2>();
        for (std::size_t j = 0; j < count; ++j) {
            out.push_back({acc[static_cast<std::int64_t>(j)][0], acc[static_cast<std::int64_t>(j)][1]});
        }
    }
    return out;
}

std::vector<double> predict_proba(const TrainedModel& model, std::span<const BScan> images,
                                  const augment::AugmentConfig& augment) {
    std::vector<double> out;
    for (const auto& p : predict_class_probabilities(model, images, augment)) out.push_back(p[1]);
    return out;
}

// ---------------------------------------------------------------- checkpoints

void save_checkpoint(const TrainedModel& model, const fs::path& path) {
    TensorArchive archive;
    archive.kind = "checkpoint";
    archive.schema_version = kCheckpointSchemaVersion;
    archive.meta = {{"model_config", to_json(model.config())},
                    {"normalization", to_json(model.normalization())},
                    {"history", to_json(model.history())},
                    {"train_config", model.train_config() ? to_json(*model.train_config()) : nlohmann::json()},
                    {"augment_config", model.augment_config() ? to_json(*model.augment_config()) : nlohmann::json()}};
    archive.tensors = state_of(*network_of(model));
    write_tensor_archive(archive, path);
}

TrainedModel load_checkpoint(const fs::path& path) {
    TensorArchive archive = read_tensor_archive(path);
    if (archive.kind != "checkpoint") {
        throw CheckpointError("'" + path.string() + "' is not a checkpoint (kind '" + archive.kind + "')");
    }
    if (archive.schema_version != kCheckpointSchemaVersion) {
        throw CheckpointError("checkpoint schema version " + std::to_string(archive.schema_version) +
                              " is not supported (expected " + std::to_string(kCheckpointSchemaVersion) + ")");
    }
    try {
        const auto& meta = archive.meta;
        const ModelConfig config = model_config_from_json(meta.at("model_config"));
        config.validate();
        TrainedModel model(config, make_network(config), normalization_from_json(meta.at("normalization")));
        load_state<CheckpointError>(*network_of(model), archive.tensors, "corrupt checkpoint '" + path.string() + "'");
        if (!meta.at("train_config").is_null()) {
            model.set_training_record(train_config_from_json(meta.at("train_config")),
                                      augment_config_from_json(meta.at("augment_config")),
                                      history_from_json(meta.at("history")));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("corrupt checkpoint metadata in '" + path.string() + "': " + e.what());
    } catch (const std::invalid_argument& e) {
        throw CheckpointError("corrupt checkpoint metadata in '" + path.string() + "': " + e.what());
    }
}

}  // namespace ivoct::model
