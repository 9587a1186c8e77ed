#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ivoct/augmentation.hpp"
#include "ivoct/backbone.hpp"
#include "ivoct/dataset.hpp"
#include "ivoct/image.hpp"

namespace ivoct::model {

/// Environment variable consulted when no weights cache directory is given.
inline constexpr const char* kWeightsCacheEnv = "IVOCT_WEIGHTS_CACHE";

struct ModelConfig {
    Backbone backbone = Backbone::SmallTest;
    bool pretrained = false;
    double dropout_p = 0.5;
    int num_classes = 2;
    Shape2D input_size{270, 270};

    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Optimizer { SgdMomentum, Adam };
std::string_view to_string(Optimizer optimizer);
Optimizer parse_optimizer(std::string_view token);

struct TrainConfig {
    int epochs = 15;
    int batch_size = 16;
    /// Unset means 1e-4 for pretrained backbones and 1e-3 from scratch.
    std::optional<double> learning_rate;
    Optimizer optimizer = Optimizer::Adam;
    double momentum = 0.9;  // SGD only
    std::uint64_t seed = 0;
    Representation representation = Representation::Cartesian;
    bool freeze_backbone = false;
    /// Single-threaded deterministic kernels; bit-identical reruns.
    bool strict_deterministic = true;
    /// Augmentation workers in relaxed mode (0 = hardware concurrency).
    unsigned num_workers = 0;

    void validate() const;
    [[nodiscard]] double effective_learning_rate(bool pretrained) const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Per-channel input normalization applied after grayscale replication.
struct Normalization {
    std::array<float, 3> mean{0.0f, 0.0f, 0.0f};
    std::array<float, 3> std{1.0f, 1.0f, 1.0f};
    friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Statistics the pretrained weights of a backbone expect.
Normalization pretrained_normalization(Backbone backbone);

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;  // on augmented training batches, train mode
    friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainingHistory {
    std::vector<EpochStats> epochs;
    std::vector<std::string> warnings;
    friend bool operator==(const TrainingHistory&, const TrainingHistory&) = default;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class PretrainedWeightsError : public ModelError {
public:
    using ModelError::ModelError;
};
class TrainingError : public ModelError {
public:
    using ModelError::ModelError;
};
class CheckpointError : public ModelError {
public:
    using ModelError::ModelError;
};

/// One top-level stage of a built network, in forward order.
struct LayerDescriptor {
    std::string name;
    std::string kind;  // "backbone", "dropout", "linear"
    double dropout_p = 0.0;
    std::int64_t in_features = 0;
    std::int64_t out_features = 0;
};

namespace detail {
struct NetworkHolder;
}

/// A classifier network plus everything needed to use and reproduce it.
/// Move-only; use clone() for an independent deep copy.
class TrainedModel {
public:
    TrainedModel(ModelConfig config, std::unique_ptr<detail::NetworkHolder> network,
                 Normalization normalization);
    ~TrainedModel();
    TrainedModel(TrainedModel&&) noexcept;
    TrainedModel& operator=(TrainedModel&&) noexcept;
    TrainedModel(const TrainedModel&) = delete;
    TrainedModel& operator=(const TrainedModel&) = delete;

    [[nodiscard]] TrainedModel clone() const;

    [[nodiscard]] const ModelConfig& config() const { return config_; }
    [[nodiscard]] const Normalization& normalization() const { return normalization_; }
    [[nodiscard]] const TrainingHistory& history() const { return history_; }
    [[nodiscard]] const std::optional<TrainConfig>& train_config() const { return train_config_; }
    [[nodiscard]] const std::optional<augment::AugmentConfig>& augment_config() const {
        return augment_config_;
    }
    /// Representation the model was trained on, if it has been trained.
    [[nodiscard]] std::optional<Representation> representation() const;

    [[nodiscard]] std::int64_t parameter_count() const;
    [[nodiscard]] std::vector<LayerDescriptor> describe() const;

    detail::NetworkHolder& network() { return *network_; }
    [[nodiscard]] const detail::NetworkHolder& network() const { return *network_; }

    void set_normalization(const Normalization& n) { normalization_ = n; }
    void set_training_record(TrainConfig tc, augment::AugmentConfig aug, TrainingHistory history);

private:
    ModelConfig config_;
    std::unique_ptr<detail::NetworkHolder> network_;
    Normalization normalization_;
    TrainingHistory history_;
    std::optional<TrainConfig> train_config_;
    std::optional<augment::AugmentConfig> augment_config_;
};

struct BuildOptions {
    /// Directory holding <backbone>.ivw weight archives. Empty means the
    /// IVOCT_WEIGHTS_CACHE environment variable.
    std::filesystem::path weights_cache;
    std::uint64_t init_seed = 0;
};

/// Instantiates the backbone, drops its classification layer and appends a
/// dropout(p) -> linear(features, 2) head. Pretrained backbones are loaded
/// from the weights cache; the head is freshly initialized either way.
TrainedModel build_model(const ModelConfig& config, const BuildOptions& options = {});

/// Path of the weight archive for a backbone inside a cache directory.
std::filesystem::path weights_file(const std::filesystem::path& cache_dir, Backbone backbone);
std::filesystem::path resolve_weights_cache(const std::filesystem::path& explicit_dir);

/// Exports the backbone's parameters and buffers (no head) as a weight
/// archive usable as pretrained initialization.
void save_backbone_weights(const TrainedModel& model, const std::filesystem::path& path);

/// L2 distance between the backbone parameters of two models of the same architecture.
double backbone_parameter_distance(const TrainedModel& a, const TrainedModel& b);

struct TrainObserver {
    std::function<void(const EpochStats&)> on_epoch;
    std::function<void(std::string_view)> on_warning;
};

/// Minimizes 2-class softmax cross-entropy over augmented samples.
/// Throws TrainingError on a non-finite loss or a representation mismatch.
TrainedModel train(TrainedModel model, const dataset::Manifest& train_set,
                   const augment::AugmentConfig& augment, const TrainConfig& config,
                   const TrainObserver& observer = {});

/// Softmax class probabilities per image, index 0 = NO_PLAQUE, 1 = PLAQUE.
/// Images pass through the eval transform (resize, center crop).
std::vector<std::array<double, 2>> predict_class_probabilities(const TrainedModel& model,
                                                               std::span<const BScan> images,
                                                               const augment::AugmentConfig& augment);

/// p(PLAQUE) per image.
std::vector<double> predict_proba(const TrainedModel& model, std::span<const BScan> images,
                                  const augment::AugmentConfig& augment);

inline constexpr std::uint32_t kCheckpointSchemaVersion = 1;

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

/// Applies the single-threaded deterministic kernel settings.
void configure_strict_determinism(bool strict);

}  // namespace ivoct::model
