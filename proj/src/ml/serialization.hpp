#pragma once

// JSON forms of the configuration records stored inside checkpoints.

#include "ivoct/augmentation.hpp"
#include "ivoct/model.hpp"
#include "json.hpp"

namespace ivoct::model {

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const augment::AugmentConfig& c);
augment::AugmentConfig augment_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Normalization& n);
Normalization normalization_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainingHistory& h);
TrainingHistory history_from_json(const nlohmann::json& j);

}  // namespace ivoct::model
