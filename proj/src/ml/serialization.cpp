#include "serialization.hpp"

#include <string>

namespace ivoct::model {

using nlohmann::json;

json to_json(const ModelConfig& c) {
    return {{"backbone", std::string(to_string(c.backbone))},
            {"pretrained", c.pretrained},
            {"dropout_p", c.dropout_p},
            {"num_classes", c.num_classes},
            {"input_rows", c.input_size.rows},
            {"input_cols", c.input_size.cols}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    c.backbone = parse_backbone(j.at("backbone").get<std::string>());
    c.pretrained = j.at("pretrained").get<bool>();
    c.dropout_p = j.at("dropout_p").get<double>();
    c.num_classes = j.at("num_classes").get<int>();
    c.input_size = {j.at("input_rows").get<std::size_t>(), j.at("input_cols").get<std::size_t>()};
    return c;
}

json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate ? json(*c.learning_rate) : json(nullptr)},
            {"optimizer", std::string(to_string(c.optimizer))},
            {"momentum", c.momentum},
            {"seed", c.seed},
            {"representation", std::string(to_string(c.representation))},
            {"freeze_backbone", c.freeze_backbone},
            {"strict_deterministic", c.strict_deterministic},
            {"num_workers", c.num_workers}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    if (!j.at("learning_rate").is_null()) c.learning_rate = j.at("learning_rate").get<double>();
    c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    c.momentum = j.at("momentum").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.representation = parse_representation(j.at("representation").get<std::string>());
    c.freeze_backbone = j.at("freeze_backbone").get<bool>();
    c.strict_deterministic = j.at("strict_deterministic").get<bool>();
    c.num_workers = j.at("num_workers").get<unsigned>();
    return c;
}

json to_json(const augment::AugmentConfig& c) {
    return {{"representation", std::string(to_string(c.representation))},
            {"resize_rows", c.resize_to.rows},
            {"resize_cols", c.resize_to.cols},
            {"crop_rows", c.crop_to.rows},
            {"crop_cols", c.crop_to.cols},
            {"flip_probability", c.flip_probability},
            {"rotation_min_deg", c.rotation_min_deg},
            {"rotation_max_deg", c.rotation_max_deg},
            {"seed", c.seed}};
}

augment::AugmentConfig augment_config_from_json(const json& j) {
    augment::AugmentConfig c;
    c.representation = parse_representation(j.at("representation").get<std::string>());
    c.resize_to = {j.at("resize_rows").get<std::size_t>(), j.at("resize_cols").get<std::size_t>()};
    c.crop_to = {j.at("crop_rows").get<std::size_t>(), j.at("crop_cols").get<std::size_t>()};
    c.flip_probability = j.at("flip_probability").get<double>();
    c.rotation_min_deg = j.at("rotation_min_deg").get<double>();
    c.rotation_max_deg = j.at("rotation_max_deg").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json to_json(const Normalization& n) {
    return {{"mean", n.mean}, {"std", n.std}};
}

Normalization normalization_from_json(const json& j) {
    Normalization n;
    n.mean = j.at("mean").get<std::array<float, 3>>();
    n.std = j.at("std").get<std::array<float, 3>>();
    return n;
}

json to_json(const TrainingHistory& h) {
    json epochs = json::array();
    for (const auto& e : h.epochs) {
        epochs.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
    }
    return {{"epochs", epochs}, {"warnings", h.warnings}};
}

TrainingHistory history_from_json(const json& j) {
    TrainingHistory h;
    for (const auto& e : j.at("epochs")) {
        h.epochs.push_back({e.at("epoch").get<int>(), e.at("loss").get<double>(), e.at("accuracy").get<double>()});
    }
    h.warnings = j.at("warnings").get<std::vector<std::string>>();
    return h;
}

}  // namespace ivoct::model
