#include "ivoct/network.hpp"

#include <string>

namespace ivoct::model {

namespace {
std::string shape_text(Shape2D s) { return std::to_string(s.rows) + "x" + std::to_string(s.cols); }
}  // namespace

NetworkImpl::NetworkImpl(std::shared_ptr<BackboneModule> backbone_module, double dropout_p,
                         std::int64_t num_classes)
    : backbone(register_module("backbone", std::move(backbone_module))),
      head_dropout(register_module("head_dropout", torch::nn::Dropout(dropout_p))),
      head_fc(register_module("head_fc", torch::nn::Linear(backbone->feature_dim(), num_classes))) {}

torch::Tensor NetworkImpl::forward(torch::Tensor x) {
    return head_fc->forward(head_dropout->forward(backbone->forward(std::move(x))));
}

torch::Tensor to_input_tensor(std::span<const Image> images, const Normalization& normalization) {
    if (images.empty()) throw ModelError("empty input batch");
    const Shape2D shape = images.front().shape();
    const auto rows = static_cast<std::int64_t>(shape.rows);
    const auto cols = static_cast<std::int64_t>(shape.cols);
    auto batch = torch::empty({static_cast<std::int64_t>(images.size()), 1, rows, cols});
    float* dst = batch.data_ptr<float>();
    for (const auto& img : images) {
        if (img.shape() != shape) {
            throw ModelError("input batch mixes grid sizes " + shape_text(shape) + " and " +
                             shape_text(img.shape()));
        }
        std::copy(img.pixels().begin(), img.pixels().end(), dst);
        dst += img.pixels().size();
    }
    const auto mean = torch::tensor(std::vector<float>(normalization.mean.begin(), normalization.mean.end()))
                          .view({1, 3, 1, 1});
    const auto std = torch::tensor(std::vector<float>(normalization.std.begin(), normalization.std.end()))
                         .view({1, 3, 1, 1});
    return (batch.expand({-1, 3, -1, -1}) - mean) / std;
}

torch::Tensor forward_logits(const TrainedModel& model, const torch::Tensor& input) {
    torch::NoGradGuard no_grad;
    Network net = network_of(model);  // shares the module
    net->eval();
    return net->forward(input);
}

}  // namespace ivoct::model
