#pragma once

// libtorch-level view of the classifier networks. Only translation units
// that need tensors include this header.

#include <memory>
#include <span>

#include <torch/torch.h>

#include "ivoct/backbone.hpp"
#include "ivoct/image.hpp"
#include "ivoct/model.hpp"

namespace ivoct::model {

/// Feature extractor: (B, 3, H, W) -> (B, feature_dim) pooled features.
class BackboneModule : public torch::nn::Module {
public:
    virtual torch::Tensor forward(torch::Tensor x) = 0;
    [[nodiscard]] virtual std::int64_t feature_dim() const = 0;
};

std::shared_ptr<BackboneModule> make_backbone(Backbone backbone);

/// backbone -> head_dropout -> head_fc
class NetworkImpl : public torch::nn::Module {
public:
    NetworkImpl(std::shared_ptr<BackboneModule> backbone, double dropout_p, std::int64_t num_classes);

    torch::Tensor forward(torch::Tensor x);

    std::shared_ptr<BackboneModule> backbone;
    torch::nn::Dropout head_dropout{nullptr};
    torch::nn::Linear head_fc{nullptr};
};
TORCH_MODULE(Network);

namespace detail {
struct NetworkHolder {
    Network net;
};
}  // namespace detail

inline Network& network_of(TrainedModel& model) { return model.network().net; }
inline const Network& network_of(const TrainedModel& model) { return model.network().net; }

/// Stacks equally sized grayscale grids into (B, 3, H, W), replicating the
/// channel and applying the per-channel normalization.
torch::Tensor to_input_tensor(std::span<const Image> images, const Normalization& normalization);

/// Raw logits in eval mode, no autograd.
torch::Tensor forward_logits(const TrainedModel& model, const torch::Tensor& input);

}  // namespace ivoct::model
