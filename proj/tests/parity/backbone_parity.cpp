// Compares our backbone forward pass with reference features exported by
// tools/export_torchvision_weights.py --parity.

#include <cstdio>
#include <map>

#include "ivoct/network.hpp"
#include "tensor_archive.hpp"

using namespace ivoct;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: backbone_parity <parity.ivw>\n");
        return 2;
    }
    try {
        const auto archive = model::read_tensor_archive(argv[1]);
        const auto backbone_kind = parse_backbone(archive.meta.at("backbone").get<std::string>());
        std::map<std::string, torch::Tensor> tensors(archive.tensors.begin(), archive.tensors.end());

        auto backbone = model::make_backbone(backbone_kind);
        std::size_t loaded = 0;
        {
            torch::NoGradGuard no_grad;
            auto copy = [&](const std::string& name, torch::Tensor& target) {
                const auto it = tensors.find(name);
                if (it == tensors.end()) throw std::runtime_error("reference lacks '" + name + "'");
                if (it->second.sizes() != target.sizes()) throw std::runtime_error("shape mismatch for '" + name + "'");
                target.copy_(it->second);
                ++loaded;
            };
            for (auto& p : backbone->named_parameters(true)) copy(p.key(), p.value());
            for (auto& b : backbone->named_buffers(true)) copy(b.key(), b.value());
        }
        // Every reference tensor must be consumed, so no layer is silently missing.
        const std::size_t expected = tensors.size() - 2;
        if (loaded != expected) {
            std::fprintf(stderr, "loaded %zu of %zu reference tensors\n", loaded, expected);
            return 1;
        }
        backbone->eval();
        torch::NoGradGuard no_grad;
        const auto ours = backbone->forward(tensors.at("__probe__"));
        const auto& ref = tensors.at("__features__");
        if (ours.sizes() != ref.sizes()) {
            std::fprintf(stderr, "feature shape mismatch\n");
            return 1;
        }
        const double max_err = (ours - ref).abs().max().item<double>();
        const double scale = ref.abs().max().item<double>();
        std::printf("%s: %zu tensors, features %lldx%lld, max abs err %.3g (scale %.3g)\n",
                    std::string(display_name(backbone_kind)).c_str(), loaded,
                    static_cast<long long>(ref.size(0)), static_cast<long long>(ref.size(1)), max_err, scale);
        return max_err <= 1e-4 * std::max(1.0, scale) ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
