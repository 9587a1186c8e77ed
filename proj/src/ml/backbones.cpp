// Backbone feature extractors. Module and parameter names follow the
// torchvision (ResNet, InceptionV3) and timm (Inception-ResNetV2) layouts so
// that their ImageNet state dicts load by name; see
// tools/export_torchvision_weights.py.

#include <stdexcept>

#include "ivoct/network.hpp"

namespace ivoct::model {

namespace nn = torch::nn;
namespace F = torch::nn::functional;
using torch::ExpandingArray;
using K2 = ExpandingArray<2>;

namespace {

torch::Tensor global_average(const torch::Tensor& x) {
    return F::adaptive_avg_pool2d(x, F::AdaptiveAvgPool2dFuncOptions({1, 1})).flatten(1);
}

torch::Tensor max_pool_3x3_s2(const torch::Tensor& x) {
    return F::max_pool2d(x, F::MaxPool2dFuncOptions(3).stride(2));
}

void init_conv_bn(nn::Module& module) {
    torch::NoGradGuard no_grad;
    for (auto& m : module.modules(/*include_self=*/false)) {
        if (auto* conv = m->as<nn::Conv2d>()) {
            nn::init::kaiming_normal_(conv->weight, 0.0, torch::kFanOut, torch::kReLU);
            if (conv->bias.defined()) nn::init::zeros_(conv->bias);
        } else if (auto* bn = m->as<nn::BatchNorm2d>()) {
            nn::init::ones_(bn->weight);
            nn::init::zeros_(bn->bias);
        }
    }
}

// conv (no bias) -> batch norm -> ReLU
class BasicConv2dImpl : public nn::Module {
public:
    BasicConv2dImpl(std::int64_t in, std::int64_t out, ExpandingArray<2> kernel,
                    ExpandingArray<2> stride = 1, ExpandingArray<2> padding = 0, double eps = 1e-3)
        : conv(register_module("conv", nn::Conv2d(nn::Conv2dOptions(in, out, kernel)
                                                       .stride(stride)
                                                       .padding(padding)
                                                       .bias(false)))),
          bn(register_module("bn", nn::BatchNorm2d(nn::BatchNorm2dOptions(out).eps(eps)))) {}

    torch::Tensor forward(torch::Tensor x) { return torch::relu(bn(conv(x))); }

    nn::Conv2d conv;
    nn::BatchNorm2d bn;
};
TORCH_MODULE(BasicConv2d);

// ---------------------------------------------------------------------------
// ResNet (bottleneck, stride on the 3x3 convolution)

class BottleneckImpl : public nn::Module {
public:
    static constexpr std::int64_t kExpansion = 4;

    BottleneckImpl(std::int64_t inplanes, std::int64_t planes, std::int64_t stride)
        : conv1(register_module("conv1", nn::Conv2d(nn::Conv2dOptions(inplanes, planes, 1).bias(false)))),
          bn1(register_module("bn1", nn::BatchNorm2d(planes))),
          conv2(register_module("conv2", nn::Conv2d(nn::Conv2dOptions(planes, planes, 3)
                                                         .stride(stride)
                                                         .padding(1)
                                                         .bias(false)))),
          bn2(register_module("bn2", nn::BatchNorm2d(planes))),
          conv3(register_module("conv3", nn::Conv2d(nn::Conv2dOptions(planes, planes * kExpansion, 1)
                                                         .bias(false)))),
          bn3(register_module("bn3", nn::BatchNorm2d(planes * kExpansion))) {
        if (stride != 1 || inplanes != planes * kExpansion) {
            downsample = register_module(
                "downsample",
                nn::Sequential(nn::Conv2d(nn::Conv2dOptions(inplanes, planes * kExpansion, 1)
                                              .stride(stride)
                                              .bias(false)),
                               nn::BatchNorm2d(planes * kExpansion)));
        }
    }

    torch::Tensor forward(torch::Tensor x) {
        auto out = torch::relu(bn1(conv1(x)));
        out = torch::relu(bn2(conv2(out)));
        out = bn3(conv3(out));
        const auto identity = downsample ? downsample->forward(x) : x;
        return torch::relu(out + identity);
    }

    nn::Conv2d conv1;
    nn::BatchNorm2d bn1;
    nn::Conv2d conv2;
    nn::BatchNorm2d bn2;
    nn::Conv2d conv3;
    nn::BatchNorm2d bn3;
    nn::Sequential downsample{nullptr};
};
TORCH_MODULE(Bottleneck);

class ResNetImpl : public BackboneModule {
public:
    explicit ResNetImpl(std::array<int, 4> blocks)
        : conv1(register_module("conv1", nn::Conv2d(nn::Conv2dOptions(3, 64, 7)
                                                         .stride(2)
                                                         .padding(3)
                                                         .bias(false)))),
          bn1(register_module("bn1", nn::BatchNorm2d(64))) {
        layer1 = register_module("layer1", make_layer(64, blocks[0], 1));
        layer2 = register_module("layer2", make_layer(128, blocks[1], 2));
        layer3 = register_module("layer3", make_layer(256, blocks[2], 2));
        layer4 = register_module("layer4", make_layer(512, blocks[3], 2));
        init_conv_bn(*this);
    }

    torch::Tensor forward(torch::Tensor x) override {
        x = torch::relu(bn1(conv1(x)));
        x = F::max_pool2d(x, F::MaxPool2dFuncOptions(3).stride(2).padding(1));
        x = layer4->forward(layer3->forward(layer2->forward(layer1->forward(x))));
        return global_average(x);
    }

    [[nodiscard]] std::int64_t feature_dim() const override { return 512 * BottleneckImpl::kExpansion; }

private:
    nn::Sequential make_layer(std::int64_t planes, int blocks, std::int64_t stride) {
        nn::Sequential layer;
        layer->push_back(Bottleneck(inplanes_, planes, stride));
        inplanes_ = planes * BottleneckImpl::kExpansion;
        for (int i = 1; i < blocks; ++i) layer->push_back(Bottleneck(inplanes_, planes, 1));
        return layer;
    }

    std::int64_t inplanes_ = 64;
    nn::Conv2d conv1;
    nn::BatchNorm2d bn1;
    nn::Sequential layer1{nullptr}, layer2{nullptr}, layer3{nullptr}, layer4{nullptr};
};

// ---------------------------------------------------------------------------
// InceptionV3

torch::Tensor avg_pool_3x3_same(const torch::Tensor& x) {
    return F::avg_pool2d(x, F::AvgPool2dFuncOptions(3).stride(1).padding(1));
}

class InceptionAImpl : public nn::Module {
public:
    InceptionAImpl(std::int64_t in, std::int64_t pool_features)
        : branch1x1(register_module("branch1x1", BasicConv2d(in, 64, 1))),
          branch5x5_1(register_module("branch5x5_1", BasicConv2d(in, 48, 1))),
          branch5x5_2(register_module("branch5x5_2", BasicConv2d(48, 64, 5, 1, 2))),
          branch3x3dbl_1(register_module("branch3x3dbl_1", BasicConv2d(in, 64, 1))),
          branch3x3dbl_2(register_module("branch3x3dbl_2", BasicConv2d(64, 96, 3, 1, 1))),
          branch3x3dbl_3(register_module("branch3x3dbl_3", BasicConv2d(96, 96, 3, 1, 1))),
          branch_pool(register_module("branch_pool", BasicConv2d(in, pool_features, 1))) {}

    torch::Tensor forward(torch::Tensor x) {
        return torch::cat({branch1x1(x), branch5x5_2(branch5x5_1(x)),
                           branch3x3dbl_3(branch3x3dbl_2(branch3x3dbl_1(x))),
                           branch_pool(avg_pool_3x3_same(x))},
                          1);
    }

    BasicConv2d branch1x1, branch5x5_1, branch5x5_2, branch3x3dbl_1, branch3x3dbl_2, branch3x3dbl_3,
        branch_pool;
};
TORCH_MODULE(InceptionA);

class InceptionBImpl : public nn::Module {
public:
    explicit InceptionBImpl(std::int64_t in)
        : branch3x3(register_module("branch3x3", BasicConv2d(in, 384, 3, 2))),
          branch3x3dbl_1(register_module("branch3x3dbl_1", BasicConv2d(in, 64, 1))),
          branch3x3dbl_2(register_module("branch3x3dbl_2", BasicConv2d(64, 96, 3, 1, 1))),
          branch3x3dbl_3(register_module("branch3x3dbl_3", BasicConv2d(96, 96, 3, 2))) {}

    torch::Tensor forward(torch::Tensor x) {
        return torch::cat({branch3x3(x), branch3x3dbl_3(branch3x3dbl_2(branch3x3dbl_1(x))),
                           max_pool_3x3_s2(x)},
                          1);
    }

    BasicConv2d branch3x3, branch3x3dbl_1, branch3x3dbl_2, branch3x3dbl_3;
};
TORCH_MODULE(InceptionB);

class InceptionCImpl : public nn::Module {
public:
    InceptionCImpl(std::int64_t in, std::int64_t c7)
        : branch1x1(register_module("branch1x1", BasicConv2d(in, 192, 1))),
          branch7x7_1(register_module("branch7x7_1", BasicConv2d(in, c7, 1))),
          branch7x7_2(register_module("branch7x7_2", BasicConv2d(c7, c7, K2({1, 7}), 1, K2({0, 3})))),
          branch7x7_3(register_module("branch7x7_3", BasicConv2d(c7, 192, K2({7, 1}), 1, K2({3, 0})))),
          branch7x7dbl_1(register_module("branch7x7dbl_1", BasicConv2d(in, c7, 1))),
          branch7x7dbl_2(register_module("branch7x7dbl_2", BasicConv2d(c7, c7, K2({7, 1}), 1, K2({3, 0})))),
          branch7x7dbl_3(register_module("branch7x7dbl_3", BasicConv2d(c7, c7, K2({1, 7}), 1, K2({0, 3})))),
          branch7x7dbl_4(register_module("branch7x7dbl_4", BasicConv2d(c7, c7, K2({7, 1}), 1, K2({3, 0})))),
          branch7x7dbl_5(register_module("branch7x7dbl_5", BasicConv2d(c7, 192, K2({1, 7}), 1, K2({0, 3})))),
          branch_pool(register_module("branch_pool", BasicConv2d(in, 192, 1))) {}

    torch::Tensor forward(torch::Tensor x) {
        auto b7 = branch7x7_3(branch7x7_2(branch7x7_1(x)));
        auto b7d = branch7x7dbl_5(branch7x7dbl_4(branch7x7dbl_3(branch7x7dbl_2(branch7x7dbl_1(x)))));
        return torch::cat({branch1x1(x), b7, b7d, branch_pool(avg_pool_3x3_same(x))}, 1);
    }

    BasicConv2d branch1x1, branch7x7_1, branch7x7_2, branch7x7_3, branch7x7dbl_1, branch7x7dbl_2,
        branch7x7dbl_3, branch7x7dbl_4, branch7x7dbl_5, branch_pool;
};
TORCH_MODULE(InceptionC);

class InceptionDImpl : public nn::Module {
public:
    explicit InceptionDImpl(std::int64_t in)
        : branch3x3_1(register_module("branch3x3_1", BasicConv2d(in, 192, 1))),
          branch3x3_2(register_module("branch3x3_2", BasicConv2d(192, 320, 3, 2))),
          branch7x7x3_1(register_module("branch7x7x3_1", BasicConv2d(in, 192, 1))),
          branch7x7x3_2(register_module("branch7x7x3_2", BasicConv2d(192, 192, K2({1, 7}), 1, K2({0, 3})))),
          branch7x7x3_3(register_module("branch7x7x3_3", BasicConv2d(192, 192, K2({7, 1}), 1, K2({3, 0})))),
          branch7x7x3_4(register_module("branch7x7x3_4", BasicConv2d(192, 192, 3, 2))) {}

    torch::Tensor forward(torch::Tensor x) {
        return torch::cat({branch3x3_2(branch3x3_1(x)),
                           branch7x7x3_4(branch7x7x3_3(branch7x7x3_2(branch7x7x3_1(x)))),
                           max_pool_3x3_s2(x)},
                          1);
    }

    BasicConv2d branch3x3_1, branch3x3_2, branch7x7x3_1, branch7x7x3_2, branch7x7x3_3, branch7x7x3_4;
};
TORCH_MODULE(InceptionD);

class InceptionEImpl : public nn::Module {
public:
    explicit InceptionEImpl(std::int64_t in)
        : branch1x1(register_module("branch1x1", BasicConv2d(in, 320, 1))),
          branch3x3_1(register_module("branch3x3_1", BasicConv2d(in, 384, 1))),
          branch3x3_2a(register_module("branch3x3_2a", BasicConv2d(384, 384, K2({1, 3}), 1, K2({0, 1})))),
          branch3x3_2b(register_module("branch3x3_2b", BasicConv2d(384, 384, K2({3, 1}), 1, K2({1, 0})))),
          branch3x3dbl_1(register_module("branch3x3dbl_1", BasicConv2d(in, 448, 1))),
          branch3x3dbl_2(register_module("branch3x3dbl_2", BasicConv2d(448, 384, 3, 1, 1))),
          branch3x3dbl_3a(register_module("branch3x3dbl_3a", BasicConv2d(384, 384, K2({1, 3}), 1, K2({0, 1})))),
          branch3x3dbl_3b(register_module("branch3x3dbl_3b", BasicConv2d(384, 384, K2({3, 1}), 1, K2({1, 0})))),
          branch_pool(register_module("branch_pool", BasicConv2d(in, 192, 1))) {}

    torch::Tensor forward(torch::Tensor x) {
        auto b3 = branch3x3_1(x);
        b3 = torch::cat({branch3x3_2a(b3), branch3x3_2b(b3)}, 1);
        auto b3d = branch3x3dbl_2(branch3x3dbl_1(x));
        b3d = torch::cat({branch3x3dbl_3a(b3d), branch3x3dbl_3b(b3d)}, 1);
        return torch::cat({branch1x1(x), b3, b3d, branch_pool(avg_pool_3x3_same(x))}, 1);
    }

    BasicConv2d branch1x1, branch3x3_1, branch3x3_2a, branch3x3_2b, branch3x3dbl_1, branch3x3dbl_2,
        branch3x3dbl_3a, branch3x3dbl_3b, branch_pool;
};
TORCH_MODULE(InceptionE);

class InceptionV3Impl : public BackboneModule {
public:
    InceptionV3Impl()
        : Conv2d_1a_3x3(register_module("Conv2d_1a_3x3", BasicConv2d(3, 32, 3, 2))),
          Conv2d_2a_3x3(register_module("Conv2d_2a_3x3", BasicConv2d(32, 32, 3))),
          Conv2d_2b_3x3(register_module("Conv2d_2b_3x3", BasicConv2d(32, 64, 3, 1, 1))),
          Conv2d_3b_1x1(register_module("Conv2d_3b_1x1", BasicConv2d(64, 80, 1))),
          Conv2d_4a_3x3(register_module("Conv2d_4a_3x3", BasicConv2d(80, 192, 3))),
          Mixed_5b(register_module("Mixed_5b", InceptionA(192, 32))),
          Mixed_5c(register_module("Mixed_5c", InceptionA(256, 64))),
          Mixed_5d(register_module("Mixed_5d", InceptionA(288, 64))),
          Mixed_6a(register_module("Mixed_6a", InceptionB(288))),
          Mixed_6b(register_module("Mixed_6b", InceptionC(768, 128))),
          Mixed_6c(register_module("Mixed_6c", InceptionC(768, 160))),
          Mixed_6d(register_module("Mixed_6d", InceptionC(768, 160))),
          Mixed_6e(register_module("Mixed_6e", InceptionC(768, 192))),
          Mixed_7a(register_module("Mixed_7a", InceptionD(768))),
          Mixed_7b(register_module("Mixed_7b", InceptionE(1280))),
          Mixed_7c(register_module("Mixed_7c", InceptionE(2048))) {
        init_conv_bn(*this);
    }

    torch::Tensor forward(torch::Tensor x) override {
        x = Conv2d_2b_3x3(Conv2d_2a_3x3(Conv2d_1a_3x3(x)));
        x = max_pool_3x3_s2(x);
        x = Conv2d_4a_3x3(Conv2d_3b_1x1(x));
        x = max_pool_3x3_s2(x);
        x = Mixed_5d(Mixed_5c(Mixed_5b(x)));
        x = Mixed_6e(Mixed_6d(Mixed_6c(Mixed_6b(Mixed_6a(x)))));
        x = Mixed_7c(Mixed_7b(Mixed_7a(x)));
        return global_average(x);
    }

    [[nodiscard]] std::int64_t feature_dim() const override { return 2048; }

    BasicConv2d Conv2d_1a_3x3, Conv2d_2a_3x3, Conv2d_2b_3x3, Conv2d_3b_1x1, Conv2d_4a_3x3;
    InceptionA Mixed_5b, Mixed_5c, Mixed_5d;
    InceptionB Mixed_6a;
    InceptionC Mixed_6b, Mixed_6c, Mixed_6d, Mixed_6e;
    InceptionD Mixed_7a;
    InceptionE Mixed_7b, Mixed_7c;
};

// ---------------------------------------------------------------------------
// Inception-ResNetV2

class Mixed5bImpl : public nn::Module {
public:
    Mixed5bImpl()
        : branch0(register_module("branch0", BasicConv2d(192, 96, 1))),
          branch1(register_module("branch1", nn::Sequential(BasicConv2d(192, 48, 1),
                                                             BasicConv2d(48, 64, 5, 1, 2)))),
          branch2(register_module("branch2", nn::Sequential(BasicConv2d(192, 64, 1),
                                                             BasicConv2d(64, 96, 3, 1, 1),
                                                             BasicConv2d(96, 96, 3, 1, 1)))),
          branch3(register_module(
              "branch3",
              nn::Sequential(nn::AvgPool2d(nn::AvgPool2dOptions(3).stride(1).padding(1).count_include_pad(false)),
                             BasicConv2d(192, 64, 1)))) {}

    torch::Tensor forward(torch::Tensor x) {
        return torch::cat({branch0(x), branch1->forward(x), branch2->forward(x), branch3->forward(x)}, 1);
    }

    BasicConv2d branch0;
    nn::Sequential branch1, branch2, branch3;
};
TORCH_MODULE(Mixed5b);

// Residual block: relu?(x + scale * conv1x1(cat(branches)))
class Block35Impl : public nn::Module {
public:
    explicit Block35Impl(double scale)
        : scale_(scale),
          branch0(register_module("branch0", BasicConv2d(320, 32, 1))),
          branch1(register_module("branch1", nn::Sequential(BasicConv2d(320, 32, 1),
                                                             BasicConv2d(32, 32, 3, 1, 1)))),
          branch2(register_module("branch2", nn::Sequential(BasicConv2d(320, 32, 1),
                                                             BasicConv2d(32, 48, 3, 1, 1),
                                                             BasicConv2d(48, 64, 3, 1, 1)))),
          conv2d(register_module("conv2d", nn::Conv2d(nn::Conv2dOptions(128, 320, 1)))) {}

    torch::Tensor forward(torch::Tensor x) {
        auto out = torch::cat({branch0(x), branch1->forward(x), branch2->forward(x)}, 1);
        return torch::relu(conv2d(out) * scale_ + x);
    }

    double scale_;
    BasicConv2d branch0;
    nn::Sequential branch1, branch2;
    nn::Conv2d conv2d;
};
TORCH_MODULE(Block35);

class Mixed6aImpl : public nn::Module {
public:
    Mixed6aImpl()
        : branch0(register_module("branch0", BasicConv2d(320, 384, 3, 2))),
          branch1(register_module("branch1", nn::Sequential(BasicConv2d(320, 256, 1),
                                                             BasicConv2d(256, 256, 3, 1, 1),
                                                             BasicConv2d(256, 384, 3, 2)))) {}

    torch::Tensor forward(torch::Tensor x) {
        return torch::cat({branch0(x), branch1->forward(x), max_pool_3x3_s2(x)}, 1);
    }

    BasicConv2d branch0;
    nn::Sequential branch1;
};
TORCH_MODULE(Mixed6a);

class Block17Impl : public nn::Module {
public:
    explicit Block17Impl(double scale)
        : scale_(scale),
          branch0(register_module("branch0", BasicConv2d(1088, 192, 1))),
          branch1(register_module("branch1", nn::Sequential(BasicConv2d(1088, 128, 1),
                                                             BasicConv2d(128, 160, K2({1, 7}), 1, K2({0, 3})),
                                                             BasicConv2d(160, 192, K2({7, 1}), 1, K2({3, 0}))))),
          conv2d(register_module("conv2d", nn::Conv2d(nn::Conv2dOptions(384, 1088, 1)))) {}

    torch::Tensor forward(torch::Tensor x) {
        auto out = torch::cat({branch0(x), branch1->forward(x)}, 1);
        return torch::relu(conv2d(out) * scale_ + x);
    }

    double scale_;
    BasicConv2d branch0;
    nn::Sequential branch1;
    nn::Conv2d conv2d;
};
TORCH_MODULE(Block17);

class Mixed7aImpl : public nn::Module {
public:
    Mixed7aImpl()
        : branch0(register_module("branch0", nn::Sequential(BasicConv2d(1088, 256, 1),
                                                             BasicConv2d(256, 384, 3, 2)))),
          branch1(register_module("branch1", nn::Sequential(BasicConv2d(1088, 256, 1),
                                                             BasicConv2d(256, 288, 3, 2)))),
          branch2(register_module("branch2", nn::Sequential(BasicConv2d(1088, 256, 1),
                                                             BasicConv2d(256, 288, 3, 1, 1),
                                                             BasicConv2d(288, 320, 3, 2)))) {}

    torch::Tensor forward(torch::Tensor x) {
        return torch::cat({branch0->forward(x), branch1->forward(x), branch2->forward(x),
                           max_pool_3x3_s2(x)},
                          1);
    }

    nn::Sequential branch0, branch1, branch2;
};
TORCH_MODULE(Mixed7a);

class Block8Impl : public nn::Module {
public:
    Block8Impl(double scale, bool no_relu)
        : scale_(scale),
          no_relu_(no_relu),
          branch0(register_module("branch0", BasicConv2d(2080, 192, 1))),
          branch1(register_module("branch1", nn::Sequential(BasicConv2d(2080, 192, 1),
                                                             BasicConv2d(192, 224, K2({1, 3}), 1, K2({0, 1})),
                                                             BasicConv2d(224, 256, K2({3, 1}), 1, K2({1, 0}))))),
          conv2d(register_module("conv2d", nn::Conv2d(nn::Conv2dOptions(448, 2080, 1)))) {}

    torch::Tensor forward(torch::Tensor x) {
        auto out = torch::cat({branch0(x), branch1->forward(x)}, 1);
        out = conv2d(out) * scale_ + x;
        return no_relu_ ? out : torch::relu(out);
    }

    double scale_;
    bool no_relu_;
    BasicConv2d branch0;
    nn::Sequential branch1;
    nn::Conv2d conv2d;
};
TORCH_MODULE(Block8);

class InceptionResNetV2Impl : public BackboneModule {
public:
    InceptionResNetV2Impl()
        : conv2d_1a(register_module("conv2d_1a", BasicConv2d(3, 32, 3, 2))),
          conv2d_2a(register_module("conv2d_2a", BasicConv2d(32, 32, 3))),
          conv2d_2b(register_module("conv2d_2b", BasicConv2d(32, 64, 3, 1, 1))),
          conv2d_3b(register_module("conv2d_3b", BasicConv2d(64, 80, 1))),
          conv2d_4a(register_module("conv2d_4a", BasicConv2d(80, 192, 3))),
          mixed_5b(register_module("mixed_5b", Mixed5b())),
          repeat(register_module("repeat", nn::Sequential())),
          mixed_6a(register_module("mixed_6a", Mixed6a())),
          repeat_1(register_module("repeat_1", nn::Sequential())),
          mixed_7a(register_module("mixed_7a", Mixed7a())),
          repeat_2(register_module("repeat_2", nn::Sequential())),
          block8(register_module("block8", Block8(1.0, true))),
          conv2d_7b(register_module("conv2d_7b", BasicConv2d(2080, 1536, 1))) {
        for (int i = 0; i < 10; ++i) repeat->push_back(Block35(0.17));
        for (int i = 0; i < 20; ++i) repeat_1->push_back(Block17(0.10));
        for (int i = 0; i < 9; ++i) repeat_2->push_back(Block8(0.20, false));
        init_conv_bn(*this);
    }

    torch::Tensor forward(torch::Tensor x) override {
        x = conv2d_2b(conv2d_2a(conv2d_1a(x)));
        x = max_pool_3x3_s2(x);
        x = conv2d_4a(conv2d_3b(x));
        x = max_pool_3x3_s2(x);
        x = repeat->forward(mixed_5b(x));
        x = repeat_1->forward(mixed_6a(x));
        x = repeat_2->forward(mixed_7a(x));
        x = conv2d_7b(block8(x));
        return global_average(x);
    }

    [[nodiscard]] std::int64_t feature_dim() const override { return 1536; }

    BasicConv2d conv2d_1a, conv2d_2a, conv2d_2b, conv2d_3b, conv2d_4a;
    Mixed5b mixed_5b;
    nn::Sequential repeat;
    Mixed6a mixed_6a;
    nn::Sequential repeat_1;
    Mixed7a mixed_7a;
    nn::Sequential repeat_2;
    Block8 block8;
    BasicConv2d conv2d_7b;
};

// ---------------------------------------------------------------------------
// SmallTest: four strided conv blocks, then concatenated global average and
// global max pooling so a localized signature survives pooling.

class SmallTestImpl : public BackboneModule {
public:
    SmallTestImpl()
        : block1(register_module("block1", BasicConv2d(3, 16, 5, 2, 2, 1e-5))),
          block2(register_module("block2", BasicConv2d(16, 32, 3, 2, 1, 1e-5))),
          block3(register_module("block3", BasicConv2d(32, 64, 3, 2, 1, 1e-5))),
          block4(register_module("block4", BasicConv2d(64, 64, 3, 2, 1, 1e-5))) {
        init_conv_bn(*this);
    }

    torch::Tensor forward(torch::Tensor x) override {
        x = block4(block3(block2(block1(x))));
        auto max = F::adaptive_max_pool2d(x, F::AdaptiveMaxPool2dFuncOptions({1, 1})).flatten(1);
        return torch::cat({global_average(x), max}, 1);
    }

    [[nodiscard]] std::int64_t feature_dim() const override { return 128; }

    BasicConv2d block1, block2, block3, block4;
};

}  // namespace

std::shared_ptr<BackboneModule> make_backbone(Backbone backbone) {
    switch (backbone) {
        case Backbone::ResNet50: return std::make_shared<ResNetImpl>(std::array<int, 4>{3, 4, 6, 3});
        case Backbone::ResNet101: return std::make_shared<ResNetImpl>(std::array<int, 4>{3, 4, 23, 3});
        case Backbone::InceptionV3: return std::make_shared<InceptionV3Impl>();
        case Backbone::InceptionResNetV2: return std::make_shared<InceptionResNetV2Impl>();
        case Backbone::SmallTest: return std::make_shared<SmallTestImpl>();
    }
    throw ModelError("unknown backbone");
}

}  // namespace ivoct::model
