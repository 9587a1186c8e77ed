#include "ivoct/backbone.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace ivoct {

std::string_view to_string(Backbone backbone) {
    switch (backbone) {
        case Backbone::ResNet50: return "resnet50";
        case Backbone::ResNet101: return "resnet101";
        case Backbone::InceptionV3: return "inception_v3";
        case Backbone::InceptionResNetV2: return "inception_resnet_v2";
        case Backbone::SmallTest: return "small_test";
    }
    throw std::invalid_argument("unknown backbone");
}

std::string_view display_name(Backbone backbone) {
    switch (backbone) {
        case Backbone::ResNet50: return "ResNet50";
        case Backbone::ResNet101: return "ResNet101";
        case Backbone::InceptionV3: return "InceptionV3";
        case Backbone::InceptionResNetV2: return "Inception-ResNetV2";
        case Backbone::SmallTest: return "SmallTest";
    }
    throw std::invalid_argument("unknown backbone");
}

Backbone parse_backbone(std::string_view token) {
    std::string key(token);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) {
        return ch == '-' ? '_' : static_cast<char>(std::tolower(ch));
    });
    for (const Backbone b : kAllBackbones) {
        if (key == to_string(b)) return b;
    }
    throw std::invalid_argument("unknown backbone '" + std::string(token) + "'");
}

char plot_marker(Backbone backbone) {
    switch (backbone) {
        case Backbone::ResNet50: return '*';
        case Backbone::ResNet101: return 'x';
        case Backbone::InceptionV3: return 'o';
        case Backbone::InceptionResNetV2: return '+';
        case Backbone::SmallTest: return '.';
    }
    throw std::invalid_argument("unknown backbone");
}

}  // namespace ivoct
