#pragma once

#include <array>
#include <string_view>

namespace ivoct {

enum class Backbone { ResNet50, ResNet101, InceptionV3, InceptionResNetV2, SmallTest };

inline constexpr std::array<Backbone, 5> kAllBackbones = {
    Backbone::ResNet50, Backbone::ResNet101, Backbone::InceptionV3, Backbone::InceptionResNetV2,
    Backbone::SmallTest};

/// Config/file token, e.g. "resnet101".
std::string_view to_string(Backbone backbone);
/// Human-readable name, e.g. "ResNet101".
std::string_view display_name(Backbone backbone);
/// Accepts the config token (case-insensitive, '-' and '_' interchangeable).
Backbone parse_backbone(std::string_view token);
/// Scatter-plot marker: '*' ResNet50, 'x' ResNet101, 'o' InceptionV3,
/// '+' Inception-ResNetV2, '.' SmallTest.
char plot_marker(Backbone backbone);

}  // namespace ivoct
