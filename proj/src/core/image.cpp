#include "ivoct/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ivoct {

std::string_view to_string(Label label) {
    return label == Label::Plaque ? "plaque" : "no_plaque";
}

std::string_view to_string(Representation representation) {
    return representation == Representation::Polar ? "polar" : "cartesian";
}

Label parse_label(std::string_view token) {
    if (token == "plaque") return Label::Plaque;
    if (token == "no_plaque") return Label::NoPlaque;
    throw std::invalid_argument("unknown label '" + std::string(token) + "'");
}

Representation parse_representation(std::string_view token) {
    if (token == "polar") return Representation::Polar;
    if (token == "cartesian") return Representation::Cartesian;
    throw std::invalid_argument("unknown representation '" + std::string(token) + "'");
}

Image::Image(std::size_t rows, std::size_t cols, float value)
    : rows_(rows), cols_(cols), data_(rows * cols, value) {}

Image::Image(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("Image: data size does not match shape");
    }
}

double Image::mean() const {
    if (data_.empty()) return 0.0;
    const double sum = std::accumulate(data_.begin(), data_.end(), 0.0);
    return sum / static_cast<double>(data_.size());
}

bool Image::in_unit_range() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

PolarImage::PolarImage(Image samples) : samples_(std::move(samples)) {
    if (samples_.rows() < kMinDepthSamples || samples_.cols() < kMinAscans) {
        throw std::invalid_argument("PolarImage: need at least 2 depth samples and 4 A-scans, got " +
                                    std::to_string(samples_.rows()) + "x" +
                                    std::to_string(samples_.cols()));
    }
    if (!samples_.in_unit_range()) {
        throw std::invalid_argument("PolarImage: samples must be finite and within [0,1]");
    }
}

CartesianImage::CartesianImage(Image pixels, float fill) : pixels_(std::move(pixels)), fill_(fill) {
    if (pixels_.rows() != pixels_.cols()) {
        throw std::invalid_argument("CartesianImage: grid must be square, got " +
                                    std::to_string(pixels_.rows()) + "x" +
                                    std::to_string(pixels_.cols()));
    }
    if (pixels_.rows() < kMinSide) {
        throw std::invalid_argument("CartesianImage: side must be at least 8");
    }
    if (!pixels_.in_unit_range() || !(fill_ >= 0.0f && fill_ <= 1.0f)) {
        throw std::invalid_argument("CartesianImage: values must be finite and within [0,1]");
    }
}

Representation representation_of(const BScan& scan) {
    return std::holds_alternative<PolarImage>(scan) ? Representation::Polar
                                                    : Representation::Cartesian;
}

const Image& grid_of(const BScan& scan) {
    if (const auto* polar = std::get_if<PolarImage>(&scan)) {
        return polar->samples();
    }
    return std::get<CartesianImage>(scan).pixels();
}

BScan make_bscan(Image grid, Representation representation) {
    if (representation == Representation::Polar) {
        return PolarImage(std::move(grid));
    }
    return CartesianImage(std::move(grid));
}

}  // namespace ivoct
