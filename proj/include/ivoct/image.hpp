#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ivoct {

enum class Label { Plaque, NoPlaque };
enum class Representation { Polar, Cartesian };

std::string_view to_string(Label label);
std::string_view to_string(Representation representation);
/// Parses the lowercase manifest tokens; throws std::invalid_argument otherwise.
Label parse_label(std::string_view token);
Representation parse_representation(std::string_view token);

struct Shape2D {
    std::size_t rows = 0;
    std::size_t cols = 0;

    friend bool operator==(const Shape2D&, const Shape2D&) = default;
};

/// Row-major single-channel float image.
class Image {
public:
    Image() = default;
    Image(std::size_t rows, std::size_t cols, float value = 0.0f);
    Image(std::size_t rows, std::size_t cols, std::vector<float> data);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] Shape2D shape() const { return {rows_, cols_}; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<float> pixels() { return data_; }
    [[nodiscard]] std::span<const float> pixels() const { return data_; }
    [[nodiscard]] std::span<const float> row(std::size_t r) const {
        return std::span<const float>(data_).subspan(r * cols_, cols_);
    }

    [[nodiscard]] double mean() const;
    /// True if every value is finite and within [0, 1].
    [[nodiscard]] bool in_unit_range() const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

/// Depth x angle grid of A-scans. Column k was acquired at angle 2*pi*k/K.
class PolarImage {
public:
    static constexpr std::size_t kMinDepthSamples = 2;
    static constexpr std::size_t kMinAscans = 4;

    explicit PolarImage(Image samples);

    [[nodiscard]] const Image& samples() const { return samples_; }
    [[nodiscard]] std::size_t depth_samples() const { return samples_.rows(); }
    [[nodiscard]] std::size_t num_ascans() const { return samples_.cols(); }

    friend bool operator==(const PolarImage&, const PolarImage&) = default;

private:
    Image samples_;
};

/// Square scan-converted cross section; pixels outside the scanned disk hold fill().
class CartesianImage {
public:
    static constexpr std::size_t kMinSide = 8;

    explicit CartesianImage(Image pixels, float fill = 0.0f);

    [[nodiscard]] const Image& pixels() const { return pixels_; }
    [[nodiscard]] std::size_t side() const { return pixels_.rows(); }
    [[nodiscard]] float fill() const { return fill_; }

    friend bool operator==(const CartesianImage&, const CartesianImage&) = default;

private:
    Image pixels_;
    float fill_;
};

/// A decoded B-scan in whichever representation its manifest declares.
using BScan = std::variant<PolarImage, CartesianImage>;

Representation representation_of(const BScan& scan);
const Image& grid_of(const BScan& scan);
/// Wraps a grid as the given representation, validating the type's invariants.
BScan make_bscan(Image grid, Representation representation);

}  // namespace ivoct
