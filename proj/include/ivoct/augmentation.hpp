#pragma once

#include <cstdint>

#include "ivoct/image.hpp"
#include "ivoct/random.hpp"

namespace ivoct::augment {

struct AugmentConfig {
    Representation representation = Representation::Cartesian;
    Shape2D resize_to{300, 300};
    Shape2D crop_to{270, 270};
    double flip_probability = 0.5;   // polar only
    double rotation_min_deg = 0.0;   // cartesian only, uniform on [min, max)
    double rotation_max_deg = 360.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

/// Random choices for one training sample. Only the field relevant to the
/// representation is drawn; the other keeps its neutral value.
struct TrainDraw {
    double rotation_deg = 0.0;
    bool flip = false;
    std::size_t row_offset = 0;
    std::size_t col_offset = 0;
};

struct CropWindow {
    std::size_t row_offset = 0;
    std::size_t col_offset = 0;
};

/// Uniform offsets over every valid placement of `size` inside `image`.
CropWindow draw_crop_window(Shape2D image, Shape2D size, Rng& rng);

/// Draw order: rotation angle (cartesian) or flip (polar), then row and column offsets.
TrainDraw sample_train_draw(const AugmentConfig& cfg, Rng& rng);

/// resize -> rotate (cartesian) or temporal flip (polar) -> crop, with the given draw.
Image apply_train_transform(const BScan& scan, const AugmentConfig& cfg, const TrainDraw& draw);

Image train_transform(const BScan& scan, const AugmentConfig& cfg, Rng& rng);

/// resize -> center crop. No randomness.
Image eval_transform(const BScan& scan, const AugmentConfig& cfg);

/// Resizes to cfg.resize_to, keeping the representation. Applying the train or
/// eval transform to the result gives the same bytes as applying it to `scan`.
BScan resize_scan(const BScan& scan, const AugmentConfig& cfg);

/// Column k -> K-1-k; depth untouched.
PolarImage temporal_flip(const PolarImage& polar);

/// Bilinear rotation about the center; pixels without support take `fill`.
CartesianImage random_rotation(const CartesianImage& cartesian, double degrees, float fill = 0.0f);

Image random_crop(const Image& image, Shape2D size, Rng& rng);

}  // namespace ivoct::augment
