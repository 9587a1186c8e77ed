#include "ivoct/augmentation.hpp"

#include <stdexcept>
#include <string>

#include "ivoct/geometry.hpp"

namespace ivoct::augment {

namespace {

void require_representation(const BScan& scan, const AugmentConfig& cfg) {
    if (representation_of(scan) != cfg.representation) {
        throw std::invalid_argument(std::string("representation mismatch: image is ") +
                                    std::string(to_string(representation_of(scan))) +
                                    ", augmentation configured for " +
                                    std::string(to_string(cfg.representation)));
    }
}

}  // namespace

void AugmentConfig::validate() const {
    if (resize_to.rows < 2 || resize_to.cols < 2) {
        throw std::invalid_argument("augment: resize_to must be at least 2x2");
    }
    if (crop_to.rows == 0 || crop_to.cols == 0 || crop_to.rows > resize_to.rows ||
        crop_to.cols > resize_to.cols) {
        throw std::invalid_argument("augment: crop_to must be positive and fit inside resize_to");
    }
    if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
        throw std::invalid_argument("augment: flip_probability must be in [0,1]");
    }
    if (!(rotation_min_deg >= 0.0 && rotation_min_deg <= rotation_max_deg &&
          rotation_max_deg <= 360.0)) {
        throw std::invalid_argument("augment: rotation range must satisfy 0 <= min <= max <= 360");
    }
    if (representation == Representation::Cartesian && resize_to.rows != resize_to.cols) {
        throw std::invalid_argument("augment: cartesian images must be resized to a square");
    }
}

CropWindow draw_crop_window(Shape2D image, Shape2D size, Rng& rng) {
    if (size.rows > image.rows || size.cols > image.cols) {
        throw std::invalid_argument("random_crop: crop size exceeds image");
    }
    CropWindow w;
    w.row_offset = static_cast<std::size_t>(rng.uniform_index(image.rows - size.rows + 1));
    w.col_offset = static_cast<std::size_t>(rng.uniform_index(image.cols - size.cols + 1));
    return w;
}

TrainDraw sample_train_draw(const AugmentConfig& cfg, Rng& rng) {
    TrainDraw draw;
    if (cfg.representation == Representation::Cartesian) {
        draw.rotation_deg = rng.uniform(cfg.rotation_min_deg, cfg.rotation_max_deg);
    } else {
        draw.flip = rng.bernoulli(cfg.flip_probability);
    }
    const CropWindow w = draw_crop_window(cfg.resize_to, cfg.crop_to, rng);
    draw.row_offset = w.row_offset;
    draw.col_offset = w.col_offset;
    return draw;
}

BScan resize_scan(const BScan& scan, const AugmentConfig& cfg) {
    return make_bscan(geometry::resize(grid_of(scan), cfg.resize_to), representation_of(scan));
}

Image apply_train_transform(const BScan& scan, const AugmentConfig& cfg, const TrainDraw& draw) {
    cfg.validate();
    require_representation(scan, cfg);
    Image resized = geometry::resize(grid_of(scan), cfg.resize_to);
    if (cfg.representation == Representation::Cartesian) {
        resized = geometry::rotate(resized, draw.rotation_deg, 0.0f);
    } else if (draw.flip) {
        resized = geometry::flip_columns(resized);
    }
    return geometry::crop(resized, cfg.crop_to, draw.row_offset, draw.col_offset);
}

Image train_transform(const BScan& scan, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    require_representation(scan, cfg);
    const TrainDraw draw = sample_train_draw(cfg, rng);
    return apply_train_transform(scan, cfg, draw);
}

Image eval_transform(const BScan& scan, const AugmentConfig& cfg) {
    cfg.validate();
    require_representation(scan, cfg);
    return geometry::center_crop(geometry::resize(grid_of(scan), cfg.resize_to), cfg.crop_to);
}

PolarImage temporal_flip(const PolarImage& polar) {
    return PolarImage(geometry::flip_columns(polar.samples()));
}

CartesianImage random_rotation(const CartesianImage& cartesian, double degrees, float fill) {
    return CartesianImage(geometry::rotate(cartesian.pixels(), degrees, fill), cartesian.fill());
}

Image random_crop(const Image& image, Shape2D size, Rng& rng) {
    const CropWindow w = draw_crop_window(image.shape(), size, rng);
    return geometry::crop(image, size, w.row_offset, w.col_offset);
}

}  // namespace ivoct::augment
