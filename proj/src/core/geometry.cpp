#include "ivoct/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ivoct::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

float clamp_unit(double v) {
    return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

void require_min_dims(Shape2D shape, const char* what) {
    if (shape.rows < 2 || shape.cols < 2) {
        throw std::invalid_argument(std::string(what) + ": dimensions must be at least 2x2");
    }
}

// Sine and cosine that are exact at multiples of 90 degrees.
void exact_sincos(double degrees, double& s, double& c) {
    double turns = std::fmod(degrees, 360.0);
    if (turns < 0.0) turns += 360.0;
    if (std::fmod(turns, 90.0) == 0.0) {
        switch (static_cast<int>(turns / 90.0)) {
            case 0: s = 0.0; c = 1.0; return;
            case 1: s = 1.0; c = 0.0; return;
            case 2: s = 0.0; c = -1.0; return;
            default: s = -1.0; c = 0.0; return;
        }
    }
    const double rad = turns * std::numbers::pi / 180.0;
    s = std::sin(rad);
    c = std::cos(rad);
}

}  // namespace

float sample_bilinear_clamped(const Image& image, double row, double col) {
    const double max_r = static_cast<double>(image.rows() - 1);
    const double max_c = static_cast<double>(image.cols() - 1);
    row = std::clamp(row, 0.0, max_r);
    col = std::clamp(col, 0.0, max_c);
    const auto r0 = static_cast<std::size_t>(row);
    const auto c0 = static_cast<std::size_t>(col);
    const std::size_t r1 = std::min(r0 + 1, image.rows() - 1);
    const std::size_t c1 = std::min(c0 + 1, image.cols() - 1);
    const double fr = row - static_cast<double>(r0);
    const double fc = col - static_cast<double>(c0);
    const double top = image(r0, c0) * (1.0 - fc) + image(r0, c1) * fc;
    const double bottom = image(r1, c0) * (1.0 - fc) + image(r1, c1) * fc;
    return static_cast<float>(top * (1.0 - fr) + bottom * fr);
}

ScanConverter::ScanConverter(std::size_t depth_samples, std::size_t num_ascans, std::size_t side)
    : depth_samples_(depth_samples), num_ascans_(num_ascans), side_(side) {
    if (side < CartesianImage::kMinSide) {
        throw std::invalid_argument("polar_to_cartesian: side must be at least " +
                                    std::to_string(CartesianImage::kMinSide) + ", got " +
                                    std::to_string(side));
    }
    if (depth_samples < PolarImage::kMinDepthSamples || num_ascans < PolarImage::kMinAscans) {
        throw std::invalid_argument("polar_to_cartesian: polar grid below minimum size");
    }
    const double m = (static_cast<double>(side) - 1.0) / 2.0;
    const double depth_scale = static_cast<double>(depth_samples - 1) / m;
    const double angle_scale = static_cast<double>(num_ascans) / kTwoPi;

    taps_.resize(side * side);
    for (std::size_t r = 0; r < side; ++r) {
        const double dy = static_cast<double>(r) - m;
        for (std::size_t c = 0; c < side; ++c) {
            const double dx = static_cast<double>(c) - m;
            Tap& tap = taps_[r * side + c];
            const double rho = std::hypot(dx, dy);
            if (rho > m) {
                tap = Tap{0, 0, 0, 0, 0.0f, 0.0f, false};
                continue;
            }
            double theta = std::atan2(dy, dx);
            if (theta < 0.0) theta += kTwoPi;

            const double u = std::min(rho * depth_scale, static_cast<double>(depth_samples - 1));
            const auto d0 = static_cast<std::size_t>(u);
            const std::size_t d1 = std::min(d0 + 1, depth_samples - 1);

            double v = theta * angle_scale;
            double v_floor = std::floor(v);
            auto k0 = static_cast<std::size_t>(v_floor) % num_ascans;
            const std::size_t k1 = (k0 + 1) % num_ascans;

            tap.depth0 = static_cast<std::uint32_t>(d0);
            tap.depth1 = static_cast<std::uint32_t>(d1);
            tap.angle0 = static_cast<std::uint32_t>(k0);
            tap.angle1 = static_cast<std::uint32_t>(k1);
            tap.depth_frac = static_cast<float>(u - static_cast<double>(d0));
            tap.angle_frac = static_cast<float>(v - v_floor);
            tap.inside = true;
        }
    }
}

CartesianImage ScanConverter::apply(const PolarImage& polar, float fill) const {
    if (polar.depth_samples() != depth_samples_ || polar.num_ascans() != num_ascans_) {
        throw std::invalid_argument("ScanConverter: polar grid shape does not match converter");
    }
    const Image& src = polar.samples();
    Image out(side_, side_, fill);
    auto pixels = out.pixels();
    for (std::size_t i = 0; i < taps_.size(); ++i) {
        const Tap& t = taps_[i];
        if (!t.inside) continue;
        const double fd = t.depth_frac;
        const double fk = t.angle_frac;
        const double near = src(t.depth0, t.angle0) * (1.0 - fk) + src(t.depth0, t.angle1) * fk;
        const double far = src(t.depth1, t.angle0) * (1.0 - fk) + src(t.depth1, t.angle1) * fk;
        pixels[i] = clamp_unit(near * (1.0 - fd) + far * fd);
    }
    return CartesianImage(std::move(out), fill);
}

CartesianImage polar_to_cartesian(const PolarImage& polar, std::size_t side, float fill) {
    return ScanConverter(polar.depth_samples(), polar.num_ascans(), side).apply(polar, fill);
}

PolarImage cartesian_to_polar(const CartesianImage& cartesian, std::size_t depth_samples,
                              std::size_t num_ascans) {
    if (depth_samples < PolarImage::kMinDepthSamples || num_ascans < PolarImage::kMinAscans) {
        throw std::invalid_argument("cartesian_to_polar: need depth_samples >= 2 and num_ascans >= 4");
    }
    const Image& src = cartesian.pixels();
    const double m = (static_cast<double>(cartesian.side()) - 1.0) / 2.0;
    const double radius_step = m / static_cast<double>(depth_samples - 1);

    std::vector<double> cosines(num_ascans);
    std::vector<double> sines(num_ascans);
    for (std::size_t k = 0; k < num_ascans; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(num_ascans);
        cosines[k] = std::cos(theta);
        sines[k] = std::sin(theta);
    }

    Image out(depth_samples, num_ascans);
    for (std::size_t d = 0; d < depth_samples; ++d) {
        const double rho = static_cast<double>(d) * radius_step;
        for (std::size_t k = 0; k < num_ascans; ++k) {
            const double row = m + rho * sines[k];
            const double col = m + rho * cosines[k];
            out(d, k) = clamp_unit(sample_bilinear_clamped(src, row, col));
        }
    }
    return PolarImage(std::move(out));
}

Image resize(const Image& image, Shape2D target) {
    require_min_dims(image.shape(), "resize source");
    require_min_dims(target, "resize target");
    if (image.shape() == target) {
        return image;
    }
    const double row_scale = static_cast<double>(image.rows()) / static_cast<double>(target.rows);
    const double col_scale = static_cast<double>(image.cols()) / static_cast<double>(target.cols);

    // Separable: precompute column taps once.
    std::vector<std::size_t> c0(target.cols), c1(target.cols);
    std::vector<double> cf(target.cols);
    for (std::size_t c = 0; c < target.cols; ++c) {
        double x = (static_cast<double>(c) + 0.5) * col_scale - 0.5;
        x = std::clamp(x, 0.0, static_cast<double>(image.cols() - 1));
        c0[c] = static_cast<std::size_t>(x);
        c1[c] = std::min(c0[c] + 1, image.cols() - 1);
        cf[c] = x - static_cast<double>(c0[c]);
    }

    Image out(target.rows, target.cols);
    for (std::size_t r = 0; r < target.rows; ++r) {
        double y = (static_cast<double>(r) + 0.5) * row_scale - 0.5;
        y = std::clamp(y, 0.0, static_cast<double>(image.rows() - 1));
        const auto r0 = static_cast<std::size_t>(y);
        const std::size_t r1 = std::min(r0 + 1, image.rows() - 1);
        const double rf = y - static_cast<double>(r0);
        const auto top = image.row(r0);
        const auto bottom = image.row(r1);
        for (std::size_t c = 0; c < target.cols; ++c) {
            const double t = top[c0[c]] * (1.0 - cf[c]) + top[c1[c]] * cf[c];
            const double b = bottom[c0[c]] * (1.0 - cf[c]) + bottom[c1[c]] * cf[c];
            out(r, c) = clamp_unit(t * (1.0 - rf) + b * rf);
        }
    }
    return out;
}

Image crop(const Image& image, Shape2D size, std::size_t row_offset, std::size_t col_offset) {
    if (size.rows == 0 || size.cols == 0 || row_offset + size.rows > image.rows() ||
        col_offset + size.cols > image.cols()) {
        throw std::invalid_argument("crop: window " + std::to_string(size.rows) + "x" +
                                    std::to_string(size.cols) + " at (" +
                                    std::to_string(row_offset) + "," + std::to_string(col_offset) +
                                    ") exceeds image " + std::to_string(image.rows()) + "x" +
                                    std::to_string(image.cols()));
    }
    Image out(size.rows, size.cols);
    for (std::size_t r = 0; r < size.rows; ++r) {
        const auto src = image.row(row_offset + r).subspan(col_offset, size.cols);
        std::copy(src.begin(), src.end(),
                  out.pixels().begin() + static_cast<std::ptrdiff_t>(r * size.cols));
    }
    return out;
}

Image center_crop(const Image& image, Shape2D size) {
    if (size.rows > image.rows() || size.cols > image.cols()) {
        throw std::invalid_argument("center_crop: crop size exceeds image");
    }
    return crop(image, size, (image.rows() - size.rows) / 2, (image.cols() - size.cols) / 2);
}

Image rotate(const Image& image, double degrees, float fill) {
    double s = 0.0;
    double c = 1.0;
    exact_sincos(degrees, s, c);
    if (s == 0.0 && c == 1.0) {
        return image;
    }
    const double cy = (static_cast<double>(image.rows()) - 1.0) / 2.0;
    const double cx = (static_cast<double>(image.cols()) - 1.0) / 2.0;
    const double max_r = static_cast<double>(image.rows() - 1);
    const double max_c = static_cast<double>(image.cols() - 1);
    constexpr double kEdge = 1e-9;

    Image out(image.rows(), image.cols(), fill);
    for (std::size_t r = 0; r < image.rows(); ++r) {
        const double dy = static_cast<double>(r) - cy;
        for (std::size_t col = 0; col < image.cols(); ++col) {
            const double dx = static_cast<double>(col) - cx;
            // Inverse map: the source point sits at theta - degrees.
            const double src_c = cx + c * dx + s * dy;
            const double src_r = cy - s * dx + c * dy;
            if (src_r < -kEdge || src_r > max_r + kEdge || src_c < -kEdge || src_c > max_c + kEdge) {
                continue;
            }
            out(r, col) = clamp_unit(sample_bilinear_clamped(image, src_r, src_c));
        }
    }
    return out;
}

Image flip_columns(const Image& image) {
    Image out(image.rows(), image.cols());
    const std::size_t k = image.cols();
    for (std::size_t r = 0; r < image.rows(); ++r) {
        for (std::size_t c = 0; c < k; ++c) {
            out(r, c) = image(r, k - 1 - c);
        }
    }
    return out;
}

Image shift_columns(const Image& image, std::ptrdiff_t shift) {
    const auto k = static_cast<std::ptrdiff_t>(image.cols());
    Image out(image.rows(), image.cols());
    for (std::size_t r = 0; r < image.rows(); ++r) {
        for (std::ptrdiff_t c = 0; c < k; ++c) {
            const std::ptrdiff_t src = ((c - shift) % k + k) % k;
            out(r, static_cast<std::size_t>(c)) = image(r, static_cast<std::size_t>(src));
        }
    }
    return out;
}

Image flip_rows(const Image& image) {
    Image out(image.rows(), image.cols());
    for (std::size_t r = 0; r < image.rows(); ++r) {
        const auto src = image.row(image.rows() - 1 - r);
        std::copy(src.begin(), src.end(),
                  out.pixels().begin() + static_cast<std::ptrdiff_t>(r * image.cols()));
    }
    return out;
}

}  // namespace ivoct::geometry
