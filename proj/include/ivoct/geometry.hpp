#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ivoct/image.hpp"

namespace ivoct::geometry {

inline constexpr std::size_t kDefaultCartesianSide = 600;

// Angle convention shared by every transform in this namespace: theta = 0
// points along +columns from the image center and increases toward +rows.
// Polar column k sits at theta = 2*pi*k/K. Depth 0 is the catheter center,
// depth D-1 lands on the inscribed circle of radius m = (side-1)/2.

/// Precomputed polar->cartesian sampling map for one (D, K, side) geometry.
///
/// Each output pixel either takes the fill value (radius > m) or a bilinear
/// blend of four polar samples, wrapping on the angle axis and clamping on
/// depth. Building the map once and applying it to many frames avoids the
/// per-pixel trigonometry.
class ScanConverter {
public:
    ScanConverter(std::size_t depth_samples, std::size_t num_ascans, std::size_t side);

    [[nodiscard]] CartesianImage apply(const PolarImage& polar, float fill = 0.0f) const;

    [[nodiscard]] std::size_t depth_samples() const { return depth_samples_; }
    [[nodiscard]] std::size_t num_ascans() const { return num_ascans_; }
    [[nodiscard]] std::size_t side() const { return side_; }

private:
    struct Tap {
        std::uint32_t depth0, depth1, angle0, angle1;
        float depth_frac, angle_frac;
        bool inside;
    };
    std::size_t depth_samples_;
    std::size_t num_ascans_;
    std::size_t side_;
    std::vector<Tap> taps_;
};

/// Scan conversion of a polar B-scan into a `side` x `side` cross section.
CartesianImage polar_to_cartesian(const PolarImage& polar,
                                  std::size_t side = kDefaultCartesianSide, float fill = 0.0f);

/// Inverse resampling: depth index d maps to radius d*m/(D-1), column k to
/// angle 2*pi*k/K, sampled bilinearly (clamped at the grid border).
PolarImage cartesian_to_polar(const CartesianImage& cartesian, std::size_t depth_samples,
                              std::size_t num_ascans);

/// Bilinear resize with pixel-center alignment (src = (dst + 0.5) * scale - 0.5).
Image resize(const Image& image, Shape2D target);

/// Exact copy of the window starting at (row_offset, col_offset).
Image crop(const Image& image, Shape2D size, std::size_t row_offset, std::size_t col_offset);

/// Window with offsets floor((dim - size) / 2).
Image center_crop(const Image& image, Shape2D size);

/// Rotates content by `degrees` about the grid center in the direction of
/// increasing theta, i.e. content at theta moves to theta + degrees.
/// Bilinear; samples falling outside the source grid take `fill`.
/// Multiples of 90 degrees use exact sines and cosines, so on square grids
/// they are pure pixel permutations.
Image rotate(const Image& image, double degrees, float fill);

/// Reverses column order (column k -> K-1-k).
Image flip_columns(const Image& image);

/// Cyclic column shift: output column k takes input column (k - shift) mod K.
Image shift_columns(const Image& image, std::ptrdiff_t shift);

/// Reverses row order.
Image flip_rows(const Image& image);

/// Bilinear sample with coordinates clamped to the grid.
float sample_bilinear_clamped(const Image& image, double row, double col);

}  // namespace ivoct::geometry
