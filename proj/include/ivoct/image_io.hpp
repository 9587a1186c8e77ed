#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ivoct/image.hpp"

namespace ivoct {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decodes a single-channel 8- or 16-bit PNG, scaling intensities by the
/// type maximum into [0, 1]. Multi-channel files are rejected as not grayscale.
Image read_grayscale_png(const std::filesystem::path& path);

enum class PngDepth { Bits8 = 8, Bits16 = 16 };

/// Quantizes [0, 1] intensities to the requested depth and writes a
/// single-channel PNG. Output bytes are a pure function of the image.
void write_grayscale_png(const std::filesystem::path& path, const Image& image,
                         PngDepth depth = PngDepth::Bits16);

}  // namespace ivoct
