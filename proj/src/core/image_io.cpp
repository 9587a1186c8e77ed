#include "ivoct/image_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace ivoct {

Image read_grayscale_png(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw ImageIoError("cannot open image '" + path.string() + "'");
    }
    const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty()) {
        throw ImageIoError("cannot decode image '" + path.string() + "'");
    }
    if (mat.channels() != 1) {
        throw ImageIoError("image '" + path.string() + "' is not grayscale (" +
                           std::to_string(mat.channels()) + " channels)");
    }
    if (mat.dims != 2) {
        throw ImageIoError("image '" + path.string() + "' is not two-dimensional");
    }

    double scale = 0.0;
    switch (mat.depth()) {
        case CV_8U: scale = 1.0 / 255.0; break;
        case CV_16U: scale = 1.0 / 65535.0; break;
        default:
            throw ImageIoError("image '" + path.string() + "' has unsupported sample depth");
    }
    cv::Mat as_float;
    mat.convertTo(as_float, CV_32F, scale);

    const auto rows = static_cast<std::size_t>(as_float.rows);
    const auto cols = static_cast<std::size_t>(as_float.cols);
    Image image(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto* src = as_float.ptr<float>(static_cast<int>(r));
        std::copy(src, src + cols, image.pixels().begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    return image;
}

void write_grayscale_png(const std::filesystem::path& path, const Image& image, PngDepth depth) {
    const int type = depth == PngDepth::Bits16 ? CV_16UC1 : CV_8UC1;
    const double max_value = depth == PngDepth::Bits16 ? 65535.0 : 255.0;
    cv::Mat mat(static_cast<int>(image.rows()), static_cast<int>(image.cols()), type);
    for (std::size_t r = 0; r < image.rows(); ++r) {
        for (std::size_t c = 0; c < image.cols(); ++c) {
            const double v = std::clamp(static_cast<double>(image(r, c)), 0.0, 1.0);
            const auto q = std::lround(v * max_value);
            if (depth == PngDepth::Bits16) {
                mat.at<std::uint16_t>(static_cast<int>(r), static_cast<int>(c)) =
                    static_cast<std::uint16_t>(q);
            } else {
                mat.at<std::uint8_t>(static_cast<int>(r), static_cast<int>(c)) =
                    static_cast<std::uint8_t>(q);
            }
        }
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), mat);
    } catch (const cv::Exception& e) {
        throw ImageIoError("cannot write image '" + path.string() + "': " + e.what());
    }
    if (!ok) {
        throw ImageIoError("cannot write image '" + path.string() + "'");
    }
}

}  // namespace ivoct
