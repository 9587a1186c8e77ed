#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "ivoct/image.hpp"
#include "ivoct/random.hpp"

namespace ivoct::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = "ivoct_";
        if (info != nullptr) name += std::string(info->test_suite_name()) + "_" + info->name();
        name += "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
        for (auto& ch : name) {
            if (ch == '/') ch = '_';
        }
        path_ = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Band-limited random field on the polar grid: a few low angular harmonics
/// times smooth depth profiles, mapped into [0.1, 0.9]. Periodic in angle.
inline PolarImage smooth_polar(std::uint64_t seed, std::size_t depth, std::size_t ascans) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double a[3][3];
    double phase[3];
    for (auto& row : a) {
        for (auto& v : row) v = u(gen);
    }
    for (auto& p : phase) p = u(gen) * M_PI;
    Image img(depth, ascans);
    for (std::size_t d = 0; d < depth; ++d) {
        const double z = static_cast<double>(d) / static_cast<double>(depth - 1);
        for (std::size_t k = 0; k < ascans; ++k) {
            const double th = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(ascans);
            double v = 0.0;
            for (int h = 0; h < 3; ++h) {
                const double radial = a[h][0] + a[h][1] * std::cos(M_PI * z) + a[h][2] * std::cos(2 * M_PI * z);
                v += radial * std::cos((h + 1) * th + phase[h]) / (h + 1);
            }
            img(d, k) = static_cast<float>(0.5 + 0.4 * std::tanh(v / 2.0));
        }
    }
    return PolarImage(std::move(img));
}

inline double mean_abs_diff(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.pixels()[i] - b.pixels()[i]);
    return s / static_cast<double>(a.size());
}

inline double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, static_cast<double>(std::abs(a.pixels()[i] - b.pixels()[i])));
    }
    return m;
}

}  // namespace ivoct::test
