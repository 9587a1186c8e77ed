#include <cmath>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "ivoct/augmentation.hpp"
#include "ivoct/geometry.hpp"
#include "test_support.hpp"

using namespace ivoct;
using namespace ivoct::augment;

namespace {

AugmentConfig cartesian_cfg(std::uint64_t seed = 0) {
    AugmentConfig cfg;
    cfg.representation = Representation::Cartesian;
    cfg.seed = seed;
    return cfg;
}

AugmentConfig polar_cfg() {
    AugmentConfig cfg;
    cfg.representation = Representation::Polar;
    return cfg;
}

BScan cartesian_scan(std::uint64_t seed, std::size_t side = 360) {
    return geometry::polar_to_cartesian(test::smooth_polar(seed, 64, 96), side, 0.0f);
}

BScan polar_scan(std::uint64_t seed) { return test::smooth_polar(seed, 200, 180); }

Image distinct_values(std::size_t rows, std::size_t cols) {
    Image img(rows, cols);
    for (std::size_t i = 0; i < img.size(); ++i) img.pixels()[i] = static_cast<float>(i) / static_cast<float>(img.size());
    return img;
}

}  // namespace

TEST(AugmentConfig, Validation) {
    EXPECT_NO_THROW(cartesian_cfg().validate());
    AugmentConfig c = cartesian_cfg();
    c.crop_to = {301, 270};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = cartesian_cfg();
    c.flip_probability = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = cartesian_cfg();
    c.rotation_min_deg = -10;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = cartesian_cfg();
    c.rotation_min_deg = 200;
    c.rotation_max_deg = 100;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = cartesian_cfg();
    c.resize_to = {300, 320};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    AugmentConfig p = polar_cfg();
    p.resize_to = {300, 320};
    EXPECT_NO_THROW(p.validate());
}

TEST(TrainTransform, DegenerateDrawEqualsEval) {
    const auto scan = cartesian_scan(1);
    const auto cfg = cartesian_cfg();
    TrainDraw draw;
    draw.rotation_deg = 0.0;
    draw.row_offset = 15;
    draw.col_offset = 15;
    EXPECT_EQ(apply_train_transform(scan, cfg, draw), eval_transform(scan, cfg));

    const auto pscan = polar_scan(1);
    TrainDraw pdraw;
    pdraw.flip = false;
    pdraw.row_offset = 15;
    pdraw.col_offset = 15;
    EXPECT_EQ(apply_train_transform(pscan, polar_cfg(), pdraw), eval_transform(pscan, polar_cfg()));
}

TEST(TrainTransform, FixedSeedIsBitIdentical) {
    const auto scan = cartesian_scan(2);
    const auto cfg = cartesian_cfg(5);
    Rng a = Rng(cfg.seed).split(17), b = Rng(cfg.seed).split(17);
    EXPECT_EQ(train_transform(scan, cfg, a), train_transform(scan, cfg, b));
    const auto pscan = polar_scan(2);
    Rng c(3), d(3);
    EXPECT_EQ(train_transform(pscan, polar_cfg(), c), train_transform(pscan, polar_cfg(), d));
}

TEST(TrainTransform, ConservesDiskMean) {
    // Angular texture only, so the crop trims no preferred intensity.
    Image polar(64, 180);
    for (std::size_t k = 0; k < 180; ++k) {
        const double th = 2 * M_PI * k / 180.0;
        for (std::size_t d = 0; d < 64; ++d) polar(d, k) = static_cast<float>(0.5 + 0.3 * std::cos(12 * th + 0.4));
    }
    const BScan scan = geometry::polar_to_cartesian(PolarImage(polar), 300, 0.0f);
    const auto cfg = cartesian_cfg();
    const Image& input = grid_of(scan);
    const double m = 149.5;
    double in_sum = 0;
    std::size_t in_n = 0;
    for (std::size_t r = 0; r < 300; ++r) {
        for (std::size_t c = 0; c < 300; ++c) {
            if (std::hypot(r - m, c - m) <= m - 1) {
                in_sum += input(r, c);
                ++in_n;
            }
        }
    }
    const double disk_mean = in_sum / in_n;
    for (std::uint64_t i = 0; i < 5; ++i) {
        Rng rng(i);
        const TrainDraw draw = sample_train_draw(cfg, rng);
        const Image out = apply_train_transform(scan, cfg, draw);
        double s = 0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < 270; ++r) {
            for (std::size_t c = 0; c < 270; ++c) {
                const double rr = static_cast<double>(r + draw.row_offset), cc = static_cast<double>(c + draw.col_offset);
                if (std::hypot(rr - m, cc - m) <= m - 1) {
                    s += out(r, c);
                    ++n;
                }
            }
        }
        EXPECT_NEAR(s / n, disk_mean, 0.02 * disk_mean) << "draw " << i;
    }
}

TEST(TrainTransform, OutputShapeAlwaysCrop) {
    for (std::uint64_t i = 0; i < 10; ++i) {
        Rng r1(i), r2(i);
        EXPECT_EQ(train_transform(cartesian_scan(i % 3, 200), cartesian_cfg(), r1).shape(), (Shape2D{270, 270}));
        EXPECT_EQ(train_transform(polar_scan(i % 3), polar_cfg(), r2).shape(), (Shape2D{270, 270}));
    }
}

TEST(TrainTransform, PolarNeverRotatesCartesianNeverFlips) {
    // Polar with flips disabled is a pure crop of the resized grid.
    auto pcfg = polar_cfg();
    pcfg.flip_probability = 0.0;
    const auto pscan = polar_scan(4);
    const Image presized = geometry::resize(grid_of(pscan), {300, 300});
    for (std::uint64_t i = 0; i < 5; ++i) {
        Rng rng(i), probe(i);
        const auto draw = sample_train_draw(pcfg, probe);
        EXPECT_EQ(draw.rotation_deg, 0.0);
        EXPECT_EQ(train_transform(pscan, pcfg, rng), geometry::crop(presized, {270, 270}, draw.row_offset, draw.col_offset));
    }
    // Cartesian draws never set the flip flag, and a zero-width rotation range is a pure crop.
    auto ccfg = cartesian_cfg();
    ccfg.rotation_min_deg = ccfg.rotation_max_deg = 0.0;
    const auto cscan = cartesian_scan(4, 300);
    for (std::uint64_t i = 0; i < 5; ++i) {
        Rng rng(i), probe(i);
        const auto draw = sample_train_draw(ccfg, probe);
        EXPECT_FALSE(draw.flip);
        EXPECT_EQ(train_transform(cscan, ccfg, rng),
                  geometry::crop(grid_of(cscan), {270, 270}, draw.row_offset, draw.col_offset));
    }
}

TEST(TrainTransform, FlipProbabilityOneAlwaysFlips) {
    auto cfg = polar_cfg();
    cfg.flip_probability = 1.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng(i);
        EXPECT_TRUE(sample_train_draw(cfg, rng).flip);
    }
}

TEST(TrainTransform, RotationAnglesCoverRange) {
    auto cfg = cartesian_cfg();
    cfg.rotation_min_deg = 10;
    cfg.rotation_max_deg = 20;
    for (std::uint64_t i = 0; i < 200; ++i) {
        Rng rng(i);
        const double a = sample_train_draw(cfg, rng).rotation_deg;
        ASSERT_GE(a, 10.0);
        ASSERT_LT(a, 20.0);
    }
}

TEST(TrainTransform, RepresentationMismatchThrows) {
    Rng rng(0);
    EXPECT_THROW(train_transform(polar_scan(0), cartesian_cfg(), rng), std::invalid_argument);
    EXPECT_THROW(eval_transform(cartesian_scan(0), polar_cfg()), std::invalid_argument);
}

TEST(TrainTransform, ResizeScanDoesNotChangeResults) {
    const auto scan = cartesian_scan(6, 420);
    const auto cfg = cartesian_cfg();
    const auto cached = resize_scan(scan, cfg);
    Rng a(9), b(9);
    EXPECT_EQ(train_transform(scan, cfg, a), train_transform(cached, cfg, b));
    EXPECT_EQ(eval_transform(scan, cfg), eval_transform(cached, cfg));
}

TEST(EvalTransform, Examples) {
    const Image img = distinct_values(300, 300);
    const auto cfg = cartesian_cfg();
    const BScan scan = CartesianImage(img);
    EXPECT_EQ(eval_transform(scan, cfg), geometry::crop(img, {270, 270}, 15, 15));
    const BScan constant = CartesianImage(Image(123, 123, 0.4f));
    const Image flat = eval_transform(constant, cfg);
    for (float v : flat.pixels()) ASSERT_NEAR(v, 0.4f, 1e-6);
    EXPECT_EQ(eval_transform(scan, cfg), eval_transform(scan, cfg));
}

TEST(TemporalFlip, Examples) {
    Image img(2, 4);
    const float vals[4] = {0.1f, 0.2f, 0.3f, 0.4f};
    for (std::size_t c = 0; c < 4; ++c) img(0, c) = img(1, c) = vals[c];
    const auto f = temporal_flip(PolarImage(img));
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_EQ(f.samples()(0, c), vals[3 - c]);
        EXPECT_EQ(f.samples()(1, c), vals[3 - c]);
    }
    const auto p = test::smooth_polar(3, 20, 36);
    EXPECT_EQ(temporal_flip(temporal_flip(p)), p);
}

TEST(TemporalFlip, MirrorsCartesianView) {
    // Column k -> K-1-k maps theta to -theta - 2*pi/K: a mirror across the
    // theta = 0 axis (a row flip) followed by a rotation of -360/K degrees.
    const std::size_t K = 90;
    const auto p = test::smooth_polar(12, 64, K);
    const std::size_t side = 200;
    const auto flipped = geometry::polar_to_cartesian(temporal_flip(p), side, 0.0f).pixels();
    const auto mirrored =
        geometry::rotate(geometry::flip_rows(geometry::polar_to_cartesian(p, side, 0.0f).pixels()), -360.0 / K, 0.0f);
    EXPECT_LT(test::mean_abs_diff(flipped, mirrored), 0.02);
}

TEST(RandomRotation, Examples) {
    const CartesianImage c(test::smooth_polar(5, 64, 64).samples());
    EXPECT_EQ(random_rotation(c, 0.0), c);
    const auto q = random_rotation(c, 90.0);
    const std::size_t n = 64;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(q.pixels()(i, j), c.pixels()(n - 1 - j, i));
    }
    EXPECT_LT(test::max_abs_diff(random_rotation(c, 360.0).pixels(), c.pixels()), 1.0 / 255);
    // Lattice exactness holds for every multiple of 90 degrees.
    EXPECT_EQ(random_rotation(random_rotation(c, 270.0), 90.0), c);
}

TEST(RandomCrop, WindowIsOneOf31x31) {
    const Image img = distinct_values(300, 300);
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng(i), probe(i);
        const auto w = draw_crop_window(img.shape(), {270, 270}, probe);
        ASSERT_LE(w.row_offset, 30u);
        ASSERT_LE(w.col_offset, 30u);
        EXPECT_EQ(random_crop(img, {270, 270}, rng), geometry::crop(img, {270, 270}, w.row_offset, w.col_offset));
    }
}

TEST(RandomCrop, FullSizeIsIdentity) {
    const Image img = distinct_values(40, 30);
    for (std::uint64_t i = 0; i < 5; ++i) {
        Rng rng(i);
        EXPECT_EQ(random_crop(img, {40, 30}, rng), img);
    }
    Rng rng(0);
    EXPECT_THROW(random_crop(img, {41, 30}, rng), std::invalid_argument);
}

TEST(RandomCrop, OffsetsPassChiSquareUniformity) {
    std::vector<int> counts(31 * 31, 0);
    const int draws = 10000;
    const Rng root(2024);
    for (int i = 0; i < draws; ++i) {
        Rng rng = root.split(static_cast<std::uint64_t>(i));
        const auto w = draw_crop_window({300, 300}, {270, 270}, rng);
        ++counts[w.row_offset * 31 + w.col_offset];
    }
    const double expected = static_cast<double>(draws) / counts.size();
    double chi2 = 0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
}
