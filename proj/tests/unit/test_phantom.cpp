#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "ivoct/dataset.hpp"
#include "ivoct/phantom.hpp"
#include "test_support.hpp"

using namespace ivoct;
using namespace ivoct::phantom;

namespace {

PhantomSpec quiet_spec(std::size_t depth, std::size_t ascans) {
    PhantomSpec s;
    s.depth_samples = depth;
    s.num_ascans = ascans;
    s.noise_level = 0.0;
    s.guide_wire = false;
    s.plaque_prevalence = 0.0;
    return s;
}

/// Least-squares slope of log(v) against normalized depth over [z0, z1].
double log_slope(const Image& g, std::size_t k, double z0, double z1) {
    const double step = 1.0 / static_cast<double>(g.rows() - 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t d = 0; d < g.rows(); ++d) {
        const double z = static_cast<double>(d) * step;
        if (z < z0 || z > z1) continue;
        const double y = std::log(std::max(static_cast<double>(g(d, k)), 1e-4));
        sx += z;
        sy += y;
        sxx += z * z;
        sxy += z * y;
        ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double deep_mean(const Image& g, std::size_t k) {
    double s = 0;
    int n = 0;
    for (std::size_t d = g.rows() * 6 / 10; d < g.rows(); ++d, ++n) s += g(d, k);
    return s / n;
}

/// Depth index of the brightest sample past the catheter rings.
std::size_t wall_peak_index(const Image& g, std::size_t k) {
    const std::size_t start = g.rows() * 6 / 100;
    std::size_t best = start;
    for (std::size_t d = start; d < g.rows(); ++d) {
        if (g(d, k) > g(best, k)) best = d;
    }
    return best;
}

std::vector<std::string> csv_lines(const std::filesystem::path& p) {
    std::istringstream in(test::read_file(p));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

TEST(PhantomSpec, Validation) {
    EXPECT_NO_THROW(PhantomSpec{}.validate());
    PhantomSpec s;
    s.num_patients = 0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.plaque_prevalence = 1.5;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.total_frames = 5;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.num_patients = 3;
    s.total_frames = 8;
    EXPECT_EQ(s.frames_for_patient(0), 3u);
    EXPECT_EQ(s.frames_for_patient(1), 3u);
    EXPECT_EQ(s.frames_for_patient(2), 2u);
    EXPECT_EQ(s.total_frame_count(), 8u);
}

TEST(PhantomRender, DecaysMonotonicallyBeyondWallPeak) {
    const auto spec = quiet_spec(256, 90);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto patient = draw_patient_params(Rng(seed));
        Rng rng(seed, 1);
        const auto frame = generate_frame(spec, patient, rng);
        const Image& g = frame.polar.samples();
        for (std::size_t k = 0; k < g.cols(); ++k) {
            const std::size_t peak = wall_peak_index(g, k);
            ASSERT_GE(g(peak, k), 0.7f);
            for (std::size_t d = peak + 1; d < g.rows(); ++d) ASSERT_LE(g(d, k), g(d - 1, k) + 1e-6f) << k << "," << d;
        }
    }
}

TEST(PhantomRender, PlaqueSectorAttenuatesFaster) {
    const auto spec = quiet_spec(400, 72);
    const auto patient = draw_patient_params(Rng(3));
    FrameLayout layout;
    layout.plaque = Sector{0.0, 180.0};
    Rng rng(0);
    const auto frame = render_frame(spec, patient, layout, rng);
    const Image& g = frame.polar.samples();
    EXPECT_EQ(frame.label, Label::Plaque);
    for (std::size_t k = 0; k < g.cols(); ++k) {
        const double angle = 5.0 * static_cast<double>(k);
        const double edge = std::min(std::fmod(angle, 180.0), 180.0 - std::fmod(angle, 180.0));
        if (edge < 5.0) continue;
        const double r = lumen_radius(patient, angle, 0.0);
        const double z0 = r + patient.intima_thickness + patient.media_thickness + 0.02;
        const double slope = log_slope(g, k, z0, std::min(1.0, z0 + 0.3));
        const double mu = angle < 180.0 ? spec.mu_plaque : spec.mu_normal;
        ASSERT_NEAR(slope, -mu, 0.01 * mu) << "angle " << angle;
    }
}

TEST(PhantomRender, GuideWireCastsOneShadow) {
    PhantomSpec spec;
    spec.depth_samples = 128;
    spec.num_ascans = 360;
    spec.plaque_prevalence = 0.3;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto patient = draw_patient_params(Rng(seed));
        const auto frame = generate_frame(spec, patient, Rng(seed, 9));
        const Image& g = frame.polar.samples();
        std::vector<bool> dark(g.cols());
        for (std::size_t k = 0; k < g.cols(); ++k) dark[k] = deep_mean(g, k) < 0.05;
        const auto count = std::count(dark.begin(), dark.end(), true);
        EXPECT_GE(count, 14);
        EXPECT_LE(count, 16);
        std::size_t rises = 0;
        for (std::size_t k = 0; k < dark.size(); ++k) rises += dark[k] && !dark[(k + dark.size() - 1) % dark.size()];
        EXPECT_EQ(rises, 1u) << "seed " << seed;
    }
}

TEST(PhantomRender, NoWireNoShadow) {
    auto spec = quiet_spec(128, 180);
    spec.noise_level = 0.1;
    const auto frame = generate_frame(spec, draw_patient_params(Rng(1)), Rng(2));
    for (std::size_t k = 0; k < 180; ++k) EXPECT_GT(deep_mean(frame.polar.samples(), k), 0.05);
}

TEST(PhantomRender, PlaqueChangesOnlyItsSector) {
    const auto spec = quiet_spec(128, 360);
    const auto patient = draw_patient_params(Rng(4));
    FrameLayout with;
    with.plaque = Sector{300.0, 100.0};  // wraps through 0
    const FrameLayout without;
    Rng r1(0), r2(0);
    const Image a = render_frame(spec, patient, with, r1).polar.samples();
    const Image b = render_frame(spec, patient, without, r2).polar.samples();
    for (std::size_t k = 0; k < 360; ++k) {
        // The taper weight is zero exactly at the sector start.
        const bool inside = with.plaque->contains(static_cast<double>(k)) && k != 300;
        double diff = 0;
        for (std::size_t d = 0; d < 128; ++d) diff += std::abs(a(d, k) - b(d, k));
        if (inside) {
            EXPECT_GT(diff, 0.0) << k;
        } else if (k != 300) {
            EXPECT_EQ(diff, 0.0) << k;
        }
    }
}

TEST(PhantomDataset, DeterministicBytes) {
    test::TempDir dir;
    PhantomSpec spec;
    spec.num_patients = 3;
    spec.frames_per_patient = 4;
    spec.depth_samples = 48;
    spec.num_ascans = 64;
    spec.seed = 11;
    const auto m1 = generate_dataset(spec, dir / "a", 1);
    const auto m2 = generate_dataset(spec, dir / "b", 0);
    EXPECT_EQ(m1.records(), m2.records());
    std::size_t files = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(e.path(), dir / "a");
        ASSERT_EQ(test::read_file(e.path()), test::read_file(dir / "b" / rel.string())) << rel;
        ++files;
    }
    EXPECT_EQ(files, 12u + 2u);

    spec.seed = 12;
    generate_dataset(spec, dir / "c");
    EXPECT_NE(test::read_file(dir / "a" / "images" / "P000_f0000.png"),
              test::read_file(dir / "c" / "images" / "P000_f0000.png"));
}

TEST(PhantomDataset, PrevalenceExtremes) {
    test::TempDir dir;
    PhantomSpec spec;
    spec.num_patients = 4;
    spec.frames_per_patient = 10;
    spec.depth_samples = 16;
    spec.num_ascans = 16;
    spec.plaque_prevalence = 0.0;
    const auto none = generate_dataset(spec, dir / "none");
    EXPECT_EQ(dataset::class_balance(none), 1.0);
    spec.plaque_prevalence = 1.0;
    const auto all = generate_dataset(spec, dir / "all");
    EXPECT_EQ(dataset::class_balance(all), 0.0);
}

TEST(PhantomDataset, LabelsMatchGroundTruth) {
    test::TempDir dir;
    PhantomSpec spec;
    spec.num_patients = 5;
    spec.frames_per_patient = 20;
    spec.depth_samples = 16;
    spec.num_ascans = 16;
    spec.seed = 5;
    const auto manifest = generate_dataset(spec, dir.path());
    const auto lines = csv_lines(dir / "ground_truth.csv");
    ASSERT_EQ(lines.size(), manifest.size() + 1);
    EXPECT_EQ(lines[0], "patient_id,frame_id,label,sector_start_deg,sector_width_deg");
    std::size_t plaque = 0;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& r = manifest.records()[i];
        const auto cells = split_commas(lines[i + 1]);
        ASSERT_EQ(cells.size(), 5u) << lines[i + 1];
        EXPECT_EQ(cells[0], r.patient_id);
        EXPECT_EQ(cells[1], std::to_string(r.frame_id));
        EXPECT_EQ(cells[2], to_string(r.label));
        if (r.label == Label::Plaque) {
            ++plaque;
            const double start = std::stod(cells[3]), width = std::stod(cells[4]);
            EXPECT_GE(start, 0.0);
            EXPECT_LT(start, 360.0);
            EXPECT_GE(width, 40.0);
            EXPECT_LE(width, 150.0);
        } else {
            EXPECT_TRUE(cells[3].empty() && cells[4].empty());
        }
    }
    EXPECT_GT(plaque, 20u);
    EXPECT_LT(plaque, 80u);
}

TEST(PhantomDataset, FramesOfAPatientShareAnatomy) {
    auto spec = quiet_spec(128, 90);
    spec.num_patients = 8;
    // Lumen edge profile per frame; same-patient profiles should be closer.
    std::vector<std::vector<std::vector<double>>> edges(spec.num_patients);
    for (std::size_t p = 0; p < spec.num_patients; ++p) {
        const auto patient = draw_patient_params(patient_stream(spec, p));
        for (std::size_t f = 0; f < 5; ++f) {
            const auto frame = generate_frame(spec, patient, frame_stream(spec, p, f));
            std::vector<double> e(90);
            for (std::size_t k = 0; k < 90; ++k) e[k] = static_cast<double>(wall_peak_index(frame.polar.samples(), k));
            edges[p].push_back(std::move(e));
        }
    }
    auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
        return s / static_cast<double>(a.size());
    };
    double within = 0, across = 0;
    int nw = 0, na = 0;
    for (std::size_t p = 0; p < edges.size(); ++p) {
        for (std::size_t q = 0; q < edges.size(); ++q) {
            for (std::size_t i = 0; i < 5; ++i) {
                for (std::size_t j = 0; j < 5; ++j) {
                    if (p == q && i >= j) continue;
                    if (p == q) {
                        within += dist(edges[p][i], edges[q][j]);
                        ++nw;
                    } else {
                        across += dist(edges[p][i], edges[q][j]);
                        ++na;
                    }
                }
            }
        }
    }
    EXPECT_LT(within / nw, 0.5 * across / na);
}

// Hand-crafted features and a logistic regression separate the classes, so
// the label signal is present in the pixels.
TEST(PhantomDataset, ClassesSeparableByDecaySlopes) {
    PhantomSpec spec;
    spec.depth_samples = 128;
    spec.num_ascans = 180;
    spec.num_patients = 10;
    spec.frames_per_patient = 20;
    spec.seed = 21;
    constexpr std::size_t kSectors = 18;  // 20 degrees each
    struct Sample {
        double f0, f1;
        int y;
        std::size_t patient;
    };
    std::vector<Sample> samples;
    for (std::size_t p = 0; p < spec.num_patients; ++p) {
        const auto patient = draw_patient_params(patient_stream(spec, p));
        for (std::size_t f = 0; f < spec.frames_per_patient; ++f) {
            const auto frame = generate_frame(spec, patient, frame_stream(spec, p, f));
            const Image& g = frame.polar.samples();
            const double step = 1.0 / static_cast<double>(g.rows() - 1);
            std::vector<double> sector_slopes;
            for (std::size_t s = 0; s < kSectors; ++s) {
                double sum = 0;
                int n = 0;
                for (std::size_t k = s * 10; k < (s + 1) * 10; ++k) {
                    if (deep_mean(g, k) < 0.05) continue;  // guide-wire shadow
                    const double z0 = static_cast<double>(wall_peak_index(g, k)) * step + 0.23;
                    sum += log_slope(g, k, z0, std::min(1.0, z0 + 0.3));
                    ++n;
                }
                if (n > 0) sector_slopes.push_back(sum / n);
            }
            std::sort(sector_slopes.begin(), sector_slopes.end());
            samples.push_back({sector_slopes.front(), sector_slopes[sector_slopes.size() / 2],
                               frame.label == Label::Plaque ? 1 : 0, p});
        }
    }
    // Standardize, then batch gradient descent on the logistic loss.
    double m0 = 0, m1 = 0, s0 = 0, s1 = 0;
    for (const auto& s : samples) {
        m0 += s.f0;
        m1 += s.f1;
    }
    m0 /= samples.size();
    m1 /= samples.size();
    for (const auto& s : samples) {
        s0 += (s.f0 - m0) * (s.f0 - m0);
        s1 += (s.f1 - m1) * (s.f1 - m1);
    }
    s0 = std::sqrt(s0 / samples.size());
    s1 = std::sqrt(s1 / samples.size());
    auto features = [&](const Sample& s) { return std::array<double, 2>{(s.f0 - m0) / s0, (s.f1 - m1) / s1}; };
    std::array<double, 3> w{0, 0, 0};
    for (int it = 0; it < 2000; ++it) {
        std::array<double, 3> grad{0, 0, 0};
        int n = 0;
        for (const auto& s : samples) {
            if (s.patient >= 6) continue;
            const auto x = features(s);
            const double pr = 1.0 / (1.0 + std::exp(-(w[0] + w[1] * x[0] + w[2] * x[1])));
            grad[0] += pr - s.y;
            grad[1] += (pr - s.y) * x[0];
            grad[2] += (pr - s.y) * x[1];
            ++n;
        }
        for (int i = 0; i < 3; ++i) w[i] -= 0.5 * grad[i] / n;
    }
    int correct = 0, total = 0;
    for (const auto& s : samples) {
        if (s.patient < 6) continue;
        const auto x = features(s);
        const int pred = (w[0] + w[1] * x[0] + w[2] * x[1]) >= 0 ? 1 : 0;
        correct += pred == s.y;
        ++total;
    }
    EXPECT_GE(static_cast<double>(correct) / total, 0.95) << correct << "/" << total;
}
