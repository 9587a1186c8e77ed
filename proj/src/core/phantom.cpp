#include "ivoct/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "ivoct/image_io.hpp"
#include "ivoct/parallel.hpp"

namespace ivoct::phantom {

namespace fs = std::filesystem;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Appearance constants (normalized depth units unless noted).
constexpr double kLumenFloor = 0.02;
constexpr double kRingDepths[] = {0.02, 0.035};
constexpr double kRingAmplitude = 0.5;
constexpr double kRingSigma = 0.003;
constexpr double kPlaqueMinWidthDeg = 40.0;
constexpr double kPlaqueMaxWidthDeg = 150.0;
constexpr double kPlaqueTaperDeg = 3.0;
constexpr double kPlaqueEntryBlur = 0.03;
constexpr double kWireWidthDeg = 15.0;
constexpr double kWireDriftDeg = 20.0;
constexpr double kWireDepthFraction = 0.75;  // wire surface relative to the lumen radius
constexpr double kWireCapThickness = 0.015;
constexpr double kWireShadow = 0.004;

constexpr std::uint64_t kPatientStream = 1;

double wrap_degrees(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w;
}

double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * (3.0 - 2.0 * x);
}

// 1 inside the sector, cosine taper to 0 over kPlaqueTaperDeg at the edges.
double sector_weight(const Sector& s, double angle_deg) {
    const double offset = wrap_degrees(angle_deg - s.start_deg);
    if (offset >= s.width_deg) return 0.0;
    const double edge = std::min(offset, s.width_deg - offset);
    if (edge >= kPlaqueTaperDeg) return 1.0;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * edge / kPlaqueTaperDeg);
}

double lumen_background(double z) {
    double v = kLumenFloor;
    for (const double ring : kRingDepths) {
        const double u = (z - ring) / kRingSigma;
        v += kRingAmplitude * std::exp(-0.5 * u * u);
    }
    return v;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

void PhantomSpec::validate() const {
    if (num_patients == 0) throw std::invalid_argument("phantom: num_patients must be positive");
    if (frames_per_patient == 0 && total_frames == 0) {
        throw std::invalid_argument("phantom: frames_per_patient must be positive");
    }
    if (total_frames != 0 && total_frames < num_patients) {
        throw std::invalid_argument("phantom: total_frames must give every patient a frame");
    }
    if (!(plaque_prevalence >= 0.0 && plaque_prevalence <= 1.0)) {
        throw std::invalid_argument("phantom: plaque_prevalence must be in [0,1]");
    }
    if (depth_samples < PolarImage::kMinDepthSamples || num_ascans < PolarImage::kMinAscans) {
        throw std::invalid_argument("phantom: need depth_samples >= 2 and num_ascans >= 4");
    }
    if (!(noise_level >= 0.0 && noise_level <= 0.5)) {
        throw std::invalid_argument("phantom: noise_level must be in [0, 0.5]");
    }
    if (!(mu_normal > 0.0 && mu_plaque > 0.0)) {
        throw std::invalid_argument("phantom: attenuation coefficients must be positive");
    }
}

std::size_t PhantomSpec::frames_for_patient(std::size_t patient_index) const {
    if (total_frames == 0) return frames_per_patient;
    const std::size_t base = total_frames / num_patients;
    const std::size_t extra = total_frames % num_patients;
    return base + (patient_index < extra ? 1 : 0);
}

std::size_t PhantomSpec::total_frame_count() const {
    return total_frames != 0 ? total_frames : num_patients * frames_per_patient;
}

bool Sector::contains(double angle_deg) const {
    return wrap_degrees(angle_deg - start_deg) < width_deg;
}

PatientParams draw_patient_params(Rng rng) {
    PatientParams p;
    p.base_lumen_radius = rng.uniform(0.15, 0.28);
    p.harmonic2 = rng.uniform(0.0, 0.12);
    p.harmonic3 = rng.uniform(0.0, 0.08);
    p.harmonic_phase2 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p.harmonic_phase3 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p.wall_peak = rng.uniform(0.75, 0.95);
    p.intima_thickness = rng.uniform(0.03, 0.06);
    p.media_thickness = rng.uniform(0.08, 0.15);
    p.media_factor = rng.uniform(0.78, 0.9);
    p.adventitia_factor = p.media_factor * rng.uniform(0.75, 0.9);
    p.wire_angle_deg = rng.uniform(0.0, 360.0);
    return p;
}

double lumen_radius(const PatientParams& p, double angle_deg, double harmonic_drift) {
    const double theta = angle_deg * kDegToRad;
    return p.base_lumen_radius * (1.0 + p.harmonic2 * std::cos(2.0 * theta + p.harmonic_phase2 + harmonic_drift) +
                                  p.harmonic3 * std::cos(3.0 * theta + p.harmonic_phase3 + harmonic_drift));
}

FrameLayout draw_frame_layout(const PhantomSpec& spec, const PatientParams& patient, Rng& rng) {
    FrameLayout layout;
    // The label draw comes first so prevalence depends on nothing else.
    const bool plaque = rng.bernoulli(spec.plaque_prevalence);
    const double plaque_center = rng.uniform(0.0, 360.0);
    const double plaque_width = rng.uniform(kPlaqueMinWidthDeg, kPlaqueMaxWidthDeg);
    if (plaque) {
        layout.plaque = Sector{wrap_degrees(plaque_center - plaque_width / 2.0), plaque_width};
    }
    const double wire_center = patient.wire_angle_deg + rng.uniform(-kWireDriftDeg, kWireDriftDeg);
    if (spec.guide_wire) {
        layout.wire = Sector{wrap_degrees(wire_center - kWireWidthDeg / 2.0), kWireWidthDeg};
    }
    layout.harmonic_drift = rng.uniform(-0.3, 0.3);
    return layout;
}

PhantomFrame render_frame(const PhantomSpec& spec, const PatientParams& patient,
                          const FrameLayout& layout, Rng& rng) {
    const std::size_t depth = spec.depth_samples;
    const std::size_t ascans = spec.num_ascans;
    Image grid(depth, ascans);
    const double depth_step = 1.0 / static_cast<double>(depth - 1);

    std::vector<double> background(depth);
    for (std::size_t d = 0; d < depth; ++d) background[d] = lumen_background(static_cast<double>(d) * depth_step);

    for (std::size_t k = 0; k < ascans; ++k) {
        const double angle = 360.0 * static_cast<double>(k) / static_cast<double>(ascans);
        const double radius = lumen_radius(patient, angle, layout.harmonic_drift);
        const double plaque_w = layout.plaque ? sector_weight(*layout.plaque, angle) : 0.0;
        const double mu = spec.mu_normal + plaque_w * (spec.mu_plaque - spec.mu_normal);
        const double blur = plaque_w * kPlaqueEntryBlur;
        const bool in_wire = layout.wire && layout.wire->contains(angle);
        const double wire_depth = kWireDepthFraction * radius;
        const double media_start = patient.intima_thickness;
        const double adventitia_start = patient.intima_thickness + patient.media_thickness;

        for (std::size_t d = 0; d < depth; ++d) {
            const double z = static_cast<double>(d) * depth_step;
            double v = background[d];
            if (in_wire && z >= wire_depth) {
                v = z < wire_depth + kWireCapThickness ? 1.0 : kWireShadow;
            } else if (z >= radius) {
                const double t = z - radius;
                const double band = t < media_start        ? 1.0
                                    : t < adventitia_start ? patient.media_factor
                                                           : patient.adventitia_factor;
                const double entry = blur > 0.0 ? smoothstep(t / blur) : 1.0;
                v = patient.wall_peak * band * std::exp(-mu * t) * entry;
                v = std::max(v, entry < 1.0 ? kLumenFloor * (1.0 - entry) : 0.0);
            }
            if (spec.noise_level > 0.0) {
                v *= 1.0 + spec.noise_level * rng.normal();
            }
            grid(d, k) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return PhantomFrame{PolarImage(std::move(grid)), layout.plaque ? Label::Plaque : Label::NoPlaque,
                        layout.plaque};
}

PhantomFrame generate_frame(const PhantomSpec& spec, const PatientParams& patient, Rng draw) {
    const FrameLayout layout = draw_frame_layout(spec, patient, draw);
    return render_frame(spec, patient, layout, draw);
}

Rng patient_stream(const PhantomSpec& spec, std::size_t patient_index) {
    return Rng(spec.seed).split(patient_index).split(kPatientStream);
}

Rng frame_stream(const PhantomSpec& spec, std::size_t patient_index, std::size_t frame_index) {
    // Offset keeps frame streams distinct from the patient-level stream id.
    return Rng(spec.seed).split(patient_index).split(frame_index + 16);
}

std::string patient_id(const PhantomSpec& spec, std::size_t patient_index) {
    const int width = std::max(3, static_cast<int>(std::to_string(spec.num_patients).size()));
    char buf[32];
    std::snprintf(buf, sizeof buf, "P%0*zu", width, patient_index);
    return buf;
}

dataset::Manifest generate_dataset(const PhantomSpec& spec, const fs::path& out_dir, unsigned threads) {
    spec.validate();
    const fs::path image_dir = out_dir / "images";
    std::error_code ec;
    fs::create_directories(image_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + image_dir.string() +
                                 "': " + ec.message());
    }

    struct Job {
        std::size_t patient;
        std::size_t frame;
    };
    std::vector<Job> jobs;
    jobs.reserve(spec.total_frame_count());
    for (std::size_t p = 0; p < spec.num_patients; ++p) {
        for (std::size_t f = 0; f < spec.frames_for_patient(p); ++f) jobs.push_back({p, f});
    }
    std::vector<PatientParams> patients;
    patients.reserve(spec.num_patients);
    for (std::size_t p = 0; p < spec.num_patients; ++p) {
        patients.push_back(draw_patient_params(patient_stream(spec, p)));
    }

    std::vector<dataset::FrameRecord> records(jobs.size());
    std::vector<std::optional<Sector>> truths(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        const auto [p, f] = jobs[i];
        const PhantomFrame frame = generate_frame(spec, patients[p], frame_stream(spec, p, f));
        char name[64];
        std::snprintf(name, sizeof name, "_f%04zu.png", f);
        const fs::path rel = fs::path("images") / (patient_id(spec, p) + name);
        write_grayscale_png(out_dir / rel, frame.polar.samples(), PngDepth::Bits16);
        records[i] = dataset::FrameRecord{patient_id(spec, p), f, rel, frame.label,
                                          Representation::Polar};
        truths[i] = frame.ground_truth;
    });

    dataset::Manifest manifest(std::move(records), out_dir);
    dataset::write_manifest(manifest, out_dir / "manifest.csv");

    std::string truth_csv = "patient_id,frame_id,label,sector_start_deg,sector_width_deg\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& r = manifest.records()[i];
        char row[160];
        if (truths[i]) {
            std::snprintf(row, sizeof row, "%s,%llu,%s,%.4f,%.4f\n", r.patient_id.c_str(),
                          static_cast<unsigned long long>(r.frame_id), std::string(to_string(r.label)).c_str(),
                          truths[i]->start_deg, truths[i]->width_deg);
        } else {
            std::snprintf(row, sizeof row, "%s,%llu,%s,,\n", r.patient_id.c_str(),
                          static_cast<unsigned long long>(r.frame_id), std::string(to_string(r.label)).c_str());
        }
        truth_csv += row;
    }
    write_text_file(out_dir / "ground_truth.csv", truth_csv);
    return manifest;
}

}  // namespace ivoct::phantom
