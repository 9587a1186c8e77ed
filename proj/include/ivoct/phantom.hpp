#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ivoct/dataset.hpp"
#include "ivoct/image.hpp"
#include "ivoct/random.hpp"

namespace ivoct::phantom {

struct PhantomSpec {
    std::size_t num_patients = 20;
    std::size_t frames_per_patient = 40;
    /// When nonzero, overrides frames_per_patient: frames are spread over
    /// patients as evenly as possible (the first total % n patients get one extra).
    std::size_t total_frames = 0;
    double plaque_prevalence = 0.5;
    std::size_t depth_samples = 512;
    std::size_t num_ascans = 360;
    bool guide_wire = true;
    double noise_level = 0.1;       // std-dev of multiplicative speckle
    double mu_normal = 0.8;         // attenuation, 1 / normalized depth
    double mu_plaque = 1.6;
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] std::size_t frames_for_patient(std::size_t patient_index) const;
    [[nodiscard]] std::size_t total_frame_count() const;

    friend bool operator==(const PhantomSpec&, const PhantomSpec&) = default;
};

/// Anatomy drawn once per patient; depths are normalized to [0, 1].
struct PatientParams {
    double base_lumen_radius = 0.2;
    double harmonic2 = 0.0;          // relative amplitudes of the lumen shape
    double harmonic3 = 0.0;
    double harmonic_phase2 = 0.0;    // radians
    double harmonic_phase3 = 0.0;
    double wall_peak = 0.85;
    double intima_thickness = 0.04;
    double media_thickness = 0.1;
    double media_factor = 0.85;      // band brightness relative to the intima
    double adventitia_factor = 0.65;
    double wire_angle_deg = 0.0;

    friend bool operator==(const PatientParams&, const PatientParams&) = default;
};

PatientParams draw_patient_params(Rng rng);

/// Angular sector in degrees: [start, start + width), wrapping at 360.
struct Sector {
    double start_deg = 0.0;
    double width_deg = 0.0;

    [[nodiscard]] bool contains(double angle_deg) const;
    friend bool operator==(const Sector&, const Sector&) = default;
};

/// Per-frame random layout, separate from rendering so callers can pin it.
struct FrameLayout {
    std::optional<Sector> plaque;
    std::optional<Sector> wire;
    double harmonic_drift = 0.0;  // radians added to both lumen harmonic phases
};

FrameLayout draw_frame_layout(const PhantomSpec& spec, const PatientParams& patient, Rng& rng);

struct PhantomFrame {
    PolarImage polar;
    Label label;
    std::optional<Sector> ground_truth;
};

/// Renders A-scans: dark lumen with catheter rings, bright wall entry,
/// banded exponential decay, optional plaque sector (higher attenuation and a
/// diffuse entry) and guide-wire (saturated cap, shadow behind), then
/// multiplicative speckle and clamping to [0, 1].
PhantomFrame render_frame(const PhantomSpec& spec, const PatientParams& patient,
                          const FrameLayout& layout, Rng& rng);

PhantomFrame generate_frame(const PhantomSpec& spec, const PatientParams& patient, Rng draw);

/// Lumen radius (normalized depth) at an angle for a given harmonic drift.
double lumen_radius(const PatientParams& patient, double angle_deg, double harmonic_drift);

/// Stream for (patient, frame); frame == npos gives the patient-level stream.
Rng patient_stream(const PhantomSpec& spec, std::size_t patient_index);
Rng frame_stream(const PhantomSpec& spec, std::size_t patient_index, std::size_t frame_index);

std::string patient_id(const PhantomSpec& spec, std::size_t patient_index);

/// Writes images/<patient>_f<frame>.png (16-bit), manifest.csv and
/// ground_truth.csv under out_dir. Deterministic given spec.
dataset::Manifest generate_dataset(const PhantomSpec& spec, const std::filesystem::path& out_dir,
                                   unsigned threads = 0);

}  // namespace ivoct::phantom
