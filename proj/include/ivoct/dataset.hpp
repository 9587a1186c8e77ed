#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivoct/image.hpp"

namespace ivoct::dataset {

/// Header line of the manifest CSV, byte for byte.
inline constexpr std::string_view kManifestHeader =
    "patient_id,frame_id,image_path,label,representation";

/// One labeled B-scan.
struct FrameRecord {
    std::string patient_id;
    std::uint64_t frame_id = 0;
    std::filesystem::path image_path;  // relative to the manifest's source_root
    Label label = Label::NoPlaque;
    Representation representation = Representation::Polar;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Raised for unreadable or invalid manifests. line() is 1-based (the header
/// is line 1) and zero when the problem is not tied to a row.
class ManifestError : public std::runtime_error {
public:
    ManifestError(const std::string& message, std::size_t line = 0);
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Immutable, validated index of labeled frames.
///
/// Invariants enforced on construction: at least one record, a single
/// representation across all records, and unique (patient_id, frame_id).
class Manifest {
public:
    Manifest(std::vector<FrameRecord> records, std::filesystem::path source_root);

    [[nodiscard]] const std::vector<FrameRecord>& records() const { return records_; }
    [[nodiscard]] const std::filesystem::path& source_root() const { return source_root_; }
    [[nodiscard]] Representation representation() const { return records_.front().representation; }
    [[nodiscard]] std::size_t size() const { return records_.size(); }
    /// Sorted, de-duplicated patient identifiers.
    [[nodiscard]] std::vector<std::string> patients() const;
    [[nodiscard]] std::filesystem::path resolve(const FrameRecord& record) const;

    friend bool operator==(const Manifest&, const Manifest&) = default;

private:
    std::vector<FrameRecord> records_;
    std::filesystem::path source_root_;
};

Manifest load_manifest(const std::filesystem::path& path);

/// Writes the manifest CSV at `path`, re-expressing image paths relative to
/// the directory that will contain it.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct SplitResult {
    Manifest train;
    Manifest test;
    std::uint64_t seed = 0;
};

/// Patient-level split: sorted patient IDs are shuffled with the seeded
/// stream and the first `test_patients` go to the test side. Row order is
/// preserved on both sides.
SplitResult patient_split(const Manifest& manifest, std::size_t test_patients, std::uint64_t seed);

/// Fraction of NO_PLAQUE records.
double class_balance(const Manifest& manifest);

struct DatasetIssue {
    std::size_t record_index = 0;
    std::string patient_id;
    std::uint64_t frame_id = 0;
    std::string message;
};

/// One issue per record whose image is missing, undecodable, not grayscale,
/// or has a shape unusable for the manifest's representation. When
/// `expected_shape` is given every image must match it exactly.
std::vector<DatasetIssue> validate_dataset(const Manifest& manifest,
                                           std::optional<Shape2D> expected_shape = std::nullopt);

/// Decodes a record's image as the manifest's representation.
BScan load_bscan(const Manifest& manifest, const FrameRecord& record);

}  // namespace ivoct::dataset
