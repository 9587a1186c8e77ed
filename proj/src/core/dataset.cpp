#include "ivoct/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "ivoct/image_io.hpp"
#include "ivoct/random.hpp"

namespace ivoct::dataset {

namespace fs = std::filesystem;

namespace {

std::string with_line(const std::string& message, std::size_t line) {
    return line == 0 ? message : "line " + std::to_string(line) + ": " + message;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::uint64_t parse_frame_id(std::string_view token, std::size_t line) {
    std::uint64_t value = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end) {
        throw ManifestError("frame_id '" + std::string(token) + "' is not a non-negative integer",
                            line);
    }
    return value;
}

fs::path normalized(const fs::path& p) {
    return fs::absolute(p).lexically_normal();
}

}  // namespace

ManifestError::ManifestError(const std::string& message, std::size_t line)
    : std::runtime_error(with_line(message, line)), line_(line) {}

Manifest::Manifest(std::vector<FrameRecord> records, fs::path source_root)
    : records_(std::move(records)), source_root_(std::move(source_root)) {
    if (records_.empty()) {
        throw ManifestError("manifest has no records");
    }
    std::set<std::pair<std::string, std::uint64_t>> keys;
    const Representation rep = records_.front().representation;
    for (const auto& r : records_) {
        if (r.patient_id.empty()) {
            throw ManifestError("record with empty patient_id");
        }
        if (r.representation != rep) {
            throw ManifestError("manifest mixes polar and cartesian records");
        }
        if (!keys.emplace(r.patient_id, r.frame_id).second) {
            throw ManifestError("duplicate record (" + r.patient_id + ", " +
                                std::to_string(r.frame_id) + ")");
        }
    }
}

std::vector<std::string> Manifest::patients() const {
    std::vector<std::string> ids;
    ids.reserve(records_.size());
    for (const auto& r : records_) ids.push_back(r.patient_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

fs::path Manifest::resolve(const FrameRecord& record) const {
    return (source_root_ / record.image_path).lexically_normal();
}

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ManifestError("cannot open manifest '" + path.string() + "'");
    }

    std::vector<FrameRecord> records;
    std::set<std::pair<std::string, std::uint64_t>> keys;
    std::optional<Representation> representation;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != kManifestHeader) {
                throw ManifestError("expected header '" + std::string(kManifestHeader) + "'",
                                    line_no);
            }
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;

        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            throw ManifestError("expected 5 fields, found " + std::to_string(fields.size()),
                                line_no);
        }
        FrameRecord record;
        record.patient_id = std::string(fields[0]);
        if (record.patient_id.empty()) {
            throw ManifestError("empty patient_id", line_no);
        }
        record.frame_id = parse_frame_id(fields[1], line_no);
        if (fields[2].empty()) {
            throw ManifestError("empty image_path", line_no);
        }
        record.image_path = fs::path(std::string(fields[2]));
        try {
            record.label = parse_label(fields[3]);
            record.representation = parse_representation(fields[4]);
        } catch (const std::invalid_argument& e) {
            throw ManifestError(e.what(), line_no);
        }
        if (representation && *representation != record.representation) {
            throw ManifestError("representation differs from earlier records", line_no);
        }
        representation = record.representation;
        if (!keys.emplace(record.patient_id, record.frame_id).second) {
            throw ManifestError("duplicate record (" + record.patient_id + ", " +
                                    std::to_string(record.frame_id) + ")",
                                line_no);
        }
        records.push_back(std::move(record));
    }
    if (!saw_header) {
        throw ManifestError("manifest '" + path.string() + "' is empty");
    }
    if (records.empty()) {
        throw ManifestError("manifest '" + path.string() + "' has no records");
    }
    return Manifest(std::move(records), path.parent_path());
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
    const fs::path target_dir = normalized(path).parent_path();
    fs::create_directories(target_dir);

    std::ostringstream out;
    out << kManifestHeader << '\n';
    for (const auto& r : manifest.records()) {
        const fs::path absolute_image = normalized(manifest.resolve(r));
        fs::path relative = absolute_image.lexically_relative(target_dir);
        if (relative.empty()) relative = absolute_image;
        const std::string rel = relative.generic_string();
        if (rel.find(',') != std::string::npos || r.patient_id.find(',') != std::string::npos) {
            throw ManifestError("fields must not contain commas: " + rel);
        }
        out << r.patient_id << ',' << r.frame_id << ',' << rel << ',' << to_string(r.label) << ','
            << to_string(r.representation) << '\n';
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw ManifestError("cannot write manifest '" + path.string() + "'");
    }
    file << out.str();
    if (!file) {
        throw ManifestError("failed writing manifest '" + path.string() + "'");
    }
}

SplitResult patient_split(const Manifest& manifest, std::size_t test_patients, std::uint64_t seed) {
    auto patients = manifest.patients();
    if (test_patients == 0 || test_patients >= patients.size()) {
        throw std::invalid_argument("test_patients must be in [1, " +
                                    std::to_string(patients.size() - 1) + "], got " +
                                    std::to_string(test_patients));
    }
    Rng rng(seed);
    for (std::size_t i = patients.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
        std::swap(patients[i], patients[j]);
    }
    const std::set<std::string> test_ids(patients.begin(),
                                         patients.begin() + static_cast<std::ptrdiff_t>(test_patients));

    std::vector<FrameRecord> train;
    std::vector<FrameRecord> test;
    for (const auto& r : manifest.records()) {
        (test_ids.contains(r.patient_id) ? test : train).push_back(r);
    }
    return SplitResult{Manifest(std::move(train), manifest.source_root()),
                       Manifest(std::move(test), manifest.source_root()), seed};
}

double class_balance(const Manifest& manifest) {
    const auto& records = manifest.records();
    const auto negatives = std::count_if(records.begin(), records.end(),
                                         [](const FrameRecord& r) { return r.label == Label::NoPlaque; });
    return static_cast<double>(negatives) / static_cast<double>(records.size());
}

std::vector<DatasetIssue> validate_dataset(const Manifest& manifest,
                                           std::optional<Shape2D> expected_shape) {
    std::vector<DatasetIssue> issues;
    const auto& records = manifest.records();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& record = records[i];
        auto report = [&](std::string message) {
            issues.push_back({i, record.patient_id, record.frame_id, std::move(message)});
        };
        Image image;
        try {
            image = read_grayscale_png(manifest.resolve(record));
        } catch (const ImageIoError& e) {
            report(e.what());
            continue;
        }
        const Shape2D shape = image.shape();
        if (expected_shape && shape != *expected_shape) {
            report("shape " + std::to_string(shape.rows) + "x" + std::to_string(shape.cols) +
                   " differs from expected " + std::to_string(expected_shape->rows) + "x" +
                   std::to_string(expected_shape->cols));
            continue;
        }
        if (record.representation == Representation::Polar) {
            if (shape.rows < PolarImage::kMinDepthSamples || shape.cols < PolarImage::kMinAscans) {
                report("polar image too small");
            }
        } else if (shape.rows != shape.cols || shape.rows < CartesianImage::kMinSide) {
            report("cartesian image must be square with side >= 8");
        }
    }
    return issues;
}

BScan load_bscan(const Manifest& manifest, const FrameRecord& record) {
    return make_bscan(read_grayscale_png(manifest.resolve(record)), record.representation);
}

}  // namespace ivoct::dataset
