#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ivoct/backbone.hpp"
#include "ivoct/image.hpp"

namespace ivoct::eval {

/// Counts with PLAQUE as the positive class.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    [[nodiscard]] std::uint64_t total() const { return tp + fp + tn + fn; }
    [[nodiscard]] std::uint64_t positives() const { return tp + fn; }
    [[nodiscard]] std::uint64_t negatives() const { return tn + fp; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// A rate that may be undefined (zero denominator). Never NaN.
using Metric = std::optional<double>;

ConfusionMatrix confusion(std::span<const Label> labels, std::span<const Label> predictions);

Metric sensitivity(const ConfusionMatrix& cm);
Metric specificity(const ConfusionMatrix& cm);
Metric accuracy(const ConfusionMatrix& cm);

/// Accuracy implied by class-conditional rates at the given class sizes:
/// (sens * positives + spec * negatives) / (positives + negatives).
double accuracy_from_rates(double sens, double spec, double positives, double negatives);

/// "88.0%" style (one decimal), or "undefined".
std::string format_percent(const Metric& metric);

/// Probability threshold: p(PLAQUE) >= 0.5 classifies as PLAQUE.
inline constexpr double kDecisionThreshold = 0.5;
Label classify(double plaque_probability);

struct MetricsReport {
    Backbone backbone = Backbone::SmallTest;
    Representation representation = Representation::Cartesian;
    bool pretrained = false;
    ConfusionMatrix confusion;
    Metric sensitivity;
    Metric specificity;
    Metric accuracy;

    static MetricsReport from_confusion(Backbone backbone, Representation representation,
                                        bool pretrained, const ConfusionMatrix& cm);

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// "ResNet101/cartesian/pretrained" style identifier used in plots and CSVs.
std::string report_label(const MetricsReport& report);

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// JSON text with fields backbone, representation, pretrained, tp, fp, tn, fn,
/// sensitivity, specificity, accuracy. Undefined metrics are the string "undefined".
std::string to_json_text(const MetricsReport& report);
MetricsReport report_from_json_text(const std::string& text);
void write_report(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport read_report(const std::filesystem::path& path);

/// Human summary, percentages at one decimal.
std::string summarize(const MetricsReport& report);

struct ScatterPoint {
    std::string label;
    Metric sensitivity;
    Metric one_minus_specificity;

    [[nodiscard]] bool defined() const { return sensitivity && one_minus_specificity; }
    friend bool operator==(const ScatterPoint&, const ScatterPoint&) = default;
};

inline constexpr std::string_view kScatterCsvHeader = "label,sensitivity,one_minus_specificity";

std::vector<ScatterPoint> scatter_points(std::span<const MetricsReport> reports);

struct ScatterOutput {
    std::filesystem::path image;
    std::filesystem::path csv;
    std::size_t markers_drawn = 0;
};

/// Renders sensitivity (y) against 1 - specificity (x) on [0,1]^2, one marker
/// per report keyed by backbone, and writes the plotted points to a CSV next
/// to the image (same stem, .csv). Reports with an undefined coordinate are
/// not drawn and appear in the CSV with the value `undefined`.
ScatterOutput scatter_plot(std::span<const MetricsReport> reports,
                           const std::filesystem::path& image_path);

void write_scatter_csv(std::span<const ScatterPoint> points, const std::filesystem::path& path);
std::vector<ScatterPoint> read_scatter_csv(const std::filesystem::path& path);

}  // namespace ivoct::eval
