#include "ivoct/evaluation.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace ivoct::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kUndefined = "undefined";

Metric ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

json metric_to_json(const Metric& m) {
    return m ? json(*m) : json(std::string(kUndefined));
}

Metric metric_from_json(const json& j, const char* field) {
    if (j.is_string() && j.get<std::string>() == kUndefined) return std::nullopt;
    if (!j.is_number()) {
        throw ReportError(std::string("report field '") + field + "' must be a number or \"undefined\"");
    }
    const double v = j.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ReportError(std::string("report field '") + field + "' outside [0,1]");
    }
    return v;
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string format_metric(const Metric& m) {
    return m ? format_double(*m) : std::string(kUndefined);
}

Metric parse_metric(std::string_view token, std::size_t line) {
    if (token == kUndefined) return std::nullopt;
    double v = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (token.empty() || ec != std::errc{} || ptr != end) {
        throw ReportError("scatter csv line " + std::to_string(line) + ": bad value '" +
                          std::string(token) + "'");
    }
    return v;
}

// Colors (BGR) keyed by representation and pretraining.
cv::Scalar series_color(Representation rep, bool pretrained) {
    if (rep == Representation::Cartesian) {
        return pretrained ? cv::Scalar(180, 90, 20) : cv::Scalar(230, 180, 110);
    }
    return pretrained ? cv::Scalar(30, 30, 200) : cv::Scalar(40, 150, 250);
}

void draw_marker(cv::Mat& canvas, cv::Point at, char marker, const cv::Scalar& color) {
    constexpr int kSize = 14;
    switch (marker) {
        case '*': cv::drawMarker(canvas, at, color, cv::MARKER_STAR, kSize, 2); break;
        case 'x': cv::drawMarker(canvas, at, color, cv::MARKER_TILTED_CROSS, kSize, 2); break;
        case 'o': cv::circle(canvas, at, kSize / 2, color, 2, cv::LINE_AA); break;
        case '+': cv::drawMarker(canvas, at, color, cv::MARKER_CROSS, kSize, 2); break;
        default: cv::circle(canvas, at, 4, color, cv::FILLED, cv::LINE_AA); break;
    }
}

}  // namespace

ConfusionMatrix confusion(std::span<const Label> labels, std::span<const Label> predictions) {
    if (labels.size() != predictions.size()) {
        throw std::invalid_argument("confusion: " + std::to_string(labels.size()) + " labels but " +
                                    std::to_string(predictions.size()) + " predictions");
    }
    if (labels.empty()) {
        throw std::invalid_argument("confusion: empty input");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool actual = labels[i] == Label::Plaque;
        const bool predicted = predictions[i] == Label::Plaque;
        if (actual) {
            ++(predicted ? cm.tp : cm.fn);
        } else {
            ++(predicted ? cm.fp : cm.tn);
        }
    }
    return cm;
}

Metric sensitivity(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fn); }
Metric specificity(const ConfusionMatrix& cm) { return ratio(cm.tn, cm.tn + cm.fp); }
Metric accuracy(const ConfusionMatrix& cm) { return ratio(cm.tp + cm.tn, cm.total()); }

double accuracy_from_rates(double sens, double spec, double positives, double negatives) {
    const double total = positives + negatives;
    if (!(total > 0.0)) {
        throw std::invalid_argument("accuracy_from_rates: no samples");
    }
    return (sens * positives + spec * negatives) / total;
}

std::string format_percent(const Metric& metric) {
    if (!metric) return std::string(kUndefined);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", *metric * 100.0);
    return buf;
}

Label classify(double plaque_probability) {
    return plaque_probability >= kDecisionThreshold ? Label::Plaque : Label::NoPlaque;
}

MetricsReport MetricsReport::from_confusion(Backbone backbone, Representation representation,
                                            bool pretrained, const ConfusionMatrix& cm) {
    return MetricsReport{backbone,        representation,  pretrained,  cm,
                         eval::sensitivity(cm), eval::specificity(cm), eval::accuracy(cm)};
}

std::string report_label(const MetricsReport& report) {
    return std::string(display_name(report.backbone)) + "/" +
           std::string(to_string(report.representation)) + "/" +
           (report.pretrained ? "pretrained" : "scratch");
}

std::string to_json_text(const MetricsReport& r) {
    json j;
    j["backbone"] = std::string(to_string(r.backbone));
    j["representation"] = std::string(to_string(r.representation));
    j["pretrained"] = r.pretrained;
    j["tp"] = r.confusion.tp;
    j["fp"] = r.confusion.fp;
    j["tn"] = r.confusion.tn;
    j["fn"] = r.confusion.fn;
    j["sensitivity"] = metric_to_json(r.sensitivity);
    j["specificity"] = metric_to_json(r.specificity);
    j["accuracy"] = metric_to_json(r.accuracy);
    return j.dump(2) + "\n";
}

MetricsReport report_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ReportError(std::string("malformed report: ") + e.what());
    }
    try {
        MetricsReport r;
        r.backbone = parse_backbone(j.at("backbone").get<std::string>());
        r.representation = parse_representation(j.at("representation").get<std::string>());
        r.pretrained = j.at("pretrained").get<bool>();
        r.confusion = {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
                       j.at("tn").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>()};
        r.sensitivity = metric_from_json(j.at("sensitivity"), "sensitivity");
        r.specificity = metric_from_json(j.at("specificity"), "specificity");
        r.accuracy = metric_from_json(j.at("accuracy"), "accuracy");
        return r;
    } catch (const json::exception& e) {
        throw ReportError(std::string("invalid report: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ReportError(std::string("invalid report: ") + e.what());
    }
}

void write_report(const MetricsReport& report, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportError("cannot write report '" + path.string() + "'");
    out << to_json_text(report);
    if (!out) throw ReportError("failed writing report '" + path.string() + "'");
}

MetricsReport read_report(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot open report '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return report_from_json_text(text.str());
}

std::string summarize(const MetricsReport& r) {
    std::ostringstream out;
    out << report_label(r) << ": accuracy " << format_percent(r.accuracy) << ", sensitivity "
        << format_percent(r.sensitivity) << ", specificity " << format_percent(r.specificity)
        << " (tp=" << r.confusion.tp << " fp=" << r.confusion.fp << " tn=" << r.confusion.tn
        << " fn=" << r.confusion.fn << ")";
    return out.str();
}

std::vector<ScatterPoint> scatter_points(std::span<const MetricsReport> reports) {
    std::vector<ScatterPoint> points;
    points.reserve(reports.size());
    for (const auto& r : reports) {
        Metric x;
        if (r.specificity) x = 1.0 - *r.specificity;
        points.push_back({report_label(r), r.sensitivity, x});
    }
    return points;
}

void write_scatter_csv(std::span<const ScatterPoint> points, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportError("cannot write scatter csv '" + path.string() + "'");
    out << kScatterCsvHeader << '\n';
    for (const auto& p : points) {
        if (p.label.find(',') != std::string::npos) {
            throw ReportError("scatter label must not contain commas: " + p.label);
        }
        out << p.label << ',' << format_metric(p.sensitivity) << ','
            << format_metric(p.one_minus_specificity) << '\n';
    }
    if (!out) throw ReportError("failed writing scatter csv '" + path.string() + "'");
}

std::vector<ScatterPoint> read_scatter_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot open scatter csv '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kScatterCsvHeader) {
        throw ReportError("scatter csv '" + path.string() + "' has an unexpected header");
    }
    std::vector<ScatterPoint> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            throw ReportError("scatter csv line " + std::to_string(line_no) + ": expected 3 fields");
        }
        const std::string_view view(line);
        points.push_back({line.substr(0, c1), parse_metric(view.substr(c1 + 1, c2 - c1 - 1), line_no),
                          parse_metric(view.substr(c2 + 1), line_no)});
    }
    return points;
}

ScatterOutput scatter_plot(std::span<const MetricsReport> reports, const fs::path& image_path) {
    if (reports.empty()) {
        throw std::invalid_argument("scatter_plot: no reports");
    }
    if (!image_path.has_extension()) {
        throw ReportError("scatter_plot: output path needs an image extension (e.g. .png)");
    }

    constexpr int kWidth = 720;
    constexpr int kHeight = 640;
    constexpr int kLeft = 80, kRight = 200, kTop = 40, kBottom = 70;
    const int plot_w = kWidth - kLeft - kRight;
    const int plot_h = kHeight - kTop - kBottom;
    const auto to_pixel = [&](double x, double y) {
        return cv::Point(kLeft + static_cast<int>(std::lround(x * plot_w)),
                         kTop + static_cast<int>(std::lround((1.0 - y) * plot_h)));
    };
    const cv::Scalar black(0, 0, 0);
    const cv::Scalar grid(225, 225, 225);
    const int font = cv::FONT_HERSHEY_SIMPLEX;

    cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
    for (int i = 0; i <= 5; ++i) {
        const double t = i / 5.0;
        cv::line(canvas, to_pixel(t, 0.0), to_pixel(t, 1.0), grid, 1);
        cv::line(canvas, to_pixel(0.0, t), to_pixel(1.0, t), grid, 1);
        char tick[8];
        std::snprintf(tick, sizeof tick, "%.1f", t);
        cv::putText(canvas, tick, to_pixel(t, 0.0) + cv::Point(-12, 22), font, 0.45, black, 1,
                    cv::LINE_AA);
        cv::putText(canvas, tick, to_pixel(0.0, t) + cv::Point(-38, 5), font, 0.45, black, 1,
                    cv::LINE_AA);
    }
    cv::line(canvas, to_pixel(0.0, 0.0), to_pixel(1.0, 1.0), grid, 1, cv::LINE_AA);
    cv::rectangle(canvas, to_pixel(0.0, 1.0), to_pixel(1.0, 0.0), black, 1);
    cv::putText(canvas, "1 - specificity", cv::Point(kLeft + plot_w / 2 - 60, kHeight - 20), font,
                0.55, black, 1, cv::LINE_AA);
    {
        cv::Mat label(24, 120, CV_8UC3, cv::Scalar(255, 255, 255));
        cv::putText(label, "sensitivity", cv::Point(4, 17), font, 0.55, black, 1, cv::LINE_AA);
        cv::Mat rotated;
        cv::rotate(label, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
        rotated.copyTo(canvas(cv::Rect(8, kTop + plot_h / 2 - 60, rotated.cols, rotated.rows)));
    }

    const auto points = scatter_points(reports);
    std::size_t drawn = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (!points[i].defined()) continue;
        const double x = std::clamp(*points[i].one_minus_specificity, 0.0, 1.0);
        const double y = std::clamp(*points[i].sensitivity, 0.0, 1.0);
        draw_marker(canvas, to_pixel(x, y), plot_marker(reports[i].backbone),
                    series_color(reports[i].representation, reports[i].pretrained));
        ++drawn;
    }

    // Legend: marker per backbone, color per representation/pretraining.
    int ly = kTop + 10;
    const int lx = kLeft + plot_w + 20;
    for (const Backbone b : kAllBackbones) {
        draw_marker(canvas, cv::Point(lx + 8, ly), plot_marker(b), black);
        cv::putText(canvas, std::string(display_name(b)), cv::Point(lx + 24, ly + 5), font, 0.42,
                    black, 1, cv::LINE_AA);
        ly += 24;
    }
    ly += 10;
    for (const auto rep : {Representation::Cartesian, Representation::Polar}) {
        for (const bool pre : {true, false}) {
            cv::rectangle(canvas, cv::Rect(lx + 2, ly - 6, 12, 12), series_color(rep, pre), cv::FILLED);
            cv::putText(canvas,
                        std::string(to_string(rep)) + (pre ? " / pretrained" : " / scratch"),
                        cv::Point(lx + 24, ly + 5), font, 0.42, black, 1, cv::LINE_AA);
            ly += 22;
        }
    }

    if (image_path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(image_path.parent_path(), ec);
        if (ec) throw ReportError("cannot create '" + image_path.parent_path().string() + "': " + ec.message());
    }
    bool ok = false;
    try {
        ok = cv::imwrite(image_path.string(), canvas);
    } catch (const cv::Exception& e) {
        throw ReportError("cannot write plot '" + image_path.string() + "': " + e.what());
    }
    if (!ok) throw ReportError("cannot write plot '" + image_path.string() + "'");

    fs::path csv = image_path;
    csv.replace_extension(".csv");
    write_scatter_csv(points, csv);
    return {image_path, csv, drawn};
}

}  // namespace ivoct::eval
