#include <random>

#include <gtest/gtest.h>

#include "ivoct/evaluation.hpp"
#include "test_support.hpp"

using namespace ivoct;
using namespace ivoct::eval;

namespace {

constexpr Label P = Label::Plaque;
constexpr Label N = Label::NoPlaque;

ConfusionMatrix brute_force(const std::vector<Label>& labels, const std::vector<Label>& preds) {
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == P && preds[i] == P) ++cm.tp;
        if (labels[i] == N && preds[i] == P) ++cm.fp;
        if (labels[i] == N && preds[i] == N) ++cm.tn;
        if (labels[i] == P && preds[i] == N) ++cm.fn;
    }
    return cm;
}

MetricsReport operating_point(Backbone b, Representation rep, bool pretrained, double sens, double spec) {
    MetricsReport r;
    r.backbone = b;
    r.representation = rep;
    r.pretrained = pretrained;
    r.sensitivity = sens;
    r.specificity = spec;
    return r;
}

}  // namespace

TEST(Confusion, Examples) {
    const std::vector<Label> labels{P, P, N, N};
    const std::vector<Label> preds{P, N, N, P};
    EXPECT_EQ(confusion(labels, preds), (ConfusionMatrix{1, 1, 1, 1}));
    const auto all_right = confusion(labels, labels);
    EXPECT_EQ(all_right.fp, 0u);
    EXPECT_EQ(all_right.fn, 0u);
    EXPECT_EQ(all_right.total(), 4u);
}

TEST(Confusion, Errors) {
    const std::vector<Label> a{P, N};
    const std::vector<Label> b{P};
    EXPECT_THROW(confusion(a, b), std::invalid_argument);
    EXPECT_THROW(confusion(std::vector<Label>{}, std::vector<Label>{}), std::invalid_argument);
}

TEST(Confusion, MatchesBruteForceOnRandomInputs) {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + gen() % 200;
        std::vector<Label> labels(n), preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = gen() % 2 ? P : N;
            preds[i] = gen() % 2 ? P : N;
        }
        ASSERT_EQ(confusion(labels, preds), brute_force(labels, preds));
    }
    std::vector<Label> labels(10000), preds(10000);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = gen() % 3 ? P : N;
        preds[i] = gen() % 2 ? P : N;
    }
    EXPECT_EQ(confusion(labels, preds), brute_force(labels, preds));
}

TEST(Metrics, Examples) {
    EXPECT_DOUBLE_EQ(*sensitivity({9, 0, 0, 1}), 0.9);
    EXPECT_FALSE(sensitivity({0, 3, 4, 0}).has_value());
    EXPECT_FALSE(specificity({3, 0, 0, 4}).has_value());
    EXPECT_DOUBLE_EQ(*specificity({0, 1, 3, 0}), 0.75);
    EXPECT_DOUBLE_EQ(*accuracy({1, 1, 1, 1}), 0.5);
    EXPECT_FALSE(accuracy({}).has_value());
}

TEST(Metrics, ConsistencyPoint) {
    const double acc = accuracy_from_rates(0.900, 0.855, 283, 226);
    EXPECT_NEAR(acc, 0.880, 0.002);
    EXPECT_EQ(format_percent(acc), "88.0%");
}

TEST(Metrics, PrevalenceIdentityAndBounds) {
    std::mt19937_64 gen(2);
    for (int i = 0; i < 10000; ++i) {
        const ConfusionMatrix cm{gen() % 50, gen() % 50, gen() % 50, gen() % 50};
        const auto s = sensitivity(cm), sp = specificity(cm), a = accuracy(cm);
        for (const auto& m : {s, sp, a}) {
            if (m) {
                ASSERT_GE(*m, 0.0);
                ASSERT_LE(*m, 1.0);
            }
        }
        if (s && sp) {
            const double weighted = (*s * (cm.tp + cm.fn) + *sp * (cm.tn + cm.fp)) / cm.total();
            ASSERT_NEAR(*a, weighted, 1e-12);
            ASSERT_NEAR(accuracy_from_rates(*s, *sp, cm.tp + cm.fn, cm.tn + cm.fp), *a, 1e-12);
        }
    }
}

TEST(Metrics, FormatPercent) {
    EXPECT_EQ(format_percent(0.9), "90.0%");
    EXPECT_EQ(format_percent(0.8556), "85.6%");
    EXPECT_EQ(format_percent(std::nullopt), "undefined");
}

TEST(Classify, ThresholdTiesArePlaque) {
    EXPECT_EQ(classify(0.5), P);
    EXPECT_EQ(classify(0.4999999), N);
    EXPECT_EQ(classify(1.0), P);
    EXPECT_EQ(classify(0.0), N);
}

TEST(Report, OracleAndConstantPredictors) {
    const std::vector<Label> labels{P, N, P, N, N};
    const auto perfect = MetricsReport::from_confusion(Backbone::SmallTest, Representation::Polar, false,
                                                       confusion(labels, labels));
    EXPECT_EQ(perfect.sensitivity, 1.0);
    EXPECT_EQ(perfect.specificity, 1.0);
    EXPECT_EQ(perfect.accuracy, 1.0);
    const std::vector<Label> always(labels.size(), P);
    const auto constant = MetricsReport::from_confusion(Backbone::SmallTest, Representation::Polar, false,
                                                        confusion(labels, always));
    EXPECT_EQ(constant.sensitivity, 1.0);
    EXPECT_EQ(constant.specificity, 0.0);
}

TEST(Report, JsonRoundTripIncludingUndefined) {
    test::TempDir dir;
    const auto r = MetricsReport::from_confusion(Backbone::ResNet101, Representation::Cartesian, true, {7, 0, 0, 3});
    ASSERT_FALSE(r.specificity.has_value());
    write_report(r, dir / "r.json");
    EXPECT_EQ(read_report(dir / "r.json"), r);
    const auto text = to_json_text(r);
    for (const char* key : {"backbone", "representation", "pretrained", "tp", "fp", "tn", "fn", "sensitivity",
                            "specificity", "accuracy"}) {
        EXPECT_NE(text.find(std::string("\"") + key + "\""), std::string::npos) << key;
    }
    EXPECT_NE(text.find("\"undefined\""), std::string::npos);
    EXPECT_EQ(report_label(r), "ResNet101/cartesian/pretrained");
}

TEST(Report, RejectsMalformed) {
    EXPECT_THROW(report_from_json_text("{"), ReportError);
    EXPECT_THROW(report_from_json_text("{\"backbone\": \"resnet50\"}"), ReportError);
    EXPECT_THROW(read_report("/nonexistent/report.json"), ReportError);
}

TEST(Report, Summary) {
    const auto r = MetricsReport::from_confusion(Backbone::SmallTest, Representation::Polar, false, {9, 2, 8, 1});
    EXPECT_EQ(summarize(r), "SmallTest/polar/scratch: accuracy 85.0%, sensitivity 90.0%, specificity 80.0% "
                            "(tp=9 fp=2 tn=8 fn=1)");
}

TEST(Scatter, ThreeOperatingPoints) {
    test::TempDir dir;
    const std::vector<MetricsReport> reports{
        operating_point(Backbone::ResNet101, Representation::Cartesian, true, 0.900, 0.855),
        operating_point(Backbone::ResNet50, Representation::Cartesian, false, 0.779, 0.803),
        operating_point(Backbone::ResNet101, Representation::Polar, true, 0.828, 0.828),
    };
    const auto out = scatter_plot(reports, dir / "fig.png");
    EXPECT_TRUE(std::filesystem::exists(out.image));
    EXPECT_GT(std::filesystem::file_size(out.image), 1000u);
    EXPECT_EQ(out.csv, dir / "fig.csv");
    EXPECT_EQ(out.markers_drawn, 3u);
    const auto rows = read_scatter_csv(out.csv);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows, scatter_points(reports));
    EXPECT_EQ(*rows[0].sensitivity, 0.900);
    EXPECT_EQ(*rows[0].one_minus_specificity, 1.0 - 0.855);
    EXPECT_EQ(*rows[1].sensitivity, 0.779);
}

TEST(Scatter, SingleAndUndefined) {
    test::TempDir dir;
    const std::vector<MetricsReport> one{operating_point(Backbone::SmallTest, Representation::Polar, false, 0.5, 0.25)};
    EXPECT_EQ(scatter_plot(one, dir / "one.png").markers_drawn, 1u);

    auto undefined = operating_point(Backbone::InceptionV3, Representation::Polar, false, 0.7, 0.0);
    undefined.specificity.reset();
    const std::vector<MetricsReport> two{one[0], undefined};
    const auto out = scatter_plot(two, dir / "two.png");
    EXPECT_EQ(out.markers_drawn, 1u);
    const auto rows = read_scatter_csv(out.csv);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[1].defined());
    EXPECT_NE(test::read_file(out.csv).find("InceptionV3/polar/scratch,0.7,undefined"), std::string::npos);
}

TEST(Scatter, Errors) {
    test::TempDir dir;
    const std::vector<MetricsReport> none;
    EXPECT_THROW(scatter_plot(none, dir / "x.png"), std::invalid_argument);
    test::write_file(dir / "file", "x");
    const std::vector<MetricsReport> one{operating_point(Backbone::SmallTest, Representation::Polar, false, 0.5, 0.5)};
    EXPECT_THROW(scatter_plot(one, dir / "file" / "x.png"), ReportError);
}

TEST(Scatter, CsvRoundTripIsExact) {
    test::TempDir dir;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScatterPoint> points;
    for (int i = 0; i < 200; ++i) points.push_back({"p" + std::to_string(i), u(gen), u(gen)});
    points.push_back({"gap", std::nullopt, 0.25});
    write_scatter_csv(points, dir / "s.csv");
    EXPECT_EQ(read_scatter_csv(dir / "s.csv"), points);
}

TEST(Backbones, TokensAndMarkers) {
    for (const Backbone b : kAllBackbones) EXPECT_EQ(parse_backbone(to_string(b)), b);
    EXPECT_EQ(parse_backbone("Inception-ResNet_V2"), Backbone::InceptionResNetV2);
    EXPECT_EQ(parse_backbone("RESNET101"), Backbone::ResNet101);
    EXPECT_THROW(parse_backbone("vgg16"), std::invalid_argument);
    EXPECT_EQ(plot_marker(Backbone::ResNet50), '*');
    EXPECT_EQ(plot_marker(Backbone::ResNet101), 'x');
    EXPECT_EQ(plot_marker(Backbone::InceptionV3), 'o');
    EXPECT_EQ(plot_marker(Backbone::InceptionResNetV2), '+');
    EXPECT_EQ(plot_marker(Backbone::SmallTest), '.');
}
