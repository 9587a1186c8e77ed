#include "ivoct/evaluate.hpp"

#include <algorithm>
#include <string>

namespace ivoct::eval {

namespace {
constexpr std::size_t kChunk = 64;
}

Evaluation evaluate(const model::TrainedModel& model, const dataset::Manifest& test_set,
                    const augment::AugmentConfig& augment) {
    const Representation rep = test_set.representation();
    if (augment.representation != rep) {
        throw model::ModelError("representation mismatch: test manifest is " + std::string(to_string(rep)) +
                                " but augmentation is " + std::string(to_string(augment.representation)));
    }
    if (model.representation() && *model.representation() != rep) {
        throw model::ModelError("representation mismatch: model was trained on " +
                                std::string(to_string(*model.representation())) + " but test manifest is " +
                                std::string(to_string(rep)));
    }

    Evaluation out;
    const auto& records = test_set.records();
    std::vector<Label> labels;
    labels.reserve(records.size());
    for (std::size_t start = 0; start < records.size(); start += kChunk) {
        const std::size_t end = std::min(records.size(), start + kChunk);
        std::vector<BScan> scans;
        scans.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
            scans.push_back(dataset::load_bscan(test_set, records[i]));
            labels.push_back(records[i].label);
        }
        for (double p : model::predict_proba(model, scans, augment)) {
            out.plaque_probability.push_back(p);
            out.predictions.push_back(classify(p));
        }
    }
    out.report = MetricsReport::from_confusion(model.config().backbone, rep, model.config().pretrained,
                                               confusion(labels, out.predictions));
    return out;
}

}  // namespace ivoct::eval
