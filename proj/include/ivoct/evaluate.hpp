#pragma once

#include <vector>

#include "ivoct/augmentation.hpp"
#include "ivoct/dataset.hpp"
#include "ivoct/evaluation.hpp"
#include "ivoct/model.hpp"

namespace ivoct::eval {

struct Evaluation {
    MetricsReport report;
    std::vector<double> plaque_probability;  // manifest row order
    std::vector<Label> predictions;
};

/// Scores every frame of the test manifest with the eval transform and
/// thresholds p(PLAQUE) at kDecisionThreshold. Frames are loaded in chunks so
/// memory stays bounded. Throws model::ModelError when the manifest, the
/// augmentation config and the model disagree on the representation.
Evaluation evaluate(const model::TrainedModel& model, const dataset::Manifest& test_set,
                    const augment::AugmentConfig& augment);

}  // namespace ivoct::eval
