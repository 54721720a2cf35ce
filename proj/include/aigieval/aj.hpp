#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aigieval/annotation.hpp"
#include "aigieval/errors.hpp"

namespace aigi {

// One authenticity verdict. Exactly one of score / label is present; score is
// a fake-probability in [0, 1], label is a hard call.
struct AjPrediction {
    std::string uid;
    std::string generator;  // empty for real images
    ImageRole role = ImageRole::Real;
    std::optional<double> score;
    std::optional<bool> label_fake;
};

std::vector<AjPrediction> parse_aj_predictions(const std::string& json_text);
std::vector<AjPrediction> load_aj_predictions(const std::filesystem::path& path);

// score >= threshold counts as fake.
bool classify_fake(const AjPrediction& pred, double threshold);

struct ConfusionCounts {
    std::int64_t tp = 0;  // fakes called fake
    std::int64_t fp = 0;  // reals called fake
    std::int64_t tn = 0;  // reals called real
    std::int64_t fn = 0;  // fakes called real

    void add(bool is_fake, bool called_fake);
    void merge(const ConfusionCounts& other);
};

// Ratios in [0, 1]. Balanced accuracy is the mean of the per-class recalls,
// so a degenerate always-one-answer predictor lands at 0.5 on any mix.
struct AjMetrics {
    double acc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;  // false when tp + fp == 0 (value forced to 0)
    bool f1_defined = true;         // false when precision + recall == 0
};

// Throws EmptyClass when either class has no members.
AjMetrics aj_metrics(const ConfusionCounts& counts);

// Mean of the two per-class recalls, for when only the class accuracies are
// at hand rather than raw counts.
double balanced_accuracy(double real_recall, double fake_recall);

struct AjRow {
    std::string generator;  // "all" for the pooled row
    ConfusionCounts counts;
    AjMetrics metrics;
};

// Per-generator breakdown: each generator's fakes against the full shared
// real pool, plus a pooled "all" row last. Every image in the manifest must
// have exactly one matching prediction.
std::vector<AjRow> aj_per_generator(const Manifest& manifest,
                                    const std::vector<AjPrediction>& preds,
                                    double threshold);

// Overall confusion across the whole manifest (the "all" row's counts).
ConfusionCounts aj_confusion(const Manifest& manifest,
                             const std::vector<AjPrediction>& preds,
                             double threshold);

}  // namespace aigi
