#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aigieval/aj.hpp"
#include "aigieval/annotation.hpp"
#include "aigieval/errors.hpp"

namespace aigi {

// Fraction of the image covered by the union of its annotations, in [0, 1].
// A fake with no annotations has ratio 0; real images are rejected.
double artifact_ratio(const ImageRecord& record);

// Bin edges for stratifying fakes by artifact ratio. Images with ratio
// exactly 0 always form their own bucket; positive ratios fall into
// (0, e1], (e1, e2], ..., (e_last, 1]. Edges are strictly increasing and lie
// in (0, 1).
struct FidelityBinSpec {
    std::vector<double> edges;

    static FidelityBinSpec fixed(std::vector<double> edges);
    // Equal-count edges over the positive ratios found in the manifest.
    static FidelityBinSpec quantiles(const Manifest& manifest, int bins);
};

struct ParBinRow {
    std::string label;          // "0" or "(lo, hi]"
    double lo = 0.0;            // lo == hi == 0 for the zero bucket
    double hi = 0.0;
    std::int64_t count = 0;
    std::int64_t correct = 0;   // called fake
    double fake_acc = 0.0;      // ratio in [0, 1]; 0 when count == 0
    bool acc_defined = true;
};

// Detection accuracy on fakes stratified by artifact ratio. Every fake in the
// manifest needs a prediction; classification uses score >= threshold.
std::vector<ParBinRow> accuracy_by_ratio(const Manifest& manifest,
                                         const std::vector<AjPrediction>& preds,
                                         double threshold,
                                         const FidelityBinSpec& spec);

// Per-image artifact ratios for reporting (fakes only, manifest order).
struct ParEntry {
    std::string uid;
    std::string generator;
    double ratio = 0.0;
};

std::vector<ParEntry> artifact_ratios(const Manifest& manifest);

struct ConfidenceHistogram {
    double bin_width = 0.25;
    std::int64_t scored_instances = 0;
    // counts[i] covers [i * w, (i + 1) * w); the last bin also includes 1.0.
    std::vector<std::int64_t> counts;
};

// Histogram of mean verification scores over scored annotations. Throws
// NoScoredInstances when nothing carries a score.
ConfidenceHistogram confidence_histogram(const Manifest& manifest, double bin_width = 0.25);

}  // namespace aigi
