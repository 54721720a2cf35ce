#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aigieval/annotation.hpp"
#include "aigieval/errors.hpp"
#include "aigieval/mask.hpp"

namespace aigi {

struct PixelCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    void merge(const PixelCounts& other);
};

// Ratios in [0, 1]. A zero denominator yields 0 with the matching flag
// cleared, so an empty class never turns into a NaN downstream.
struct PixelMetrics {
    double iou = 0.0;
    double pixp = 0.0;
    double pixr = 0.0;
    double pixf1 = 0.0;
    bool iou_defined = true;
    bool pixp_defined = true;
    bool pixr_defined = true;
    bool pixf1_defined = true;
};

PixelMetrics pixel_metrics(const PixelCounts& counts);

// Ratio-level identities, for when only pooled precision/recall are at hand:
// F1 = 2PR / (P + R) and IoU = PR / (P + R - PR). Both return 0 when the
// denominator vanishes.
double f1_from_pr(double precision, double recall);
double iou_from_pr(double precision, double recall);

enum class Pooling { Micro, Macro };

// Key for one fake image. generator disambiguates uids that appear under
// several generators; an empty generator matches a uid that is unique among
// the manifest's fakes.
struct ImageKey {
    std::string uid;
    std::string generator;
};

// Per-category segmentation prediction for one fake image.
struct PadPrediction {
    ImageKey key;
    std::map<ArtifactCategory, RleMask> masks;  // absent category = empty mask
};

std::vector<PadPrediction> parse_pad_predictions(const std::string& json_text);
std::vector<PadPrediction> load_pad_predictions(const std::filesystem::path& path);

// Category-agnostic prediction: one mask per image, either inline RLE or a
// binarized heatmap file resolved relative to the prediction document.
struct CaPadPrediction {
    ImageKey key;
    BinaryMask mask;
};

std::vector<CaPadPrediction> parse_ca_pad_predictions(
    const std::string& json_text, const std::filesystem::path& base_dir,
    double binarize_threshold = 0.5);
std::vector<CaPadPrediction> load_ca_pad_predictions(
    const std::filesystem::path& path, double binarize_threshold = 0.5);

struct PadOptions {
    Pooling pooling = Pooling::Micro;
    int jobs = 1;
    // When set, only fakes whose key is in the list are evaluated (used to
    // couple localization to upstream authenticity calls).
    std::optional<std::vector<ImageKey>> gate;
};

struct CategoryRow {
    ArtifactCategory category = ArtifactCategory::Textures;
    PixelCounts counts;        // pooled (micro)
    PixelMetrics metrics;      // micro or macro depending on options
    std::int64_t macro_images = 0;  // images contributing to the macro mean
};

struct PadResult {
    std::vector<CategoryRow> rows;      // all seven categories, fixed order
    std::int64_t images_evaluated = 0;  // annotated fakes scored
    std::vector<std::string> warnings;
};

// Fine-grained localization: per-category masks against per-category unions
// of the annotated polygons. The pool is every fake with at least one
// annotation; predictions for other images are ignored with a warning, and a
// pool image without a prediction entry contributes an empty mask.
PadResult eval_pad(const Manifest& manifest, const std::vector<PadPrediction>& preds,
                   const PadOptions& options = {});

struct CaPadResult {
    PixelCounts counts;
    PixelMetrics metrics;
    std::int64_t images_evaluated = 0;
    std::int64_t macro_images = 0;
    std::vector<std::string> warnings;
};

// Category-agnostic localization: one mask against the union of all
// annotations on the image.
CaPadResult eval_ca_pad(const Manifest& manifest, const std::vector<CaPadPrediction>& preds,
                        const PadOptions& options = {});

// Weak localization by instances.
struct InstancePrediction {
    ImageKey key;
    std::optional<ArtifactCategory> category;  // required unless agnostic
    Region region;
};

std::vector<InstancePrediction> parse_instance_predictions(const std::string& json_text);
std::vector<InstancePrediction> load_instance_predictions(const std::filesystem::path& path);

struct InstanceRow {
    std::string label;  // category wire name, or "all"
    std::int64_t preds_total = 0;
    std::int64_t preds_matched = 0;   // predictions covered by some instance
    std::int64_t gt_total = 0;
    std::int64_t gt_indicated = 0;    // instances some prediction points at
    double precision = 0.0;           // ratios in [0, 1]
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

struct InstanceOptions {
    double t = 0.5;          // coverage threshold in (0, 1]
    bool agnostic = false;   // ignore categories when matching
    std::optional<std::vector<ImageKey>> gate;
};

struct InstanceResult {
    std::vector<InstanceRow> rows;  // per category (category mode) then "all"
    std::int64_t images_evaluated = 0;
    std::vector<std::string> warnings;
};

// A prediction counts as correct when Area(pred n gt) / Area(pred) >= t for
// some ground-truth instance (same category unless agnostic); an instance
// counts as indicated when some prediction reaches it the same way. Several
// predictions may legitimately point at one instance.
InstanceResult eval_instances(const Manifest& manifest,
                              const std::vector<InstancePrediction>& preds,
                              const InstanceOptions& options = {});

}  // namespace aigi
