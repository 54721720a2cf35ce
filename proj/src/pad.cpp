#include "aigieval/pad.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aigieval/heatmap.hpp"
#include "aigieval/parallel.hpp"

namespace aigi {

namespace {

using nlohmann::json;

json parse_doc(const std::string& json_text) {
    try {
        return json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("prediction document is not valid JSON: ") + e.what());
    }
}

const json& predictions_array(const json& doc) {
    if (!doc.is_object() || !doc.contains("predictions"))
        throw SchemaError("$.predictions: missing field");
    const json& arr = doc["predictions"];
    if (!arr.is_array()) throw SchemaError("$.predictions: expected array");
    return arr;
}

ImageKey parse_key(const json& obj, const std::string& path) {
    ImageKey key;
    if (!obj.contains("uid") || !obj["uid"].is_string())
        throw SchemaError(path + ".uid: expected string");
    key.uid = obj["uid"].get<std::string>();
    if (auto it = obj.find("generator"); it != obj.end() && !it->is_null()) {
        if (!it->is_string()) throw SchemaError(path + ".generator: expected string or null");
        key.generator = it->get<std::string>();
    }
    return key;
}

RleMask parse_rle_field(const json& value, const std::string& path) {
    if (!value.is_object()) throw SchemaError(path + ": expected rle object");
    try {
        return rle_from_json(value.dump());
    } catch (const RleError& e) {
        throw RleError(path + ": " + e.what());
    }
}

std::string key_text(const ImageKey& key) {
    return key.generator.empty() ? key.uid : key.uid + " (" + key.generator + ")";
}

// Maps each prediction key onto the index of a unique fake record.
class FakeResolver {
public:
    explicit FakeResolver(const Manifest& manifest) {
        for (std::size_t i = 0; i < manifest.images.size(); ++i) {
            const auto& rec = manifest.images[i];
            if (rec.role == ImageRole::Fake) fakes_[rec.uid].push_back(i);
        }
        manifest_ = &manifest;
    }

    std::size_t resolve(const ImageKey& key) const {
        auto it = fakes_.find(key.uid);
        if (it == fakes_.end()) {
            if (known_uid(key.uid))
                throw MissingImage("prediction references " + key.uid +
                                   ", which has no fake record");
            throw UnknownUid("prediction references unknown uid " + key.uid);
        }
        const auto& indices = it->second;
        if (key.generator.empty()) {
            if (indices.size() > 1)
                throw ValidationError("uid " + key.uid +
                                      " is ambiguous across generators; add a generator to the "
                                      "prediction");
            return indices[0];
        }
        for (std::size_t idx : indices)
            if (manifest_->images[idx].generator == key.generator) return idx;
        throw MissingImage("prediction references " + key_text(key) +
                           ", which has no matching fake record");
    }

private:
    bool known_uid(const std::string& uid) const {
        for (const auto& rec : manifest_->images)
            if (rec.uid == uid) return true;
        return false;
    }

    const Manifest* manifest_ = nullptr;
    std::map<std::string, std::vector<std::size_t>> fakes_;
};

bool in_gate(const ImageRecord& rec, const std::vector<ImageKey>& gate) {
    for (const auto& key : gate)
        if (key.uid == rec.uid && key.generator == rec.generator) return true;
    return false;
}

// Indices of the evaluation pool: annotated fakes, optionally gated.
std::vector<std::size_t> build_pool(const Manifest& manifest,
                                    const std::optional<std::vector<ImageKey>>& gate,
                                    std::vector<std::string>& warnings) {
    std::vector<std::size_t> pool;
    std::int64_t gated_out = 0;
    for (std::size_t i = 0; i < manifest.images.size(); ++i) {
        const auto& rec = manifest.images[i];
        if (rec.role != ImageRole::Fake || rec.annotations.empty()) continue;
        if (gate && !in_gate(rec, *gate)) {
            ++gated_out;
            continue;
        }
        pool.push_back(i);
    }
    if (gated_out > 0)
        warnings.push_back(std::to_string(gated_out) +
                           " annotated fake(s) excluded by the authenticity gate");
    return pool;
}

PixelMetrics metrics_from_ratios(double iou, bool iou_def, double p, bool p_def, double r,
                                 bool r_def, double f1, bool f1_def) {
    PixelMetrics m;
    m.iou = iou;
    m.pixp = p;
    m.pixr = r;
    m.pixf1 = f1;
    m.iou_defined = iou_def;
    m.pixp_defined = p_def;
    m.pixr_defined = r_def;
    m.pixf1_defined = f1_def;
    return m;
}

}  // namespace

void PixelCounts::merge(const PixelCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
}

double f1_from_pr(double precision, double recall) {
    double den = precision + recall;
    return den > 0.0 ? 2.0 * precision * recall / den : 0.0;
}

double iou_from_pr(double precision, double recall) {
    double den = precision + recall - precision * recall;
    return den > 0.0 ? precision * recall / den : 0.0;
}

PixelMetrics pixel_metrics(const PixelCounts& counts) {
    PixelMetrics m;
    std::int64_t iou_den = counts.tp + counts.fp + counts.fn;
    std::int64_t p_den = counts.tp + counts.fp;
    std::int64_t r_den = counts.tp + counts.fn;
    if (iou_den == 0) {
        m.iou_defined = false;
    } else {
        m.iou = static_cast<double>(counts.tp) / static_cast<double>(iou_den);
    }
    if (p_den == 0) {
        m.pixp_defined = false;
    } else {
        m.pixp = static_cast<double>(counts.tp) / static_cast<double>(p_den);
    }
    if (r_den == 0) {
        m.pixr_defined = false;
    } else {
        m.pixr = static_cast<double>(counts.tp) / static_cast<double>(r_den);
    }
    if (!m.pixp_defined && !m.pixr_defined) {
        m.pixf1_defined = false;
    } else if (m.pixp + m.pixr == 0.0) {
        m.pixf1 = 0.0;
        m.pixf1_defined = false;
    } else {
        m.pixf1 = 2.0 * m.pixp * m.pixr / (m.pixp + m.pixr);
    }
    return m;
}

std::vector<PadPrediction> parse_pad_predictions(const std::string& json_text) {
    json doc = parse_doc(json_text);
    const json& arr = predictions_array(doc);
    std::vector<PadPrediction> preds;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string path = "$.predictions[" + std::to_string(i) + "]";
        const json& obj = arr[i];
        if (!obj.is_object()) throw SchemaError(path + ": expected object");
        PadPrediction p;
        p.key = parse_key(obj, path);
        if (!seen.insert({p.key.uid, p.key.generator}).second)
            throw ValidationError(path + ": duplicate prediction for " + key_text(p.key));
        if (!obj.contains("masks") || !obj["masks"].is_object())
            throw SchemaError(path + ".masks: expected object");
        for (const auto& [name, value] : obj["masks"].items()) {
            auto category = category_from_name(name);
            if (!category)
                throw ValidationError(path + ".masks: unknown category \"" + name + "\"");
            p.masks[*category] = parse_rle_field(value, path + ".masks." + name);
        }
        preds.push_back(std::move(p));
    }
    return preds;
}

std::vector<PadPrediction> load_pad_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pad_predictions(buf.str());
}

std::vector<CaPadPrediction> parse_ca_pad_predictions(const std::string& json_text,
                                                      const std::filesystem::path& base_dir,
                                                      double binarize_threshold) {
    json doc = parse_doc(json_text);
    const json& arr = predictions_array(doc);
    std::vector<CaPadPrediction> preds;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string path = "$.predictions[" + std::to_string(i) + "]";
        const json& obj = arr[i];
        if (!obj.is_object()) throw SchemaError(path + ": expected object");
        CaPadPrediction p;
        p.key = parse_key(obj, path);
        if (!seen.insert({p.key.uid, p.key.generator}).second)
            throw ValidationError(path + ": duplicate prediction for " + key_text(p.key));
        bool has_mask = obj.contains("mask") && !obj["mask"].is_null();
        bool has_heatmap = obj.contains("heatmap") && !obj["heatmap"].is_null();
        if (has_mask == has_heatmap)
            throw ValidationError(path + ": exactly one of mask and heatmap is required");
        if (has_mask) {
            p.mask = rle_decode(parse_rle_field(obj["mask"], path + ".mask"));
        } else {
            if (!obj["heatmap"].is_string())
                throw SchemaError(path + ".heatmap: expected file path string");
            std::filesystem::path ref = obj["heatmap"].get<std::string>();
            Heatmap map = read_heatmap(ref.is_absolute() ? ref : base_dir / ref);
            p.mask = binarize_heatmap(map, binarize_threshold);
        }
        preds.push_back(std::move(p));
    }
    return preds;
}

std::vector<CaPadPrediction> load_ca_pad_predictions(const std::filesystem::path& path,
                                                     double binarize_threshold) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ca_pad_predictions(buf.str(), path.parent_path(), binarize_threshold);
}

PadResult eval_pad(const Manifest& manifest, const std::vector<PadPrediction>& preds,
                   const PadOptions& options) {
    PadResult result;
    std::vector<std::size_t> pool = build_pool(manifest, options.gate, result.warnings);
    result.images_evaluated = static_cast<std::int64_t>(pool.size());

    FakeResolver resolver(manifest);
    std::map<std::size_t, const PadPrediction*> by_image;
    for (const auto& p : preds) {
        std::size_t idx = resolver.resolve(p.key);
        if (!by_image.emplace(idx, &p).second)
            throw ValidationError("multiple predictions resolve to " + key_text(p.key));
        const auto& rec = manifest.images[idx];
        if (rec.annotations.empty())
            result.warnings.push_back("prediction for unannotated fake " + key_text(p.key) +
                                      " is ignored");
        for (const auto& [category, rle] : p.masks)
            if (rle.width != rec.width || rle.height != rec.height)
                throw DimensionMismatch("mask for " + key_text(p.key) + " (" +
                                        std::string(category_name(category)) + ") is " +
                                        std::to_string(rle.width) + "x" +
                                        std::to_string(rle.height) + ", image is " +
                                        std::to_string(rec.width) + "x" +
                                        std::to_string(rec.height));
    }

    struct ImageOutcome {
        std::array<PixelCounts, kCategoryCount> counts;
        std::array<PixelMetrics, kCategoryCount> ratios;
        std::array<bool, kCategoryCount> contributes{};
    };
    std::vector<ImageOutcome> outcomes(pool.size());

    parallel_for(pool.size(), options.jobs, [&](std::size_t slot) {
        std::size_t idx = pool[slot];
        const auto& rec = manifest.images[idx];
        ImageOutcome& out = outcomes[slot];

        std::array<BinaryMask, kCategoryCount> gt;
        for (const auto& inst : rec.annotations) {
            BinaryMask m = rasterize_polygon(inst.polygon, rec.width, rec.height);
            int c = static_cast<int>(inst.category);
            if (gt[c].width() == 0)
                gt[c] = std::move(m);
            else
                mask_or_into(gt[c], m);
        }

        const PadPrediction* pred = nullptr;
        if (auto it = by_image.find(idx); it != by_image.end()) pred = it->second;

        for (int c = 0; c < kCategoryCount; ++c) {
            const BinaryMask* gt_mask = gt[c].width() > 0 ? &gt[c] : nullptr;
            BinaryMask pred_mask;
            if (pred) {
                auto mit = pred->masks.find(static_cast<ArtifactCategory>(c));
                if (mit != pred->masks.end()) pred_mask = rle_decode(mit->second);
            }
            if (!gt_mask && pred_mask.width() == 0) continue;

            BinaryMask empty;
            if (!gt_mask || pred_mask.width() == 0) empty = BinaryMask(rec.width, rec.height);
            const BinaryMask& g = gt_mask ? *gt_mask : empty;
            const BinaryMask& p = pred_mask.width() > 0 ? pred_mask : empty;
            OverlapCounts o = count_overlap(g, p);
            out.counts[c] = {o.tp, o.fp, o.fn};
            if (o.tp + o.fp + o.fn > 0) {
                out.contributes[c] = true;
                out.ratios[c] = pixel_metrics(out.counts[c]);
            }
        }
    });

    for (int c = 0; c < kCategoryCount; ++c) {
        CategoryRow row;
        row.category = static_cast<ArtifactCategory>(c);
        double iou_sum = 0, p_sum = 0, r_sum = 0, f1_sum = 0;
        for (const auto& out : outcomes) {
            row.counts.merge(out.counts[c]);
            if (out.contributes[c]) {
                ++row.macro_images;
                // Per-image undefined ratios count as zero in the macro mean.
                iou_sum += out.ratios[c].iou;
                p_sum += out.ratios[c].pixp;
                r_sum += out.ratios[c].pixr;
                f1_sum += out.ratios[c].pixf1;
            }
        }
        if (options.pooling == Pooling::Micro) {
            row.metrics = pixel_metrics(row.counts);
        } else {
            bool defined = row.macro_images > 0;
            double n = static_cast<double>(row.macro_images);
            row.metrics = metrics_from_ratios(defined ? iou_sum / n : 0.0, defined,
                                              defined ? p_sum / n : 0.0, defined,
                                              defined ? r_sum / n : 0.0, defined,
                                              defined ? f1_sum / n : 0.0, defined);
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

CaPadResult eval_ca_pad(const Manifest& manifest, const std::vector<CaPadPrediction>& preds,
                        const PadOptions& options) {
    CaPadResult result;
    std::vector<std::size_t> pool = build_pool(manifest, options.gate, result.warnings);
    result.images_evaluated = static_cast<std::int64_t>(pool.size());

    FakeResolver resolver(manifest);
    std::map<std::size_t, const CaPadPrediction*> by_image;
    for (const auto& p : preds) {
        std::size_t idx = resolver.resolve(p.key);
        if (!by_image.emplace(idx, &p).second)
            throw ValidationError("multiple predictions resolve to " + key_text(p.key));
        const auto& rec = manifest.images[idx];
        if (rec.annotations.empty())
            result.warnings.push_back("prediction for unannotated fake " + key_text(p.key) +
                                      " is ignored");
        if (p.mask.width() != rec.width || p.mask.height() != rec.height)
            throw DimensionMismatch("mask for " + key_text(p.key) + " is " +
                                    std::to_string(p.mask.width()) + "x" +
                                    std::to_string(p.mask.height()) + ", image is " +
                                    std::to_string(rec.width) + "x" +
                                    std::to_string(rec.height));
    }

    struct ImageOutcome {
        PixelCounts counts;
        PixelMetrics ratios;
        bool contributes = false;
    };
    std::vector<ImageOutcome> outcomes(pool.size());

    parallel_for(pool.size(), options.jobs, [&](std::size_t slot) {
        std::size_t idx = pool[slot];
        const auto& rec = manifest.images[idx];
        BinaryMask gt(rec.width, rec.height);
        for (const auto& inst : rec.annotations) {
            BinaryMask m = rasterize_polygon(inst.polygon, rec.width, rec.height);
            mask_or_into(gt, m);
        }
        BinaryMask empty;
        const CaPadPrediction* pred = nullptr;
        if (auto it = by_image.find(idx); it != by_image.end()) pred = it->second;
        if (!pred) empty = BinaryMask(rec.width, rec.height);
        const BinaryMask& p = pred ? pred->mask : empty;
        OverlapCounts o = count_overlap(gt, p);
        ImageOutcome& out = outcomes[slot];
        out.counts = {o.tp, o.fp, o.fn};
        if (o.tp + o.fp + o.fn > 0) {
            out.contributes = true;
            out.ratios = pixel_metrics(out.counts);
        }
    });

    double iou_sum = 0, p_sum = 0, r_sum = 0, f1_sum = 0;
    for (const auto& out : outcomes) {
        result.counts.merge(out.counts);
        if (out.contributes) {
            ++result.macro_images;
            iou_sum += out.ratios.iou;
            p_sum += out.ratios.pixp;
            r_sum += out.ratios.pixr;
            f1_sum += out.ratios.pixf1;
        }
    }
    if (options.pooling == Pooling::Micro) {
        result.metrics = pixel_metrics(result.counts);
    } else {
        bool defined = result.macro_images > 0;
        double n = static_cast<double>(result.macro_images);
        result.metrics = metrics_from_ratios(defined ? iou_sum / n : 0.0, defined,
                                             defined ? p_sum / n : 0.0, defined,
                                             defined ? r_sum / n : 0.0, defined,
                                             defined ? f1_sum / n : 0.0, defined);
    }
    return result;
}

namespace {

Region parse_region(const json& region, const std::string& path) {
    if (!region.is_object()) throw SchemaError(path + ": expected object");
    if (!region.contains("type") || !region["type"].is_string())
        throw SchemaError(path + ".type: expected string");
    std::string type = region["type"].get<std::string>();
    Region out;
    if (type == "mask") {
        out.kind = Region::Kind::Mask;
        if (!region.contains("rle")) throw SchemaError(path + ".rle: missing field");
        out.rle = parse_rle_field(region["rle"], path + ".rle");
    } else if (type == "box") {
        out.kind = Region::Kind::Box;
        const json& box = region.contains("box") ? region["box"] : json();
        if (!box.is_array() || box.size() != 4)
            throw SchemaError(path + ".box: expected [x0, y0, x1, y1]");
        for (int k = 0; k < 4; ++k) {
            if (!box[k].is_number()) throw SchemaError(path + ".box: expected numbers");
            out.box[k] = box[k].get<double>();
        }
    } else if (type == "point") {
        out.kind = Region::Kind::Point;
        const json& point = region.contains("point") ? region["point"] : json();
        if (!point.is_array() || point.size() != 2)
            throw SchemaError(path + ".point: expected [x, y]");
        for (int k = 0; k < 2; ++k) {
            if (!point[k].is_number()) throw SchemaError(path + ".point: expected numbers");
            out.point[k] = point[k].get<double>();
        }
    } else {
        throw ValidationError(path + ".type: expected mask, box or point");
    }
    return out;
}

}  // namespace

std::vector<InstancePrediction> parse_instance_predictions(const std::string& json_text) {
    json doc = parse_doc(json_text);
    const json& arr = predictions_array(doc);
    std::vector<InstancePrediction> preds;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string path = "$.predictions[" + std::to_string(i) + "]";
        const json& obj = arr[i];
        if (!obj.is_object()) throw SchemaError(path + ": expected object");
        ImageKey key = parse_key(obj, path);
        if (!seen.insert({key.uid, key.generator}).second)
            throw ValidationError(path + ": duplicate entry for " + key_text(key));
        if (!obj.contains("instances") || !obj["instances"].is_array())
            throw SchemaError(path + ".instances: expected array");
        const json& instances = obj["instances"];
        for (std::size_t k = 0; k < instances.size(); ++k) {
            std::string ipath = path + ".instances[" + std::to_string(k) + "]";
            const json& item = instances[k];
            if (!item.is_object()) throw SchemaError(ipath + ": expected object");
            InstancePrediction p;
            p.key = key;
            if (auto it = item.find("category"); it != item.end() && !it->is_null()) {
                if (!it->is_string())
                    throw SchemaError(ipath + ".category: expected string or null");
                auto category = category_from_name(it->get<std::string>());
                if (!category)
                    throw ValidationError(ipath + ".category: unknown category \"" +
                                          it->get<std::string>() + "\"");
                p.category = category;
            }
            if (!item.contains("region"))
                throw SchemaError(ipath + ".region: missing field");
            p.region = parse_region(item["region"], ipath + ".region");
            preds.push_back(std::move(p));
        }
    }
    return preds;
}

std::vector<InstancePrediction> load_instance_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance_predictions(buf.str());
}

InstanceResult eval_instances(const Manifest& manifest,
                              const std::vector<InstancePrediction>& preds,
                              const InstanceOptions& options) {
    if (!(options.t > 0.0) || options.t > 1.0 || !std::isfinite(options.t))
        throw ValidationError("coverage threshold must lie in (0, 1]");
    InstanceResult result;
    std::vector<std::size_t> pool = build_pool(manifest, options.gate, result.warnings);
    result.images_evaluated = static_cast<std::int64_t>(pool.size());
    std::set<std::size_t> pool_set(pool.begin(), pool.end());

    FakeResolver resolver(manifest);
    std::map<std::size_t, std::vector<const InstancePrediction*>> by_image;
    std::set<std::string> ignored;
    for (const auto& p : preds) {
        if (!options.agnostic && !p.category)
            throw ValidationError("prediction for " + key_text(p.key) +
                                  " has no category (required unless category-agnostic)");
        std::size_t idx = resolver.resolve(p.key);
        if (!pool_set.count(idx)) {
            if (ignored.insert(key_text(p.key)).second)
                result.warnings.push_back("prediction for out-of-pool fake " + key_text(p.key) +
                                          " is ignored");
            continue;
        }
        by_image[idx].push_back(&p);
    }

    struct Tally {
        std::int64_t preds_total = 0;
        std::int64_t preds_matched = 0;
        std::int64_t gt_total = 0;
        std::int64_t gt_indicated = 0;
        void merge(const Tally& o) {
            preds_total += o.preds_total;
            preds_matched += o.preds_matched;
            gt_total += o.gt_total;
            gt_indicated += o.gt_indicated;
        }
    };

    // Index kCategoryCount holds the pooled tally.
    std::vector<std::array<Tally, kCategoryCount + 1>> outcomes(pool.size());
    std::vector<std::vector<std::string>> slot_warnings(pool.size());

    for (std::size_t slot = 0; slot < pool.size(); ++slot) {
        std::size_t idx = pool[slot];
        const auto& rec = manifest.images[idx];
        auto& tally = outcomes[slot];

        struct GtInstance {
            ArtifactCategory category;
            BinaryMask mask;
            std::int64_t area;
        };
        std::vector<GtInstance> gts;
        for (const auto& inst : rec.annotations) {
            BinaryMask m = rasterize_polygon(inst.polygon, rec.width, rec.height);
            std::int64_t area = m.area();
            if (area == 0)
                slot_warnings[slot].push_back("image " + rec.uid +
                                              ": annotation covers no pixels and cannot be "
                                              "indicated");
            gts.push_back({inst.category, std::move(m), area});
        }

        std::vector<const InstancePrediction*> image_preds;
        if (auto it = by_image.find(idx); it != by_image.end()) image_preds = it->second;

        std::vector<bool> gt_hit(gts.size(), false);
        for (const InstancePrediction* p : image_preds) {
            BinaryMask pm = region_to_mask(p->region, rec.width, rec.height);
            std::int64_t pm_area = pm.area();
            bool matched = false;
            for (std::size_t g = 0; g < gts.size(); ++g) {
                if (!options.agnostic && gts[g].category != *p->category) continue;
                if (gts[g].area == 0) continue;
                double coverage = static_cast<double>(intersection_area(pm, gts[g].mask)) /
                                  static_cast<double>(pm_area);
                if (coverage >= options.t) {
                    matched = true;
                    gt_hit[g] = true;
                }
            }
            if (p->category) {
                int c = static_cast<int>(*p->category);
                ++tally[c].preds_total;
                if (matched) ++tally[c].preds_matched;
            }
            ++tally[kCategoryCount].preds_total;
            if (matched) ++tally[kCategoryCount].preds_matched;
        }
        for (std::size_t g = 0; g < gts.size(); ++g) {
            int c = static_cast<int>(gts[g].category);
            ++tally[c].gt_total;
            ++tally[kCategoryCount].gt_total;
            if (gt_hit[g]) {
                ++tally[c].gt_indicated;
                ++tally[kCategoryCount].gt_indicated;
            }
        }
    }

    std::array<Tally, kCategoryCount + 1> totals;
    for (std::size_t slot = 0; slot < outcomes.size(); ++slot) {
        for (int c = 0; c <= kCategoryCount; ++c) totals[c].merge(outcomes[slot][c]);
        for (auto& w : slot_warnings[slot]) result.warnings.push_back(std::move(w));
    }

    auto make_row = [&](const std::string& label, const Tally& t) {
        InstanceRow row;
        row.label = label;
        row.preds_total = t.preds_total;
        row.preds_matched = t.preds_matched;
        row.gt_total = t.gt_total;
        row.gt_indicated = t.gt_indicated;
        if (t.preds_total == 0) {
            row.precision_defined = false;
        } else {
            row.precision = static_cast<double>(t.preds_matched) /
                            static_cast<double>(t.preds_total);
        }
        if (t.gt_total == 0) {
            row.recall_defined = false;
        } else {
            row.recall = static_cast<double>(t.gt_indicated) / static_cast<double>(t.gt_total);
        }
        if (!row.precision_defined || !row.recall_defined ||
            row.precision + row.recall == 0.0) {
            row.f1_defined = false;
        } else {
            row.f1 = 2.0 * row.precision * row.recall / (row.precision + row.recall);
        }
        return row;
    };

    if (!options.agnostic)
        for (int c = 0; c < kCategoryCount; ++c)
            result.rows.push_back(
                make_row(std::string(category_name(static_cast<ArtifactCategory>(c))),
                         totals[c]));
    result.rows.push_back(make_row("all", totals[kCategoryCount]));
    return result;
}

}  // namespace aigi
