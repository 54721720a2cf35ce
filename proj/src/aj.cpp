#include "aigieval/aj.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aigi {

namespace {

using nlohmann::json;

std::string pred_key(const std::string& uid, ImageRole role, const std::string& generator) {
    return uid + "\x1f" + (role == ImageRole::Real ? "r" : "f") + "\x1f" + generator;
}

std::string describe(const std::string& uid, ImageRole role, const std::string& generator) {
    std::string s = uid + " (" + std::string(role_name(role));
    if (!generator.empty()) s += ", " + generator;
    return s + ")";
}

// Caps long uid lists in error messages.
std::string join_capped(const std::vector<std::string>& items) {
    constexpr std::size_t kMax = 12;
    std::string out;
    for (std::size_t i = 0; i < items.size() && i < kMax; ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    if (items.size() > kMax)
        out += ", and " + std::to_string(items.size() - kMax) + " more";
    return out;
}

}  // namespace

std::vector<AjPrediction> parse_aj_predictions(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("prediction document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("predictions"))
        throw SchemaError("$.predictions: missing field");
    const json& arr = doc["predictions"];
    if (!arr.is_array()) throw SchemaError("$.predictions: expected array");

    std::vector<AjPrediction> preds;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string path = "$.predictions[" + std::to_string(i) + "]";
        const json& obj = arr[i];
        if (!obj.is_object()) throw SchemaError(path + ": expected object");

        AjPrediction p;
        if (!obj.contains("uid") || !obj["uid"].is_string())
            throw SchemaError(path + ".uid: expected string");
        p.uid = obj["uid"].get<std::string>();

        if (!obj.contains("role") || !obj["role"].is_string())
            throw SchemaError(path + ".role: expected string");
        std::string role = obj["role"].get<std::string>();
        if (role == "real")
            p.role = ImageRole::Real;
        else if (role == "fake")
            p.role = ImageRole::Fake;
        else
            throw ValidationError(path + ".role: expected \"real\" or \"fake\"");

        if (auto it = obj.find("generator"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) throw SchemaError(path + ".generator: expected string or null");
            p.generator = it->get<std::string>();
        }

        bool has_score = obj.contains("score") && !obj["score"].is_null();
        bool has_label = obj.contains("label") && !obj["label"].is_null();
        if (has_score == has_label)
            throw ValidationError(path + ": exactly one of score and label is required");
        if (has_score) {
            if (!obj["score"].is_number()) throw SchemaError(path + ".score: expected number");
            double s = obj["score"].get<double>();
            if (!std::isfinite(s) || s < 0.0 || s > 1.0)
                throw ValidationError(path + ".score: must lie in [0, 1]");
            p.score = s;
        } else {
            if (obj["label"].is_boolean()) {
                p.label_fake = obj["label"].get<bool>();
            } else if (obj["label"].is_string()) {
                std::string l = obj["label"].get<std::string>();
                if (l == "fake")
                    p.label_fake = true;
                else if (l == "real")
                    p.label_fake = false;
                else
                    throw ValidationError(path + ".label: expected \"real\" or \"fake\"");
            } else {
                throw SchemaError(path + ".label: expected string or boolean");
            }
        }

        if (!seen.insert(pred_key(p.uid, p.role, p.generator)).second)
            throw ValidationError(path + ": duplicate prediction for " +
                                  describe(p.uid, p.role, p.generator));
        preds.push_back(std::move(p));
    }
    return preds;
}

std::vector<AjPrediction> load_aj_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_aj_predictions(buf.str());
}

bool classify_fake(const AjPrediction& pred, double threshold) {
    if (pred.label_fake) return *pred.label_fake;
    return *pred.score >= threshold;
}

void ConfusionCounts::add(bool is_fake, bool called_fake) {
    if (is_fake)
        called_fake ? ++tp : ++fn;
    else
        called_fake ? ++fp : ++tn;
}

void ConfusionCounts::merge(const ConfusionCounts& other) {
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
}

double balanced_accuracy(double real_recall, double fake_recall) {
    return 0.5 * (real_recall + fake_recall);
}

AjMetrics aj_metrics(const ConfusionCounts& counts) {
    if (counts.tp + counts.fn == 0) throw EmptyClass("no fake images in the pool");
    if (counts.tn + counts.fp == 0) throw EmptyClass("no real images in the pool");
    AjMetrics m;
    double tpr = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
    double tnr = static_cast<double>(counts.tn) / static_cast<double>(counts.tn + counts.fp);
    m.acc = 0.5 * (tpr + tnr);
    m.recall = tpr;
    if (counts.tp + counts.fp == 0) {
        m.precision = 0.0;
        m.precision_defined = false;
    } else {
        m.precision = static_cast<double>(counts.tp) /
                      static_cast<double>(counts.tp + counts.fp);
    }
    if (m.precision + m.recall == 0.0) {
        m.f1 = 0.0;
        m.f1_defined = false;
    } else {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    return m;
}

namespace {

// Pairs every manifest image with its prediction; throws when coverage fails.
std::vector<std::pair<const ImageRecord*, const AjPrediction*>> pair_up(
    const Manifest& manifest, const std::vector<AjPrediction>& preds) {
    std::map<std::string, const AjPrediction*> by_key;
    for (const auto& p : preds) by_key[pred_key(p.uid, p.role, p.generator)] = &p;

    std::vector<std::pair<const ImageRecord*, const AjPrediction*>> pairs;
    std::vector<std::string> missing;
    std::set<std::string> used;
    for (const auto& rec : manifest.images) {
        std::string key = pred_key(rec.uid, rec.role, rec.generator);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            missing.push_back(describe(rec.uid, rec.role, rec.generator));
            continue;
        }
        used.insert(key);
        pairs.emplace_back(&rec, it->second);
    }
    if (!missing.empty())
        throw MissingPrediction("no prediction for " + std::to_string(missing.size()) +
                                " image(s): " + join_capped(missing));

    std::vector<std::string> unknown;
    for (const auto& p : preds) {
        std::string key = pred_key(p.uid, p.role, p.generator);
        if (!used.count(key)) unknown.push_back(describe(p.uid, p.role, p.generator));
    }
    if (!unknown.empty())
        throw UnknownUid("predictions reference " + std::to_string(unknown.size()) +
                         " unknown image(s): " + join_capped(unknown));
    return pairs;
}

}  // namespace

ConfusionCounts aj_confusion(const Manifest& manifest, const std::vector<AjPrediction>& preds,
                             double threshold) {
    ConfusionCounts counts;
    for (const auto& [rec, pred] : pair_up(manifest, preds))
        counts.add(rec->role == ImageRole::Fake, classify_fake(*pred, threshold));
    return counts;
}

std::vector<AjRow> aj_per_generator(const Manifest& manifest,
                                    const std::vector<AjPrediction>& preds, double threshold) {
    auto pairs = pair_up(manifest, preds);

    // Reals are shared across every generator row as the negative pool.
    ConfusionCounts reals;
    std::map<std::string, ConfusionCounts> fakes_by_gen;
    for (const auto& [rec, pred] : pairs) {
        bool called_fake = classify_fake(*pred, threshold);
        if (rec->role == ImageRole::Real)
            reals.add(false, called_fake);
        else
            fakes_by_gen[rec->generator].add(true, called_fake);
    }

    std::vector<AjRow> rows;
    ConfusionCounts all = reals;
    for (const auto& [gen, counts] : fakes_by_gen) {
        AjRow row;
        row.generator = gen;
        row.counts = counts;
        row.counts.merge(reals);
        row.metrics = aj_metrics(row.counts);
        rows.push_back(std::move(row));
        all.tp += counts.tp;
        all.fn += counts.fn;
    }
    AjRow pooled;
    pooled.generator = "all";
    pooled.counts = all;
    pooled.metrics = aj_metrics(pooled.counts);
    rows.push_back(std::move(pooled));
    return rows;
}

}  // namespace aigi
