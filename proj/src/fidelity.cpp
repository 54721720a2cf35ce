#include "aigieval/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "aigieval/mask.hpp"

namespace aigi {

namespace {

// Shortest round-trip decimal form, so bin labels are stable across runs.
std::string number_text(double v) {
    return nlohmann::json(v).dump();
}

}  // namespace

double artifact_ratio(const ImageRecord& record) {
    if (record.role == ImageRole::Real)
        throw RealImage("artifact ratio is undefined for real image " + record.uid);
    if (record.annotations.empty()) return 0.0;
    BinaryMask acc(record.width, record.height);
    for (const auto& inst : record.annotations) {
        BinaryMask m = rasterize_polygon(inst.polygon, record.width, record.height);
        mask_or_into(acc, m);
    }
    return static_cast<double>(acc.area()) /
           (static_cast<double>(record.width) * static_cast<double>(record.height));
}

std::vector<ParEntry> artifact_ratios(const Manifest& manifest) {
    std::vector<ParEntry> entries;
    for (const auto& rec : manifest.images) {
        if (rec.role != ImageRole::Fake) continue;
        entries.push_back({rec.uid, rec.generator, artifact_ratio(rec)});
    }
    return entries;
}

FidelityBinSpec FidelityBinSpec::fixed(std::vector<double> edges) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!std::isfinite(edges[i]) || edges[i] <= 0.0 || edges[i] >= 1.0)
            throw ValidationError("bin edges must lie strictly inside (0, 1)");
        if (i > 0 && edges[i] <= edges[i - 1])
            throw ValidationError("bin edges must be strictly increasing");
    }
    FidelityBinSpec spec;
    spec.edges = std::move(edges);
    return spec;
}

FidelityBinSpec FidelityBinSpec::quantiles(const Manifest& manifest, int bins) {
    if (bins < 1) throw ValidationError("bin count must be positive");
    std::vector<double> positive;
    for (const auto& rec : manifest.images) {
        if (rec.role != ImageRole::Fake) continue;
        double ratio = artifact_ratio(rec);
        if (ratio > 0.0) positive.push_back(ratio);
    }
    std::sort(positive.begin(), positive.end());
    FidelityBinSpec spec;
    if (positive.empty()) return spec;  // zero bucket plus a single (0, 1] bin
    std::size_t n = positive.size();
    for (int k = 1; k < bins; ++k) {
        // Nearest-rank edge at fraction k/bins; duplicates collapse.
        std::size_t idx = (n * static_cast<std::size_t>(k)) / static_cast<std::size_t>(bins);
        if (idx >= n) idx = n - 1;
        double edge = positive[idx];
        if (edge >= 1.0) continue;
        if (spec.edges.empty() || edge > spec.edges.back()) spec.edges.push_back(edge);
    }
    return spec;
}

std::vector<ParBinRow> accuracy_by_ratio(const Manifest& manifest,
                                         const std::vector<AjPrediction>& preds,
                                         double threshold, const FidelityBinSpec& spec) {
    // Validate the edge list even when it arrived hand-built.
    FidelityBinSpec::fixed(spec.edges);

    std::map<std::pair<std::string, std::string>, const AjPrediction*> fake_preds;
    for (const auto& p : preds)
        if (p.role == ImageRole::Fake) fake_preds[{p.uid, p.generator}] = &p;

    std::vector<ParBinRow> rows;
    ParBinRow zero;
    zero.label = "par=0";
    rows.push_back(zero);
    double lo = 0.0;
    for (std::size_t i = 0; i <= spec.edges.size(); ++i) {
        double hi = i < spec.edges.size() ? spec.edges[i] : 1.0;
        ParBinRow row;
        row.lo = lo;
        row.hi = hi;
        row.label = "(" + number_text(lo) + "," + number_text(hi) + "]";
        rows.push_back(row);
        lo = hi;
    }

    std::vector<std::string> missing;
    for (const auto& rec : manifest.images) {
        if (rec.role != ImageRole::Fake) continue;
        auto it = fake_preds.find({rec.uid, rec.generator});
        if (it == fake_preds.end()) {
            missing.push_back(rec.generator.empty() ? rec.uid
                                                    : rec.uid + " (" + rec.generator + ")");
            continue;
        }
        double ratio = artifact_ratio(rec);
        std::size_t bin = 0;
        if (ratio > 0.0) {
            bin = rows.size() - 1;  // (last_edge, 1]
            for (std::size_t i = 1; i + 1 < rows.size(); ++i)
                if (ratio <= rows[i].hi) {
                    bin = i;
                    break;
                }
        }
        ++rows[bin].count;
        if (classify_fake(*it->second, threshold)) ++rows[bin].correct;
    }
    if (!missing.empty()) {
        std::string msg = "no prediction for " + std::to_string(missing.size()) + " fake(s): ";
        for (std::size_t i = 0; i < missing.size() && i < 12; ++i)
            msg += (i ? ", " : "") + missing[i];
        if (missing.size() > 12) msg += ", and " + std::to_string(missing.size() - 12) + " more";
        throw MissingPrediction(msg);
    }

    for (auto& row : rows) {
        if (row.count == 0) {
            row.acc_defined = false;
        } else {
            row.fake_acc = static_cast<double>(row.correct) / static_cast<double>(row.count);
        }
    }
    return rows;
}

ConfidenceHistogram confidence_histogram(const Manifest& manifest, double bin_width) {
    if (!std::isfinite(bin_width) || bin_width <= 0.0 || bin_width > 1.0)
        throw ValidationError("bin width must lie in (0, 1]");
    ConfidenceHistogram hist;
    hist.bin_width = bin_width;
    int nbins = static_cast<int>(std::ceil(1.0 / bin_width - 1e-9));
    hist.counts.assign(static_cast<std::size_t>(nbins), 0);
    for (const auto& rec : manifest.images)
        for (const auto& inst : rec.annotations) {
            if (inst.confidence_scores.empty()) continue;
            double mean = inst.mean_confidence();
            int bin = static_cast<int>(std::floor(mean / bin_width));
            if (bin >= nbins) bin = nbins - 1;  // closes the final bin at 1.0
            ++hist.counts[static_cast<std::size_t>(bin)];
            ++hist.scored_instances;
        }
    if (hist.scored_instances == 0)
        throw NoScoredInstances("no annotation carries confidence scores");
    return hist;
}

}  // namespace aigi
