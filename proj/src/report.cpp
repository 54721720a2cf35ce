#include "aigieval/report.hpp"

#include <cmath>

#include "aigieval/version.hpp"

namespace aigi {

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a(bytes);
    std::string out = "fnv1a:";
    for (int shift = 60; shift >= 0; shift -= 4) out += digits[(h >> shift) & 0xf];
    return out;
}

double round_pct(double ratio) {
    return std::round(ratio * 1000.0) / 10.0;
}

namespace {

Json envelope(const char* task, Json config, const ReportContext& ctx) {
    Json report;
    report["tool"] = kToolName;
    report["version"] = kToolVersion;
    report["task"] = task;
    report["config"] = std::move(config);
    Json inputs = Json::object();
    for (const auto& [name, digest] : ctx.inputs) inputs[name] = digest;
    report["inputs"] = std::move(inputs);
    report["warnings"] = ctx.warnings;
    return report;
}

void attach_warnings(Json& report, const std::vector<std::string>& extra) {
    for (const auto& w : extra) report["warnings"].push_back(w);
}

Json pixel_row(const PixelCounts& counts, const PixelMetrics& m) {
    Json row;
    row["counts"] = {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}};
    row["metrics"] = {{"iou", round_pct(m.iou)},
                      {"pixp", round_pct(m.pixp)},
                      {"pixr", round_pct(m.pixr)},
                      {"pixf1", round_pct(m.pixf1)}};
    row["raw"] = {{"iou", m.iou}, {"pixp", m.pixp}, {"pixr", m.pixr}, {"pixf1", m.pixf1}};
    Json undefined = Json::array();
    if (!m.iou_defined) undefined.push_back("iou");
    if (!m.pixp_defined) undefined.push_back("pixp");
    if (!m.pixr_defined) undefined.push_back("pixr");
    if (!m.pixf1_defined) undefined.push_back("pixf1");
    row["undefined"] = std::move(undefined);
    return row;
}

const char* pooling_name(Pooling pooling) {
    return pooling == Pooling::Micro ? "micro" : "macro";
}

}  // namespace

Json aj_report(const Manifest& manifest, const std::vector<AjPrediction>& preds,
               const AjReportConfig& config, const ReportContext& ctx) {
    Json cfg;
    cfg["threshold"] = config.threshold;
    cfg["tau"] = config.tau;
    // Every generator row scores its fakes against the full shared real pool.
    cfg["reals_shared_across_generators"] = true;
    Json report = envelope("eval:aj", std::move(cfg), ctx);

    auto rows = aj_per_generator(manifest, preds, config.threshold);
    Json out = Json::array();
    for (const auto& row : rows) {
        Json r;
        r["generator"] = row.generator;
        r["counts"] = {{"tp", row.counts.tp},
                       {"fp", row.counts.fp},
                       {"tn", row.counts.tn},
                       {"fn", row.counts.fn}};
        r["metrics"] = {{"acc", round_pct(row.metrics.acc)},
                        {"precision", round_pct(row.metrics.precision)},
                        {"recall", round_pct(row.metrics.recall)},
                        {"f1", round_pct(row.metrics.f1)}};
        r["raw"] = {{"acc", row.metrics.acc},
                    {"precision", row.metrics.precision},
                    {"recall", row.metrics.recall},
                    {"f1", row.metrics.f1}};
        Json undefined = Json::array();
        if (!row.metrics.precision_defined) undefined.push_back("precision");
        if (!row.metrics.f1_defined) undefined.push_back("f1");
        r["undefined"] = std::move(undefined);
        out.push_back(std::move(r));
    }
    report["rows"] = std::move(out);
    return report;
}

Json pad_report(const Manifest& manifest, const std::vector<PadPrediction>& preds,
                const PadReportConfig& config, const PadOptions& options,
                const ReportContext& ctx) {
    Json cfg;
    cfg["tau"] = config.tau;
    cfg["pooling"] = pooling_name(config.pooling);
    cfg["gate_on_aj"] = config.gated;
    if (config.gated) cfg["gate_threshold"] = config.gate_threshold;
    Json report = envelope("eval:pad", std::move(cfg), ctx);

    PadResult result = eval_pad(manifest, preds, options);
    attach_warnings(report, result.warnings);
    report["images_evaluated"] = result.images_evaluated;
    Json rows = Json::array();
    for (const auto& row : result.rows) {
        Json r;
        r["category"] = std::string(category_name(row.category));
        Json cells = pixel_row(row.counts, row.metrics);
        for (auto& [key, value] : cells.items()) r[key] = std::move(value);
        if (config.pooling == Pooling::Macro) r["macro_images"] = row.macro_images;
        rows.push_back(std::move(r));
    }
    report["rows"] = std::move(rows);
    return report;
}

Json ca_pad_report(const Manifest& manifest, const std::vector<CaPadPrediction>& preds,
                   const CaPadReportConfig& config, const PadOptions& options,
                   const ReportContext& ctx) {
    Json cfg;
    cfg["tau"] = config.tau;
    cfg["pooling"] = pooling_name(config.pooling);
    cfg["binarize_threshold"] = config.binarize_threshold;
    cfg["gate_on_aj"] = config.gated;
    if (config.gated) cfg["gate_threshold"] = config.gate_threshold;
    Json report = envelope("eval:ca-pad", std::move(cfg), ctx);

    CaPadResult result = eval_ca_pad(manifest, preds, options);
    attach_warnings(report, result.warnings);
    report["images_evaluated"] = result.images_evaluated;
    Json row = pixel_row(result.counts, result.metrics);
    if (config.pooling == Pooling::Macro) row["macro_images"] = result.macro_images;
    report["result"] = std::move(row);
    return report;
}

Json instance_report(const Manifest& manifest, const std::vector<InstancePrediction>& preds,
                     const InstanceReportConfig& config, const InstanceOptions& options,
                     const ReportContext& ctx) {
    Json cfg;
    cfg["tau"] = config.tau;
    cfg["t"] = config.t;
    cfg["agnostic"] = config.agnostic;
    cfg["gate_on_aj"] = config.gated;
    if (config.gated) cfg["gate_threshold"] = config.gate_threshold;
    Json report = envelope("eval:instances", std::move(cfg), ctx);

    InstanceResult result = eval_instances(manifest, preds, options);
    attach_warnings(report, result.warnings);
    report["images_evaluated"] = result.images_evaluated;
    Json rows = Json::array();
    for (const auto& row : result.rows) {
        Json r;
        r["label"] = row.label;
        r["preds_total"] = row.preds_total;
        r["preds_matched"] = row.preds_matched;
        r["gt_total"] = row.gt_total;
        r["gt_indicated"] = row.gt_indicated;
        r["metrics"] = {{"p_at_t", round_pct(row.precision)},
                        {"r_at_t", round_pct(row.recall)},
                        {"f1_at_t", round_pct(row.f1)}};
        r["raw"] = {{"p_at_t", row.precision}, {"r_at_t", row.recall}, {"f1_at_t", row.f1}};
        Json undefined = Json::array();
        if (!row.precision_defined) undefined.push_back("p_at_t");
        if (!row.recall_defined) undefined.push_back("r_at_t");
        if (!row.f1_defined) undefined.push_back("f1_at_t");
        r["undefined"] = std::move(undefined);
        rows.push_back(std::move(r));
    }
    report["rows"] = std::move(rows);
    return report;
}

Json par_report(const Manifest& manifest, double tau, const ReportContext& ctx) {
    Json cfg;
    cfg["tau"] = tau;
    Json report = envelope("fidelity:par", std::move(cfg), ctx);
    Json images = Json::array();
    for (const auto& entry : artifact_ratios(manifest)) {
        Json r;
        r["uid"] = entry.uid;
        r["generator"] = entry.generator;
        r["par"] = entry.ratio;
        images.push_back(std::move(r));
    }
    report["images"] = std::move(images);
    return report;
}

Json bins_report(const Manifest& manifest, const std::vector<AjPrediction>& preds,
                 const BinsReportConfig& config, const ReportContext& ctx) {
    FidelityBinSpec spec = config.edges.empty()
                               ? FidelityBinSpec::quantiles(manifest, config.bins)
                               : FidelityBinSpec::fixed(config.edges);
    Json cfg;
    cfg["tau"] = config.tau;
    cfg["threshold"] = config.threshold;
    cfg["mode"] = config.edges.empty() ? "quantile" : "fixed";
    if (config.edges.empty()) cfg["bins"] = config.bins;
    cfg["edges"] = spec.edges;
    Json report = envelope("fidelity:bins", std::move(cfg), ctx);

    auto rows = accuracy_by_ratio(manifest, preds, config.threshold, spec);
    Json bins = Json::array();
    for (const auto& row : rows) {
        Json r;
        r["label"] = row.label;
        r["count"] = row.count;
        r["correct"] = row.correct;
        r["fake_acc"] = round_pct(row.fake_acc);
        r["raw_acc"] = row.fake_acc;
        if (!row.acc_defined) r["undefined"] = true;
        bins.push_back(std::move(r));
    }
    report["bins"] = std::move(bins);
    // Echo the bin layout for downstream tooling that re-bins.
    report["spec"] = {{"edges", spec.edges}, {"zero_bucket", "par=0"}};
    return report;
}

Json confidence_report(const Manifest& manifest, double bin_width, const ReportContext& ctx) {
    Json cfg;
    cfg["bin_width"] = bin_width;
    Json report = envelope("fidelity:confidence", std::move(cfg), ctx);
    ConfidenceHistogram hist = confidence_histogram(manifest, bin_width);
    report["scored_instances"] = hist.scored_instances;
    Json bins = Json::array();
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        Json b;
        b["lo"] = static_cast<double>(i) * hist.bin_width;
        double hi = static_cast<double>(i + 1) * hist.bin_width;
        b["hi"] = hi > 1.0 ? 1.0 : hi;
        b["count"] = hist.counts[i];
        bins.push_back(std::move(b));
    }
    report["bins"] = std::move(bins);
    return report;
}

std::string render_report(const Json& report) {
    return report.dump(2) + "\n";
}

std::vector<ImageKey> fake_calls(const std::vector<AjPrediction>& preds, double threshold) {
    std::vector<ImageKey> keys;
    for (const auto& p : preds) {
        if (p.role != ImageRole::Fake) continue;
        if (classify_fake(p, threshold)) keys.push_back({p.uid, p.generator});
    }
    return keys;
}

}  // namespace aigi
