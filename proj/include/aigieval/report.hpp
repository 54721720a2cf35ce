#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aigieval/aj.hpp"
#include "aigieval/annotation.hpp"
#include "aigieval/fidelity.hpp"
#include "aigieval/pad.hpp"

#include <json.hpp>

namespace aigi {

using Json = nlohmann::ordered_json;

// FNV-1a over raw bytes; used to stamp input digests into reports.
std::uint64_t fnv1a(std::string_view bytes);
std::string fnv1a_hex(std::string_view bytes);

// Percentage with one decimal, as a JSON number (e.g. 42.8).
double round_pct(double ratio);

// Named input digests stamped into the report ("manifest", "predictions", ...).
using InputDigests = std::vector<std::pair<std::string, std::string>>;

struct ReportContext {
    InputDigests inputs;
    std::vector<std::string> warnings;  // parse-stage warnings to carry through
};

struct AjReportConfig {
    double threshold = 0.5;
    double tau = 0.0;
};

Json aj_report(const Manifest& manifest, const std::vector<AjPrediction>& preds,
               const AjReportConfig& config, const ReportContext& ctx);

struct PadReportConfig {
    double tau = 0.0;
    Pooling pooling = Pooling::Micro;
    bool gated = false;           // reported only; gate itself sits in options
    double gate_threshold = 0.5;  // AJ threshold used to build the gate
};

Json pad_report(const Manifest& manifest, const std::vector<PadPrediction>& preds,
                const PadReportConfig& config, const PadOptions& options,
                const ReportContext& ctx);

struct CaPadReportConfig {
    double tau = 0.0;
    Pooling pooling = Pooling::Micro;
    double binarize_threshold = 0.5;
    bool gated = false;
    double gate_threshold = 0.5;
};

Json ca_pad_report(const Manifest& manifest, const std::vector<CaPadPrediction>& preds,
                   const CaPadReportConfig& config, const PadOptions& options,
                   const ReportContext& ctx);

struct InstanceReportConfig {
    double tau = 0.0;
    double t = 0.5;
    bool agnostic = false;
    bool gated = false;
    double gate_threshold = 0.5;
};

Json instance_report(const Manifest& manifest, const std::vector<InstancePrediction>& preds,
                     const InstanceReportConfig& config, const InstanceOptions& options,
                     const ReportContext& ctx);

Json par_report(const Manifest& manifest, double tau, const ReportContext& ctx);

struct BinsReportConfig {
    double tau = 0.0;
    double threshold = 0.5;
    int bins = 4;                               // quantile mode when edges empty
    std::vector<double> edges;                  // fixed mode
};

Json bins_report(const Manifest& manifest, const std::vector<AjPrediction>& preds,
                 const BinsReportConfig& config, const ReportContext& ctx);

Json confidence_report(const Manifest& manifest, double bin_width, const ReportContext& ctx);

// Serialized form shared by every subcommand: two-space indent plus a final
// newline, so identical runs produce identical bytes.
std::string render_report(const Json& report);

// Fakes the given predictions call fake at threshold; used for --gate-on-aj.
std::vector<ImageKey> fake_calls(const std::vector<AjPrediction>& preds, double threshold);

}  // namespace aigi
