#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aigieval/errors.hpp"

namespace aigi {

// The seven artifact categories. The first four are low-level appearance
// artifacts, Semantics is high-level, the last two require world knowledge.
enum class ArtifactCategory : int {
    Textures = 0,
    EdgesShapes,
    Symbols,
    Color,
    Semantics,
    Commonsense,
    Physics,
};

enum class ArtifactLevel : int { Low = 0, High, Cognitive };

inline constexpr int kCategoryCount = 7;

const std::array<ArtifactCategory, kCategoryCount>& all_categories();
ArtifactLevel level_of(ArtifactCategory c);
std::string_view category_name(ArtifactCategory c);   // wire name, e.g. "edges_shapes"
std::string_view level_name(ArtifactLevel l);
std::optional<ArtifactCategory> category_from_name(std::string_view name);

struct Polygon {
    // Vertex (x, y) in pixel coordinates, implicitly closed.
    std::vector<std::array<double, 2>> vertices;

    bool operator==(const Polygon&) const = default;
};

struct AnnotationInstance {
    ArtifactCategory category = ArtifactCategory::Textures;
    Polygon polygon;
    int round = 1;                          // relay round 1..3
    std::vector<double> confidence_scores;  // 0..3 verification scores in {0, 0.5, 1}

    // Runtime weight assigned by filter_by_confidence; not serialized.
    double weight = 1.0;

    // Mean verification score; unscored instances count as fully trusted.
    double mean_confidence() const;

    friend bool operator==(const AnnotationInstance& a, const AnnotationInstance& b) {
        return a.category == b.category && a.polygon == b.polygon &&
               a.round == b.round && a.confidence_scores == b.confidence_scores;
    }
};

enum class ImageRole { Real, Fake };

std::string_view role_name(ImageRole role);

struct ImageRecord {
    std::string uid;
    ImageRole role = ImageRole::Real;
    std::string generator;  // empty iff role == Real
    int width = 0;
    int height = 0;
    std::vector<AnnotationInstance> annotations;

    bool operator==(const ImageRecord&) const = default;
};

struct Manifest {
    std::string schema_version = "1";
    std::vector<ImageRecord> images;

    bool operator==(const Manifest&) const = default;
};

struct ParseOptions {
    // Strict additionally rejects polygons that cover no pixel center.
    bool strict = false;
};

// Parses and validates a manifest document. Throws SchemaError for structural
// problems (message carries a JSON path) and ValidationError for semantic
// ones. Non-fatal findings (self-intersecting polygons, vertices that
// overshoot the canvas) are appended to *warnings when given.
Manifest parse_manifest(const std::string& json_text, const ParseOptions& options = {},
                        std::vector<std::string>* warnings = nullptr);
Manifest load_manifest(const std::filesystem::path& path, const ParseOptions& options = {},
                       std::vector<std::string>* warnings = nullptr);

std::string serialize_manifest(const Manifest& manifest);

// Drops annotations whose mean verification score is below tau and stores the
// mean as the surviving instance's weight. Image records are kept even when
// they lose every annotation.
Manifest filter_by_confidence(const Manifest& manifest, double tau);

// Annotations already carry their relay round inline, so the union across
// rounds is the list itself; this materializes that union, optionally
// dropping exact duplicates (same category and vertices, first kept).
Manifest merge_rounds(const Manifest& manifest, bool dedupe_exact = false);

}  // namespace aigi
