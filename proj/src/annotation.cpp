#include "aigieval/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "aigieval/mask.hpp"

namespace aigi {

namespace {

using nlohmann::json;

struct CategoryInfo {
    ArtifactCategory category;
    ArtifactLevel level;
    std::string_view name;
};

constexpr std::array<CategoryInfo, kCategoryCount> kCategories{{
    {ArtifactCategory::Textures, ArtifactLevel::Low, "textures"},
    {ArtifactCategory::EdgesShapes, ArtifactLevel::Low, "edges_shapes"},
    {ArtifactCategory::Symbols, ArtifactLevel::Low, "symbols"},
    {ArtifactCategory::Color, ArtifactLevel::Low, "color"},
    {ArtifactCategory::Semantics, ArtifactLevel::High, "semantics"},
    {ArtifactCategory::Commonsense, ArtifactLevel::Cognitive, "commonsense"},
    {ArtifactCategory::Physics, ArtifactLevel::Cognitive, "physics"},
}};

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

const json& need(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_fail(path + "." + key, "missing field");
    return *it;
}

std::string need_string(const json& obj, const std::string& path, const char* key) {
    const json& v = need(obj, path, key);
    if (!v.is_string()) schema_fail(path + "." + key, "expected string");
    return v.get<std::string>();
}

int need_int(const json& obj, const std::string& path, const char* key) {
    const json& v = need(obj, path, key);
    if (!v.is_number_integer()) schema_fail(path + "." + key, "expected integer");
    return v.get<int>();
}

}  // namespace

const std::array<ArtifactCategory, kCategoryCount>& all_categories() {
    static const std::array<ArtifactCategory, kCategoryCount> order = [] {
        std::array<ArtifactCategory, kCategoryCount> a{};
        for (int i = 0; i < kCategoryCount; ++i) a[i] = kCategories[i].category;
        return a;
    }();
    return order;
}

ArtifactLevel level_of(ArtifactCategory c) {
    return kCategories[static_cast<int>(c)].level;
}

std::string_view category_name(ArtifactCategory c) {
    return kCategories[static_cast<int>(c)].name;
}

std::string_view level_name(ArtifactLevel l) {
    switch (l) {
        case ArtifactLevel::Low: return "low";
        case ArtifactLevel::High: return "high";
        case ArtifactLevel::Cognitive: return "cognitive";
    }
    return "";
}

std::optional<ArtifactCategory> category_from_name(std::string_view name) {
    for (const auto& info : kCategories)
        if (info.name == name) return info.category;
    return std::nullopt;
}

std::string_view role_name(ImageRole role) {
    return role == ImageRole::Real ? "real" : "fake";
}

double AnnotationInstance::mean_confidence() const {
    if (confidence_scores.empty()) return 1.0;
    double sum = 0.0;
    for (double s : confidence_scores) sum += s;
    return sum / static_cast<double>(confidence_scores.size());
}

namespace {

Polygon parse_polygon(const json& arr, const std::string& path) {
    if (!arr.is_array()) schema_fail(path, "expected array of [x, y] vertices");
    Polygon poly;
    poly.vertices.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& v = arr[i];
        std::string vpath = path + "[" + std::to_string(i) + "]";
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            schema_fail(vpath, "expected [x, y]");
        poly.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return poly;
}

bool polygon_touches_canvas(const Polygon& poly, int width, int height) {
    // Cheap reject: if the bounding box misses every pixel center the polygon
    // cannot cover anything.
    double min_x = poly.vertices[0][0], max_x = min_x;
    double min_y = poly.vertices[0][1], max_y = min_y;
    for (const auto& v : poly.vertices) {
        min_x = std::min(min_x, v[0]);
        max_x = std::max(max_x, v[0]);
        min_y = std::min(min_y, v[1]);
        max_y = std::max(max_y, v[1]);
    }
    return max_x > 0.5 && min_x < width - 0.5 && max_y > 0.5 && min_y < height - 0.5;
}

bool polygon_overshoots(const Polygon& poly, int width, int height) {
    for (const auto& v : poly.vertices)
        if (v[0] < 0.0 || v[0] > width || v[1] < 0.0 || v[1] > height) return true;
    return false;
}

AnnotationInstance parse_annotation(const json& obj, const std::string& path,
                                    const ImageRecord& image, const ParseOptions& options,
                                    std::vector<std::string>* warnings) {
    if (!obj.is_object()) schema_fail(path, "expected object");
    AnnotationInstance inst;

    std::string cat = need_string(obj, path, "category");
    auto category = category_from_name(cat);
    if (!category)
        throw ValidationError(path + ": unknown category \"" + cat + "\" (image " + image.uid +
                              ")");
    inst.category = *category;

    inst.round = need_int(obj, path, "round");
    if (inst.round < 1 || inst.round > 3)
        throw ValidationError(path + ".round: must be 1, 2 or 3, got " +
                              std::to_string(inst.round));

    if (auto it = obj.find("confidence_scores"); it != obj.end()) {
        if (!it->is_array()) schema_fail(path + ".confidence_scores", "expected array");
        if (it->size() > 3)
            throw ValidationError(path + ".confidence_scores: at most 3 scores, got " +
                                  std::to_string(it->size()));
        for (const auto& s : *it) {
            if (!s.is_number()) schema_fail(path + ".confidence_scores", "expected numbers");
            double v = s.get<double>();
            if (v != 0.0 && v != 0.5 && v != 1.0)
                throw ValidationError(path + ".confidence_scores: scores must be 0, 0.5 or 1");
            inst.confidence_scores.push_back(v);
        }
    }

    inst.polygon = parse_polygon(need(obj, path, "polygon"), path + ".polygon");
    if (inst.polygon.vertices.size() < 3)
        throw ValidationError(path + ".polygon: needs at least 3 vertices (image " + image.uid +
                              ")");
    for (const auto& v : inst.polygon.vertices)
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
            throw ValidationError(path + ".polygon: vertex is not finite (image " + image.uid +
                                  ")");
    if (!polygon_touches_canvas(inst.polygon, image.width, image.height))
        throw ValidationError(path + ".polygon: lies entirely outside the image (image " +
                              image.uid + ")");

    if (warnings) {
        if (polygon_self_intersects(inst.polygon))
            warnings->push_back("image " + image.uid + ": self-intersecting polygon at " + path +
                                " (even-odd fill applies)");
        if (polygon_overshoots(inst.polygon, image.width, image.height))
            warnings->push_back("image " + image.uid + ": polygon at " + path +
                                " extends past the canvas and is clipped");
    }

    if (options.strict) {
        bool degenerate = false;
        rasterize_polygon(inst.polygon, image.width, image.height, false, &degenerate);
        if (degenerate)
            throw ValidationError(path + ".polygon: covers no pixel center (image " + image.uid +
                                  ")");
    }
    return inst;
}

}  // namespace

Manifest parse_manifest(const std::string& json_text, const ParseOptions& options,
                        std::vector<std::string>* warnings) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_fail("$", "expected object");

    Manifest manifest;
    manifest.schema_version = need_string(doc, "$", "schema_version");
    if (manifest.schema_version != "1")
        throw ValidationError("$.schema_version: unsupported version \"" +
                              manifest.schema_version + "\"");

    const json& images = need(doc, "$", "images");
    if (!images.is_array()) schema_fail("$.images", "expected array");

    std::set<std::tuple<std::string, int, std::string>> seen;
    for (std::size_t i = 0; i < images.size(); ++i) {
        std::string path = "$.images[" + std::to_string(i) + "]";
        const json& obj = images[i];
        if (!obj.is_object()) schema_fail(path, "expected object");

        ImageRecord rec;
        rec.uid = need_string(obj, path, "uid");
        if (rec.uid.empty()) throw ValidationError(path + ".uid: must not be empty");

        std::string role = need_string(obj, path, "role");
        if (role == "real")
            rec.role = ImageRole::Real;
        else if (role == "fake")
            rec.role = ImageRole::Fake;
        else
            throw ValidationError(path + ".role: expected \"real\" or \"fake\", got \"" + role +
                                  "\"");

        if (auto it = obj.find("generator"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) schema_fail(path + ".generator", "expected string or null");
            rec.generator = it->get<std::string>();
        }
        if (rec.role == ImageRole::Real && !rec.generator.empty())
            throw ValidationError(path + ": real image must not carry a generator (uid " +
                                  rec.uid + ")");
        if (rec.role == ImageRole::Fake && rec.generator.empty())
            throw ValidationError(path + ": fake image needs a generator (uid " + rec.uid + ")");

        rec.width = need_int(obj, path, "width");
        rec.height = need_int(obj, path, "height");
        if (rec.width <= 0 || rec.height <= 0)
            throw ValidationError(path + ": image dimensions must be positive (uid " + rec.uid +
                                  ")");

        auto key = std::make_tuple(rec.uid, static_cast<int>(rec.role), rec.generator);
        if (!seen.insert(key).second)
            throw ValidationError(path + ": duplicate record for uid " + rec.uid + " (" +
                                  std::string(role_name(rec.role)) +
                                  (rec.generator.empty() ? "" : ", " + rec.generator) + ")");

        const json& anns = need(obj, path, "annotations");
        if (!anns.is_array()) schema_fail(path + ".annotations", "expected array");
        if (rec.role == ImageRole::Real && !anns.empty())
            throw ValidationError(path + ": real image must not carry annotations (uid " +
                                  rec.uid + ")");
        for (std::size_t a = 0; a < anns.size(); ++a)
            rec.annotations.push_back(parse_annotation(
                anns[a], path + ".annotations[" + std::to_string(a) + "]", rec, options,
                warnings));

        manifest.images.push_back(std::move(rec));
    }
    return manifest;
}

Manifest load_manifest(const std::filesystem::path& path, const ParseOptions& options,
                       std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), options, warnings);
}

std::string serialize_manifest(const Manifest& manifest) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = manifest.schema_version;
    doc["images"] = nlohmann::ordered_json::array();
    for (const auto& rec : manifest.images) {
        nlohmann::ordered_json img;
        img["uid"] = rec.uid;
        img["role"] = std::string(role_name(rec.role));
        if (rec.role == ImageRole::Fake)
            img["generator"] = rec.generator;
        else
            img["generator"] = nullptr;
        img["width"] = rec.width;
        img["height"] = rec.height;
        img["annotations"] = nlohmann::ordered_json::array();
        for (const auto& inst : rec.annotations) {
            nlohmann::ordered_json a;
            a["category"] = std::string(category_name(inst.category));
            a["round"] = inst.round;
            if (!inst.confidence_scores.empty()) a["confidence_scores"] = inst.confidence_scores;
            a["polygon"] = nlohmann::ordered_json::array();
            for (const auto& v : inst.polygon.vertices) a["polygon"].push_back({v[0], v[1]});
            img["annotations"].push_back(std::move(a));
        }
        doc["images"].push_back(std::move(img));
    }
    return doc.dump(2) + "\n";
}

Manifest filter_by_confidence(const Manifest& manifest, double tau) {
    if (!std::isfinite(tau)) throw ValidationError("confidence threshold must be finite");
    Manifest out;
    out.schema_version = manifest.schema_version;
    out.images.reserve(manifest.images.size());
    for (const auto& rec : manifest.images) {
        ImageRecord copy = rec;
        copy.annotations.clear();
        for (const auto& inst : rec.annotations) {
            double mean = inst.mean_confidence();
            if (mean < tau) continue;
            AnnotationInstance kept = inst;
            kept.weight = mean;
            copy.annotations.push_back(std::move(kept));
        }
        out.images.push_back(std::move(copy));
    }
    return out;
}

Manifest merge_rounds(const Manifest& manifest, bool dedupe_exact) {
    Manifest out = manifest;
    if (!dedupe_exact) return out;
    for (auto& rec : out.images) {
        std::vector<AnnotationInstance> kept;
        kept.reserve(rec.annotations.size());
        for (const auto& inst : rec.annotations) {
            bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const auto& other) {
                return other.category == inst.category && other.polygon == inst.polygon;
            });
            if (!duplicate) kept.push_back(inst);
        }
        rec.annotations = std::move(kept);
    }
    return out;
}

}  // namespace aigi
