#include "aigieval/fixture.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "aigieval/align.hpp"
#include "aigieval/annotation.hpp"
#include "aigieval/heatmap.hpp"
#include "aigieval/mask.hpp"

namespace aigi {

namespace {

using Json = nlohmann::ordered_json;

Json rle_json(const RleMask& rle) {
    Json j;
    j["size"] = {rle.height, rle.width};
    j["order"] = "row-major";
    j["counts"] = rle.counts;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

Polygon shifted(const Polygon& poly, double dx, double dy) {
    Polygon out = poly;
    for (auto& v : out.vertices) {
        v[0] += dx;
        v[1] += dy;
    }
    return out;
}

// Half-pixel jitter from the raw engine output; avoids std distributions so
// the same seed yields the same bytes on any standard library.
double jitter(std::mt19937_64& rng) {
    return 0.5 * (static_cast<double>(rng() % 3) - 1.0);
}

Polygon make_polygon(std::initializer_list<std::array<double, 2>> vertices,
                     std::mt19937_64& rng) {
    Polygon poly;
    for (const auto& v : vertices) poly.vertices.push_back({v[0] + jitter(rng), v[1] + jitter(rng)});
    return poly;
}

struct FixtureAnnotation {
    ArtifactCategory category;
    Polygon polygon;
    int round;
    std::vector<double> scores;
};

struct FixtureImage {
    std::string uid;
    std::string generator;
    int width;
    int height;
    std::vector<FixtureAnnotation> annotations;
};

std::vector<FixtureImage> build_images(const FixtureParams& params) {
    std::mt19937_64 rng(params.seed);
    std::vector<FixtureImage> images;

    FixtureImage a{"img-0001", "nimbus-v2", 64, 64, {}};
    a.annotations.push_back({ArtifactCategory::Textures,
                             make_polygon({{8, 8}, {24, 8}, {24, 24}, {8, 24}}, rng),
                             1,
                             {1, 1, 0.5}});
    a.annotations.push_back({ArtifactCategory::EdgesShapes,
                             make_polygon({{40, 10}, {56, 10}, {48, 26}}, rng),
                             1,
                             {1, 1, 1}});
    a.annotations.push_back(
        {ArtifactCategory::Semantics,
         make_polygon({{10, 42}, {22, 40}, {26, 50}, {16, 58}, {6, 52}}, rng),
         2,
         {0.5, 0.5, 1}});
    images.push_back(std::move(a));

    FixtureImage b{"img-0002", "nimbus-v2", 48, 80, {}};
    b.annotations.push_back({ArtifactCategory::Symbols,
                             make_polygon({{24, 10}, {34, 20}, {24, 30}, {14, 20}}, rng),
                             1,
                             {1, 0.5, 1}});
    b.annotations.push_back({ArtifactCategory::Color,
                             make_polygon({{4, 40}, {20, 40}, {20, 56}, {4, 56}}, rng),
                             2,
                             {0.5, 0.5, 0.5}});
    b.annotations.push_back(
        {ArtifactCategory::Commonsense,
         make_polygon({{8, 60}, {30, 60}, {30, 68}, {18, 68}, {18, 76}, {8, 76}}, rng),
         3,
         {1, 1}});
    images.push_back(std::move(b));

    FixtureImage c{"img-0003", "quartz-xl", 64, 64, {}};
    c.annotations.push_back({ArtifactCategory::Physics,
                             make_polygon({{30, 30}, {50, 34}, {46, 50}, {28, 46}}, rng),
                             1,
                             {1, 1, 1}});
    c.annotations.push_back({ArtifactCategory::Textures,
                             make_polygon({{6, 40}, {14, 38}, {16, 48}, {8, 50}}, rng),
                             2,
                             {}});
    images.push_back(std::move(c));

    FixtureImage d{"img-0004", "quartz-xl", 80, 48, {}};
    d.annotations.push_back({ArtifactCategory::EdgesShapes,
                             make_polygon({{10, 10}, {30, 10}, {30, 22}, {10, 22}}, rng),
                             1,
                             {1, 1, 0.5}});
    d.annotations.push_back({ArtifactCategory::Color,
                             make_polygon({{50, 8}, {70, 12}, {60, 28}}, rng),
                             2,
                             {0, 0.5, 0.5}});
    images.push_back(std::move(d));
    return images;
}

Json manifest_json(const std::vector<FixtureImage>& images) {
    Json doc;
    doc["schema_version"] = "1";
    doc["images"] = Json::array();
    for (const auto& img : images) {
        // Real sibling first, then the fake carrying the annotations.
        Json real;
        real["uid"] = img.uid;
        real["role"] = "real";
        real["generator"] = nullptr;
        real["width"] = img.width;
        real["height"] = img.height;
        real["annotations"] = Json::array();
        doc["images"].push_back(std::move(real));

        Json fake;
        fake["uid"] = img.uid;
        fake["role"] = "fake";
        fake["generator"] = img.generator;
        fake["width"] = img.width;
        fake["height"] = img.height;
        fake["annotations"] = Json::array();
        for (const auto& ann : img.annotations) {
            Json a;
            a["category"] = std::string(category_name(ann.category));
            a["round"] = ann.round;
            if (!ann.scores.empty()) a["confidence_scores"] = ann.scores;
            a["polygon"] = Json::array();
            for (const auto& v : ann.polygon.vertices) a["polygon"].push_back({v[0], v[1]});
            fake["annotations"].push_back(std::move(a));
        }
        doc["images"].push_back(std::move(fake));
    }
    return doc;
}

Json aj_entry(const std::string& uid, const char* role, const std::string& generator,
              double score) {
    Json p;
    p["uid"] = uid;
    p["role"] = role;
    p["generator"] = generator.empty() ? Json(nullptr) : Json(generator);
    p["score"] = score;
    return p;
}

constexpr double kOffsetX = 4.0;
constexpr double kOffsetY = 2.0;

}  // namespace

void write_fixture(const std::filesystem::path& out_dir, const FixtureParams& params) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "heatmaps");
    fs::create_directories(out_dir / "attention");

    auto images = build_images(params);
    write_text(out_dir / "manifest.json", manifest_json(images).dump(2) + "\n");

    // Authenticity predictions: a perfect tier and a mixed tier with one
    // missed fake and one false alarm (both sitting on the 0.5 boundary).
    {
        Json doc;
        doc["predictions"] = Json::array();
        for (const auto& img : images) {
            doc["predictions"].push_back(aj_entry(img.uid, "real", "", 0.05));
            doc["predictions"].push_back(aj_entry(img.uid, "fake", img.generator, 0.95));
        }
        write_text(out_dir / "preds_aj_perfect.json", doc.dump(2) + "\n");
    }
    {
        const std::array<double, 4> fake_scores{0.9, 0.4, 0.7, 0.5};
        const std::array<double, 4> real_scores{0.1, 0.5, 0.2, 0.3};
        Json doc;
        doc["predictions"] = Json::array();
        for (std::size_t i = 0; i < images.size(); ++i) {
            doc["predictions"].push_back(aj_entry(images[i].uid, "real", "", real_scores[i]));
            doc["predictions"].push_back(
                aj_entry(images[i].uid, "fake", images[i].generator, fake_scores[i]));
        }
        write_text(out_dir / "preds_aj_mixed.json", doc.dump(2) + "\n");
    }

    // Localization tiers: exact ground truth, and the same shapes shifted a
    // few pixels so counts land strictly between 0 and perfect.
    auto category_union = [](const FixtureImage& img, ArtifactCategory cat, double dx,
                             double dy) {
        BinaryMask acc(img.width, img.height);
        bool any = false;
        for (const auto& ann : img.annotations) {
            if (ann.category != cat) continue;
            mask_or_into(acc, rasterize_polygon(shifted(ann.polygon, dx, dy), img.width,
                                                img.height));
            any = true;
        }
        return std::pair<bool, BinaryMask>(any, std::move(acc));
    };
    auto full_union = [](const FixtureImage& img, double dx, double dy) {
        BinaryMask acc(img.width, img.height);
        for (const auto& ann : img.annotations)
            mask_or_into(acc, rasterize_polygon(shifted(ann.polygon, dx, dy), img.width,
                                                img.height));
        return acc;
    };

    for (bool offset : {false, true}) {
        double dx = offset ? kOffsetX : 0.0;
        double dy = offset ? kOffsetY : 0.0;

        Json pad;
        pad["predictions"] = Json::array();
        for (const auto& img : images) {
            Json p;
            p["uid"] = img.uid;
            p["generator"] = img.generator;
            p["masks"] = Json::object();
            for (ArtifactCategory cat : all_categories()) {
                auto [any, mask] = category_union(img, cat, dx, dy);
                if (any) p["masks"][std::string(category_name(cat))] = rle_json(rle_encode(mask));
            }
            pad["predictions"].push_back(std::move(p));
        }
        write_text(out_dir / (offset ? "preds_pad_offset.json" : "preds_pad_perfect.json"),
                   pad.dump(2) + "\n");

        Json ca;
        ca["predictions"] = Json::array();
        for (const auto& img : images) {
            Json p;
            p["uid"] = img.uid;
            p["generator"] = img.generator;
            p["mask"] = rle_json(rle_encode(full_union(img, dx, dy)));
            ca["predictions"].push_back(std::move(p));
        }
        write_text(out_dir / (offset ? "preds_ca_pad_offset.json" : "preds_ca_pad_perfect.json"),
                   ca.dump(2) + "\n");
    }

    // Heatmap tier: 0.9 inside the shifted union, 0.1 outside; binarizing at
    // 0.5 reproduces the offset masks exactly.
    {
        Json doc;
        doc["predictions"] = Json::array();
        for (const auto& img : images) {
            BinaryMask mask = full_union(img, kOffsetX, kOffsetY);
            Heatmap map(img.height, img.width);
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    map.at(y, x) = mask.get(x, y) ? 0.9 : 0.1;
            std::string name = img.uid + ".xhm";
            write_heatmap(out_dir / "heatmaps" / name, map);
            Json p;
            p["uid"] = img.uid;
            p["generator"] = img.generator;
            p["heatmap"] = "heatmaps/" + name;
            doc["predictions"].push_back(std::move(p));
        }
        write_text(out_dir / "preds_ca_pad_heat.json", doc.dump(2) + "\n");
    }

    // Instance tiers: ground-truth masks (perfect at any t), and outward
    // integer bounding boxes (coverage = polygon area / box area).
    {
        Json doc;
        doc["predictions"] = Json::array();
        for (const auto& img : images) {
            Json entry;
            entry["uid"] = img.uid;
            entry["generator"] = img.generator;
            entry["instances"] = Json::array();
            for (const auto& ann : img.annotations) {
                Json inst;
                inst["category"] = std::string(category_name(ann.category));
                Json region;
                region["type"] = "mask";
                region["rle"] = rle_json(
                    rle_encode(rasterize_polygon(ann.polygon, img.width, img.height)));
                inst["region"] = std::move(region);
                entry["instances"].push_back(std::move(inst));
            }
            doc["predictions"].push_back(std::move(entry));
        }
        write_text(out_dir / "preds_instances_perfect.json", doc.dump(2) + "\n");
    }
    {
        Json doc;
        doc["predictions"] = Json::array();
        for (const auto& img : images) {
            Json entry;
            entry["uid"] = img.uid;
            entry["generator"] = img.generator;
            entry["instances"] = Json::array();
            for (const auto& ann : img.annotations) {
                double min_x = ann.polygon.vertices[0][0], max_x = min_x;
                double min_y = ann.polygon.vertices[0][1], max_y = min_y;
                for (const auto& v : ann.polygon.vertices) {
                    min_x = std::min(min_x, v[0]);
                    max_x = std::max(max_x, v[0]);
                    min_y = std::min(min_y, v[1]);
                    max_y = std::max(max_y, v[1]);
                }
                Json inst;
                inst["category"] = std::string(category_name(ann.category));
                Json region;
                region["type"] = "box";
                region["box"] = {std::floor(min_x), std::floor(min_y), std::ceil(max_x),
                                 std::ceil(max_y)};
                inst["region"] = std::move(region);
                entry["instances"].push_back(std::move(inst));
            }
            doc["predictions"].push_back(std::move(entry));
        }
        write_text(out_dir / "preds_instances_boxes.json", doc.dump(2) + "\n");
    }

    // Attention samples: a 2-layer 5-token stack (values exact in float32)
    // with gradient weights, a class map, and the artifact map of the first
    // fake at patch 16.
    {
        AttentionStack stack;
        stack.tokens = 5;
        stack.layers = {
            {0.25, 0.25, 0.1875, 0.15625, 0.15625,  //
             0.125, 0.5, 0.125, 0.125, 0.125,       //
             0.0625, 0.0625, 0.75, 0.0625, 0.0625,  //
             0.25, 0.125, 0.125, 0.375, 0.125,      //
             0.2, 0.2, 0.2, 0.2, 0.2},
            {0.5, 0.125, 0.125, 0.125, 0.125,       //
             0.0625, 0.8125, 0.0625, 0.03125, 0.03125,
             0.125, 0.25, 0.375, 0.125, 0.125,      //
             0.1875, 0.1875, 0.1875, 0.25, 0.1875,  //
             0.03125, 0.03125, 0.125, 0.0625, 0.75},
        };
        stack.grads = {
            {1.0, 0.5, -0.25, 0.75, 0.25,   //
             0.5, 1.0, 0.25, -0.5, 0.5,     //
             0.25, 0.25, 1.0, 0.25, 0.25,   //
             -1.0, 0.5, 0.5, 1.0, 0.5,      //
             0.5, 0.5, 0.5, 0.5, 0.5},
            {1.0, 0.25, 0.5, 0.25, 0.75,    //
             0.25, 1.0, 0.5, 0.5, 0.25,     //
             0.5, -0.25, 1.0, 0.25, 0.5,    //
             0.25, 0.5, 0.25, 1.0, 0.25,    //
             0.75, 0.25, 0.25, 0.5, 1.0},
        };
        write_attention_stack(out_dir / "attention" / "stack_sample.xas", stack);

        // Shaped to pair with art_sample.xhm (64x64 image, patch 16 -> 4x4).
        Heatmap cls(4, 4);
        cls.values = {1.0,  0.5,  0.25, 0.0,   //
                      0.75, 0.5,  0.25, 0.125,  //
                      0.5,  0.25, 0.75, 0.0,   //
                      0.25, 0.0,  0.5,  1.0};
        write_heatmap(out_dir / "attention" / "cls_sample.xhm", cls);

        BinaryMask first = full_union(images[0], 0.0, 0.0);
        write_heatmap(out_dir / "attention" / "art_sample.xhm",
                      patch_artifact_heatmap(first, 16));
    }
}

}  // namespace aigi
