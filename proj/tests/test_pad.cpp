#include <doctest.h>

#include <optional>
#include <string>
#include <vector>

#include "aigieval/pad.hpp"

using namespace aigi;

namespace {

// Two annotated fakes plus one real. f1 carries overlapping textures/color
// rectangles, f2 a small textures rectangle.
Manifest pad_manifest() {
    return parse_manifest(R"({"schema_version":"1","images":[
        {"uid":"r1","role":"real","generator":null,"width":16,"height":16,
         "annotations":[]},
        {"uid":"f1","role":"fake","generator":"gen-a","width":16,"height":16,
         "annotations":[
           {"category":"textures","round":1,
            "polygon":[[2,2],[10,2],[10,10],[2,10]]},
           {"category":"color","round":1,
            "polygon":[[4,4],[12,4],[12,12],[4,12]]}]},
        {"uid":"f2","role":"fake","generator":"gen-a","width":16,"height":16,
         "annotations":[
           {"category":"textures","round":1,
            "polygon":[[0,0],[4,0],[4,4],[0,4]]}]}]})",
                          {});
}

BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    BinaryMask m(w, h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.set(x, y, true);
    return m;
}

PadPrediction pad_pred(const std::string& uid, const std::string& gen) {
    PadPrediction p;
    p.key = {uid, gen};
    return p;
}

const CategoryRow& row_for(const PadResult& r, ArtifactCategory c) {
    for (const auto& row : r.rows)
        if (row.category == c) return row;
    REQUIRE(false);
    return r.rows.front();
}

}  // namespace

TEST_CASE("pixel metrics follow the counting definitions") {
    PixelMetrics m = pixel_metrics({.tp = 48, .fp = 16, .fn = 16});
    CHECK(m.iou == doctest::Approx(48.0 / 80.0));
    CHECK(m.pixp == doctest::Approx(48.0 / 64.0));
    CHECK(m.pixr == doctest::Approx(48.0 / 64.0));
    CHECK(m.pixf1 == doctest::Approx(0.75));

    PixelMetrics zero = pixel_metrics({});
    CHECK(!zero.iou_defined);
    CHECK(!zero.pixp_defined);
    CHECK(!zero.pixr_defined);
    CHECK(!zero.pixf1_defined);

    // Prediction but no ground truth: precision defined (0), recall not.
    PixelMetrics fp_only = pixel_metrics({.tp = 0, .fp = 5, .fn = 0});
    CHECK(fp_only.pixp == 0.0);
    CHECK(fp_only.pixp_defined);
    CHECK(!fp_only.pixr_defined);
}

TEST_CASE("ratio identities recover f1 and iou from precision and recall") {
    CHECK(f1_from_pr(0.75, 0.75) == doctest::Approx(0.75));
    CHECK(iou_from_pr(0.75, 0.75) == doctest::Approx(0.6));
    CHECK(f1_from_pr(0.0, 0.0) == 0.0);
    CHECK(iou_from_pr(0.0, 0.0) == 0.0);
    // f1 and iou agree through iou = f1 / (2 - f1).
    double f1 = f1_from_pr(0.3, 0.8);
    CHECK(iou_from_pr(0.3, 0.8) == doctest::Approx(f1 / (2.0 - f1)));
}

TEST_CASE("micro pooling sums pixel counts across images") {
    Manifest m = pad_manifest();
    std::vector<PadPrediction> preds;
    PadPrediction p1 = pad_pred("f1", "gen-a");
    // textures exact; color shifted right by 2.
    p1.masks[ArtifactCategory::Textures] = rle_encode(rect_mask(16, 16, 2, 2, 10, 10));
    p1.masks[ArtifactCategory::Color] = rle_encode(rect_mask(16, 16, 6, 4, 14, 12));
    preds.push_back(p1);
    // f2 has no prediction entry at all: its textures pixels become misses.
    PadResult r = eval_pad(m, preds, {});

    CHECK(r.images_evaluated == 2);
    const CategoryRow& tex = row_for(r, ArtifactCategory::Textures);
    CHECK(tex.counts.tp == 64);
    CHECK(tex.counts.fp == 0);
    CHECK(tex.counts.fn == 16);
    CHECK(tex.metrics.iou == doctest::Approx(64.0 / 80.0));

    const CategoryRow& col = row_for(r, ArtifactCategory::Color);
    CHECK(col.counts.tp == 48);
    CHECK(col.counts.fp == 16);
    CHECK(col.counts.fn == 16);

    // Categories with neither truth nor prediction stay undefined.
    const CategoryRow& sym = row_for(r, ArtifactCategory::Symbols);
    CHECK(sym.counts.tp == 0);
    CHECK(!sym.metrics.iou_defined);
}

TEST_CASE("macro pooling averages per-image ratios over contributing images") {
    Manifest m = pad_manifest();
    std::vector<PadPrediction> preds;
    PadPrediction p1 = pad_pred("f1", "gen-a");
    p1.masks[ArtifactCategory::Textures] = rle_encode(rect_mask(16, 16, 2, 2, 10, 10));
    preds.push_back(p1);
    PadResult r = eval_pad(m, preds, {.pooling = Pooling::Macro});

    // f1 scores iou 1 on textures, f2 scores 0 (no prediction): mean 0.5.
    const CategoryRow& tex = row_for(r, ArtifactCategory::Textures);
    CHECK(tex.macro_images == 2);
    CHECK(tex.metrics.iou == doctest::Approx(0.5));
    CHECK(tex.metrics.pixf1 == doctest::Approx(0.5));

    // color: only f1 contributes (f2 has no color truth or prediction).
    const CategoryRow& col = row_for(r, ArtifactCategory::Color);
    CHECK(col.macro_images == 1);
    CHECK(col.metrics.iou == doctest::Approx(0.0));
    CHECK(col.metrics.pixr == doctest::Approx(0.0));
}

TEST_CASE("prediction resolution distinguishes the coverage failures") {
    Manifest m = pad_manifest();
    SUBCASE("unknown uid") {
        std::vector<PadPrediction> preds = {pad_pred("ghost", "gen-a")};
        CHECK_THROWS_AS(eval_pad(m, preds, {}), UnknownUid);
    }
    SUBCASE("uid known but only as a real image") {
        std::vector<PadPrediction> preds = {pad_pred("r1", "")};
        CHECK_THROWS_AS(eval_pad(m, preds, {}), MissingImage);
    }
    SUBCASE("generator mismatch") {
        std::vector<PadPrediction> preds = {pad_pred("f1", "gen-z")};
        CHECK_THROWS_AS(eval_pad(m, preds, {}), MissingImage);
    }
    SUBCASE("wrong mask dimensions") {
        PadPrediction p = pad_pred("f1", "gen-a");
        p.masks[ArtifactCategory::Textures] = rle_encode(rect_mask(8, 8, 0, 0, 4, 4));
        std::vector<PadPrediction> preds = {p};
        CHECK_THROWS_AS(eval_pad(m, preds, {}), DimensionMismatch);
    }
}

TEST_CASE("a uid shared by two generators needs the generator spelled out") {
    Manifest m = parse_manifest(R"({"schema_version":"1","images":[
        {"uid":"f","role":"fake","generator":"a","width":8,"height":8,
         "annotations":[{"category":"color","round":1,
                         "polygon":[[1,1],[5,1],[5,5],[1,5]]}]},
        {"uid":"f","role":"fake","generator":"b","width":8,"height":8,
         "annotations":[{"category":"color","round":1,
                         "polygon":[[1,1],[5,1],[5,5],[1,5]]}]}]})",
                                {});
    SUBCASE("bare uid is ambiguous") {
        std::vector<PadPrediction> preds = {pad_pred("f", "")};
        CHECK_THROWS_AS(eval_pad(m, preds, {}), ValidationError);
    }
    SUBCASE("explicit generators resolve") {
        std::vector<PadPrediction> preds = {pad_pred("f", "a"), pad_pred("f", "b")};
        PadResult r = eval_pad(m, preds, {});
        CHECK(r.images_evaluated == 2);
    }
}

TEST_CASE("gating restricts the pool and warns about exclusions") {
    Manifest m = pad_manifest();
    std::vector<PadPrediction> preds;
    PadPrediction p1 = pad_pred("f1", "gen-a");
    p1.masks[ArtifactCategory::Textures] = rle_encode(rect_mask(16, 16, 2, 2, 10, 10));
    preds.push_back(p1);

    PadOptions options;
    options.gate = std::vector<ImageKey>{{"f1", "gen-a"}};
    PadResult r = eval_pad(m, preds, options);
    CHECK(r.images_evaluated == 1);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("excluded") != std::string::npos);

    const CategoryRow& tex = row_for(r, ArtifactCategory::Textures);
    CHECK(tex.counts.fn == 0);  // f2's pixels no longer count
}

TEST_CASE("category-agnostic evaluation scores the union mask") {
    Manifest m = pad_manifest();
    // Union truth on f1: two 8x8 rects overlapping in a 6x6 block = 92 px.
    std::vector<CaPadPrediction> preds;
    CaPadPrediction p;
    p.key = {"f1", "gen-a"};
    BinaryMask u = rect_mask(16, 16, 2, 2, 10, 10);
    mask_or_into(u, rect_mask(16, 16, 6, 4, 14, 12));
    p.mask = u;
    preds.push_back(p);
    CaPadResult r = eval_ca_pad(m, preds, {});

    BinaryMask gt1 = rect_mask(16, 16, 2, 2, 10, 10);
    mask_or_into(gt1, rect_mask(16, 16, 4, 4, 12, 12));
    OverlapCounts expect1 = count_overlap(gt1, u);
    CHECK(gt1.area() == 92);

    // f2 contributes 16 missed pixels.
    CHECK(r.counts.tp == expect1.tp);
    CHECK(r.counts.fp == expect1.fp);
    CHECK(r.counts.fn == expect1.fn + 16);
    CHECK(r.images_evaluated == 2);
}

TEST_CASE("overlapping annotations in one category count each pixel once") {
    Manifest m = parse_manifest(R"({"schema_version":"1","images":[
        {"uid":"f","role":"fake","generator":"g","width":16,"height":16,
         "annotations":[
           {"category":"color","round":1,
            "polygon":[[2,2],[10,2],[10,10],[2,10]]},
           {"category":"color","round":2,
            "polygon":[[4,4],[12,4],[12,12],[4,12]]}]}]})",
                                {});
    PadPrediction p = pad_pred("f", "g");
    BinaryMask u = rect_mask(16, 16, 2, 2, 10, 10);
    mask_or_into(u, rect_mask(16, 16, 4, 4, 12, 12));
    p.masks[ArtifactCategory::Color] = rle_encode(u);
    std::vector<PadPrediction> preds = {p};
    PadResult r = eval_pad(m, preds, {});
    const CategoryRow& col = row_for(r, ArtifactCategory::Color);
    CHECK(col.counts.tp == 92);  // not 128: the overlap is unioned
    CHECK(col.counts.fp == 0);
    CHECK(col.counts.fn == 0);
}

TEST_CASE("instance matching follows the coverage rule") {
    Manifest m = pad_manifest();
    auto box_pred = [](const char* uid, const char* gen,
                       std::optional<ArtifactCategory> cat, double x0, double y0,
                       double x1, double y1) {
        InstancePrediction p;
        p.key = {uid, gen};
        p.category = cat;
        p.region.kind = Region::Kind::Box;
        p.region.box = {x0, y0, x1, y1};
        return p;
    };

    SUBCASE("full containment matches at every threshold") {
        std::vector<InstancePrediction> preds = {
            box_pred("f1", "gen-a", ArtifactCategory::Textures, 2, 2, 10, 10)};
        for (double t : {0.25, 0.5, 1.0}) {
            InstanceResult r = eval_instances(m, preds, {.t = t});
            for (const auto& row : r.rows)
                if (row.label == "all") {
                    CHECK(row.preds_matched == 1);
                    CHECK(row.gt_indicated == 1);
                }
        }
    }
    SUBCASE("half-overlapping prediction matches exactly down to one half") {
        // Box [6,14)x[2,10): 64 px, 32 inside the textures rect.
        std::vector<InstancePrediction> preds = {
            box_pred("f1", "gen-a", ArtifactCategory::Textures, 6, 2, 14, 10)};
        InstanceResult at_half = eval_instances(m, preds, {.t = 0.5});
        InstanceResult above = eval_instances(m, preds, {.t = 0.75});
        for (const auto& row : at_half.rows)
            if (row.label == "all") CHECK(row.preds_matched == 1);
        for (const auto& row : above.rows)
            if (row.label == "all") CHECK(row.preds_matched == 0);
    }
    SUBCASE("category mismatch blocks a match unless agnostic") {
        std::vector<InstancePrediction> preds = {
            box_pred("f1", "gen-a", ArtifactCategory::Physics, 2, 2, 10, 10)};
        InstanceResult strict = eval_instances(m, preds, {.t = 0.5});
        for (const auto& row : strict.rows)
            if (row.label == "all") CHECK(row.preds_matched == 0);

        preds[0].category = std::nullopt;
        InstanceResult agn = eval_instances(m, preds, {.t = 0.5, .agnostic = true});
        for (const auto& row : agn.rows)
            if (row.label == "all") CHECK(row.preds_matched == 1);
    }
    SUBCASE("two predictions may claim one instance; it is indicated once") {
        std::vector<InstancePrediction> preds = {
            box_pred("f1", "gen-a", ArtifactCategory::Textures, 2, 2, 6, 10),
            box_pred("f1", "gen-a", ArtifactCategory::Textures, 6, 2, 10, 10)};
        InstanceResult r = eval_instances(m, preds, {.t = 0.9});
        for (const auto& row : r.rows)
            if (row.label == "all") {
                CHECK(row.preds_total == 2);
                CHECK(row.preds_matched == 2);
                CHECK(row.gt_indicated == 1);
                CHECK(row.gt_total == 3);  // two on f1, one on f2
                CHECK(row.precision == doctest::Approx(1.0));
                CHECK(row.recall == doctest::Approx(1.0 / 3.0));
            }
    }
    SUBCASE("matching is monotone non-increasing in the threshold") {
        std::vector<InstancePrediction> preds = {
            box_pred("f1", "gen-a", ArtifactCategory::Textures, 5, 2, 14, 10),
            box_pred("f1", "gen-a", ArtifactCategory::Color, 4, 4, 10, 14),
            box_pred("f2", "gen-a", ArtifactCategory::Textures, 0, 0, 6, 6)};
        std::int64_t last = 1000;
        for (double t : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            InstanceResult r = eval_instances(m, preds, {.t = t});
            for (const auto& row : r.rows)
                if (row.label == "all") {
                    CHECK(row.preds_matched <= last);
                    last = row.preds_matched;
                }
        }
    }
    SUBCASE("the threshold must sit in (0, 1]") {
        std::vector<InstancePrediction> preds;
        CHECK_THROWS_AS(eval_instances(m, preds, {.t = 0.0}), ValidationError);
        CHECK_THROWS_AS(eval_instances(m, preds, {.t = 1.5}), ValidationError);
    }
    SUBCASE("category labels are required unless agnostic") {
        std::vector<InstancePrediction> preds = {
            box_pred("f1", "gen-a", std::nullopt, 2, 2, 10, 10)};
        CHECK_THROWS_AS(eval_instances(m, preds, {.t = 0.5}), ValidationError);
    }
    SUBCASE("an empty region is rejected") {
        auto p = box_pred("f1", "gen-a", ArtifactCategory::Textures, 3, 3, 3, 9);
        std::vector<InstancePrediction> preds = {p};
        CHECK_THROWS_AS(eval_instances(m, preds, {.t = 0.5}), EmptyRegion);
    }
    SUBCASE("a prediction for an unknown image is a coverage error") {
        std::vector<InstancePrediction> preds = {
            box_pred("ghost", "gen-a", ArtifactCategory::Textures, 2, 2, 10, 10)};
        CHECK_THROWS_AS(eval_instances(m, preds, {.t = 0.5}), UnknownUid);
    }
}

TEST_CASE("prediction documents parse into typed structures") {
    auto pad = parse_pad_predictions(R"({"predictions":[
        {"uid":"f1","generator":"gen-a","masks":{
           "textures":{"size":[4,4],"counts":[0,16]}}}]})");
    REQUIRE(pad.size() == 1);
    CHECK(pad[0].key.uid == "f1");
    CHECK(pad[0].masks.count(ArtifactCategory::Textures) == 1);

    CHECK_THROWS_AS(parse_pad_predictions(R"({"predictions":[
        {"uid":"f1","masks":{"nope":{"size":[4,4],"counts":[16]}}}]})"),
                    Error);
    // Duplicate image entries are rejected.
    CHECK_THROWS_AS(parse_pad_predictions(R"({"predictions":[
        {"uid":"f1","generator":"g","masks":{}},
        {"uid":"f1","generator":"g","masks":{}}]})"),
                    Error);

    auto inst = parse_instance_predictions(R"({"predictions":[
        {"uid":"f1","generator":"gen-a","instances":[
           {"category":"color","region":{"type":"box","box":[1,1,5,5]}},
           {"category":null,"region":{"type":"point","point":[2.5,3.5]}},
           {"category":"physics","region":{"type":"mask",
                                           "rle":{"size":[4,4],
                                                  "counts":[0,16]}}}]}]})");
    REQUIRE(inst.size() == 3);
    CHECK(inst[0].region.kind == Region::Kind::Box);
    CHECK(!inst[1].category.has_value());
    CHECK(inst[1].region.kind == Region::Kind::Point);
    CHECK(inst[2].region.kind == Region::Kind::Mask);
}
