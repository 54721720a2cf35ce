#include <doctest.h>

#include <string>

#include "aigieval/aj.hpp"

using namespace aigi;

namespace {

Manifest tiny_manifest() {
    return parse_manifest(R"({"schema_version":"1","images":[
        {"uid":"r1","role":"real","generator":null,"width":8,"height":8,
         "annotations":[]},
        {"uid":"r2","role":"real","generator":null,"width":8,"height":8,
         "annotations":[]},
        {"uid":"f1","role":"fake","generator":"gen-a","width":8,"height":8,
         "annotations":[]},
        {"uid":"f2","role":"fake","generator":"gen-b","width":8,"height":8,
         "annotations":[]}]})",
                          {});
}

}  // namespace

TEST_CASE("balanced accuracy and derived metrics from hand counts") {
    // 3 fakes (2 caught), 5 reals (4 kept): recall_fake 2/3, recall_real 4/5.
    ConfusionCounts c{.tp = 2, .fp = 1, .tn = 4, .fn = 1};
    AjMetrics m = aj_metrics(c);
    CHECK(m.acc == doctest::Approx(0.5 * (2.0 / 3.0 + 4.0 / 5.0)));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.precision_defined);
    CHECK(m.f1_defined);
}

TEST_CASE("an always-real predictor scores one half") {
    ConfusionCounts c{.tp = 0, .fp = 0, .tn = 10, .fn = 10};
    AjMetrics m = aj_metrics(c);
    CHECK(m.acc == doctest::Approx(0.5));
    CHECK(m.recall == 0.0);
    CHECK(m.precision == 0.0);
    CHECK(!m.precision_defined);  // no fake call was made
    CHECK(m.f1 == 0.0);
    CHECK(!m.f1_defined);
}

TEST_CASE("metrics refuse a single-class population") {
    CHECK_THROWS_AS(aj_metrics({.tp = 3, .fp = 0, .tn = 0, .fn = 1}), EmptyClass);
    CHECK_THROWS_AS(aj_metrics({.tp = 0, .fp = 2, .tn = 5, .fn = 0}), EmptyClass);
}

TEST_CASE("published-accuracy identity holds on raw counts") {
    // Class accuracies 81.2% (real) and 39.7% (fake) over 1000 images each
    // must combine to a balanced accuracy of 60.45%.
    ConfusionCounts c{.tp = 397, .fp = 188, .tn = 812, .fn = 603};
    AjMetrics m = aj_metrics(c);
    CHECK(m.acc * 100.0 == doctest::Approx(60.45).epsilon(1e-12));
    CHECK(balanced_accuracy(0.812, 0.397) * 100.0 ==
          doctest::Approx(60.45).epsilon(1e-12));
}

TEST_CASE("hard labels win over scores when classifying") {
    AjPrediction p;
    p.score = 0.9;
    CHECK(classify_fake(p, 0.5));
    CHECK(!classify_fake(p, 0.95));
    p.score = 0.5;
    CHECK(classify_fake(p, 0.5));  // threshold is inclusive

    AjPrediction q;
    q.label_fake = false;
    q.score = std::nullopt;
    CHECK(!classify_fake(q, 0.0));
}

TEST_CASE("prediction parsing enforces score-or-label") {
    CHECK_NOTHROW(parse_aj_predictions(R"({"predictions":[
        {"uid":"a","role":"real","score":0.2}]})"));
    CHECK_NOTHROW(parse_aj_predictions(R"({"predictions":[
        {"uid":"a","role":"real","label":"fake"}]})"));
    // Both present, neither present, or out-of-range scores are rejected.
    CHECK_THROWS_AS(parse_aj_predictions(R"({"predictions":[
        {"uid":"a","role":"real","score":0.2,"label":"fake"}]})"),
                    Error);
    CHECK_THROWS_AS(parse_aj_predictions(R"({"predictions":[
        {"uid":"a","role":"real"}]})"),
                    Error);
    CHECK_THROWS_AS(parse_aj_predictions(R"({"predictions":[
        {"uid":"a","role":"real","score":1.2}]})"),
                    Error);
    // Duplicate verdicts for one image are rejected.
    CHECK_THROWS_AS(parse_aj_predictions(R"({"predictions":[
        {"uid":"a","role":"real","score":0.2},
        {"uid":"a","role":"real","score":0.3}]})"),
                    Error);
}

TEST_CASE("every image needs exactly one verdict") {
    Manifest m = tiny_manifest();
    SUBCASE("a missing verdict is a coverage error") {
        auto preds = parse_aj_predictions(R"({"predictions":[
            {"uid":"r1","role":"real","score":0.1},
            {"uid":"r2","role":"real","score":0.1},
            {"uid":"f1","generator":"gen-a","role":"fake","score":0.9}]})");
        CHECK_THROWS_AS(aj_confusion(m, preds, 0.5), MissingPrediction);
    }
    SUBCASE("a verdict for an unknown image is a coverage error") {
        auto preds = parse_aj_predictions(R"({"predictions":[
            {"uid":"r1","role":"real","score":0.1},
            {"uid":"r2","role":"real","score":0.1},
            {"uid":"f1","generator":"gen-a","role":"fake","score":0.9},
            {"uid":"f2","generator":"gen-b","role":"fake","score":0.9},
            {"uid":"ghost","role":"real","score":0.5}]})");
        CHECK_THROWS_AS(aj_confusion(m, preds, 0.5), UnknownUid);
    }
}

TEST_CASE("per-generator rows share the real pool and end with the pooled row") {
    Manifest m = tiny_manifest();
    // gen-a's fake is caught, gen-b's is missed; one real is misjudged.
    auto preds = parse_aj_predictions(R"({"predictions":[
        {"uid":"r1","role":"real","score":0.7},
        {"uid":"r2","role":"real","score":0.1},
        {"uid":"f1","generator":"gen-a","role":"fake","score":0.9},
        {"uid":"f2","generator":"gen-b","role":"fake","score":0.2}]})");
    auto rows = aj_per_generator(m, preds, 0.5);
    REQUIRE(rows.size() == 3);

    CHECK(rows[0].generator == "gen-a");
    CHECK(rows[0].counts.tp == 1);
    CHECK(rows[0].counts.fn == 0);
    CHECK(rows[0].counts.fp == 1);  // the shared real pool appears in each row
    CHECK(rows[0].counts.tn == 1);
    CHECK(rows[0].metrics.acc == doctest::Approx(0.75));

    CHECK(rows[1].generator == "gen-b");
    CHECK(rows[1].counts.tp == 0);
    CHECK(rows[1].counts.fn == 1);
    CHECK(rows[1].counts.fp == 1);
    CHECK(rows[1].metrics.acc == doctest::Approx(0.25));

    CHECK(rows[2].generator == "all");
    CHECK(rows[2].counts.tp == 1);
    CHECK(rows[2].counts.fn == 1);
    CHECK(rows[2].counts.fp == 1);
    CHECK(rows[2].counts.tn == 1);
    CHECK(rows[2].metrics.acc == doctest::Approx(0.5));
}

TEST_CASE("confusion accumulation is order-independent") {
    ConfusionCounts a{.tp = 1, .fp = 2, .tn = 3, .fn = 4};
    ConfusionCounts b{.tp = 10, .fp = 20, .tn = 30, .fn = 40};
    ConfusionCounts ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    CHECK(ab.tp == ba.tp);
    CHECK(ab.fp == ba.fp);
    CHECK(ab.tn == ba.tn);
    CHECK(ab.fn == ba.fn);
}
