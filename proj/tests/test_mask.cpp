#include <doctest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "aigieval/annotation.hpp"
#include "aigieval/mask.hpp"

using namespace aigi;

namespace {

// Classic PNPOLY crossing test, kept deliberately independent of the scanline
// implementation under test.
bool oracle_point_in_polygon(double px, double py, const Polygon& poly) {
    bool inside = false;
    std::size_t n = poly.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        double xi = poly.vertices[i][0], yi = poly.vertices[i][1];
        double xj = poly.vertices[j][0], yj = poly.vertices[j][1];
        if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi)
            inside = !inside;
    }
    return inside;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (uniform01(rng) < density) m.set(x, y, true);
    return m;
}

}  // namespace

TEST_CASE("scanline rasterization agrees with the exhaustive center oracle") {
    std::mt19937_64 rng(1234);
    const int w = 64, h = 64;
    int nonempty = 0;
    for (int trial = 0; trial < 500; ++trial) {
        Polygon poly;
        int verts = 3 + static_cast<int>(rng() % 10);
        for (int v = 0; v < verts; ++v) {
            // Allow vertices a little outside the canvas to exercise clipping.
            poly.vertices.push_back({uniform01(rng) * 80.0 - 8.0,
                                     uniform01(rng) * 80.0 - 8.0});
        }
        bool degenerate = false;
        BinaryMask got = rasterize_polygon(poly, w, h, false, &degenerate);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                bool want = oracle_point_in_polygon(x + 0.5, y + 0.5, poly);
                if (got.get(x, y) != want) {
                    CAPTURE(trial);
                    CAPTURE(x);
                    CAPTURE(y);
                    REQUIRE(got.get(x, y) == want);
                }
            }
        if (got.any()) ++nonempty;
        CHECK(degenerate == !got.any());
    }
    // Random polygons of this size should almost always cover something;
    // a tiny nonempty count would mean the generator tests nothing.
    CHECK(nonempty > 450);
}

TEST_CASE("rasterization handles degenerate polygons") {
    Polygon line;
    line.vertices = {{1.0, 1.0}, {5.0, 1.0}, {9.0, 1.0}};

    SUBCASE("lenient mode flags and returns empty") {
        bool degenerate = false;
        BinaryMask m = rasterize_polygon(line, 16, 16, false, &degenerate);
        CHECK(!m.any());
        CHECK(degenerate);
    }
    SUBCASE("strict mode throws") {
        CHECK_THROWS_AS(rasterize_polygon(line, 16, 16, true), DegenerateGeometry);
    }
    SUBCASE("too few or non-finite vertices always throw") {
        Polygon two;
        two.vertices = {{0.0, 0.0}, {4.0, 4.0}};
        CHECK_THROWS_AS(rasterize_polygon(two, 16, 16), DegenerateGeometry);
        Polygon nan;
        nan.vertices = {{0.0, 0.0}, {4.0, 0.0}, {2.0, std::nan("")}};
        CHECK_THROWS_AS(rasterize_polygon(nan, 16, 16), DegenerateGeometry);
    }
    SUBCASE("polygon fully outside the canvas is empty") {
        Polygon off;
        off.vertices = {{100.0, 100.0}, {120.0, 100.0}, {110.0, 120.0}};
        bool degenerate = false;
        BinaryMask m = rasterize_polygon(off, 16, 16, false, &degenerate);
        CHECK(!m.any());
        CHECK(degenerate);
    }
}

TEST_CASE("rasterization covers exact axis-aligned rectangles") {
    // Integer-coordinate rectangle (2,3)-(10,7): centers 2.5..9.5 / 3.5..6.5.
    Polygon rect;
    rect.vertices = {{2.0, 3.0}, {10.0, 3.0}, {10.0, 7.0}, {2.0, 7.0}};
    BinaryMask m = rasterize_polygon(rect, 16, 16);
    CHECK(m.area() == 8 * 4);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            CHECK(m.get(x, y) == (x >= 2 && x < 10 && y >= 3 && y < 7));
}

TEST_CASE("self-intersecting polygons fill by even-odd parity") {
    // Bowtie: the crossing region is traversed twice and stays empty.
    Polygon bowtie;
    bowtie.vertices = {{0.0, 0.0}, {8.0, 8.0}, {8.0, 0.0}, {0.0, 8.0}};
    CHECK(polygon_self_intersects(bowtie));
    BinaryMask m = rasterize_polygon(bowtie, 8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(m.get(x, y) == oracle_point_in_polygon(x + 0.5, y + 0.5, bowtie));

    Polygon convex;
    convex.vertices = {{0.0, 0.0}, {8.0, 0.0}, {8.0, 8.0}, {0.0, 8.0}};
    CHECK(!polygon_self_intersects(convex));
}

TEST_CASE("packed mask operations match naive per-pixel loops") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        int w = 16, h = 16;
        BinaryMask a = random_mask(rng, w, h, 0.4);
        BinaryMask b = random_mask(rng, w, h, 0.4);

        std::int64_t naive_tp = 0, naive_fp = 0, naive_fn = 0, naive_inter = 0;
        std::int64_t naive_area_a = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                bool ga = a.get(x, y), gb = b.get(x, y);
                naive_area_a += ga;
                naive_inter += ga && gb;
                if (ga && gb)
                    ++naive_tp;
                else if (gb)
                    ++naive_fp;
                else if (ga)
                    ++naive_fn;
            }

        CHECK(a.area() == naive_area_a);
        CHECK(intersection_area(a, b) == naive_inter);
        OverlapCounts c = count_overlap(a, b);
        CHECK(c.tp == naive_tp);
        CHECK(c.fp == naive_fp);
        CHECK(c.fn == naive_fn);

        BinaryMask u = a;
        mask_or_into(u, b);
        BinaryMask i = mask_intersect(a, b);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                CHECK(u.get(x, y) == (a.get(x, y) || b.get(x, y)));
                CHECK(i.get(x, y) == (a.get(x, y) && b.get(x, y)));
            }
    }
}

TEST_CASE("mask operations reject shape mismatches") {
    BinaryMask a(8, 8), b(8, 9);
    CHECK_THROWS_AS(mask_or_into(a, b), DimensionMismatch);
    CHECK_THROWS_AS(mask_intersect(a, b), DimensionMismatch);
    CHECK_THROWS_AS(count_overlap(a, b), DimensionMismatch);
}

TEST_CASE("fill_range sets runs across word boundaries") {
    BinaryMask m(16, 16);  // 256 bits = 4 words
    m.fill_range(60, 70);  // straddles the first word boundary
    for (int idx = 0; idx < 256; ++idx)
        CHECK(m.get(idx % 16, idx / 16) == (idx >= 60 && idx < 70));
    CHECK(m.area() == 10);

    BinaryMask full(16, 16);
    full.fill_range(0, 256);
    CHECK(full.area() == 256);

    BinaryMask empty(16, 16);
    empty.fill_range(5, 5);
    CHECK(!empty.any());
}

TEST_CASE("run-length codec round-trips arbitrary masks") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        int w = 1 + static_cast<int>(rng() % 40);
        int h = 1 + static_cast<int>(rng() % 40);
        BinaryMask m = random_mask(rng, w, h, uniform01(rng));
        RleMask rle = rle_encode(m);

        std::int64_t total = 0;
        for (std::size_t k = 0; k < rle.counts.size(); ++k) {
            total += rle.counts[k];
            if (k > 0) CHECK(rle.counts[k] > 0);  // only the leading run may be 0
        }
        CHECK(total == static_cast<std::int64_t>(w) * h);
        CHECK(rle_decode(rle) == m);
    }

    BinaryMask empty(5, 3);
    RleMask r = rle_encode(empty);
    CHECK(r.counts == std::vector<std::int64_t>{15});

    BinaryMask full(5, 3);
    full.fill_range(0, 15);
    RleMask rf = rle_encode(full);
    CHECK(rf.counts == std::vector<std::int64_t>({0, 15}));
}

TEST_CASE("run-length decode validates its input") {
    CHECK_THROWS_AS(rle_decode({4, 4, {15}}), RleError);           // sum mismatch
    CHECK_THROWS_AS(rle_decode({4, 4, {8, -2, 10}}), RleError);    // negative run
    CHECK_THROWS_AS(rle_decode({4, 4, {4, 0, 12}}), RleError);     // interior zero
    CHECK_THROWS_AS(rle_decode({0, 4, {0}}), DimensionMismatch);   // empty canvas
    CHECK_NOTHROW(rle_decode({4, 4, {0, 16}}));                    // leading zero ok
}

TEST_CASE("run-length JSON round-trips and validates") {
    BinaryMask m(6, 4);
    m.fill_range(3, 11);
    RleMask rle = rle_encode(m);
    std::string text = rle_to_json(rle);
    RleMask back = rle_from_json(text);
    CHECK(back == rle);
    CHECK(rle_decode(back) == m);

    CHECK_THROWS_AS(rle_from_json("{}"), RleError);
    CHECK_THROWS_AS(rle_from_json(R"({"size":[4],"counts":[16]})"), RleError);
    CHECK_THROWS_AS(
        rle_from_json(R"({"size":[4,4],"order":"col-major","counts":[16]})"),
        RleError);
    CHECK_THROWS_AS(rle_from_json(R"({"size":[4,4],"counts":[15]})"), RleError);
}

TEST_CASE("box regions fill half-open floored rectangles") {
    Region r;
    r.kind = Region::Kind::Box;
    r.box = {2.7, 1.2, 5.4, 3.9};  // floors to [2,5) x [1,3)
    BinaryMask m = region_to_mask(r, 8, 8);
    CHECK(m.area() == 6);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(m.get(x, y) == (x >= 2 && x < 5 && y >= 1 && y < 3));

    SUBCASE("boxes clip to the canvas") {
        Region big;
        big.kind = Region::Kind::Box;
        big.box = {-10.0, -10.0, 100.0, 100.0};
        CHECK(region_to_mask(big, 8, 8).area() == 64);
    }
    SUBCASE("an empty or fully-outside box throws") {
        Region flat;
        flat.kind = Region::Kind::Box;
        flat.box = {3.0, 3.0, 3.0, 9.0};
        CHECK_THROWS_AS(region_to_mask(flat, 8, 8), EmptyRegion);
        Region outside;
        outside.kind = Region::Kind::Box;
        outside.box = {20.0, 20.0, 30.0, 30.0};
        CHECK_THROWS_AS(region_to_mask(outside, 8, 8), EmptyRegion);
    }
}

TEST_CASE("point regions mark a single floored pixel") {
    Region r;
    r.kind = Region::Kind::Point;
    r.point = {4.9, 2.1};
    BinaryMask m = region_to_mask(r, 8, 8);
    CHECK(m.area() == 1);
    CHECK(m.get(4, 2));

    Region outside;
    outside.kind = Region::Kind::Point;
    outside.point = {8.0, 0.0};  // first column past the right edge
    CHECK_THROWS_AS(region_to_mask(outside, 8, 8), EmptyRegion);
}

TEST_CASE("mask regions validate dimensions and non-emptiness") {
    BinaryMask m(8, 8);
    m.fill_range(10, 20);
    Region r;
    r.kind = Region::Kind::Mask;
    r.rle = rle_encode(m);
    CHECK(region_to_mask(r, 8, 8) == m);
    CHECK_THROWS_AS(region_to_mask(r, 8, 9), DimensionMismatch);

    Region empty;
    empty.kind = Region::Kind::Mask;
    empty.rle = rle_encode(BinaryMask(8, 8));
    CHECK_THROWS_AS(region_to_mask(empty, 8, 8), EmptyRegion);
}

TEST_CASE("mask_union folds any number of masks") {
    BinaryMask a(8, 2), b(8, 2), c(8, 2);
    a.fill_range(0, 4);
    b.fill_range(2, 8);
    c.fill_range(12, 14);
    std::vector<BinaryMask> parts = {a, b, c};
    BinaryMask u = mask_union(parts);
    CHECK(u.area() == 10);
    CHECK_THROWS_AS(mask_union(std::span<const BinaryMask>{}), EmptyRegion);
}
