#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aigieval/errors.hpp"

namespace aigi {

struct Polygon;  // annotation.hpp

// tp/fp/fn of a prediction mask against a ground-truth mask, in pixels.
struct OverlapCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

// Dense binary mask, one bit per pixel, packed into 64-bit words.
// Pixel (x, y) maps to flat index y * width + x. Bits past height * width in
// the last word are kept zero so word-wise equality and popcount stay honest.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    bool get(int x, int y) const {
        std::size_t idx = static_cast<std::size_t>(y) * width_ + x;
        return (words_[idx >> 6] >> (idx & 63)) & 1u;
    }

    void set(int x, int y, bool value) {
        std::size_t idx = static_cast<std::size_t>(y) * width_ + x;
        std::uint64_t bit = std::uint64_t{1} << (idx & 63);
        if (value)
            words_[idx >> 6] |= bit;
        else
            words_[idx >> 6] &= ~bit;
    }

    // Sets flat bit indices [begin, end) word-wise.
    void fill_range(std::size_t begin, std::size_t end);

    std::int64_t area() const;
    bool any() const;
    bool same_shape(const BinaryMask& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    bool operator==(const BinaryMask&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint64_t> words_;

    friend void mask_or_into(BinaryMask&, const BinaryMask&);
    friend BinaryMask mask_intersect(const BinaryMask&, const BinaryMask&);
    friend std::int64_t intersection_area(const BinaryMask&, const BinaryMask&);
    friend OverlapCounts count_overlap(const BinaryMask&, const BinaryMask&);
};

// acc |= other (shapes must match).
void mask_or_into(BinaryMask& acc, const BinaryMask& other);

BinaryMask mask_union(std::span<const BinaryMask> masks);
BinaryMask mask_intersect(const BinaryMask& a, const BinaryMask& b);
std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b);

OverlapCounts count_overlap(const BinaryMask& gt, const BinaryMask& pred);

// Run-length encoding, row-major, alternating background/foreground runs and
// always starting with background (a leading 0 marks a foreground start).
// Canonical form: no interior zero runs, no trailing zero run, counts sum to
// height * width.
struct RleMask {
    int height = 0;
    int width = 0;
    std::vector<std::int64_t> counts;

    bool operator==(const RleMask&) const = default;
};

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

std::string rle_to_json(const RleMask& rle);
RleMask rle_from_json(const std::string& json_text);

// Fill rule: pixel (x, y) is covered when its center (x + 0.5, y + 0.5) lies
// inside the polygon under the even-odd rule. Implemented as a scanline walk
// over sorted edge crossings per row. Vertices may extend past the image;
// coverage is clipped to the canvas. A polygon that covers no pixel center
// yields an empty mask (DegenerateGeometry when strict, *degenerate set
// otherwise).
BinaryMask rasterize_polygon(const Polygon& polygon, int width, int height,
                             bool strict = false, bool* degenerate = nullptr);

bool polygon_self_intersects(const Polygon& polygon);

// Prediction regions for weak localization.
struct Region {
    enum class Kind { Mask, Box, Point };
    Kind kind = Kind::Mask;
    RleMask rle;                          // Kind::Mask
    std::array<double, 4> box{};          // Kind::Box, (x0, y0, x1, y1)
    std::array<double, 2> point{};        // Kind::Point, (x, y)
};

// Boxes use half-open pixel coordinates: coordinates are floored, the fill is
// [x0, x1) x [y0, y1) clipped to the canvas. A point marks the single pixel
// (floor(x), floor(y)). An empty result throws EmptyRegion.
BinaryMask region_to_mask(const Region& region, int width, int height);

}  // namespace aigi
