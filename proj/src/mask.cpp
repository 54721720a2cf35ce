#include "aigieval/mask.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>

#include <json.hpp>

#include "aigieval/annotation.hpp"

namespace aigi {

namespace {

std::size_t word_count(int width, int height) {
    std::size_t bits = static_cast<std::size_t>(width) * height;
    return (bits + 63) / 64;
}

void require_dims(int width, int height) {
    if (width <= 0 || height <= 0)
        throw DimensionMismatch("mask dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b))
        throw DimensionMismatch("mask shapes differ: " + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                                "x" + std::to_string(b.height()));
}

}  // namespace

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    require_dims(width, height);
    words_.assign(word_count(width, height), 0);
}

void BinaryMask::fill_range(std::size_t begin, std::size_t end) {
    while (begin < end) {
        std::size_t word = begin >> 6;
        std::size_t bit = begin & 63;
        std::size_t span = std::min<std::size_t>(64 - bit, end - begin);
        std::uint64_t run = span == 64 ? ~std::uint64_t{0}
                                       : ((std::uint64_t{1} << span) - 1) << bit;
        words_[word] |= run;
        begin += span;
    }
}

std::int64_t BinaryMask::area() const {
    std::int64_t total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
}

bool BinaryMask::any() const {
    for (std::uint64_t w : words_)
        if (w) return true;
    return false;
}

void mask_or_into(BinaryMask& acc, const BinaryMask& other) {
    require_same_shape(acc, other);
    for (std::size_t i = 0; i < acc.words_.size(); ++i) acc.words_[i] |= other.words_[i];
}

BinaryMask mask_union(std::span<const BinaryMask> masks) {
    if (masks.empty()) throw EmptyRegion("union of an empty mask list");
    BinaryMask out = masks[0];
    for (std::size_t i = 1; i < masks.size(); ++i) mask_or_into(out, masks[i]);
    return out;
}

BinaryMask mask_intersect(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b);
    BinaryMask out(a.width(), a.height());
    for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] = a.words_[i] & b.words_[i];
    return out;
}

std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
    require_same_shape(a, b);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i)
        total += std::popcount(a.words_[i] & b.words_[i]);
    return total;
}

OverlapCounts count_overlap(const BinaryMask& gt, const BinaryMask& pred) {
    require_same_shape(gt, pred);
    OverlapCounts c;
    for (std::size_t i = 0; i < gt.words_.size(); ++i) {
        std::uint64_t g = gt.words_[i];
        std::uint64_t p = pred.words_[i];
        c.tp += std::popcount(g & p);
        c.fp += std::popcount(p & ~g);
        c.fn += std::popcount(g & ~p);
    }
    return c;
}

RleMask rle_encode(const BinaryMask& mask) {
    RleMask rle;
    rle.height = mask.height();
    rle.width = mask.width();
    std::size_t total = static_cast<std::size_t>(mask.width()) * mask.height();
    bool current = false;  // runs start with background
    std::int64_t run = 0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        bool bit = (mask.words()[idx >> 6] >> (idx & 63)) & 1u;
        if (bit == current) {
            ++run;
        } else {
            rle.counts.push_back(run);
            current = bit;
            run = 1;
        }
    }
    rle.counts.push_back(run);
    return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
    require_dims(rle.width, rle.height);
    std::int64_t total = static_cast<std::int64_t>(rle.width) * rle.height;
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < rle.counts.size(); ++i) {
        std::int64_t c = rle.counts[i];
        if (c < 0) throw RleError("negative run length at index " + std::to_string(i));
        if (c == 0 && i != 0)
            throw RleError("zero run length at index " + std::to_string(i) +
                           " (only the leading background run may be zero)");
        sum += c;
        if (sum > total) throw RleError("run lengths exceed height*width");
    }
    if (sum != total)
        throw RleError("run lengths sum to " + std::to_string(sum) + ", expected " +
                       std::to_string(total));
    BinaryMask mask(rle.width, rle.height);
    std::size_t idx = 0;
    bool current = false;
    for (std::int64_t c : rle.counts) {
        std::size_t next = idx + static_cast<std::size_t>(c);
        if (current) mask.fill_range(idx, next);
        idx = next;
        current = !current;
    }
    return mask;
}

std::string rle_to_json(const RleMask& rle) {
    nlohmann::ordered_json j;
    j["size"] = {rle.height, rle.width};
    j["order"] = "row-major";
    j["counts"] = rle.counts;
    return j.dump();
}

RleMask rle_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw RleError(std::string("bad rle document: ") + e.what());
    }
    if (!j.is_object() || !j.contains("size") || !j.contains("counts"))
        throw RleError("rle document needs size and counts");
    const auto& size = j["size"];
    if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
        !size[1].is_number_integer())
        throw RleError("rle size must be [height, width]");
    if (j.contains("order") && j["order"] != "row-major")
        throw RleError("unsupported rle order");
    RleMask rle;
    rle.height = size[0].get<int>();
    rle.width = size[1].get<int>();
    const auto& counts = j["counts"];
    if (!counts.is_array()) throw RleError("rle counts must be an array");
    for (const auto& c : counts) {
        if (!c.is_number_integer()) throw RleError("rle counts must be integers");
        rle.counts.push_back(c.get<std::int64_t>());
    }
    rle_decode(rle);  // full validation
    return rle;
}

namespace {

// Shared by rasterization and tests: x coordinates where polygon edges cross
// the horizontal line y = yc, under the half-open crossing rule
// (y_i > yc) != (y_j > yc). The expression matches the classic
// point-in-polygon test term for term, so per-pixel parity agrees bit for bit
// with an even-odd membership test at pixel centers.
void row_crossings(const Polygon& poly, double yc, std::vector<double>& xs) {
    xs.clear();
    std::size_t n = poly.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        double yi = poly.vertices[i][1];
        double yj = poly.vertices[j][1];
        if ((yi > yc) != (yj > yc)) {
            double xi = poly.vertices[i][0];
            double xj = poly.vertices[j][0];
            xs.push_back((xj - xi) * (yc - yi) / (yj - yi) + xi);
        }
    }
    std::sort(xs.begin(), xs.end());
}

}  // namespace

BinaryMask rasterize_polygon(const Polygon& polygon, int width, int height, bool strict,
                             bool* degenerate) {
    require_dims(width, height);
    if (polygon.vertices.size() < 3)
        throw DegenerateGeometry("polygon needs at least 3 vertices, got " +
                                 std::to_string(polygon.vertices.size()));
    for (const auto& v : polygon.vertices)
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
            throw DegenerateGeometry("polygon vertex is not finite");

    BinaryMask mask(width, height);
    double min_y = polygon.vertices[0][1];
    double max_y = min_y;
    for (const auto& v : polygon.vertices) {
        min_y = std::min(min_y, v[1]);
        max_y = std::max(max_y, v[1]);
    }
    // Clamp in double before casting so far-off-canvas polygons stay defined.
    int y_begin = static_cast<int>(std::clamp(std::floor(min_y - 0.5), 0.0,
                                              static_cast<double>(height)));
    int y_end = static_cast<int>(std::clamp(std::ceil(max_y + 0.5) + 1.0, 0.0,
                                            static_cast<double>(height)));

    std::vector<double> xs;
    for (int y = y_begin; y < y_end; ++y) {
        double yc = y + 0.5;
        row_crossings(polygon, yc, xs);
        if (xs.empty()) continue;
        // Pixel x is inside iff the number of crossings <= x + 0.5 is odd
        // (crossing counts per row are even, so this matches counting strict
        // crossings to the right).
        std::size_t idx = 0;
        bool inside = false;
        for (int x = 0; x < width; ++x) {
            double xc = x + 0.5;
            while (idx < xs.size() && xs[idx] <= xc) {
                inside = !inside;
                ++idx;
            }
            if (inside) mask.set(x, y, true);
        }
    }

    if (!mask.any()) {
        if (strict) throw DegenerateGeometry("polygon covers no pixel center");
        if (degenerate) *degenerate = true;
    } else if (degenerate) {
        *degenerate = false;
    }
    return mask;
}

namespace {

struct Seg {
    double x1, y1, x2, y2;
};

int orient(double ax, double ay, double bx, double by, double cx, double cy) {
    double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

bool on_segment(double ax, double ay, double bx, double by, double px, double py) {
    return std::min(ax, bx) <= px && px <= std::max(ax, bx) && std::min(ay, by) <= py &&
           py <= std::max(ay, by);
}

bool segments_cross(const Seg& s, const Seg& t) {
    int o1 = orient(s.x1, s.y1, s.x2, s.y2, t.x1, t.y1);
    int o2 = orient(s.x1, s.y1, s.x2, s.y2, t.x2, t.y2);
    int o3 = orient(t.x1, t.y1, t.x2, t.y2, s.x1, s.y1);
    int o4 = orient(t.x1, t.y1, t.x2, t.y2, s.x2, s.y2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(s.x1, s.y1, s.x2, s.y2, t.x1, t.y1)) return true;
    if (o2 == 0 && on_segment(s.x1, s.y1, s.x2, s.y2, t.x2, t.y2)) return true;
    if (o3 == 0 && on_segment(t.x1, t.y1, t.x2, t.y2, s.x1, s.y1)) return true;
    if (o4 == 0 && on_segment(t.x1, t.y1, t.x2, t.y2, s.x2, s.y2)) return true;
    return false;
}

}  // namespace

bool polygon_self_intersects(const Polygon& polygon) {
    std::size_t n = polygon.vertices.size();
    if (n < 4) return false;  // a triangle cannot properly self-intersect
    auto edge = [&](std::size_t i) {
        const auto& a = polygon.vertices[i];
        const auto& b = polygon.vertices[(i + 1) % n];
        return Seg{a[0], a[1], b[0], b[1]};
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share a vertex by construction).
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_cross(edge(i), edge(j))) return true;
        }
    }
    return false;
}

BinaryMask region_to_mask(const Region& region, int width, int height) {
    require_dims(width, height);
    switch (region.kind) {
        case Region::Kind::Mask: {
            BinaryMask mask = rle_decode(region.rle);
            if (mask.width() != width || mask.height() != height)
                throw DimensionMismatch("region mask is " + std::to_string(mask.width()) + "x" +
                                        std::to_string(mask.height()) + ", image is " +
                                        std::to_string(width) + "x" + std::to_string(height));
            if (!mask.any()) throw EmptyRegion("region mask has no foreground pixels");
            return mask;
        }
        case Region::Kind::Box: {
            for (double v : region.box)
                if (!std::isfinite(v)) throw EmptyRegion("box coordinate is not finite");
            double w = width, h = height;
            int x0 = static_cast<int>(std::clamp(std::floor(region.box[0]), 0.0, w));
            int y0 = static_cast<int>(std::clamp(std::floor(region.box[1]), 0.0, h));
            int x1 = static_cast<int>(std::clamp(std::floor(region.box[2]), 0.0, w));
            int y1 = static_cast<int>(std::clamp(std::floor(region.box[3]), 0.0, h));
            if (x0 >= x1 || y0 >= y1)
                throw EmptyRegion("box covers no pixels after clipping");
            BinaryMask mask(width, height);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) mask.set(x, y, true);
            return mask;
        }
        case Region::Kind::Point: {
            if (!std::isfinite(region.point[0]) || !std::isfinite(region.point[1]))
                throw EmptyRegion("point coordinate is not finite");
            double fx = std::floor(region.point[0]);
            double fy = std::floor(region.point[1]);
            if (fx < 0 || fx >= width || fy < 0 || fy >= height)
                throw EmptyRegion("point lies outside the image");
            int x = static_cast<int>(fx);
            int y = static_cast<int>(fy);
            BinaryMask mask(width, height);
            mask.set(x, y, true);
            return mask;
        }
    }
    throw EmptyRegion("unknown region kind");
}

}  // namespace aigi
