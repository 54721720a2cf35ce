#include "aigieval/align.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace aigi {

namespace {

constexpr char kMagic[4] = {'X', 'A', 'S', '1'};
constexpr double kBceEps = 1e-12;

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(std::to_integer<unsigned>(bytes[offset + i])) << (8 * i);
    return v;
}

void put_matrix(std::vector<std::byte>& out, const std::vector<double>& m) {
    for (double v : m) {
        float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
}

std::vector<double> get_matrix(std::span<const std::byte> bytes, std::size_t offset,
                               std::size_t cells) {
    std::vector<double> m(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        std::uint32_t bits = get_u32(bytes, offset + i * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        m[i] = static_cast<double>(f);
    }
    return m;
}

void require_shape(const Heatmap& a, const Heatmap& b) {
    if (!a.same_shape(b))
        throw ShapeMismatch("heatmap shapes differ: " + std::to_string(a.height) + "x" +
                            std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                            std::to_string(b.width));
    if (a.height <= 0 || a.width <= 0)
        throw ShapeMismatch("heatmap dimensions must be positive");
}

void require_lambda(double lambda) {
    if (!std::isfinite(lambda)) throw NonFiniteValue("lambda is not finite");
    if (lambda < 0.0 || lambda > 1.0)
        throw ValidationError("lambda must lie in [0, 1]");
}

}  // namespace

std::vector<std::byte> attention_stack_to_bytes(const AttentionStack& stack) {
    if (stack.tokens <= 0) throw ShapeMismatch("attention stack needs a positive token count");
    if (stack.layers.empty()) throw ShapeMismatch("attention stack needs at least one layer");
    std::size_t cells = static_cast<std::size_t>(stack.tokens) * stack.tokens;
    for (const auto& m : stack.layers)
        if (m.size() != cells) throw ShapeMismatch("attention matrix size mismatch");
    if (stack.has_grads()) {
        if (stack.grads.size() != stack.layers.size())
            throw ShapeMismatch("gradient count differs from layer count");
        for (const auto& m : stack.grads)
            if (m.size() != cells) throw ShapeMismatch("gradient matrix size mismatch");
    }
    std::vector<std::byte> out;
    out.reserve(13 + stack.layers.size() * cells * 4 * (stack.has_grads() ? 2 : 1));
    for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
    put_u32(out, static_cast<std::uint32_t>(stack.layers.size()));
    put_u32(out, static_cast<std::uint32_t>(stack.tokens));
    out.push_back(static_cast<std::byte>(stack.has_grads() ? 1 : 0));
    for (const auto& m : stack.layers) put_matrix(out, m);
    for (const auto& m : stack.grads) put_matrix(out, m);
    return out;
}

AttentionStack attention_stack_from_bytes(std::span<const std::byte> bytes) {
    if (bytes.size() < 13) throw FormatError("attention container truncated");
    for (int i = 0; i < 4; ++i)
        if (std::to_integer<char>(bytes[i]) != kMagic[i])
            throw FormatError("bad attention container magic");
    std::uint32_t layer_count = get_u32(bytes, 4);
    std::uint32_t tokens = get_u32(bytes, 8);
    unsigned flags = std::to_integer<unsigned>(bytes[12]);
    if (layer_count == 0 || tokens == 0)
        throw FormatError("attention container needs layers and tokens");
    if (flags > 1) throw FormatError("unknown attention container flags");
    bool with_grads = flags & 1;
    std::size_t cells = static_cast<std::size_t>(tokens) * tokens;
    std::size_t matrices = static_cast<std::size_t>(layer_count) * (with_grads ? 2 : 1);
    if (bytes.size() != 13 + matrices * cells * 4)
        throw FormatError("attention payload size mismatch");
    AttentionStack stack;
    stack.tokens = static_cast<int>(tokens);
    std::size_t offset = 13;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        stack.layers.push_back(get_matrix(bytes, offset, cells));
        offset += cells * 4;
    }
    if (with_grads)
        for (std::uint32_t l = 0; l < layer_count; ++l) {
            stack.grads.push_back(get_matrix(bytes, offset, cells));
            offset += cells * 4;
        }
    return stack;
}

void write_attention_stack(const std::filesystem::path& path, const AttentionStack& stack) {
    auto bytes = attention_stack_to_bytes(stack);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

AttentionStack read_attention_stack(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return attention_stack_from_bytes(std::as_bytes(std::span<const char>(data)));
}

void validate_attention_stack(const AttentionStack& stack, double row_sum_tol) {
    if (stack.tokens <= 0) throw ShapeMismatch("attention stack needs a positive token count");
    if (stack.layers.empty()) throw ShapeMismatch("attention stack needs at least one layer");
    std::size_t m = static_cast<std::size_t>(stack.tokens);
    std::size_t cells = m * m;
    if (stack.has_grads() && stack.grads.size() != stack.layers.size())
        throw ShapeMismatch("gradient count differs from layer count");
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        const auto& mat = stack.layers[l];
        if (mat.size() != cells)
            throw ShapeMismatch("layer " + std::to_string(l) + " matrix size mismatch");
        for (std::size_t r = 0; r < m; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                double v = mat[r * m + c];
                if (!std::isfinite(v))
                    throw NonFiniteValue("layer " + std::to_string(l) + " row " +
                                         std::to_string(r) + " has a non-finite entry");
                if (v < -1e-9)
                    throw NonStochasticRow("layer " + std::to_string(l) + " row " +
                                           std::to_string(r) + " has a negative weight");
                sum += v;
            }
            if (std::abs(sum - 1.0) > row_sum_tol)
                throw NonStochasticRow("layer " + std::to_string(l) + " row " +
                                       std::to_string(r) + " sums to " + std::to_string(sum));
        }
    }
    for (std::size_t l = 0; l < stack.grads.size(); ++l) {
        const auto& mat = stack.grads[l];
        if (mat.size() != cells)
            throw ShapeMismatch("gradient " + std::to_string(l) + " matrix size mismatch");
        for (double v : mat)
            if (!std::isfinite(v))
                throw NonFiniteValue("gradient " + std::to_string(l) +
                                     " has a non-finite entry");
    }
}

RolloutResult attention_rollout(const AttentionStack& stack, int grid_h, int grid_w,
                                const RolloutOptions& options) {
    validate_attention_stack(stack, options.row_sum_tol);
    if (grid_h <= 0 || grid_w <= 0) throw ShapeMismatch("grid dimensions must be positive");
    std::size_t m = static_cast<std::size_t>(stack.tokens);
    if (static_cast<std::size_t>(grid_h) * grid_w != m - 1)
        throw ShapeMismatch("grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                            " does not match " + std::to_string(m - 1) + " patch tokens");
    if (options.gradient_weighted && !stack.has_grads())
        throw ShapeMismatch("gradient weighting requested but the stack carries no gradients");

    // Per layer: (optionally gradient-weighted) attention averaged with the
    // identity, rows renormalized. A row that weights to all zeros would lose
    // its residual path, so it falls back to the identity row.
    std::vector<double> rollout(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) rollout[i * m + i] = 1.0;

    std::vector<double> layer(m * m);
    std::vector<double> next(m * m);
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
        const auto& att = stack.layers[l];
        for (std::size_t r = 0; r < m; ++r) {
            double row_sum = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                double v = att[r * m + c];
                if (options.gradient_weighted) {
                    double g = stack.grads[l][r * m + c];
                    v *= g > 0.0 ? g : 0.0;
                }
                layer[r * m + c] = v;
                row_sum += v;
            }
            if (options.gradient_weighted) {
                if (row_sum > 0.0)
                    for (std::size_t c = 0; c < m; ++c) layer[r * m + c] /= row_sum;
                else
                    for (std::size_t c = 0; c < m; ++c) layer[r * m + c] = r == c ? 1.0 : 0.0;
            }
            // Average with the residual path and renormalize; the row now
            // sums to 1 by construction, the division keeps it exact.
            double total = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                double v = 0.5 * (layer[r * m + c] + (r == c ? 1.0 : 0.0));
                layer[r * m + c] = v;
                total += v;
            }
            for (std::size_t c = 0; c < m; ++c) layer[r * m + c] /= total;
        }
        // rollout = layer * rollout, so layer L sits leftmost.
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < m; ++k) acc += layer[r * m + k] * rollout[k * m + c];
                next[r * m + c] = acc;
            }
        std::swap(rollout, next);
    }

    RolloutResult result;
    result.heatmap = Heatmap(grid_h, grid_w);
    for (std::size_t p = 0; p + 1 < m; ++p) result.heatmap.values[p] = rollout[p + 1];

    if (options.normalize) {
        auto [lo_it, hi_it] =
            std::minmax_element(result.heatmap.values.begin(), result.heatmap.values.end());
        double lo = *lo_it, hi = *hi_it;
        if (hi > lo) {
            for (double& v : result.heatmap.values) v = (v - lo) / (hi - lo);
        } else {
            // Constant map: no attention contrast to claim, so emit zeros.
            std::fill(result.heatmap.values.begin(), result.heatmap.values.end(), 0.0);
            result.degenerate = true;
        }
    }
    return result;
}

Heatmap patch_artifact_heatmap(const BinaryMask& mask, int patch) {
    if (patch <= 0) throw ShapeMismatch("patch size must be positive");
    if (mask.width() <= 0 || mask.height() <= 0)
        throw DimensionMismatch("mask dimensions must be positive");
    int grid_h = (mask.height() + patch - 1) / patch;
    int grid_w = (mask.width() + patch - 1) / patch;
    Heatmap map(grid_h, grid_w);
    for (int ci = 0; ci < grid_h; ++ci) {
        int y0 = ci * patch;
        int y1 = std::min(mask.height(), y0 + patch);
        for (int cj = 0; cj < grid_w; ++cj) {
            int x0 = cj * patch;
            int x1 = std::min(mask.width(), x0 + patch);
            std::int64_t hits = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    if (mask.get(x, y)) ++hits;
            std::int64_t cell = static_cast<std::int64_t>(y1 - y0) * (x1 - x0);
            map.at(ci, cj) = static_cast<double>(hits) / static_cast<double>(cell);
        }
    }
    return map;
}

std::int64_t patch_cell_pixels(int height, int width, int patch, int cell_row, int cell_col) {
    if (patch <= 0 || height <= 0 || width <= 0)
        throw ShapeMismatch("patch grid needs positive dimensions");
    int grid_h = (height + patch - 1) / patch;
    int grid_w = (width + patch - 1) / patch;
    if (cell_row < 0 || cell_row >= grid_h || cell_col < 0 || cell_col >= grid_w)
        throw ShapeMismatch("patch cell lies outside the grid");
    std::int64_t rows = std::min(height, (cell_row + 1) * patch) - cell_row * patch;
    std::int64_t cols = std::min(width, (cell_col + 1) * patch) - cell_col * patch;
    return rows * cols;
}

double alignment_loss(const Heatmap& cls_map, const Heatmap& art_map, double lambda) {
    require_shape(cls_map, art_map);
    require_lambda(lambda);
    std::size_t cells = cls_map.values.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        double a = cls_map.values[i];
        double b = art_map.values[i];
        if (!std::isfinite(a) || !std::isfinite(b))
            throw NonFiniteValue("alignment inputs must be finite");
        double w = b > 0.0 ? 1.0 : lambda;
        double d = a - b;
        sum += w * d * d;
    }
    return sum / static_cast<double>(cells);
}

Heatmap alignment_grad(const Heatmap& cls_map, const Heatmap& art_map, double lambda) {
    require_shape(cls_map, art_map);
    require_lambda(lambda);
    std::size_t cells = cls_map.values.size();
    Heatmap grad(cls_map.height, cls_map.width);
    double scale = 2.0 / static_cast<double>(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        double a = cls_map.values[i];
        double b = art_map.values[i];
        if (!std::isfinite(a) || !std::isfinite(b))
            throw NonFiniteValue("alignment inputs must be finite");
        double w = b > 0.0 ? 1.0 : lambda;
        grad.values[i] = scale * w * (a - b);
    }
    return grad;
}

double bce_loss(double score, int label, bool* clamped) {
    if (!std::isfinite(score)) throw NonFiniteValue("score is not finite");
    if (score < 0.0 || score > 1.0) throw ValidationError("score must lie in [0, 1]");
    if (label != 0 && label != 1) throw ValidationError("label must be 0 or 1");
    double s = std::clamp(score, kBceEps, 1.0 - kBceEps);
    if (clamped) *clamped = s != score;
    return label == 1 ? -std::log(s) : -std::log(1.0 - s);
}

double total_loss(double bce, double align, double beta) {
    if (!std::isfinite(bce) || !std::isfinite(align)) throw NonFiniteValue("loss is not finite");
    if (!std::isfinite(beta) || beta <= 0.0)
        throw ValidationError("alignment weight must be positive");
    return bce + beta * align;
}

GradCheckResult gradient_check(const Heatmap& cls_map, const Heatmap& art_map, double lambda,
                               double step) {
    Heatmap analytic = alignment_grad(cls_map, art_map, lambda);
    GradCheckResult result;
    result.cells = static_cast<int>(cls_map.values.size());
    Heatmap probe = cls_map;
    for (std::size_t i = 0; i < cls_map.values.size(); ++i) {
        double original = probe.values[i];
        probe.values[i] = original + step;
        double up = alignment_loss(probe, art_map, lambda);
        probe.values[i] = original - step;
        double down = alignment_loss(probe, art_map, lambda);
        probe.values[i] = original;
        double fd = (up - down) / (2.0 * step);
        double a = analytic.values[i];
        double abs_err = std::abs(fd - a);
        double rel = abs_err / std::max({std::abs(fd), std::abs(a), 1e-6});
        result.max_abs_error = std::max(result.max_abs_error, abs_err);
        result.max_rel_error = std::max(result.max_rel_error, rel);
    }
    return result;
}

}  // namespace aigi
