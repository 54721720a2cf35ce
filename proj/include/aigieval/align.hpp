#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aigieval/errors.hpp"
#include "aigieval/heatmap.hpp"
#include "aigieval/mask.hpp"

namespace aigi {

// Per-layer attention matrices for one image: L row-stochastic m x m
// matrices (class token first), optionally paired with gradients of the same
// shape. Matrices are stored row-major.
struct AttentionStack {
    int tokens = 0;
    std::vector<std::vector<double>> layers;
    std::vector<std::vector<double>> grads;  // empty or one per layer

    int layer_count() const { return static_cast<int>(layers.size()); }
    bool has_grads() const { return !grads.empty(); }
};

// Binary container "XAS1": magic, u32 layer count, u32 token count (little
// endian), one flag byte (bit 0: gradients present), then the attention
// matrices and, when flagged, the gradient matrices, all float32 row-major.
std::vector<std::byte> attention_stack_to_bytes(const AttentionStack& stack);
AttentionStack attention_stack_from_bytes(std::span<const std::byte> bytes);
void write_attention_stack(const std::filesystem::path& path, const AttentionStack& stack);
AttentionStack read_attention_stack(const std::filesystem::path& path);

// Validates shape, finiteness and row sums (each attention row must sum to 1
// within tolerance). Throws ShapeMismatch / NonFiniteValue / NonStochasticRow.
void validate_attention_stack(const AttentionStack& stack, double row_sum_tol = 1e-6);

struct RolloutOptions {
    // Weight each attention matrix by its clipped gradient before averaging
    // with the residual path (requires gradients in the stack).
    bool gradient_weighted = false;
    // Min-max normalize the class-token map to [0, 1].
    bool normalize = true;
    double row_sum_tol = 1e-6;
};

struct RolloutResult {
    Heatmap heatmap;  // grid_h x grid_w class-token attention map
    // Set when min-max normalization hit a constant map; the map is then all
    // zeros (no attention contrast to claim).
    bool degenerate = false;
};

// Attention rollout: per layer average the attention with the identity
// (residual path), renormalize rows, and multiply through in layer order.
// The class-token row over patch columns, reshaped to grid_h x grid_w, is the
// result. grid_h * grid_w must equal tokens - 1.
RolloutResult attention_rollout(const AttentionStack& stack, int grid_h, int grid_w,
                                const RolloutOptions& options = {});

// Per-cell fraction of artifact pixels on a patch grid. Cell (i, j) covers
// pixel rows [i*patch, min((i+1)*patch, H)) and the matching columns, so edge
// cells of a ragged grid are smaller; each cell's value is artifact pixels in
// the cell divided by the cell's true pixel count.
Heatmap patch_artifact_heatmap(const BinaryMask& mask, int patch);

// Pixel count of a patch-grid cell (exposed so exactness checks can weight
// cell values without re-deriving the grid geometry).
std::int64_t patch_cell_pixels(int height, int width, int patch, int cell_row, int cell_col);

struct AlignmentParams {
    double lambda = 0.0;  // weight on cells with no annotated artifact, in [0, 1]
    double beta = 0.1;    // weight of the alignment term in the total loss
};

// Weighted mean squared difference between the class-attention map and the
// artifact map: cells with artifact content weigh 1, the rest weigh lambda.
double alignment_loss(const Heatmap& cls_map, const Heatmap& art_map, double lambda);

// Analytic d(loss)/d(cls_map), same shape as the inputs.
Heatmap alignment_grad(const Heatmap& cls_map, const Heatmap& art_map, double lambda);

// Binary cross-entropy of a fake-probability against a 0/1 label, with the
// probability clamped to [1e-12, 1 - 1e-12]. *clamped reports when the clamp
// engaged.
double bce_loss(double score, int label, bool* clamped = nullptr);

double total_loss(double bce, double align, double beta);

struct GradCheckResult {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    int cells = 0;
};

// Central finite differences of alignment_loss against alignment_grad over
// every cell. step is the half-width of the central difference.
GradCheckResult gradient_check(const Heatmap& cls_map, const Heatmap& art_map,
                               double lambda, double step = 1e-5);

}  // namespace aigi
