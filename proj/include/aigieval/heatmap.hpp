#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aigieval/errors.hpp"
#include "aigieval/mask.hpp"

namespace aigi {

// Dense row-major float map, values typically in [0, 1].
struct Heatmap {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    Heatmap() = default;
    Heatmap(int h, int w) : height(h), width(w), values(static_cast<std::size_t>(h) * w, 0.0) {}

    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    double& at(int row, int col) {
        return values[static_cast<std::size_t>(row) * width + col];
    }

    bool same_shape(const Heatmap& other) const {
        return height == other.height && width == other.width;
    }

    bool operator==(const Heatmap&) const = default;
};

// Binary container "XHM1": magic, u32 height, u32 width (little endian),
// then height * width IEEE float32 values row-major.
std::vector<std::byte> heatmap_to_bytes(const Heatmap& map);
Heatmap heatmap_from_bytes(std::span<const std::byte> bytes);
void write_heatmap(const std::filesystem::path& path, const Heatmap& map);
Heatmap read_heatmap(const std::filesystem::path& path);

// value >= threshold becomes foreground. Rejects non-finite values.
BinaryMask binarize_heatmap(const Heatmap& map, double threshold = 0.5);

}  // namespace aigi
