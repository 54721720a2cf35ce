#include "aigieval/heatmap.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace aigi {

static_assert(std::endian::native == std::endian::little,
              "heatmap containers assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'X', 'H', 'M', '1'};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(std::to_integer<unsigned>(bytes[offset + i])) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::byte> heatmap_to_bytes(const Heatmap& map) {
    if (map.height <= 0 || map.width <= 0)
        throw DimensionMismatch("heatmap dimensions must be positive");
    std::vector<std::byte> out;
    out.reserve(12 + map.values.size() * 4);
    for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
    put_u32(out, static_cast<std::uint32_t>(map.height));
    put_u32(out, static_cast<std::uint32_t>(map.width));
    for (double v : map.values) {
        float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
    return out;
}

Heatmap heatmap_from_bytes(std::span<const std::byte> bytes) {
    if (bytes.size() < 12) throw FormatError("heatmap container truncated");
    for (int i = 0; i < 4; ++i)
        if (std::to_integer<char>(bytes[i]) != kMagic[i])
            throw FormatError("bad heatmap magic");
    std::uint32_t height = get_u32(bytes, 4);
    std::uint32_t width = get_u32(bytes, 8);
    if (height == 0 || width == 0) throw FormatError("heatmap dimensions must be positive");
    std::size_t cells = static_cast<std::size_t>(height) * width;
    if (bytes.size() != 12 + cells * 4)
        throw FormatError("heatmap payload is " + std::to_string(bytes.size() - 12) +
                          " bytes, expected " + std::to_string(cells * 4));
    Heatmap map(static_cast<int>(height), static_cast<int>(width));
    for (std::size_t i = 0; i < cells; ++i) {
        std::uint32_t bits = get_u32(bytes, 12 + i * 4);
        float f;
        std::memcpy(&f, &bits, 4);
        map.values[i] = static_cast<double>(f);
    }
    return map;
}

void write_heatmap(const std::filesystem::path& path, const Heatmap& map) {
    auto bytes = heatmap_to_bytes(map);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Heatmap read_heatmap(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return heatmap_from_bytes(std::as_bytes(std::span<const char>(data)));
}

BinaryMask binarize_heatmap(const Heatmap& map, double threshold) {
    if (map.height <= 0 || map.width <= 0)
        throw DimensionMismatch("heatmap dimensions must be positive");
    if (!std::isfinite(threshold)) throw NonFiniteValue("binarization threshold is not finite");
    BinaryMask mask(map.width, map.height);
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            double v = map.at(y, x);
            if (!std::isfinite(v))
                throw NonFiniteValue("heatmap value at (" + std::to_string(y) + ", " +
                                     std::to_string(x) + ") is not finite");
            if (v >= threshold) mask.set(x, y, true);
        }
    return mask;
}

}  // namespace aigi
