#pragma once

#include <cstdint>
#include <filesystem>

namespace aigi {

struct FixtureParams {
    std::uint64_t seed = 7;
};

// Writes a small self-consistent evaluation bundle into out_dir: a manifest,
// authenticity and localization predictions at a perfect and a degraded tier,
// instance predictions (masks and boxes), plus heatmap and attention-stack
// samples. Deterministic in the seed.
void write_fixture(const std::filesystem::path& out_dir, const FixtureParams& params = {});

}  // namespace aigi
