#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evmod/types.hpp"

namespace evmod {

// Cluster colors keyed by label index modulo the palette size.
inline constexpr std::array<std::array<std::uint8_t, 3>, 10> kClusterPalette = {{
    {230, 25, 75},
    {60, 180, 75},
    {255, 225, 25},
    {0, 130, 200},
    {245, 130, 48},
    {145, 30, 180},
    {70, 240, 240},
    {240, 50, 230},
    {210, 245, 60},
    {250, 190, 212},
}};

inline constexpr std::array<std::uint8_t, 3> kSuppressedGray = {90, 90, 90};

// Binary PPM (P6) raster at sensor resolution: events as single pixels in
// their cluster's color (gray for suppressed clusters), then 1-pixel box
// outlines in the owning cluster's color. `labels` aligns with `events`;
// `suppressed` is indexed by cluster id.
std::string render_ppm(std::uint16_t width, std::uint16_t height,
                       const std::vector<Event>& events,
                       const std::vector<std::uint32_t>& labels,
                       const std::vector<bool>& suppressed,
                       const std::vector<std::pair<std::uint32_t, BoundingBox>>& boxes);

}  // namespace evmod
