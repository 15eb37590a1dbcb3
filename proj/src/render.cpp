#include "evmod/render.hpp"

#include <algorithm>

#include "evmod/error.hpp"

namespace evmod {

namespace {

struct Canvas {
    std::uint16_t width, height;
    std::string pixels;  // RGB rows, top to bottom

    void set(std::int64_t x, std::int64_t y, const std::array<std::uint8_t, 3>& rgb) {
        if (x < 0 || y < 0 || x >= width || y >= height) return;
        std::size_t at = 3 * (std::size_t(y) * width + std::size_t(x));
        pixels[at] = char(rgb[0]);
        pixels[at + 1] = char(rgb[1]);
        pixels[at + 2] = char(rgb[2]);
    }
};

}  // namespace

std::string render_ppm(std::uint16_t width, std::uint16_t height,
                       const std::vector<Event>& events,
                       const std::vector<std::uint32_t>& labels,
                       const std::vector<bool>& suppressed,
                       const std::vector<std::pair<std::uint32_t, BoundingBox>>& boxes) {
    if (width == 0 || height == 0) throw InvalidArgument("render target has zero dimension");
    if (events.size() != labels.size()) {
        throw InvalidArgument("label count does not match event count");
    }

    Canvas canvas{width, height, std::string(std::size_t(width) * height * 3, '\0')};

    for (std::size_t i = 0; i < events.size(); ++i) {
        const std::uint32_t label = labels[i];
        const bool gray = label < suppressed.size() && suppressed[label];
        const auto& rgb = gray ? kSuppressedGray : kClusterPalette[label % kClusterPalette.size()];
        canvas.set(events[i].x, events[i].y, rgb);
    }

    for (const auto& [cluster, box] : boxes) {
        if (!box.valid()) throw InvalidArgument("render of an invalid box");
        const auto& rgb = kClusterPalette[cluster % kClusterPalette.size()];
        for (std::int64_t x = box.x_min; x <= box.x_max; ++x) {
            canvas.set(x, box.y_min, rgb);
            canvas.set(x, box.y_max, rgb);
        }
        for (std::int64_t y = box.y_min; y <= box.y_max; ++y) {
            canvas.set(box.x_min, y, rgb);
            canvas.set(box.x_max, y, rgb);
        }
    }

    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out += canvas.pixels;
    return out;
}

}  // namespace evmod
