#pragma once

#include <cstdint>
#include <vector>

namespace evmod {

// A single sensor spike: pixel address, microsecond timestamp, sign of the
// brightness change.
struct Event {
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint64_t t = 0;
    std::int8_t polarity = 1;  // +1 or -1

    friend bool operator==(const Event&, const Event&) = default;
};

// Time-ordered event sequence plus the sensor geometry it was recorded on.
// Events are non-decreasing in t; ties are allowed.
struct EventStream {
    std::uint16_t sensor_width = 0;
    std::uint16_t sensor_height = 0;
    std::vector<Event> events;

    std::size_t total_count() const { return events.size(); }
};

// Axis-aligned pixel rectangle, inclusive on all four edges.
struct BoundingBox {
    std::int32_t x_min = 0;
    std::int32_t y_min = 0;
    std::int32_t x_max = 0;
    std::int32_t y_max = 0;

    bool valid() const { return x_min <= x_max && y_min <= y_max; }
    std::int64_t width() const { return std::int64_t(x_max) - x_min + 1; }
    std::int64_t height() const { return std::int64_t(y_max) - y_min + 1; }
    std::int64_t area() const { return width() * height(); }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

}  // namespace evmod
