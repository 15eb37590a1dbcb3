#include "evmod/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "evmod/error.hpp"
#include "evmod/io.hpp"
#include "evmod/rng.hpp"

namespace evmod {

namespace {

constexpr char kBinaryMagic[4] = {'E', 'V', 'M', '1'};
constexpr char kCsvHeaderPrefix[] = "# evmod-events v1 ";

template <typename T>
T parse_int(std::string_view text, const std::string& what, std::size_t line) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw FormatError("line " + std::to_string(line) + ": bad " + what + " '" +
                          std::string(text) + "'");
    }
    return value;
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) { return std::uint16_t(p[0] | (p[1] << 8)); }

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void validate_event(const Event& e, std::uint16_t width, std::uint16_t height,
                    const std::string& where) {
    if (e.x >= width || e.y >= height) {
        throw FormatError(where + ": coordinates (" + std::to_string(e.x) + "," +
                          std::to_string(e.y) + ") outside sensor bounds " +
                          std::to_string(width) + "x" + std::to_string(height));
    }
    if (e.polarity != 1 && e.polarity != -1) {
        throw FormatError(where + ": polarity must be 1 or -1, got " +
                          std::to_string(int(e.polarity)));
    }
}

EventStream finalize(EventStream stream, const std::string& path,
                     std::vector<std::string>* warnings) {
    bool sorted = std::is_sorted(stream.events.begin(), stream.events.end(),
                                 [](const Event& a, const Event& b) { return a.t < b.t; });
    if (!sorted) {
        std::stable_sort(stream.events.begin(), stream.events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
        if (warnings) warnings->push_back(path + ": events out of order; sorted by timestamp");
    }
    return stream;
}

EventStream read_csv(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kCsvHeaderPrefix, 0) != 0) {
        throw FormatError(path + ": line 1: missing '# evmod-events v1' header");
    }

    EventStream stream;
    {
        std::string_view rest = std::string_view(line).substr(sizeof(kCsvHeaderPrefix) - 1);
        unsigned width = 0, height = 0;
        if (std::sscanf(std::string(rest).c_str(), "width=%u height=%u", &width, &height) != 2 ||
            width == 0 || height == 0 || width > 65535 || height > 65535) {
            throw FormatError(path + ": line 1: bad width/height in header");
        }
        stream.sensor_width = std::uint16_t(width);
        stream.sensor_height = std::uint16_t(height);
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string_view view(line);
        std::array<std::string_view, 4> fields;
        std::size_t field = 0;
        while (field < 4) {
            std::size_t comma = view.find(',');
            fields[field++] = view.substr(0, comma);
            if (comma == std::string_view::npos) break;
            view = view.substr(comma + 1);
        }
        if (field != 4 || view.find(',') != std::string_view::npos) {
            throw FormatError(path + ": line " + std::to_string(line_no) +
                              ": expected 4 comma-separated fields");
        }

        Event e;
        e.x = parse_int<std::uint16_t>(fields[0], "x", line_no);
        e.y = parse_int<std::uint16_t>(fields[1], "y", line_no);
        e.t = parse_int<std::uint64_t>(fields[2], "t", line_no);
        e.polarity = std::int8_t(parse_int<int>(fields[3], "polarity", line_no));
        validate_event(e, stream.sensor_width, stream.sensor_height,
                       path + ": line " + std::to_string(line_no));
        stream.events.push_back(e);
    }
    return finalize(std::move(stream), path, warnings);
}

EventStream read_binary(const std::string& path, std::vector<std::string>* warnings) {
    std::string data = read_file(path);
    if (data.empty()) throw FormatError(path + ": empty file");
    if (data.size() < 16 || std::memcmp(data.data(), kBinaryMagic, 4) != 0) {
        throw FormatError(path + ": missing EVM1 magic");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    EventStream stream;
    stream.sensor_width = get_u16(p + 4);
    stream.sensor_height = get_u16(p + 6);
    if (stream.sensor_width == 0 || stream.sensor_height == 0) {
        throw FormatError(path + ": zero sensor dimension in header");
    }
    std::uint64_t count = get_u64(p + 8);
    constexpr std::size_t kRecord = 13;
    if (data.size() != 16 + count * kRecord) {
        throw FormatError(path + ": size mismatch, header declares " + std::to_string(count) +
                          " records");
    }
    stream.events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* r = p + 16 + i * kRecord;
        Event e;
        e.x = get_u16(r);
        e.y = get_u16(r + 2);
        e.t = get_u64(r + 4);
        e.polarity = std::int8_t(r[12]);
        validate_event(e, stream.sensor_width, stream.sensor_height,
                       path + ": record " + std::to_string(i));
        stream.events.push_back(e);
    }
    return finalize(std::move(stream), path, warnings);
}

}  // namespace

PartitionSpec PartitionSpec::uniform(std::uint64_t interval_us, std::uint64_t t_first,
                                     std::uint64_t t_max) {
    if (interval_us == 0) throw InvalidArgument("partition interval must be positive");
    std::uint64_t anchor = (t_first / interval_us) * interval_us;
    PartitionSpec spec;
    std::uint64_t t = anchor;
    do {
        t += interval_us;
        spec.frame_timestamps.push_back(t);
    } while (t < t_max);
    return spec;
}

Event SampledEvents::denormalize(std::size_t row) const {
    Event e = source_events.at(row);
    Event out;
    out.x = std::uint16_t(std::llround(points(Eigen::Index(row), 0) * sensor_width));
    out.y = std::uint16_t(std::llround(points(Eigen::Index(row), 1) * sensor_height));
    out.t = std::uint64_t(std::llround(points(Eigen::Index(row), 2) * time_scale)) + t_start;
    out.polarity = e.polarity;
    return out;
}

EventStream read_event_stream(const std::string& path, StreamFormat format,
                              std::vector<std::string>* warnings) {
    return format == StreamFormat::csv ? read_csv(path, warnings) : read_binary(path, warnings);
}

EventStream read_event_stream_auto(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    char magic[4] = {};
    probe.read(magic, 4);
    bool binary = probe.gcount() == 4 && std::memcmp(magic, kBinaryMagic, 4) == 0;
    return read_event_stream(path, binary ? StreamFormat::binary : StreamFormat::csv, warnings);
}

void write_event_stream(const EventStream& stream, const std::string& path, StreamFormat format) {
    if (stream.sensor_width == 0 || stream.sensor_height == 0) {
        throw InvalidArgument("stream has zero sensor dimension");
    }
    std::string out;
    if (format == StreamFormat::csv) {
        out = "# evmod-events v1 width=" + std::to_string(stream.sensor_width) +
              " height=" + std::to_string(stream.sensor_height) + "\n";
        for (const Event& e : stream.events) {
            out += std::to_string(e.x) + ',' + std::to_string(e.y) + ',' + std::to_string(e.t) +
                   ',' + std::to_string(int(e.polarity)) + '\n';
        }
    } else {
        out.assign(kBinaryMagic, 4);
        put_u16(out, stream.sensor_width);
        put_u16(out, stream.sensor_height);
        put_u64(out, stream.events.size());
        for (const Event& e : stream.events) {
            put_u16(out, e.x);
            put_u16(out, e.y);
            put_u64(out, e.t);
            out.push_back(char(e.polarity));
        }
    }
    atomic_write_file(path, out);
}

PartitionResult partition(const EventStream& stream, const PartitionSpec& spec) {
    if (spec.frame_timestamps.empty()) throw InvalidArgument("empty partition spec");
    if (!std::is_sorted(spec.frame_timestamps.begin(), spec.frame_timestamps.end()) ||
        std::adjacent_find(spec.frame_timestamps.begin(), spec.frame_timestamps.end()) !=
            spec.frame_timestamps.end()) {
        throw InvalidArgument("partition timestamps must be strictly increasing");
    }

    PartitionResult result;
    result.partitions.reserve(spec.count());
    auto begin = stream.events.begin();
    for (std::size_t i = 0; i < spec.count(); ++i) {
        auto end = std::upper_bound(begin, stream.events.end(), spec.frame_timestamps[i],
                                    [](std::uint64_t t, const Event& e) { return t < e.t; });
        EventPartition part;
        part.index = std::uint32_t(i + 1);
        part.sensor_width = stream.sensor_width;
        part.sensor_height = stream.sensor_height;
        part.events.assign(begin, end);
        result.partitions.push_back(std::move(part));
        begin = end;
    }
    result.dropped = std::uint64_t(std::distance(begin, stream.events.end()));
    return result;
}

SampledEvents sample_uniform(const EventPartition& part, std::size_t n, std::uint64_t seed,
                             double time_scale) {
    if (part.events.empty()) throw InvalidArgument("cannot sample an empty partition");
    if (n == 0) throw InvalidArgument("sample size must be at least 1");

    const std::size_t total = part.events.size();
    const std::size_t take = std::min(n, total);

    std::vector<std::uint32_t> indices(total);
    std::iota(indices.begin(), indices.end(), 0u);
    if (take < total) {
        Rng rng(seed);
        for (std::size_t i = 0; i < take; ++i) {
            std::size_t j = i + std::size_t(rng.next_below(total - i));
            std::swap(indices[i], indices[j]);
        }
        indices.resize(take);
        std::sort(indices.begin(), indices.end());  // partition order == time order
    }

    SampledEvents out;
    out.partition_index = part.index;
    out.rng_seed = seed;
    out.sensor_width = part.sensor_width;
    out.sensor_height = part.sensor_height;
    out.t_start = part.events.front().t;

    std::uint64_t span = part.events.back().t - part.events.front().t;
    out.time_scale = time_scale > 0.0 ? time_scale : double(std::max<std::uint64_t>(span, 1));

    out.points.resize(Eigen::Index(take), 3);
    out.source_events.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const Event& e = part.events[indices[i]];
        out.source_events.push_back(e);
        out.points(Eigen::Index(i), 0) = double(e.x) / part.sensor_width;
        out.points(Eigen::Index(i), 1) = double(e.y) / part.sensor_height;
        out.points(Eigen::Index(i), 2) = double(e.t - out.t_start) / out.time_scale;
    }
    return out;
}

Eigen::MatrixXd clustering_coords(const SampledEvents& sample, bool include_polarity) {
    if (!include_polarity) return sample.points;
    Eigen::MatrixXd coords(sample.points.rows(), 4);
    coords.leftCols(3) = sample.points;
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        coords(i, 3) = sample.source_events[std::size_t(i)].polarity > 0 ? 1.0 : 0.0;
    }
    return coords;
}

}  // namespace evmod
