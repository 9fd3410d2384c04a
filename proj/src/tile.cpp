#include "risktrace/tile.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "risktrace/errors.hpp"

namespace risktrace {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int n = 0; n < 8; ++n) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * n)));
    }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int n = 0; n < 4; ++n) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * n)));
    }
}

void put_i64(std::vector<std::uint8_t>& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::span<const std::uint8_t> raw(std::size_t n, const char* what) {
        need(n, what);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_]) |
                          static_cast<std::uint16_t>(bytes_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int n = 0; n < 8; ++n) {
            v |= static_cast<std::uint64_t>(bytes_[pos_ + n]) << (8 * n);
        }
        pos_ += 8;
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int n = 0; n < 4; ++n) {
            v |= static_cast<std::uint32_t>(bytes_[pos_ + n]) << (8 * n);
        }
        pos_ += 4;
        return v;
    }

    std::int64_t i64(const char* what) { return static_cast<std::int64_t>(u64(what)); }
    std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

private:
    void need(std::size_t n, const char* what) {
        if (remaining() < n) {
            throw TileDecodeError(TileErrorKind::truncated,
                                  std::string("tile truncated while reading ") + what);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_tile(const RiskMap& map) {
    std::vector<std::uint8_t> out;
    out.reserve(kTileHeaderSize + map.size() * kTileEntrySize);
    for (char c : kTileMagic) {
        out.push_back(static_cast<std::uint8_t>(c));
    }
    put_u16(out, kTileFormatVersion);
    const GridSpec& spec = map.spec();
    put_f64(out, spec.origin_x);
    put_f64(out, spec.origin_y);
    put_i64(out, spec.origin_t);
    put_f64(out, spec.cell_size_xy);
    put_f64(out, spec.cell_size_t);
    const RiskParams& params = map.params();
    put_f64(out, params.p0);
    put_f64(out, params.sigma_x);
    put_f64(out, params.sigma_y);
    put_f64(out, params.sigma_t);
    put_f64(out, map.truncation_eps());
    put_u64(out, static_cast<std::uint64_t>(map.size()));
    for (const MapEntry& entry : map.entries()) {
        put_i32(out, entry.index.i);
        put_i32(out, entry.index.j);
        put_i64(out, entry.index.k);
        put_f64(out, entry.log_q);
    }
    return out;
}

RiskMap decode_tile(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    auto magic = r.raw(sizeof(kTileMagic), "magic");
    if (std::memcmp(magic.data(), kTileMagic, sizeof(kTileMagic)) != 0) {
        throw TileDecodeError(TileErrorKind::bad_magic, "tile magic mismatch");
    }
    const std::uint16_t version = r.u16("version");
    if (version != kTileFormatVersion) {
        throw TileDecodeError(TileErrorKind::unsupported_version,
                              "unsupported tile version " + std::to_string(version));
    }
    GridSpec spec;
    spec.origin_x = r.f64("origin_x");
    spec.origin_y = r.f64("origin_y");
    spec.origin_t = r.i64("origin_t");
    spec.cell_size_xy = r.f64("cell_size_xy");
    spec.cell_size_t = r.f64("cell_size_t");
    RiskParams params;
    params.p0 = r.f64("p0");
    params.sigma_x = r.f64("sigma_x");
    params.sigma_y = r.f64("sigma_y");
    params.sigma_t = r.f64("sigma_t");
    const double eps = r.f64("truncation_eps");
    const std::uint64_t count = r.u64("entry_count");

    if (count > r.remaining() / kTileEntrySize) {
        throw TileDecodeError(TileErrorKind::truncated,
                              "tile entry count exceeds payload size");
    }
    std::vector<MapEntry> entries;
    entries.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t n = 0; n < count; ++n) {
        MapEntry entry;
        entry.index.i = r.i32("entry i");
        entry.index.j = r.i32("entry j");
        entry.index.k = r.i64("entry k");
        entry.log_q = r.f64("entry log_q");
        if (!entries.empty() && !(entries.back().index < entry.index)) {
            throw TileDecodeError(TileErrorKind::unsorted_entries,
                                  "tile entries not strictly sorted by (k, i, j)");
        }
        entries.push_back(entry);
    }
    if (r.remaining() != 0) {
        throw TileDecodeError(TileErrorKind::trailing_bytes,
                              std::to_string(r.remaining()) + " trailing bytes after entries");
    }
    return RiskMap(spec, params, eps, std::move(entries));
}

void write_tile_file(const std::filesystem::path& path, const RiskMap& map) {
    const std::vector<std::uint8_t> bytes = encode_tile(map);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open tile file for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("failed writing tile file: " + path.string());
    }
}

RiskMap read_tile_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw Error("cannot open tile file for reading: " + path.string());
    }
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) {
        throw Error("failed reading tile file: " + path.string());
    }
    return decode_tile(bytes);
}

} // namespace risktrace
