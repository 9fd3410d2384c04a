#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "golden_fixture.hpp"
#include "risktrace/errors.hpp"
#include "risktrace/rng.hpp"
#include "risktrace/tile.hpp"
#include "test_support.hpp"

using namespace risktrace;

namespace {

// Test-local little-endian readers, independent of the codec under test.
std::uint64_t le64_at(const std::vector<std::uint8_t>& b, std::size_t off) {
    std::uint64_t v = 0;
    for (int n = 0; n < 8; ++n) v |= static_cast<std::uint64_t>(b[off + n]) << (8 * n);
    return v;
}

double f64_at(const std::vector<std::uint8_t>& b, std::size_t off) {
    return std::bit_cast<double>(le64_at(b, off));
}

RiskMap random_map(RngStream& rng, std::size_t n_entries) {
    std::vector<MapEntry> entries;
    std::int64_t k = rng.uniform_int(-50, 0);
    std::int32_t i = 0, j = 0;
    for (std::size_t n = 0; n < n_entries; ++n) {
        // Strictly increasing (k, i, j) walk with occasional k jumps.
        if (rng.uniform01() < 0.3) {
            k += rng.uniform_int(1, 3);
            i = static_cast<std::int32_t>(rng.uniform_int(-1000, 1000));
            j = static_cast<std::int32_t>(rng.uniform_int(-1000, 1000));
        } else {
            j += static_cast<std::int32_t>(rng.uniform_int(1, 100));
        }
        entries.push_back({{i, j, k}, -rng.uniform(1e-9, 30.0)});
    }
    std::sort(entries.begin(), entries.end(),
              [](const MapEntry& a, const MapEntry& b) { return a.index < b.index; });
    entries.erase(std::unique(entries.begin(), entries.end(),
                              [](const MapEntry& a, const MapEntry& b) {
                                  return a.index == b.index;
                              }),
                  entries.end());
    const GridSpec spec{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform_int(-100, 100),
                        1.0, 1.0};
    const RiskParams params =
        RiskParams::from_scales(rng.uniform(0.001, 0.9), rng.uniform(0.5, 2.0),
                                rng.uniform(0.5, 2.0), rng.uniform(5.0, 200.0));
    return RiskMap(spec, params, 1e-9, std::move(entries));
}

bool maps_equal(const RiskMap& a, const RiskMap& b) {
    if (!(a.spec() == b.spec()) || !(a.params() == b.params()) ||
        a.truncation_eps() != b.truncation_eps() || a.size() != b.size()) {
        return false;
    }
    for (std::size_t n = 0; n < a.size(); ++n) {
        if (!(a.entries()[n].index == b.entries()[n].index)) return false;
        // Bit-exact, not approximate.
        if (std::bit_cast<std::uint64_t>(a.entries()[n].log_q) !=
            std::bit_cast<std::uint64_t>(b.entries()[n].log_q)) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("tile header layout: fixed offsets, little-endian") {
    const GridSpec spec{-3.5, 12.25, 777, 1.0, 1.0};
    const RiskParams params = RiskParams::from_scales(0.25, 1.0, 1.5, 50.0);
    std::vector<MapEntry> entries{{{7, -2, 1234}, std::log(0.5)}};
    const RiskMap map(spec, params, 0.125, std::move(entries));
    const std::vector<std::uint8_t> bytes = encode_tile(map);

    REQUIRE(bytes.size() == kTileHeaderSize + kTileEntrySize);
    CHECK(std::memcmp(bytes.data(), "RISKTILE", 8) == 0);
    CHECK((bytes[8] | bytes[9] << 8) == 1); // version
    CHECK(f64_at(bytes, 10) == -3.5);       // origin_x
    CHECK(f64_at(bytes, 18) == 12.25);      // origin_y
    CHECK(static_cast<std::int64_t>(le64_at(bytes, 26)) == 777); // origin_t
    CHECK(f64_at(bytes, 34) == 1.0);        // cell_size_xy
    CHECK(f64_at(bytes, 42) == 1.0);        // cell_size_t
    CHECK(f64_at(bytes, 50) == 0.25);       // p0
    CHECK(f64_at(bytes, 58) == 1.0);        // sigma_x
    CHECK(f64_at(bytes, 66) == 1.5);        // sigma_y
    CHECK(f64_at(bytes, 74) == 50.0);       // sigma_t
    CHECK(f64_at(bytes, 82) == 0.125);      // truncation_eps
    CHECK(le64_at(bytes, 90) == 1);         // entry_count
    // Entry: i, j at 32 bits, then k, then log_q.
    std::int32_t i32v;
    std::memcpy(&i32v, bytes.data() + 98, 4);
    CHECK(i32v == 7);
    std::memcpy(&i32v, bytes.data() + 102, 4);
    CHECK(i32v == -2);
    CHECK(static_cast<std::int64_t>(le64_at(bytes, 106)) == 1234);
    CHECK(f64_at(bytes, 114) == std::log(0.5));
}

TEST_CASE("empty map encodes to a header-only tile") {
    const RiskMap map(GridSpec{}, RiskParams::from_scales(0.01, 1, 1, 100), 1e-9, {});
    const std::vector<std::uint8_t> bytes = encode_tile(map);
    REQUIRE(bytes.size() == kTileHeaderSize);
    CHECK(le64_at(bytes, 90) == 0);
    const RiskMap back = decode_tile(bytes);
    CHECK(maps_equal(map, back));
}

TEST_CASE("one-entry map round-trips bit-exact") {
    const GridSpec spec{1.5, -2.5, -40, 1.0, 1.0};
    std::vector<MapEntry> entries{{{-1, 3, -39}, -1.0e-8}};
    const RiskMap map(spec, RiskParams::from_scales(0.3, 0.7, 0.9, 33.0), 1e-10,
                      std::move(entries));
    CHECK(maps_equal(map, decode_tile(encode_tile(map))));
}

TEST_CASE("10k-entry randomized map: bit-exact round trip, deterministic bytes") {
    RngStream rng(77);
    const RiskMap map = random_map(rng, 10000);
    const std::vector<std::uint8_t> first = encode_tile(map);
    const std::vector<std::uint8_t> second = encode_tile(map);
    CHECK(first == second);
    const RiskMap back = decode_tile(first);
    CHECK(maps_equal(map, back));
    CHECK(encode_tile(back) == first);
}

TEST_CASE("decode rejects bad magic") {
    RngStream rng(3);
    std::vector<std::uint8_t> bytes = encode_tile(random_map(rng, 5));
    bytes[0] = 'X';
    try {
        decode_tile(bytes);
        FAIL("expected TileDecodeError");
    } catch (const TileDecodeError& e) {
        CHECK(e.kind() == TileErrorKind::bad_magic);
    }
}

TEST_CASE("decode rejects unknown version") {
    RngStream rng(4);
    std::vector<std::uint8_t> bytes = encode_tile(random_map(rng, 5));
    bytes[8] = 2;
    try {
        decode_tile(bytes);
        FAIL("expected TileDecodeError");
    } catch (const TileDecodeError& e) {
        CHECK(e.kind() == TileErrorKind::unsupported_version);
    }
}

TEST_CASE("decode rejects truncation at every boundary") {
    RngStream rng(5);
    const std::vector<std::uint8_t> full = encode_tile(random_map(rng, 8));
    // Cut inside the magic, the header, and the entry block.
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{60},
                            kTileHeaderSize + 3, full.size() - 1}) {
        std::vector<std::uint8_t> bytes(full.begin(),
                                        full.begin() + static_cast<std::ptrdiff_t>(cut));
        try {
            decode_tile(bytes);
            FAIL("expected TileDecodeError at cut ", cut);
        } catch (const TileDecodeError& e) {
            CHECK(e.kind() == TileErrorKind::truncated);
        }
    }
}

TEST_CASE("decode rejects an entry count larger than the payload") {
    RngStream rng(6);
    std::vector<std::uint8_t> bytes = encode_tile(random_map(rng, 3));
    bytes[90] = 0xff; // inflate entry_count
    bytes[97] = 0x7f;
    try {
        decode_tile(bytes);
        FAIL("expected TileDecodeError");
    } catch (const TileDecodeError& e) {
        CHECK(e.kind() == TileErrorKind::truncated);
    }
}

TEST_CASE("decode rejects unsorted and duplicate entries") {
    RngStream rng(7);
    const RiskMap map = random_map(rng, 6);
    REQUIRE(map.size() >= 2);

    std::vector<std::uint8_t> swapped = encode_tile(map);
    std::vector<std::uint8_t> tmp(kTileEntrySize);
    auto* base = swapped.data() + kTileHeaderSize;
    std::memcpy(tmp.data(), base, kTileEntrySize);
    std::memcpy(base, base + kTileEntrySize, kTileEntrySize);
    std::memcpy(base + kTileEntrySize, tmp.data(), kTileEntrySize);
    try {
        decode_tile(swapped);
        FAIL("expected TileDecodeError");
    } catch (const TileDecodeError& e) {
        CHECK(e.kind() == TileErrorKind::unsorted_entries);
    }

    std::vector<std::uint8_t> dup = encode_tile(map);
    std::memcpy(dup.data() + kTileHeaderSize + kTileEntrySize, dup.data() + kTileHeaderSize,
                kTileEntrySize);
    try {
        decode_tile(dup);
        FAIL("expected TileDecodeError");
    } catch (const TileDecodeError& e) {
        CHECK(e.kind() == TileErrorKind::unsorted_entries);
    }
}

TEST_CASE("decode rejects trailing bytes") {
    RngStream rng(8);
    std::vector<std::uint8_t> bytes = encode_tile(random_map(rng, 4));
    bytes.push_back(0);
    try {
        decode_tile(bytes);
        FAIL("expected TileDecodeError");
    } catch (const TileDecodeError& e) {
        CHECK(e.kind() == TileErrorKind::trailing_bytes);
    }
}

TEST_CASE("decoded semantic violations surface as map domain errors") {
    RngStream rng(9);
    std::vector<std::uint8_t> bytes = encode_tile(random_map(rng, 2));
    // Overwrite the first entry's log_q with +1.0 (invalid: must be < 0).
    const double bad = 1.0;
    std::memcpy(bytes.data() + kTileHeaderSize + 16, &bad, 8);
    CHECK_THROWS_AS(decode_tile(bytes), DomainError);
}

TEST_CASE("tile files: write, read, and error on a missing path") {
    RngStream rng(10);
    const RiskMap map = random_map(rng, 100);
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "risktrace_tile_roundtrip.tile";
    write_tile_file(path, map);
    const RiskMap back = read_tile_file(path);
    CHECK(maps_equal(map, back));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_tile_file(path), Error);
}

TEST_CASE("serialized form carries no person identifiers") {
    const RiskMap map = test::golden_map();
    const std::vector<std::uint8_t> bytes = encode_tile(map);
    const std::string haystack(bytes.begin(), bytes.end());
    CHECK(haystack.find("fixture-a") == std::string::npos);
    CHECK(haystack.find("fixture-b") == std::string::npos);
    CHECK(haystack.find("fixture") == std::string::npos);
    // Size accounts for exactly header + entries: no room for hidden fields.
    CHECK(bytes.size() == kTileHeaderSize + map.size() * kTileEntrySize);
}

TEST_CASE("golden tile fixture decodes identically across releases") {
    const char* path = GOLDEN_TILE_PATH;
    REQUIRE(std::filesystem::exists(path));
    const RiskMap fixture = read_tile_file(path);
    const RiskMap expected = test::golden_map();
    CHECK(maps_equal(fixture, expected));

    // The committed bytes must match a fresh encode byte-for-byte.
    std::ifstream in(path, std::ios::binary);
    std::vector<std::uint8_t> committed((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
    CHECK(committed == encode_tile(expected));
}
