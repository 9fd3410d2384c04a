#ifndef RISKTRACE_TILE_HPP
#define RISKTRACE_TILE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "risktrace/grid_map.hpp"

namespace risktrace {

inline constexpr char kTileMagic[8] = {'R', 'I', 'S', 'K', 'T', 'I', 'L', 'E'};
inline constexpr std::uint16_t kTileFormatVersion = 1;
inline constexpr std::size_t kTileHeaderSize = 98;
inline constexpr std::size_t kTileEntrySize = 24;

/// Serialize a map to the tile format: magic, version, grid spec, kernel
/// parameters, truncation eps, entry count, then (i, j, k, log_q) entries
/// sorted by (k, i, j). All fields little-endian. Deterministic: equal maps
/// produce identical bytes.
std::vector<std::uint8_t> encode_tile(const RiskMap& map);

/// Parse tile bytes back into a map. Format violations throw
/// TileDecodeError carrying a kind (bad_magic, unsupported_version,
/// truncated, unsorted_entries, trailing_bytes); decoded values that break
/// map invariants surface as DomainError from the RiskMap constructor.
RiskMap decode_tile(std::span<const std::uint8_t> bytes);

/// Whole-file convenience wrappers; filesystem failures throw Error.
void write_tile_file(const std::filesystem::path& path, const RiskMap& map);
RiskMap read_tile_file(const std::filesystem::path& path);

} // namespace risktrace

#endif
