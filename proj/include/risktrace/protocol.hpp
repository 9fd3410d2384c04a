#ifndef RISKTRACE_PROTOCOL_HPP
#define RISKTRACE_PROTOCOL_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "risktrace/grid_map.hpp"

namespace risktrace {

/// What a client may ask a map server for: a map version and a rectangular
/// index window. Deliberately coarse, and structurally unable to carry a
/// trajectory: the window is the protocol's only disclosure.
struct MapRequest {
    std::uint64_t map_version = 0; // 0 selects the newest published version
    std::int32_t i_min = 0;
    std::int32_t i_max = 0; // inclusive
    std::int32_t j_min = 0;
    std::int32_t j_max = 0;
    std::int64_t k_min = 0;
    std::int64_t k_max = 0;

    void validate() const; // throws DomainError on an inverted range
    bool operator==(const MapRequest&) const = default;
};

inline constexpr char kRequestMagic[4] = {'R', 'T', 'R', 'Q'};
inline constexpr char kResponseMagic[4] = {'R', 'T', 'R', 'S'};
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kRequestHeaderSize = 12;  // magic, version, opcode, payload_len
inline constexpr std::size_t kResponseHeaderSize = 24; // magic, version, status, map_version, payload_len

enum class Opcode : std::uint16_t {
    list_versions = 1,
    get_tile = 2,
};

enum class Status : std::uint16_t {
    ok = 0,
    malformed = 1,
    unknown_version = 2,
    internal = 3,
};

/// Request encoders. The get_tile bytes are a pure function of the
/// MapRequest argument alone.
std::vector<std::uint8_t> encode_get_tile_request(const MapRequest& request);
std::vector<std::uint8_t> encode_list_versions_request();

struct DecodedRequest {
    Opcode opcode = Opcode::list_versions;
    MapRequest request; // meaningful only for get_tile
};

/// Server-side request parsing; throws ProtocolError on malformed bytes.
DecodedRequest decode_request(std::span<const std::uint8_t> bytes);

struct Response {
    Status status = Status::ok;
    std::uint64_t map_version = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_response(Status status, std::uint64_t map_version,
                                          std::span<const std::uint8_t> payload);
/// Client-side response parsing; throws ProtocolError on malformed bytes.
Response decode_response(std::span<const std::uint8_t> bytes);

/// Version-list payload helpers (u64 count then u64 ids, little-endian).
std::vector<std::uint8_t> encode_version_list(std::span<const std::uint64_t> versions);
std::vector<std::uint64_t> decode_version_list(std::span<const std::uint8_t> payload);

/// Sub-map restricted to the request's index window; spec, parameters, and
/// eps are carried over unchanged, so an empty clip is a valid empty tile.
RiskMap clip_map(const RiskMap& map, const MapRequest& request);

/// Versioned store of published maps. Publishing is an atomic swap onto an
/// immutable snapshot list; handlers work on whatever snapshot they grabbed.
class MapService {
public:
    /// Publish a map; returns its version id (monotonic, starting at 1).
    std::uint64_t publish(RiskMap map);

    std::vector<std::uint64_t> versions() const;

    /// Full request -> response cycle on raw bytes. Never throws for bad
    /// input; protocol violations come back as error-status responses.
    std::vector<std::uint8_t> handle(std::span<const std::uint8_t> request_bytes) const;

private:
    std::shared_ptr<const RiskMap> find(std::uint64_t version, std::uint64_t* actual) const;

    mutable std::mutex mu_;
    std::vector<std::pair<std::uint64_t, std::shared_ptr<const RiskMap>>> published_;
    std::uint64_t next_version_ = 1;
};

} // namespace risktrace

#endif
