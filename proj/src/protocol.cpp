#include "risktrace/protocol.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "risktrace/errors.hpp"
#include "risktrace/tile.hpp"

namespace risktrace {

namespace {

constexpr std::size_t kGetTilePayloadSize = 40; // version + 4x i32 + 2x i64

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int n = 0; n < 4; ++n) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * n)));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int n = 0; n < 8; ++n) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * n)));
    }
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | b[off + 1] << 8);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint32_t v = 0;
    for (int n = 0; n < 4; ++n) v |= static_cast<std::uint32_t>(b[off + n]) << (8 * n);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint64_t v = 0;
    for (int n = 0; n < 8; ++n) v |= static_cast<std::uint64_t>(b[off + n]) << (8 * n);
    return v;
}

std::vector<std::uint8_t> encode_request(Opcode opcode,
                                         std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> out;
    out.reserve(kRequestHeaderSize + payload.size());
    for (char c : kRequestMagic) out.push_back(static_cast<std::uint8_t>(c));
    put_u16(out, kProtocolVersion);
    put_u16(out, static_cast<std::uint16_t>(opcode));
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

} // namespace

void MapRequest::validate() const {
    if (i_min > i_max || j_min > j_max || k_min > k_max) {
        throw DomainError("MapRequest: index ranges must be well-ordered");
    }
}

std::vector<std::uint8_t> encode_get_tile_request(const MapRequest& request) {
    request.validate();
    std::vector<std::uint8_t> payload;
    payload.reserve(kGetTilePayloadSize);
    put_u64(payload, request.map_version);
    put_u32(payload, static_cast<std::uint32_t>(request.i_min));
    put_u32(payload, static_cast<std::uint32_t>(request.i_max));
    put_u32(payload, static_cast<std::uint32_t>(request.j_min));
    put_u32(payload, static_cast<std::uint32_t>(request.j_max));
    put_u64(payload, static_cast<std::uint64_t>(request.k_min));
    put_u64(payload, static_cast<std::uint64_t>(request.k_max));
    return encode_request(Opcode::get_tile, payload);
}

std::vector<std::uint8_t> encode_list_versions_request() {
    return encode_request(Opcode::list_versions, {});
}

DecodedRequest decode_request(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kRequestHeaderSize) {
        throw ProtocolError("request shorter than its header");
    }
    if (std::memcmp(bytes.data(), kRequestMagic, sizeof(kRequestMagic)) != 0) {
        throw ProtocolError("request magic mismatch");
    }
    if (get_u16(bytes, 4) != kProtocolVersion) {
        throw ProtocolError("unsupported protocol version");
    }
    const std::uint16_t opcode = get_u16(bytes, 6);
    const std::uint32_t payload_len = get_u32(bytes, 8);
    if (bytes.size() != kRequestHeaderSize + payload_len) {
        throw ProtocolError("request length does not match header");
    }
    DecodedRequest out;
    switch (opcode) {
    case static_cast<std::uint16_t>(Opcode::list_versions):
        if (payload_len != 0) throw ProtocolError("list_versions carries no payload");
        out.opcode = Opcode::list_versions;
        return out;
    case static_cast<std::uint16_t>(Opcode::get_tile): {
        if (payload_len != kGetTilePayloadSize) {
            throw ProtocolError("get_tile payload must be exactly " +
                                std::to_string(kGetTilePayloadSize) + " bytes");
        }
        const std::size_t p = kRequestHeaderSize;
        out.opcode = Opcode::get_tile;
        out.request.map_version = get_u64(bytes, p);
        out.request.i_min = static_cast<std::int32_t>(get_u32(bytes, p + 8));
        out.request.i_max = static_cast<std::int32_t>(get_u32(bytes, p + 12));
        out.request.j_min = static_cast<std::int32_t>(get_u32(bytes, p + 16));
        out.request.j_max = static_cast<std::int32_t>(get_u32(bytes, p + 20));
        out.request.k_min = static_cast<std::int64_t>(get_u64(bytes, p + 24));
        out.request.k_max = static_cast<std::int64_t>(get_u64(bytes, p + 32));
        try {
            out.request.validate();
        } catch (const DomainError& e) {
            throw ProtocolError(e.what());
        }
        return out;
    }
    default:
        throw ProtocolError("unknown opcode " + std::to_string(opcode));
    }
}

std::vector<std::uint8_t> encode_response(Status status, std::uint64_t map_version,
                                          std::span<const std::uint8_t> payload) {
    std::vector<std::uint8_t> out;
    out.reserve(kResponseHeaderSize + payload.size());
    for (char c : kResponseMagic) out.push_back(static_cast<std::uint8_t>(c));
    put_u16(out, kProtocolVersion);
    put_u16(out, static_cast<std::uint16_t>(status));
    put_u64(out, map_version);
    put_u64(out, static_cast<std::uint64_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Response decode_response(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kResponseHeaderSize) {
        throw ProtocolError("response shorter than its header");
    }
    if (std::memcmp(bytes.data(), kResponseMagic, sizeof(kResponseMagic)) != 0) {
        throw ProtocolError("response magic mismatch");
    }
    if (get_u16(bytes, 4) != kProtocolVersion) {
        throw ProtocolError("unsupported protocol version");
    }
    const std::uint16_t status = get_u16(bytes, 6);
    if (status > static_cast<std::uint16_t>(Status::internal)) {
        throw ProtocolError("unknown response status " + std::to_string(status));
    }
    Response out;
    out.status = static_cast<Status>(status);
    out.map_version = get_u64(bytes, 8);
    const std::uint64_t payload_len = get_u64(bytes, 16);
    if (bytes.size() != kResponseHeaderSize + payload_len) {
        throw ProtocolError("response length does not match header");
    }
    out.payload.assign(bytes.begin() + kResponseHeaderSize, bytes.end());
    return out;
}

std::vector<std::uint8_t> encode_version_list(std::span<const std::uint64_t> versions) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + 8 * versions.size());
    put_u64(out, versions.size());
    for (std::uint64_t v : versions) put_u64(out, v);
    return out;
}

std::vector<std::uint64_t> decode_version_list(std::span<const std::uint8_t> payload) {
    if (payload.size() < 8) throw ProtocolError("version list shorter than its count");
    const std::uint64_t count = get_u64(payload, 0);
    if (payload.size() != 8 + 8 * count) {
        throw ProtocolError("version list length does not match its count");
    }
    std::vector<std::uint64_t> out;
    out.reserve(count);
    for (std::uint64_t n = 0; n < count; ++n) out.push_back(get_u64(payload, 8 + 8 * n));
    return out;
}

RiskMap clip_map(const RiskMap& map, const MapRequest& request) {
    request.validate();
    std::vector<MapEntry> kept;
    for (const MapEntry& e : map.entries()) {
        if (e.index.i >= request.i_min && e.index.i <= request.i_max &&
            e.index.j >= request.j_min && e.index.j <= request.j_max &&
            e.index.k >= request.k_min && e.index.k <= request.k_max) {
            kept.push_back(e);
        }
    }
    return RiskMap(map.spec(), map.params(), map.truncation_eps(), std::move(kept));
}

std::uint64_t MapService::publish(RiskMap map) {
    auto snapshot = std::make_shared<const RiskMap>(std::move(map));
    std::lock_guard<std::mutex> lock(mu_);
    const std::uint64_t version = next_version_++;
    published_.emplace_back(version, std::move(snapshot));
    return version;
}

std::vector<std::uint64_t> MapService::versions() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::uint64_t> out;
    out.reserve(published_.size());
    for (const auto& [version, map] : published_) out.push_back(version);
    return out;
}

std::shared_ptr<const RiskMap> MapService::find(std::uint64_t version,
                                                std::uint64_t* actual) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (published_.empty()) return nullptr;
    if (version == 0) {
        *actual = published_.back().first;
        return published_.back().second;
    }
    for (const auto& [v, map] : published_) {
        if (v == version) {
            *actual = v;
            return map;
        }
    }
    return nullptr;
}

std::vector<std::uint8_t> MapService::handle(std::span<const std::uint8_t> request_bytes) const {
    DecodedRequest decoded;
    try {
        decoded = decode_request(request_bytes);
    } catch (const ProtocolError&) {
        return encode_response(Status::malformed, 0, {});
    }
    try {
        if (decoded.opcode == Opcode::list_versions) {
            const std::vector<std::uint64_t> vs = versions();
            const std::uint64_t latest = vs.empty() ? 0 : vs.back();
            return encode_response(Status::ok, latest, encode_version_list(vs));
        }
        std::uint64_t actual = 0;
        const std::shared_ptr<const RiskMap> map = find(decoded.request.map_version, &actual);
        if (!map) {
            return encode_response(Status::unknown_version, decoded.request.map_version, {});
        }
        const std::vector<std::uint8_t> tile = encode_tile(clip_map(*map, decoded.request));
        return encode_response(Status::ok, actual, tile);
    } catch (...) {
        return encode_response(Status::internal, 0, {});
    }
}

} // namespace risktrace
