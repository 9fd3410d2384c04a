#include "risktrace/client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "risktrace/errors.hpp"
#include "risktrace/tile.hpp"

namespace risktrace {

TcpTransport::TcpTransport(const std::string& host, std::uint16_t port,
                           int timeout_seconds) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) {
        throw TransportError("socket: " + std::string(std::strerror(errno)));
    }
    timeval tv{};
    tv.tv_sec = timeout_seconds;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw TransportError("invalid IPv4 address: " + host);
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
        throw TransportError("connect " + host + ": " + err);
    }
}

TcpTransport::~TcpTransport() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpTransport::send_all(std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const ssize_t r = ::send(fd_, bytes.data() + sent, bytes.size() - sent, 0);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError("send: " + std::string(std::strerror(errno)));
        }
        sent += static_cast<std::size_t>(r);
    }
}

void TcpTransport::recv_exact(std::span<std::uint8_t> buffer) {
    std::size_t got = 0;
    while (got < buffer.size()) {
        const ssize_t r = ::recv(fd_, buffer.data() + got, buffer.size() - got, 0);
        if (r == 0) {
            throw TransportError("connection closed mid-response");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError("recv: " + std::string(std::strerror(errno)));
        }
        got += static_cast<std::size_t>(r);
    }
}

namespace {

std::uint64_t parse_u64_le(const std::uint8_t* b) {
    std::uint64_t v = 0;
    for (int n = 0; n < 8; ++n) v |= static_cast<std::uint64_t>(b[n]) << (8 * n);
    return v;
}

// One request/response exchange: send fully, read the fixed header, then
// read exactly the advertised payload.
Response round_trip(Transport& transport, const std::vector<std::uint8_t>& request) {
    transport.send_all(request);
    std::vector<std::uint8_t> response(kResponseHeaderSize);
    transport.recv_exact(response);
    const std::uint64_t payload_len = parse_u64_le(response.data() + 16);
    response.resize(kResponseHeaderSize + payload_len);
    if (payload_len > 0) {
        transport.recv_exact(
            std::span<std::uint8_t>(response).subspan(kResponseHeaderSize));
    }
    return decode_response(response);
}

void require_ok(const Response& response) {
    switch (response.status) {
    case Status::ok:
        return;
    case Status::malformed:
        throw ProtocolError("server rejected the request as malformed");
    case Status::unknown_version:
        throw ProtocolError("server does not have map version " +
                            std::to_string(response.map_version));
    case Status::internal:
        throw ProtocolError("server reported an internal error");
    }
    throw ProtocolError("unknown response status");
}

} // namespace

RiskMap client_fetch_tile(Transport& transport, const MapRequest& request,
                          std::uint64_t* served_version) {
    const Response response = round_trip(transport, encode_get_tile_request(request));
    require_ok(response);
    if (served_version) *served_version = response.map_version;
    return decode_tile(response.payload);
}

std::vector<std::uint64_t> client_list_versions(Transport& transport) {
    const Response response = round_trip(transport, encode_list_versions_request());
    require_ok(response);
    return decode_version_list(response.payload);
}

ClientResult client_evaluate(Transport& transport, const MapRequest& request,
                             const Trajectory& local_trajectory, double threshold) {
    ClientResult out;
    const RiskMap tile = client_fetch_tile(transport, request, &out.map_version);
    out.risk = evaluate_trajectory(tile, local_trajectory);
    out.advise_test = out.risk >= threshold;
    return out;
}

} // namespace risktrace
