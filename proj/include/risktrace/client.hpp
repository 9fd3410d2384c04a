#ifndef RISKTRACE_CLIENT_HPP
#define RISKTRACE_CLIENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "risktrace/grid_map.hpp"
#include "risktrace/protocol.hpp"

namespace risktrace {

/// Bidirectional byte stream the client talks through. Abstract so tests
/// can substitute a loopback that records every outbound byte.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send_all(std::span<const std::uint8_t> bytes) = 0;
    /// Fill the buffer completely or throw TransportError.
    virtual void recv_exact(std::span<std::uint8_t> buffer) = 0;
};

/// Blocking IPv4 TCP connection with a receive timeout.
class TcpTransport : public Transport {
public:
    TcpTransport(const std::string& host, std::uint16_t port, int timeout_seconds = 30);
    ~TcpTransport() override;

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    void send_all(std::span<const std::uint8_t> bytes) override;
    void recv_exact(std::span<std::uint8_t> buffer) override;

private:
    int fd_ = -1;
};

/// What the client tells its user after one evaluate cycle.
struct ClientResult {
    double risk = 0.0;
    bool advise_test = false;
    std::uint64_t map_version = 0;
};

inline constexpr double kDefaultAdviseThreshold = 0.01;

/// Fetch one tile. Outbound bytes are a pure function of the request.
RiskMap client_fetch_tile(Transport& transport, const MapRequest& request,
                          std::uint64_t* served_version = nullptr);

/// Poll the server's published version ids (ascending).
std::vector<std::uint64_t> client_list_versions(Transport& transport);

/// The full client cycle: download the requested tile, then evaluate the
/// trajectory strictly locally. The trajectory influences nothing that is
/// sent; only the returned risk and the advice flag depend on it.
ClientResult client_evaluate(Transport& transport, const MapRequest& request,
                             const Trajectory& local_trajectory,
                             double threshold = kDefaultAdviseThreshold);

} // namespace risktrace

#endif
