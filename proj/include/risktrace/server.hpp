#ifndef RISKTRACE_SERVER_HPP
#define RISKTRACE_SERVER_HPP

#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "risktrace/protocol.hpp"

namespace risktrace {

/// TCP endpoint serving a MapService: one request/response exchange per
/// connection, each connection handled on its own thread against immutable
/// map snapshots. Bind to port 0 for an ephemeral port (see port()).
class TileServer {
public:
    TileServer(const MapService& service, const std::string& bind_address,
               std::uint16_t port);
    ~TileServer();

    TileServer(const TileServer&) = delete;
    TileServer& operator=(const TileServer&) = delete;

    std::uint16_t port() const { return port_; }

    /// Close the listener and join all worker threads. Idempotent.
    void stop();

private:
    void accept_loop();
    void serve_connection(int fd) const;

    const MapService& service_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::thread acceptor_;
    std::mutex workers_mu_;
    std::vector<std::thread> workers_;
    bool stopped_ = false;
};

} // namespace risktrace

#endif
