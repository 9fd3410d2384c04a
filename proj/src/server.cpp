#include "risktrace/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "risktrace/errors.hpp"

namespace risktrace {

namespace {

// Requests are tiny (largest defined payload is 40 bytes); anything bigger
// is garbage and refused before allocation.
constexpr std::uint32_t kMaxRequestPayload = 4096;

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::read(fd, buf + got, n - got);
        if (r == 0) return false;
        if (r < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

bool write_all(int fd, const std::uint8_t* buf, std::size_t n) {
    std::size_t sent = 0;
    while (sent < n) {
        const ssize_t r = ::write(fd, buf + sent, n - sent);
        if (r < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        sent += static_cast<std::size_t>(r);
    }
    return true;
}

std::uint32_t parse_u32_le(const std::uint8_t* b) {
    std::uint32_t v = 0;
    for (int n = 0; n < 4; ++n) v |= static_cast<std::uint32_t>(b[n]) << (8 * n);
    return v;
}

} // namespace

TileServer::TileServer(const MapService& service, const std::string& bind_address,
                       std::uint16_t port)
    : service_(service) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw TransportError("socket: " + std::string(std::strerror(errno)));
    }
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw TransportError("invalid bind address: " + bind_address);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw TransportError("bind " + bind_address + ": " + err);
    }
    if (::listen(listen_fd_, 16) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw TransportError("listen: " + err);
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);

    acceptor_ = std::thread(&TileServer::accept_loop, this);
}

TileServer::~TileServer() { stop(); }

void TileServer::stop() {
    if (stopped_) return;
    stopped_ = true;
    ::shutdown(listen_fd_, SHUT_RDWR);
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    std::lock_guard<std::mutex> lock(workers_mu_);
    for (std::thread& w : workers_) {
        if (w.joinable()) w.join();
    }
    workers_.clear();
}

void TileServer::accept_loop() {
    for (;;) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return; // listener shut down
        }
        std::lock_guard<std::mutex> lock(workers_mu_);
        workers_.emplace_back(&TileServer::serve_connection, this, fd);
    }
}

void TileServer::serve_connection(int fd) const {
    timeval tv{};
    tv.tv_sec = 30; // a stalled peer must not pin the worker forever
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));

    std::uint8_t header[kRequestHeaderSize];
    if (!read_exact(fd, header, sizeof(header))) {
        ::close(fd);
        return;
    }
    const std::uint32_t payload_len = parse_u32_le(header + 8);
    if (payload_len > kMaxRequestPayload) {
        const std::vector<std::uint8_t> refusal = encode_response(Status::malformed, 0, {});
        write_all(fd, refusal.data(), refusal.size());
        ::close(fd);
        return;
    }
    std::vector<std::uint8_t> request(header, header + sizeof(header));
    request.resize(sizeof(header) + payload_len);
    if (read_exact(fd, request.data() + sizeof(header), payload_len)) {
        const std::vector<std::uint8_t> response = service_.handle(request);
        write_all(fd, response.data(), response.size());
    }
    ::close(fd);
}

} // namespace risktrace
