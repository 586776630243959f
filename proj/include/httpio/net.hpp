// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HTTPIO_NET_HPP
#define HTTPIO_NET_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace httpio::net {

using Millis = std::chrono::milliseconds;

/// A connected TCP socket with poll-based deadlines. Move-only RAII.
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    ~TcpStream();
    TcpStream(TcpStream&& other) noexcept;
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    /// Resolves and connects within the timeout. Throws ConnectFailed.
    static TcpStream connect(const std::string& host, std::uint16_t port, Millis timeout);

    /// Reads up to n bytes. Returns 0 on orderly EOF. Throws TransportError
    /// on socket errors; ECONNRESET is reported as EOF-like close only when
    /// nothing is pending, otherwise as an error.
    std::size_t read_some(char* buf, std::size_t n, Millis timeout);

    void write_all(std::string_view data, Millis timeout);

    /// True when the peer has closed or the socket errored; used to drop
    /// stale keep-alive sessions before reuse.
    bool peer_closed() const;

    /// Waits until the socket is readable (or closed). False on timeout.
    bool wait_readable(Millis timeout) const;

    void close();
    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

    /// Close with RST (SO_LINGER 0). The testbed uses this for scripted
    /// "connection reset" outages.
    void abort();

private:
    int fd_ = -1;
};

/// Listening socket for the testbed.
class Listener {
public:
    Listener() = default;
    ~Listener();
    Listener(Listener&& other) noexcept;
    Listener& operator=(Listener&& other) noexcept;
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    /// Binds and listens. Port 0 selects an ephemeral port. Throws BindFailed.
    static Listener bind(const std::string& host, std::uint16_t port);

    std::uint16_t port() const { return port_; }

    /// Blocks until a connection arrives or the listener is closed.
    std::optional<TcpStream> accept();

    void close();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace httpio::net

#endif  // HTTPIO_NET_HPP
