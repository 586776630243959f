// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "httpio/errors.hpp"

namespace httpio::net {

namespace {

using Clock = std::chrono::steady_clock;

Millis remaining(Clock::time_point deadline) {
    auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
    return left.count() < 0 ? Millis(0) : left;
}

int poll_one(int fd, short events, Millis timeout) {
    struct pollfd pfd{};
    pfd.fd = fd;
    pfd.events = events;
    int rc;
    do {
        rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    } while (rc < 0 && errno == EINTR);
    return rc;
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

TcpStream::~TcpStream() { close(); }

TcpStream::TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port, Millis timeout) {
    auto deadline = Clock::now() + timeout;

    struct addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    std::string host_for_lookup = host;
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']')
        host_for_lookup = host.substr(1, host.size() - 2);
    int rc = ::getaddrinfo(host_for_lookup.c_str(), std::to_string(port).c_str(), &hints, &res);
    if (rc != 0) throw ConnectFailed(host + ": " + gai_strerror(rc));

    std::string last_error = "no addresses";
    for (struct addrinfo* ai = res; ai; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_error = errno_text();
            continue;
        }
        int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc < 0 && errno == EINPROGRESS) {
            rc = poll_one(fd, POLLOUT, remaining(deadline));
            if (rc == 0) {
                ::close(fd);
                last_error = "connect timeout";
                continue;
            }
            int err = 0;
            socklen_t len = sizeof(err);
            ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
            if (err != 0) {
                ::close(fd);
                last_error = std::strerror(err);
                continue;
            }
        } else if (rc < 0) {
            last_error = errno_text();
            ::close(fd);
            continue;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        ::freeaddrinfo(res);
        return TcpStream(fd);
    }
    ::freeaddrinfo(res);
    throw ConnectFailed(host + ":" + std::to_string(port) + ": " + last_error);
}

std::size_t TcpStream::read_some(char* buf, std::size_t n, Millis timeout) {
    if (fd_ < 0) throw TransportError("read on closed stream");
    for (;;) {
        ssize_t got = ::recv(fd_, buf, n, MSG_DONTWAIT);
        if (got > 0) return static_cast<std::size_t>(got);
        if (got == 0) return 0;
        if (errno == ECONNRESET) throw TransportError("connection reset by peer");
        if (errno == EINTR) continue;
        if (errno != EAGAIN && errno != EWOULDBLOCK) throw TransportError("recv: " + errno_text());
        int rc = poll_one(fd_, POLLIN, timeout);
        if (rc == 0) throw TransportError("read timeout");
        if (rc < 0) throw TransportError("poll: " + errno_text());
    }
}

void TcpStream::write_all(std::string_view data, Millis timeout) {
    if (fd_ < 0) throw TransportError("write on closed stream");
    auto deadline = Clock::now() + timeout;
    while (!data.empty()) {
        ssize_t sent = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL | MSG_DONTWAIT);
        if (sent > 0) {
            data.remove_prefix(static_cast<std::size_t>(sent));
            continue;
        }
        if (sent < 0 && errno == EINTR) continue;
        if (sent < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
            int rc = poll_one(fd_, POLLOUT, remaining(deadline));
            if (rc == 0) throw TransportError("write timeout");
            if (rc < 0) throw TransportError("poll: " + errno_text());
            continue;
        }
        throw TransportError("send: " + errno_text());
    }
}

bool TcpStream::wait_readable(Millis timeout) const {
    if (fd_ < 0) return true;
    return poll_one(fd_, POLLIN, timeout) != 0;
}

bool TcpStream::peer_closed() const {
    if (fd_ < 0) return true;
    char probe;
    ssize_t rc = ::recv(fd_, &probe, 1, MSG_PEEK | MSG_DONTWAIT);
    if (rc == 0) return true;                                      // orderly close
    if (rc < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return false;
    if (rc < 0) return true;                                       // errored socket
    return true;  // unread data on an idle connection: protocol desync, drop it
}

void TcpStream::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void TcpStream::abort() {
    if (fd_ >= 0) {
        struct linger lg{1, 0};
        ::setsockopt(fd_, SOL_SOCKET, SO_LINGER, &lg, sizeof(lg));
        ::close(fd_);
        fd_ = -1;
    }
}

Listener::~Listener() { close(); }

Listener::Listener(Listener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
    other.fd_ = -1;
}

Listener& Listener::operator=(Listener&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        port_ = other.port_;
        other.fd_ = -1;
    }
    return *this;
}

Listener Listener::bind(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw BindFailed(errno_text());
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    struct sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw BindFailed("bad bind address '" + host + "'");
    }
    if (::bind(fd, reinterpret_cast<struct sockaddr*>(&addr), sizeof(addr)) < 0) {
        std::string err = errno_text();
        ::close(fd);
        throw BindFailed(host + ":" + std::to_string(port) + ": " + err);
    }
    if (::listen(fd, 128) < 0) {
        std::string err = errno_text();
        ::close(fd);
        throw BindFailed("listen: " + err);
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<struct sockaddr*>(&addr), &len);
    Listener l;
    l.fd_ = fd;
    l.port_ = ntohs(addr.sin_port);
    return l;
}

std::optional<TcpStream> Listener::accept() {
    for (;;) {
        int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return TcpStream(fd);
        }
        if (errno == EINTR) continue;
        return std::nullopt;  // listener closed or fatal error
    }
}

void Listener::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

}  // namespace httpio::net
