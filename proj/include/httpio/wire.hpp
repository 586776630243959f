// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// HTTP/1.1 message framing shared by the client modules and the testbed
// server: header map, request serialization, response head parsing, and body
// readers for the three framings (content-length, chunked, read-to-close).

#ifndef HTTPIO_WIRE_HPP
#define HTTPIO_WIRE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "httpio/net.hpp"

namespace httpio::wire {

using net::Millis;

/// Ordered header list with case-insensitive name lookup.
class Headers {
public:
    void add(std::string name, std::string value);
    void set(std::string name, std::string value);  // replace first / add
    std::optional<std::string_view> get(std::string_view name) const;
    std::vector<std::string_view> get_all(std::string_view name) const;
    /// True when any value of `name` contains `token` as a comma-separated
    /// element (case-insensitive). Used for Connection: close / keep-alive.
    bool has_token(std::string_view name, std::string_view token) const;
    std::optional<std::uint64_t> content_length() const;  // nullopt if absent/bad

    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

struct Request {
    std::string method;
    std::string target;
    Headers headers;
    std::string_view body;
};

struct ResponseHead {
    int status = 0;
    std::string reason;
    Headers headers;
    bool http11 = true;
};

/// Abstract pull source of bytes; read() returns 0 at end of stream.
class ByteSource {
public:
    virtual ~ByteSource() = default;
    virtual std::size_t read(char* dst, std::size_t n) = 0;
};

/// ByteSource over an in-memory buffer (tests, composed bodies).
class MemorySource : public ByteSource {
public:
    explicit MemorySource(std::string_view data) : data_(data) {}
    std::size_t read(char* dst, std::size_t n) override;

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

/// Buffered connection: a TcpStream plus a read buffer that persists across
/// requests on the same keep-alive connection.
class Connection {
public:
    explicit Connection(net::TcpStream stream) : stream_(std::move(stream)) {}

    void send_request(const Request& req, Millis timeout);

    /// Reads and parses the status line and headers. Throws TransportError on
    /// timeouts/EOF and on oversized or malformed heads.
    ResponseHead read_response_head(Millis timeout);

    /// Reads one CRLF-terminated line (CRLF stripped). max_len guards
    /// adversarial peers.
    std::string read_line(Millis timeout, std::size_t max_len = 16 * 1024);

    /// Buffered read of up to n bytes; 0 on EOF.
    std::size_t read_raw(char* dst, std::size_t n, Millis timeout);

    net::TcpStream& stream() { return stream_; }
    bool has_buffered() const { return buffer_pos_ < buffer_.size(); }
    bool idle_and_live() const {
        return stream_.valid() && !has_buffered() && !stream_.peer_closed();
    }

private:
    bool fill(Millis timeout);  // false on EOF

    net::TcpStream stream_;
    std::string buffer_;
    std::size_t buffer_pos_ = 0;
};

/// Streaming body reader applying the response framing. Also the ByteSource
/// fed to the multipart parser.
class BodyReader : public ByteSource {
public:
    enum class Framing { none, content_length, chunked, until_close };

    /// Selects the framing per RFC 7230 §3.3.3 for a response to `method`.
    BodyReader(Connection& conn, const ResponseHead& head, std::string_view method,
               Millis timeout);

    std::size_t read(char* dst, std::size_t n) override;

    /// Body consumed to its framed end (EOF counts for until_close).
    bool complete() const { return complete_; }
    Framing framing() const { return framing_; }
    std::uint64_t bytes_read() const { return bytes_read_; }
    std::optional<std::uint64_t> declared_length() const { return declared_; }

    /// Reads and discards the remainder. Returns false (leaving the
    /// connection poisoned for reuse) if more than max_bytes remain.
    bool drain(std::uint64_t max_bytes);

    /// Reads the whole remaining body, failing once the size would exceed
    /// max_bytes. Throws TransportError on framing violations.
    std::string read_all(std::uint64_t max_bytes);

private:
    std::size_t read_plain(char* dst, std::size_t n);
    std::size_t read_chunked(char* dst, std::size_t n);

    Connection& conn_;
    Millis timeout_;
    Framing framing_ = Framing::none;
    std::optional<std::uint64_t> declared_;
    std::uint64_t remaining_ = 0;        // content_length framing
    std::uint64_t chunk_remaining_ = 0;  // chunked framing
    bool chunked_done_ = false;
    bool complete_ = false;
    std::uint64_t bytes_read_ = 0;
};

/// True when the response allows the connection to be reused afterwards,
/// assuming the body was fully drained.
bool response_keeps_alive(const ResponseHead& head);

/// Serializes a response head (testbed side).
std::string serialize_response_head(int status, std::string_view reason, const Headers& headers);

std::string_view status_reason(int status);

}  // namespace httpio::wire

#endif  // HTTPIO_WIRE_HPP
