// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/wire.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>

#include "httpio/errors.hpp"

namespace httpio::wire {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

std::string_view trim_ows(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

constexpr std::size_t kMaxHeadBytes = 64 * 1024;

}  // namespace

void Headers::add(std::string name, std::string value) {
    items_.emplace_back(std::move(name), std::move(value));
}

void Headers::set(std::string name, std::string value) {
    for (auto& [n, v] : items_) {
        if (iequals(n, name)) {
            v = std::move(value);
            return;
        }
    }
    add(std::move(name), std::move(value));
}

std::optional<std::string_view> Headers::get(std::string_view name) const {
    for (const auto& [n, v] : items_)
        if (iequals(n, name)) return std::string_view(v);
    return std::nullopt;
}

std::vector<std::string_view> Headers::get_all(std::string_view name) const {
    std::vector<std::string_view> out;
    for (const auto& [n, v] : items_)
        if (iequals(n, name)) out.emplace_back(v);
    return out;
}

bool Headers::has_token(std::string_view name, std::string_view token) const {
    for (auto value : get_all(name)) {
        while (!value.empty()) {
            auto comma = value.find(',');
            std::string_view elem = trim_ows(value.substr(0, comma));
            if (iequals(elem, token)) return true;
            if (comma == std::string_view::npos) break;
            value = value.substr(comma + 1);
        }
    }
    return false;
}

std::optional<std::uint64_t> Headers::content_length() const {
    auto v = get("Content-Length");
    if (!v) return std::nullopt;
    std::string_view s = trim_ows(*v);
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return n;
}

std::size_t MemorySource::read(char* dst, std::size_t n) {
    std::size_t avail = data_.size() - pos_;
    std::size_t take = std::min(n, avail);
    std::memcpy(dst, data_.data() + pos_, take);
    pos_ += take;
    return take;
}

void Connection::send_request(const Request& req, Millis timeout) {
    std::string msg;
    msg.reserve(256 + req.body.size());
    msg += req.method;
    msg += ' ';
    msg += req.target;
    msg += " HTTP/1.1\r\n";
    for (const auto& [n, v] : req.headers.items()) {
        msg += n;
        msg += ": ";
        msg += v;
        msg += "\r\n";
    }
    msg += "\r\n";
    msg += req.body;
    stream_.write_all(msg, timeout);
}

bool Connection::fill(Millis timeout) {
    if (buffer_pos_ > 0) {
        buffer_.erase(0, buffer_pos_);
        buffer_pos_ = 0;
    }
    char tmp[16 * 1024];
    std::size_t got = stream_.read_some(tmp, sizeof(tmp), timeout);
    if (got == 0) return false;
    buffer_.append(tmp, got);
    return true;
}

std::string Connection::read_line(Millis timeout, std::size_t max_len) {
    for (;;) {
        auto nl = buffer_.find('\n', buffer_pos_);
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(buffer_pos_, nl - buffer_pos_);
            buffer_pos_ = nl + 1;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.size() > max_len) throw TransportError("line too long");
            return line;
        }
        if (buffer_.size() - buffer_pos_ > max_len) throw TransportError("line too long");
        if (!fill(timeout)) throw TransportError("connection closed mid-line");
    }
}

std::size_t Connection::read_raw(char* dst, std::size_t n, Millis timeout) {
    if (buffer_pos_ < buffer_.size()) {
        std::size_t avail = buffer_.size() - buffer_pos_;
        std::size_t take = std::min(n, avail);
        std::memcpy(dst, buffer_.data() + buffer_pos_, take);
        buffer_pos_ += take;
        return take;
    }
    return stream_.read_some(dst, n, timeout);
}

ResponseHead Connection::read_response_head(Millis timeout) {
    std::string status_line = read_line(timeout, kMaxHeadBytes);
    ResponseHead head;
    // "HTTP/1.1 200 OK"
    if (status_line.rfind("HTTP/1.", 0) != 0 || status_line.size() < 12)
        throw TransportError("bad status line: '" + status_line + "'");
    head.http11 = status_line[7] != '0';
    std::string_view rest = std::string_view(status_line).substr(9);
    auto [p, ec] = std::from_chars(rest.data(), rest.data() + std::min<std::size_t>(3, rest.size()),
                                   head.status);
    if (ec != std::errc() || head.status < 100 || head.status > 599)
        throw TransportError("bad status code in '" + status_line + "'");
    if (rest.size() > 4) head.reason = std::string(rest.substr(4));

    std::size_t total = status_line.size();
    for (;;) {
        std::string line = read_line(timeout, kMaxHeadBytes);
        if (line.empty()) break;
        total += line.size();
        if (total > kMaxHeadBytes) throw TransportError("response head too large");
        auto colon = line.find(':');
        if (colon == std::string::npos || colon == 0)
            throw TransportError("bad header line: '" + line + "'");
        std::string name = line.substr(0, colon);
        std::string value(trim_ows(std::string_view(line).substr(colon + 1)));
        head.headers.add(std::move(name), std::move(value));
    }
    return head;
}

BodyReader::BodyReader(Connection& conn, const ResponseHead& head, std::string_view method,
                       Millis timeout)
    : conn_(conn), timeout_(timeout) {
    bool bodyless = iequals(method, "HEAD") || head.status / 100 == 1 || head.status == 204 ||
                    head.status == 304;
    if (bodyless) {
        framing_ = Framing::none;
        complete_ = true;
        declared_ = head.headers.content_length();
        return;
    }
    if (auto te = head.headers.get("Transfer-Encoding");
        te && head.headers.has_token("Transfer-Encoding", "chunked")) {
        framing_ = Framing::chunked;
        return;
    }
    if (auto len = head.headers.content_length()) {
        framing_ = Framing::content_length;
        declared_ = len;
        remaining_ = *len;
        complete_ = (remaining_ == 0);
        return;
    }
    framing_ = Framing::until_close;
}

std::size_t BodyReader::read_plain(char* dst, std::size_t n) {
    if (framing_ == Framing::content_length) {
        if (remaining_ == 0) {
            complete_ = true;
            return 0;
        }
        std::size_t want = static_cast<std::size_t>(
            std::min<std::uint64_t>(n, remaining_));
        std::size_t got = conn_.read_raw(dst, want, timeout_);
        if (got == 0) throw TransportError("connection closed mid-body");
        remaining_ -= got;
        if (remaining_ == 0) complete_ = true;
        return got;
    }
    // until_close
    std::size_t got = conn_.read_raw(dst, n, timeout_);
    if (got == 0) complete_ = true;
    return got;
}

std::size_t BodyReader::read_chunked(char* dst, std::size_t n) {
    while (chunk_remaining_ == 0) {
        if (chunked_done_) return 0;
        std::string size_line = conn_.read_line(timeout_);
        if (size_line.empty()) continue;  // CRLF after previous chunk data
        std::uint64_t size = 0;
        auto semi = size_line.find(';');
        std::string_view hex = std::string_view(size_line).substr(0, semi);
        auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), size, 16);
        if (ec != std::errc()) throw TransportError("bad chunk size '" + size_line + "'");
        if (size == 0) {
            // trailers until blank line
            for (;;) {
                std::string t = conn_.read_line(timeout_);
                if (t.empty()) break;
            }
            chunked_done_ = true;
            complete_ = true;
            return 0;
        }
        chunk_remaining_ = size;
    }
    std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(n, chunk_remaining_));
    std::size_t got = conn_.read_raw(dst, want, timeout_);
    if (got == 0) throw TransportError("connection closed mid-chunk");
    chunk_remaining_ -= got;
    return got;
}

std::size_t BodyReader::read(char* dst, std::size_t n) {
    if (n == 0 || complete_) return 0;
    std::size_t got = 0;
    switch (framing_) {
        case Framing::none:
            return 0;
        case Framing::chunked:
            got = read_chunked(dst, n);
            break;
        default:
            got = read_plain(dst, n);
            break;
    }
    bytes_read_ += got;
    return got;
}

bool BodyReader::drain(std::uint64_t max_bytes) {
    char sink[16 * 1024];
    std::uint64_t drained = 0;
    while (!complete_) {
        std::size_t got = read(sink, sizeof(sink));
        if (got == 0 && !complete_) return false;
        drained += got;
        if (drained > max_bytes) return false;
    }
    return true;
}

std::string BodyReader::read_all(std::uint64_t max_bytes) {
    std::string out;
    // Trust the declared length for preallocation only up to a sane cap; a
    // hostile Content-Length must not drive allocation.
    constexpr std::uint64_t kReserveCap = 16ull << 20;
    if (declared_ && *declared_ <= max_bytes)
        out.reserve(static_cast<std::size_t>(std::min(*declared_, kReserveCap)));
    char buf[16 * 1024];
    while (!complete_) {
        std::size_t got = read(buf, sizeof(buf));
        if (got == 0) break;
        if (out.size() + got > max_bytes) throw TransportError("body exceeds size cap");
        out.append(buf, got);
    }
    return out;
}

bool response_keeps_alive(const ResponseHead& head) {
    if (head.headers.has_token("Connection", "close")) return false;
    if (!head.http11) return head.headers.has_token("Connection", "keep-alive");
    return true;
}

std::string serialize_response_head(int status, std::string_view reason, const Headers& headers) {
    std::string out = "HTTP/1.1 " + std::to_string(status) + " ";
    out += reason;
    out += "\r\n";
    for (const auto& [n, v] : headers.items()) {
        out += n;
        out += ": ";
        out += v;
        out += "\r\n";
    }
    out += "\r\n";
    return out;
}

std::string_view status_reason(int status) {
    switch (status) {
        case 200: return "OK";
        case 201: return "Created";
        case 204: return "No Content";
        case 206: return "Partial Content";
        case 301: return "Moved Permanently";
        case 302: return "Found";
        case 307: return "Temporary Redirect";
        case 308: return "Permanent Redirect";
        case 400: return "Bad Request";
        case 403: return "Forbidden";
        case 404: return "Not Found";
        case 405: return "Method Not Allowed";
        case 411: return "Length Required";
        case 416: return "Range Not Satisfiable";
        case 500: return "Internal Server Error";
        case 503: return "Service Unavailable";
        default: return "Status";
    }
}

}  // namespace httpio::wire
