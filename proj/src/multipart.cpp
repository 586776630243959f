// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/multipart.hpp"

#include <algorithm>
#include <cctype>

#include "httpio/errors.hpp"
#include "httpio/range_headers.hpp"

namespace httpio {

namespace {

constexpr std::size_t kMaxPreambleLine = 16 * 1024;

/// Pull-buffered reader over a ByteSource with CRLF line framing.
class SourceReader {
public:
    explicit SourceReader(wire::ByteSource& src) : src_(src) {}

    /// Reads a CRLF (or bare LF) terminated line, stripping the terminator.
    /// Returns nullopt at EOF when no bytes were pending; throws on EOF
    /// mid-line or when the line exceeds max_len.
    std::optional<std::string> read_line(std::size_t max_len) {
        std::string line;
        for (;;) {
            if (pos_ == buf_.size() && !fill()) {
                if (line.empty()) return std::nullopt;
                throw MalformedMultipart("truncated line");
            }
            while (pos_ < buf_.size()) {
                char c = buf_[pos_++];
                if (c == '\n') {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    return line;
                }
                line += c;
                if (line.size() > max_len) throw MalformedMultipart("part header line too long");
            }
        }
    }

    /// Reads exactly n bytes or throws.
    std::string read_exact(std::uint64_t n) {
        std::string out;
        out.reserve(static_cast<std::size_t>(n));
        while (out.size() < n) {
            if (pos_ == buf_.size() && !fill())
                throw MalformedMultipart("truncated part payload");
            std::size_t take = std::min<std::size_t>(buf_.size() - pos_,
                                                     static_cast<std::size_t>(n - out.size()));
            out.append(buf_, pos_, take);
            pos_ += take;
        }
        return out;
    }

    void drain_rest() {
        while (pos_ < buf_.size() || fill()) pos_ = buf_.size();
    }

private:
    bool fill() {
        if (pos_ > 0) {
            buf_.erase(0, pos_);
            pos_ = 0;
        }
        char tmp[8192];
        std::size_t got = src_.read(tmp, sizeof(tmp));
        if (got == 0) return false;
        buf_.append(tmp, got);
        return true;
    }

    wire::ByteSource& src_;
    std::string buf_;
    std::size_t pos_ = 0;
};

std::string_view strip_padding(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

}  // namespace

std::string compose_multipart(std::span<const MultipartPart> parts, std::uint64_t total,
                              std::string_view boundary, std::string_view preamble,
                              std::string_view epilogue) {
    if (parts.empty()) throw InvalidPart("no parts");
    if (boundary.empty() || boundary.size() > 70) throw InvalidPart("bad boundary length");
    for (char c : boundary)
        if (c == '\r' || c == '\n') throw InvalidPart("boundary contains CR/LF");
    for (const auto& p : parts) {
        if (p.range.length == 0) throw InvalidPart("zero-length range");
        if (p.data.size() != p.range.length)
            throw InvalidPart("payload size does not match range " + to_string(p.range));
        if (p.range.end() > total)
            throw InvalidPart("range " + to_string(p.range) + " exceeds total " +
                              std::to_string(total));
    }

    std::string body;
    if (!preamble.empty()) {
        body += preamble;
        body += "\r\n";
    }
    for (const auto& p : parts) {
        body += "--";
        body += boundary;
        body += "\r\nContent-Type: application/octet-stream\r\nContent-Range: bytes ";
        body += std::to_string(p.range.offset);
        body += '-';
        body += std::to_string(p.range.last());
        body += '/';
        body += std::to_string(total);
        body += "\r\n\r\n";
        body += p.data;
        body += "\r\n";
    }
    body += "--";
    body += boundary;
    body += "--\r\n";
    body += epilogue;
    return body;
}

std::string choose_boundary(std::span<const MultipartPart> parts, std::string_view tag) {
    std::string candidate(tag);
    for (std::uint64_t k = 0;; ++k) {
        if (k > 0) candidate = std::string(tag) + "." + std::to_string(k);
        bool collides = false;
        for (const auto& p : parts) {
            if (p.data.find(candidate) != std::string::npos) {
                collides = true;
                break;
            }
        }
        if (!collides) return candidate;
    }
}

void parse_multipart_byteranges(
    wire::ByteSource& body, std::string_view boundary,
    const std::function<void(const ContentRangeInfo&, std::string&&)>& on_part,
    std::size_t max_part_header_bytes) {
    if (boundary.empty()) throw MalformedMultipart("empty boundary");
    SourceReader reader(body);
    const std::string dash = "--" + std::string(boundary);
    const std::string dash_close = dash + "--";

    // Preamble: discard lines until the first dash-boundary.
    for (;;) {
        auto line = reader.read_line(kMaxPreambleLine);
        if (!line) throw MalformedMultipart("missing boundary delimiter");
        std::string_view l = strip_padding(*line);
        if (l == dash) break;
        if (l == dash_close) throw MalformedMultipart("no parts before close delimiter");
    }

    for (;;) {
        // Part headers.
        std::size_t header_bytes = 0;
        std::optional<ContentRangeInfo> range_info;
        for (;;) {
            auto line = reader.read_line(max_part_header_bytes);
            if (!line) throw MalformedMultipart("truncated part headers");
            if (line->empty()) break;
            header_bytes += line->size() + 2;
            if (header_bytes > max_part_header_bytes)
                throw MalformedMultipart("part headers exceed limit");
            auto colon = line->find(':');
            if (colon == std::string::npos)
                throw MalformedMultipart("bad part header line '" + *line + "'");
            std::string_view name = std::string_view(*line).substr(0, colon);
            std::string_view value = std::string_view(*line).substr(colon + 1);
            while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
                value.remove_prefix(1);
            if (iequals(name, "Content-Range")) {
                try {
                    range_info = parse_content_range(value);
                } catch (const MalformedContentRange& e) {
                    throw MalformedMultipart(e.what());
                }
            }
        }
        if (!range_info) throw MalformedMultipart("part missing Content-Range");

        ByteRange range = range_info->range();
        std::string payload = reader.read_exact(range.length);

        // Delimiter: CRLF then dash-boundary (next part) or close delimiter.
        auto sep = reader.read_line(kMaxPreambleLine);
        if (!sep || !sep->empty())
            throw MalformedMultipart("payload not followed by CRLF delimiter");
        auto delim = reader.read_line(kMaxPreambleLine);
        if (!delim) throw MalformedMultipart("missing boundary after part");
        std::string_view d = strip_padding(*delim);

        on_part(*range_info, std::move(payload));

        if (d == dash_close) {
            reader.drain_rest();  // epilogue, ignored
            return;
        }
        if (d != dash) throw MalformedMultipart("bad delimiter after part");
    }
}

std::vector<MultipartPart> parse_multipart_byteranges(wire::ByteSource& body,
                                                      std::string_view boundary,
                                                      std::size_t max_part_header_bytes) {
    std::vector<MultipartPart> parts;
    parse_multipart_byteranges(
        body, boundary,
        [&](const ContentRangeInfo& info, std::string&& data) {
            parts.push_back(MultipartPart{info.range(), std::move(data)});
        },
        max_part_header_bytes);
    return parts;
}

}  // namespace httpio
