// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/range_engine.hpp"

#include <algorithm>
#include <cctype>
#include <memory>

#include "httpio/errors.hpp"

namespace httpio {

namespace {

constexpr std::uint64_t kSmallBodyDrainCap = 64 * 1024;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view v) {
    std::string out(v);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Extracts the boundary parameter from a multipart/byteranges Content-Type.
std::optional<std::string> multipart_boundary(std::string_view content_type) {
    if (lower(content_type).rfind("multipart/byteranges", 0) != 0) return std::nullopt;
    std::string_view rest = content_type;
    auto semi = rest.find(';');
    while (semi != std::string_view::npos) {
        rest = rest.substr(semi + 1);
        semi = rest.find(';');
        std::string_view param = trim(rest.substr(0, semi));
        auto eq = param.find('=');
        if (eq == std::string_view::npos) continue;
        if (lower(trim(param.substr(0, eq))) != "boundary") continue;
        std::string_view value = trim(param.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (!value.empty()) return std::string(value);
    }
    return std::nullopt;
}

/// An in-flight response: the lease serving it, the parsed head and the body
/// reader positioned at the first body byte.
struct ActiveResponse {
    SessionLease lease;
    wire::ResponseHead head;
    std::unique_ptr<wire::BodyReader> body;

    /// Finishes the exchange: drains any remainder (bounded) and returns the
    /// connection to the pool or drops it. Returns true when it was reusable.
    /// Close-delimited bodies end with the server closing, so those
    /// connections are never pooled.
    bool finish(std::uint64_t drain_cap = kSmallBodyDrainCap) {
        bool drained = body->complete() || body->drain(drain_cap);
        bool reusable = drained && body->complete() &&
                        body->framing() != wire::BodyReader::Framing::until_close &&
                        wire::response_keeps_alive(head);
        lease.release(reusable);
        return reusable;
    }

    void abandon() { lease.release(false); }
};

std::unique_ptr<ActiveResponse> start_request(SessionPool& pool, const std::string& method,
                                              Uri uri, const wire::Headers& extra_headers,
                                              std::string_view body,
                                              const EngineLimits& limits) {
    const bool follow = method == "GET" || method == "HEAD";
    int hops = 0;
    for (;;) {
        SessionKey key = session_key(uri, limits.credential_id);
        bool retried_fresh = false;
        std::unique_ptr<ActiveResponse> active;
        for (;;) {
            SessionLease lease = pool.acquire(key);
            bool was_reused = lease.session().requests_served > 0;
            wire::Request req;
            req.method = method;
            req.target = uri.target();
            req.headers.add("Host", uri.host_header());
            req.headers.add("User-Agent", "httpio/0.1");
            req.headers.add("Accept-Encoding", "identity");
            for (const auto& [n, v] : extra_headers.items()) req.headers.add(n, v);
            if (!body.empty() || method == "PUT" || method == "POST")
                req.headers.set("Content-Length", std::to_string(body.size()));
            req.body = body;
            try {
                lease.connection().send_request(req, limits.io_timeout);
                ++lease.session().requests_served;
                wire::ResponseHead head = lease.connection().read_response_head(limits.io_timeout);
                active = std::make_unique<ActiveResponse>();
                active->head = std::move(head);
                active->lease = std::move(lease);
                active->body = std::make_unique<wire::BodyReader>(
                    active->lease.connection(), active->head, method, limits.io_timeout);
                break;
            } catch (const TransportError&) {
                lease.release(false);
                // A parked keep-alive connection can die between the liveness
                // probe and our write; retry exactly once on a fresh one.
                if (was_reused && !retried_fresh) {
                    retried_fresh = true;
                    continue;
                }
                throw;
            }
        }

        const int status = active->head.status;
        bool is_redirect = status == 301 || status == 302 || status == 303 || status == 307 ||
                           status == 308;
        auto location = active->head.headers.get("Location");
        if (!follow || !is_redirect || !location) return active;
        if (++hops > limits.max_redirects)
            throw HttpError(status, "too many redirects for " + uri.to_string());
        std::string loc(*location);
        active->finish();
        uri = uri.resolve(loc);
    }
}

/// Slices every requested range fully contained in the server-provided
/// interval out of `data`, appending to `out`. Requested ranges are sorted
/// and disjoint.
void slice_covered(std::span<const ByteRange> requested, const ByteRange& provided,
                   std::string_view data, std::vector<MultipartPart>& out) {
    for (const auto& r : requested) {
        if (r.offset < provided.offset || r.end() > provided.end()) continue;
        std::size_t start = static_cast<std::size_t>(r.offset - provided.offset);
        out.push_back(
            MultipartPart{r, std::string(data.substr(start, static_cast<std::size_t>(r.length)))});
    }
}

}  // namespace

RangedResponse execute_ranged_get(SessionPool& pool, const Uri& uri,
                                  std::span<const ByteRange> ranges,
                                  const EngineLimits& limits) {
    wire::Headers extra;
    extra.add("Range", compose_range_header(ranges));  // validates the set
    auto active = start_request(pool, "GET", uri, extra, {}, limits);
    const int status = active->head.status;

    RangedResponse result;
    if (status == 206) {
        auto content_type = active->head.headers.get("Content-Type");
        auto boundary = content_type ? multipart_boundary(*content_type) : std::nullopt;
        try {
            if (boundary) {
                result.kind = ResponseKind::multipart;
                parse_multipart_byteranges(
                    *active->body, *boundary,
                    [&](const ContentRangeInfo& info, std::string&& data) {
                        if (info.total && !result.total_size) result.total_size = info.total;
                        slice_covered(ranges, info.range(), data, result.parts);
                    },
                    limits.max_part_header_bytes);
                // Servers may reorder or coalesce parts; normalize to offset
                // order and drop duplicates.
                std::sort(result.parts.begin(), result.parts.end(),
                          [](const MultipartPart& a, const MultipartPart& b) {
                              return a.range.offset < b.range.offset;
                          });
                result.parts.erase(std::unique(result.parts.begin(), result.parts.end(),
                                               [](const MultipartPart& a, const MultipartPart& b) {
                                                   return a.range == b.range;
                                               }),
                                   result.parts.end());
            } else {
                auto cr = active->head.headers.get("Content-Range");
                if (!cr) throw TransportError("206 without Content-Range");
                ContentRangeInfo info = parse_content_range(*cr);
                result.total_size = info.total;
                ByteRange provided = info.range();
                std::string data = active->body->read_all(provided.length);
                if (data.size() != provided.length)
                    throw TransportError("206 body shorter than Content-Range");
                slice_covered(ranges, provided, data, result.parts);
                result.kind =
                    result.parts.size() == 1 ? ResponseKind::single : ResponseKind::multipart;
            }
        } catch (...) {
            active->abandon();
            throw;
        }
        result.connection_reusable = active->finish();
        return result;
    }

    if (status == 200) {
        auto declared = active->body->declared_length();
        if (declared && *declared > limits.max_full_body_fallback) {
            active->abandon();
            throw FullBodyTooLarge(std::to_string(*declared) + " > " +
                                   std::to_string(limits.max_full_body_fallback));
        }
        std::string data;
        try {
            data = active->body->read_all(limits.max_full_body_fallback);
        } catch (const TransportError&) {
            active->abandon();
            throw FullBodyTooLarge("undeclared body exceeds " +
                                   std::to_string(limits.max_full_body_fallback));
        }
        result.kind = ResponseKind::full_body;
        result.total_size = data.size();
        if (!data.empty())
            result.parts.push_back(MultipartPart{ByteRange{0, data.size()}, std::move(data)});
        result.connection_reusable = active->finish();
        return result;
    }

    if (status == 416) {
        std::optional<std::uint64_t> total;
        if (auto cr = active->head.headers.get("Content-Range"))
            total = parse_unsatisfied_content_range(*cr);
        active->finish();
        throw RangeNotSatisfiable(total);
    }

    active->finish();
    throw HttpError(status, "ranged GET " + uri.to_string());
}

SimpleResponse http_request(SessionPool& pool, const std::string& method, const Uri& uri,
                            const wire::Headers& extra_headers, std::string_view body,
                            const EngineLimits& limits, std::uint64_t max_body) {
    auto active = start_request(pool, method, uri, extra_headers, body, limits);
    SimpleResponse resp;
    resp.status = active->head.status;
    resp.headers = active->head.headers;
    try {
        resp.body = active->body->read_all(max_body);
    } catch (const TransportError&) {
        active->abandon();
        throw;
    }
    active->finish();
    return resp;
}

}  // namespace httpio
