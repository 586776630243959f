// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Single- and multi-range GET execution. Every legal server behavior for a
// Range request (206 single, 206 multipart/byteranges, 200 full body, 416) is
// normalized into one RangedResponse shape so callers never see the
// difference.

#ifndef HTTPIO_RANGE_ENGINE_HPP
#define HTTPIO_RANGE_ENGINE_HPP

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "httpio/bytes.hpp"
#include "httpio/multipart.hpp"
#include "httpio/range_headers.hpp"
#include "httpio/session_pool.hpp"
#include "httpio/uri.hpp"

namespace httpio {

struct EngineLimits {
    /// A 200 reply to a ranged request is only swallowed up to this size;
    /// larger bodies abort with FullBodyTooLarge instead of streaming an
    /// arbitrarily large object for a few requested bytes.
    std::uint64_t max_full_body_fallback = 64ull << 20;
    std::size_t max_part_header_bytes = 8192;
    std::string credential_id = "anonymous";
    int max_redirects = 5;
    std::chrono::milliseconds io_timeout = std::chrono::seconds(30);
};

enum class ResponseKind { single, multipart, full_body };

struct RangedResponse {
    ResponseKind kind = ResponseKind::single;
    /// Parts normalized to the requested ranges (sliced out of coalesced or
    /// superset replies), sorted by offset. Requested ranges the server did
    /// not cover are absent; callers degrade per range. full_body carries
    /// exactly one part at offset 0 spanning the whole object.
    std::vector<MultipartPart> parts;
    std::optional<std::uint64_t> total_size;
    bool connection_reusable = false;
};

/// Issues one ranged GET for the (validated) range set and normalizes the
/// reply. Throws FullBodyTooLarge, RangeNotSatisfiable, HttpError,
/// TransportError, MalformedMultipart.
RangedResponse execute_ranged_get(SessionPool& pool, const Uri& uri,
                                  std::span<const ByteRange> ranges,
                                  const EngineLimits& limits = {});

/// Buffered one-shot request used by the CRUD facade, metalink discovery and
/// the benchmark harness. Follows redirects for GET/HEAD.
struct SimpleResponse {
    int status = 0;
    wire::Headers headers;
    std::string body;
};

SimpleResponse http_request(SessionPool& pool, const std::string& method, const Uri& uri,
                            const wire::Headers& extra_headers, std::string_view body,
                            const EngineLimits& limits = {}, std::uint64_t max_body = ~0ull);

}  // namespace httpio

#endif  // HTTPIO_RANGE_ENGINE_HPP
