// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// multipart/byteranges framing (RFC 7233 appendix A / RFC 2046 §5.1).
// compose_multipart is the server-side dual of parse_multipart_byteranges and
// doubles as the round-trip oracle in the test suites.

#ifndef HTTPIO_MULTIPART_HPP
#define HTTPIO_MULTIPART_HPP

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "httpio/bytes.hpp"
#include "httpio/range_headers.hpp"
#include "httpio/wire.hpp"

namespace httpio {

struct MultipartPart {
    ByteRange range;
    std::string data;

    bool operator==(const MultipartPart&) const = default;
};

/// Composes an RFC-conformant multipart/byteranges body. Each part carries a
/// Content-Range header against `total`. Preamble and epilogue are emitted
/// verbatim when non-empty. Throws InvalidPart on an empty part list, data
/// length mismatches, or ranges that do not fit in [0, total).
std::string compose_multipart(std::span<const MultipartPart> parts, std::uint64_t total,
                              std::string_view boundary, std::string_view preamble = "",
                              std::string_view epilogue = "");

/// Picks a boundary string not contained in any payload. Deterministic for a
/// given tag; appends a counter until collision-free.
std::string choose_boundary(std::span<const MultipartPart> parts, std::string_view tag);

/// Streaming parser: pulls from `body`, emits one callback per part with the
/// part's Content-Range and payload. Never buffers more than one part. Part
/// headers are capped at max_part_header_bytes. Throws MalformedMultipart on
/// a missing boundary delimiter, a part without Content-Range, or truncation.
void parse_multipart_byteranges(
    wire::ByteSource& body, std::string_view boundary,
    const std::function<void(const ContentRangeInfo&, std::string&&)>& on_part,
    std::size_t max_part_header_bytes = 8192);

/// Convenience wrapper collecting all parts.
std::vector<MultipartPart> parse_multipart_byteranges(wire::ByteSource& body,
                                                      std::string_view boundary,
                                                      std::size_t max_part_header_bytes = 8192);

}  // namespace httpio

#endif  // HTTPIO_MULTIPART_HPP
