// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// RFC 7233 header grammar: Range composition and Content-Range parsing.

#ifndef HTTPIO_RANGE_HEADERS_HPP
#define HTTPIO_RANGE_HEADERS_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "httpio/bytes.hpp"

namespace httpio {

/// Parsed Content-Range header: "bytes first-last/total" with '*' mapped to
/// an unknown total.
struct ContentRangeInfo {
    std::uint64_t first = 0;
    std::uint64_t last = 0;
    std::optional<std::uint64_t> total;

    ByteRange range() const { return ByteRange{first, last - first + 1}; }
    bool operator==(const ContentRangeInfo&) const = default;
};

/// Validates a range set for composition: non-empty, sorted ascending by
/// offset, pairwise non-overlapping. Throws EmptyRangeSet or
/// OverlappingRanges.
void validate_range_set(std::span<const ByteRange> ranges);

/// "bytes=a-b,c-d,..." with inclusive last-byte positions, order preserved.
std::string compose_range_header(std::span<const ByteRange> ranges);

/// Parses "bytes first-last/total" or "bytes first-last/*". Throws
/// MalformedContentRange (including first > last and total <= last).
ContentRangeInfo parse_content_range(std::string_view value);

/// Parses the 416 form "bytes */total"; nullopt when the value is not in
/// that form.
std::optional<std::uint64_t> parse_unsatisfied_content_range(std::string_view value);

}  // namespace httpio

#endif  // HTTPIO_RANGE_HEADERS_HPP
