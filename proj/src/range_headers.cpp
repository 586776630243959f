// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/range_headers.hpp"

#include <charconv>

#include "httpio/errors.hpp"

namespace httpio {

namespace {

std::uint64_t parse_u64_or_throw(std::string_view s, const char* what) {
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || p != s.data() + s.size())
        throw MalformedContentRange(std::string(what) + " '" + std::string(s) + "'");
    return n;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

void validate_range_set(std::span<const ByteRange> ranges) {
    if (ranges.empty()) throw EmptyRangeSet();
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        validate_range(ranges[i]);
        if (i > 0 && ranges[i].offset < ranges[i - 1].end())
            throw OverlappingRanges(to_string(ranges[i - 1]) + " then " + to_string(ranges[i]));
    }
}

std::string compose_range_header(std::span<const ByteRange> ranges) {
    validate_range_set(ranges);
    std::string header = "bytes=";
    bool first = true;
    for (const auto& r : ranges) {
        if (!first) header += ',';
        first = false;
        header += std::to_string(r.offset);
        header += '-';
        header += std::to_string(r.last());
    }
    return header;
}

ContentRangeInfo parse_content_range(std::string_view value) {
    std::string_view s = trim(value);
    if (s.rfind("bytes ", 0) != 0) throw MalformedContentRange(std::string(value));
    s = s.substr(6);
    auto dash = s.find('-');
    auto slash = s.find('/');
    if (dash == std::string_view::npos || slash == std::string_view::npos || dash > slash)
        throw MalformedContentRange(std::string(value));
    ContentRangeInfo info;
    info.first = parse_u64_or_throw(trim(s.substr(0, dash)), "first");
    info.last = parse_u64_or_throw(trim(s.substr(dash + 1, slash - dash - 1)), "last");
    std::string_view total = trim(s.substr(slash + 1));
    if (total != "*") info.total = parse_u64_or_throw(total, "total");
    if (info.first > info.last)
        throw MalformedContentRange("first > last in '" + std::string(value) + "'");
    if (info.total && *info.total <= info.last)
        throw MalformedContentRange("total <= last in '" + std::string(value) + "'");
    return info;
}

std::optional<std::uint64_t> parse_unsatisfied_content_range(std::string_view value) {
    std::string_view s = trim(value);
    if (s.rfind("bytes ", 0) != 0) return std::nullopt;
    s = trim(s.substr(6));
    if (s.rfind("*/", 0) != 0) return std::nullopt;
    s = s.substr(2);
    if (s == "*" || s.empty()) return std::nullopt;
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return n;
}

}  // namespace httpio
