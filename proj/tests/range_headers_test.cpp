// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "httpio/errors.hpp"
#include "httpio/range_headers.hpp"

using namespace httpio;

namespace {

// Independent RFC 7233 range-set grammar checker:
//   byte-ranges-specifier = "bytes=" byte-range-spec *("," byte-range-spec)
//   byte-range-spec       = 1*DIGIT "-" 1*DIGIT        (subset we emit)
// Parses strictly; returns the ranges or fails the test.
std::vector<ByteRange> grammar_reparse(const std::string& header) {
    REQUIRE(header.rfind("bytes=", 0) == 0);
    std::vector<ByteRange> out;
    std::size_t i = 6;
    REQUIRE(i < header.size());
    while (i < header.size()) {
        std::uint64_t first = 0, last = 0;
        std::size_t digits = 0;
        while (i < header.size() && isdigit(static_cast<unsigned char>(header[i]))) {
            first = first * 10 + static_cast<std::uint64_t>(header[i] - '0');
            ++i;
            ++digits;
        }
        REQUIRE(digits >= 1);
        REQUIRE(i < header.size());
        REQUIRE(header[i] == '-');
        ++i;
        digits = 0;
        while (i < header.size() && isdigit(static_cast<unsigned char>(header[i]))) {
            last = last * 10 + static_cast<std::uint64_t>(header[i] - '0');
            ++i;
            ++digits;
        }
        REQUIRE(digits >= 1);
        REQUIRE(last >= first);
        out.push_back(ByteRange{first, last - first + 1});
        if (i == header.size()) break;
        REQUIRE(header[i] == ',');
        ++i;
        REQUIRE(i < header.size());  // no trailing comma
    }
    return out;
}

}  // namespace

TEST_CASE("compose_range_header emits inclusive last-byte positions") {
    CHECK(compose_range_header(std::vector<ByteRange>{{0, 100}}) == "bytes=0-99");
    CHECK(compose_range_header(std::vector<ByteRange>{{0, 100}, {200, 50}}) ==
          "bytes=0-99,200-249");
}

TEST_CASE("compose_range_header rejects empty, overlapping and unsorted sets") {
    CHECK_THROWS_AS(compose_range_header(std::vector<ByteRange>{}), EmptyRangeSet);
    CHECK_THROWS_AS(compose_range_header(std::vector<ByteRange>{{0, 100}, {50, 10}}),
                    OverlappingRanges);
    CHECK_THROWS_AS(compose_range_header(std::vector<ByteRange>{{200, 50}, {0, 100}}),
                    OverlappingRanges);
    CHECK_THROWS_AS(compose_range_header(std::vector<ByteRange>{{0, 0}}), InvalidParams);
}

TEST_CASE("compose_range_header output re-parses under the RFC grammar") {
    std::mt19937_64 rng(20260810);
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<ByteRange> ranges;
        std::uint64_t offset = rng() % 1000;
        std::size_t count = 1 + rng() % 20;
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t length = 1 + rng() % 5000;
            ranges.push_back(ByteRange{offset, length});
            offset += length + 1 + rng() % 10000;  // keep disjoint and sorted
        }
        auto reparsed = grammar_reparse(compose_range_header(ranges));
        CHECK(reparsed == ranges);
    }
}

TEST_CASE("parse_content_range accepts the two RFC forms") {
    ContentRangeInfo a = parse_content_range("bytes 0-99/700");
    CHECK(a.first == 0);
    CHECK(a.last == 99);
    CHECK(a.total == 700);
    CHECK(a.range() == ByteRange{0, 100});

    ContentRangeInfo b = parse_content_range("bytes 200-249/*");
    CHECK(b.first == 200);
    CHECK(b.last == 249);
    CHECK_FALSE(b.total);
}

TEST_CASE("parse_content_range rejects malformed values") {
    CHECK_THROWS_AS(parse_content_range("bytes 99-0/700"), MalformedContentRange);
    CHECK_THROWS_AS(parse_content_range("bytes 0-99"), MalformedContentRange);
    CHECK_THROWS_AS(parse_content_range("items 0-99/700"), MalformedContentRange);
    CHECK_THROWS_AS(parse_content_range("bytes a-b/c"), MalformedContentRange);
    CHECK_THROWS_AS(parse_content_range("bytes 0-99/99"), MalformedContentRange);  // total <= last
    CHECK_THROWS_AS(parse_content_range(""), MalformedContentRange);
}

TEST_CASE("parse_unsatisfied_content_range reads the 416 form") {
    CHECK(parse_unsatisfied_content_range("bytes */700") == 700);
    CHECK_FALSE(parse_unsatisfied_content_range("bytes 0-99/700"));
    CHECK_FALSE(parse_unsatisfied_content_range("bytes */*"));
    CHECK_FALSE(parse_unsatisfied_content_range("garbage"));
}
