// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/trace.hpp"

#include <charconv>
#include <random>

#include "httpio/errors.hpp"
#include "httpio/kv.hpp"

namespace httpio::bench {

std::uint64_t AccessTrace::total_bytes() const {
    std::uint64_t total = 0;
    for (const auto& f : fragments) total += f.length;
    return total;
}

AccessTrace generate_trace(std::uint64_t object_size, std::size_t fragment_count,
                           std::uint64_t min_len, std::uint64_t max_len, std::uint64_t seed) {
    if (fragment_count < 1) throw InvalidParams("fragment_count must be >= 1");
    if (min_len < 1 || max_len < min_len) throw InvalidParams("need 1 <= min_len <= max_len");
    if (object_size < max_len) throw InvalidParams("object_size must be >= max_len");

    AccessTrace trace;
    trace.object_size = object_size;
    trace.seed = seed;
    trace.fragments.reserve(fragment_count);
    // Modulo on raw engine output keeps the sequence identical everywhere
    // (uniform_int_distribution is not pinned across standard libraries).
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < fragment_count; ++i) {
        std::uint64_t length = min_len + rng() % (max_len - min_len + 1);
        std::uint64_t offset = rng() % (object_size - length + 1);
        trace.fragments.push_back(TraceFragment{i, offset, length});
    }
    return trace;
}

std::string serialize_trace(const AccessTrace& trace) {
    std::string out = "trace.version=1\n";
    if (!trace.object_uri.empty()) out += "object_uri=" + trace.object_uri + "\n";
    out += "object_size=" + std::to_string(trace.object_size) + "\n";
    out += "seed=" + std::to_string(trace.seed) + "\n";
    for (const auto& f : trace.fragments) {
        out += "fragment=" + std::to_string(f.id) + "," + std::to_string(f.offset) + "," +
               std::to_string(f.length) + "\n";
    }
    return out;
}

namespace {

std::uint64_t parse_u64_field(std::string_view s, const char* what) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size())
        throw InvalidParams("trace: bad " + std::string(what) + " '" + std::string(s) + "'");
    return out;
}

}  // namespace

AccessTrace parse_trace(std::string_view text) {
    AccessTrace trace;
    bool versioned = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
        auto kv = kv::parse_line(line);
        if (!kv) continue;
        const auto& [key, value] = *kv;
        if (key == "trace.version") {
            if (value != "1") throw InvalidParams("trace: unsupported version " + value);
            versioned = true;
        } else if (key == "object_uri") {
            trace.object_uri = value;
        } else if (key == "object_size") {
            trace.object_size = parse_u64_field(value, "object_size");
        } else if (key == "seed") {
            trace.seed = parse_u64_field(value, "seed");
        } else if (key == "fragment") {
            std::string_view v = value;
            auto c1 = v.find(',');
            auto c2 = v.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
            if (c1 == std::string_view::npos || c2 == std::string_view::npos)
                throw InvalidParams("trace line " + std::to_string(line_no) +
                                    ": fragment needs id,offset,length");
            TraceFragment f;
            f.id = parse_u64_field(v.substr(0, c1), "fragment id");
            f.offset = parse_u64_field(v.substr(c1 + 1, c2 - c1 - 1), "fragment offset");
            f.length = parse_u64_field(v.substr(c2 + 1), "fragment length");
            if (f.length < 1)
                throw InvalidParams("trace line " + std::to_string(line_no) +
                                    ": zero-length fragment");
            trace.fragments.push_back(f);
        } else {
            throw InvalidParams("trace: unknown key '" + key + "'");
        }
    }
    if (!versioned) throw InvalidParams("trace: missing trace.version header");
    return trace;
}

}  // namespace httpio::bench
