// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Access traces: deterministic pseudo-random fragment workloads plus their
// line-oriented file format (trace.version=1).

#ifndef HTTPIO_TRACE_HPP
#define HTTPIO_TRACE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace httpio::bench {

struct TraceFragment {
    std::uint64_t id = 0;
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    bool operator==(const TraceFragment&) const = default;
};

struct AccessTrace {
    std::string object_uri;
    std::uint64_t object_size = 0;
    std::uint64_t seed = 0;
    std::vector<TraceFragment> fragments;

    std::uint64_t total_bytes() const;
};

/// Deterministic trace: offsets uniform with the whole fragment in bounds,
/// lengths uniform in [min_len, max_len]. The same parameters always produce
/// the same trace. Throws InvalidParams.
AccessTrace generate_trace(std::uint64_t object_size, std::size_t fragment_count,
                           std::uint64_t min_len, std::uint64_t max_len, std::uint64_t seed);

std::string serialize_trace(const AccessTrace& trace);
AccessTrace parse_trace(std::string_view text);

}  // namespace httpio::bench

#endif  // HTTPIO_TRACE_HPP
