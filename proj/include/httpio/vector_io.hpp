// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Scatter-gather reads: an application's pile of small random-position
// fragment reads is coalesced into few multi-range GETs, dispatched over the
// pool, and the returned bytes are scattered back into each fragment's
// buffer. Works against any server: multipart, single-range-only and
// Range-ignoring behaviors all degrade without losing correctness.

#ifndef HTTPIO_VECTOR_IO_HPP
#define HTTPIO_VECTOR_IO_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "httpio/bytes.hpp"
#include "httpio/range_engine.hpp"
#include "httpio/session_pool.hpp"
#include "httpio/uri.hpp"

namespace httpio {

/// One positional read: fill `destination` (capacity == range.length) with
/// the object's bytes at `range`.
struct FragmentRequest {
    std::uint64_t id = 0;
    ByteRange range;
    std::span<char> destination;
};

enum class FragmentState { filled, range_not_satisfiable, http_error, transport_error };

struct FragmentOutcome {
    std::uint64_t id = 0;
    FragmentState state = FragmentState::transport_error;
    int http_status = 0;
    std::string message;

    bool filled() const { return state == FragmentState::filled; }
};

struct VectorConfig {
    /// Ranges closer than this merge into one coalesced range; the gap bytes
    /// are fetched and discarded (cheaper than another multipart part).
    std::uint64_t gap_threshold = 2048;
    std::size_t max_ranges_per_request = 200;
    /// Composed Range header budget; stays under common 8 KiB server caps.
    std::size_t max_range_header_bytes = 7000;
    std::size_t max_concurrent_batches = 4;
};

struct VectorPlan {
    struct Mapping {
        std::size_t coalesced_index = 0;
        std::uint64_t intra_offset = 0;
    };
    struct Stats {
        std::size_t input_fragments = 0;
        std::size_t coalesced_ranges = 0;
        std::size_t batch_count = 0;
        std::uint64_t extra_bytes = 0;
    };

    std::vector<ByteRange> coalesced;             // disjoint, sorted
    std::vector<std::vector<std::size_t>> batches;  // indices into coalesced
    std::vector<Mapping> mapping;                 // parallel to input fragments
    Stats stats;
};

/// Coalesces fragment ranges: sorts by offset, merges overlaps/duplicates and
/// gaps up to gap_threshold, and records for every fragment which coalesced
/// range serves it. Empty input yields an empty plan.
VectorPlan normalize_fragments(std::span<const FragmentRequest> fragments,
                               const VectorConfig& config);

/// Range-only variant (property tests and planners without buffers).
VectorPlan plan_ranges(std::span<const ByteRange> ranges, const VectorConfig& config);

/// Splits plan.coalesced into batches, greedy left to right, so each batch
/// respects both max_ranges_per_request and the composed Range header budget.
void partition_ranges(VectorPlan& plan, const VectorConfig& config);

struct VectorReadStats {
    VectorPlan::Stats plan;
    std::vector<double> batch_ms;
    std::uint64_t ranged_requests = 0;
};

/// Plans, partitions, and executes the fragment set: up to
/// max_concurrent_batches batches in flight, each one multi-range GET.
/// Fragments are filled in place; the outcome list is parallel to the input.
/// Throws TransportError only when every batch failed at the transport level;
/// individual fragment errors are reported per fragment.
std::vector<FragmentOutcome> vector_read(SessionPool& pool, const Uri& uri,
                                         std::span<const FragmentRequest> fragments,
                                         const VectorConfig& config = {},
                                         const EngineLimits& limits = {},
                                         VectorReadStats* stats_out = nullptr);

}  // namespace httpio

#endif  // HTTPIO_VECTOR_IO_HPP
