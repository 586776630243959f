// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Benchmark harness: replays an access trace in one of four modes and emits
// machine-readable reports cross-checked against testbed metrics.

#ifndef HTTPIO_BENCH_HPP
#define HTTPIO_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "httpio/client.hpp"
#include "httpio/trace.hpp"

namespace httpio::bench {

enum class BenchMode { sequential, vectored, failover, multistream };

BenchMode parse_bench_mode(std::string_view name);
std::string_view to_string(BenchMode mode);

struct RepetitionResult {
    double wall_ms = 0;
    std::uint64_t requests = 0;     // HTTP requests dispatched (client side)
    std::uint64_t connections = 0;  // TCP connections opened (client side)
    std::uint64_t bytes = 0;        // payload bytes delivered
    std::uint64_t testbed_requests = 0;     // server metrics delta, when sampled
    std::uint64_t testbed_connections = 0;  // server metrics delta, when sampled
    bool testbed_sampled = false;
};

struct BenchReport {
    BenchMode mode = BenchMode::sequential;
    std::vector<RepetitionResult> repetitions;
    std::uint64_t extra_bytes = 0;
    std::vector<double> batch_ms;  // per-batch timings of the last repetition
    std::string payload_digest;    // sha-256 over fragment payloads in trace order
    bool valid = true;
    std::string error;
    ClientConfig config;

    double wall_ms_mean() const;
    double wall_ms_min() const;
    double wall_ms_max() const;

    /// Flat key=value report (report.version=1 first).
    std::string to_kv() const;
    /// CSV of per-repetition timings: repetition,wall_ms,requests,connections,bytes.
    std::string to_csv() const;
};

/// Replays the trace `repetitions` times in the given mode against
/// trace.object_uri. When metrics_url is non-empty, testbed metrics are
/// snapshotted around every repetition (over a separate connection pool, so
/// the sampled deltas are exact). A failing repetition aborts the run and
/// flags the partial report invalid.
BenchReport run_benchmark(const AccessTrace& trace, BenchMode mode, const ClientConfig& config,
                          const std::string& metrics_url, std::size_t repetitions = 5);

}  // namespace httpio::bench

#endif  // HTTPIO_BENCH_HPP
