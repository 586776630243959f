// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic HTTP/1.1 origin server for tests and benchmarks: serves a
// file corpus under plain and replica-virtual roots, honors single and
// multi-range GETs, injects scripted latency and faults, generates Metalink
// documents on demand, and exposes request metrics. Given the same corpus,
// plans, seed and request order, two runs produce identical bytes and
// counters.

#ifndef HTTPIO_TESTBED_HPP
#define HTTPIO_TESTBED_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "httpio/multipart.hpp"

namespace httpio::testbed {

/// Request-level latency shaping. per_request_delay is applied before the
/// status line (it models the RTT cost of a request); per_megabyte_delay
/// shapes body throughput. Jitter is a seeded uniform half-width: the same
/// seed always yields the same delay sequence.
struct LatencyModel {
    std::chrono::milliseconds per_request_delay{0};
    std::chrono::milliseconds per_megabyte_delay{0};
    std::chrono::milliseconds jitter{0};
    std::uint64_t seed = 0;

    /// Deterministic delay for the n-th counted request.
    std::chrono::milliseconds delay_for(std::uint64_t request_n) const;
};

/// Scripted faults, all deterministic functions of the global request
/// counter (or of per-replica byte counters for die_after_bytes).
struct FaultPlan {
    struct ReplicaOffline {
        std::string replica;
        std::uint64_t from_request = 1;  // offline for counted requests >= this
    };
    struct DieAfterBytes {
        std::string replica;
        std::uint64_t bytes = 0;  // connection dies once the replica served this many body bytes
    };

    std::vector<ReplicaOffline> replica_offline;
    bool ignore_range = false;       // answer ranged GETs with 200 full body
    bool single_range_only = false;  // honor only the first range of a multi-range GET
    std::uint64_t connection_close_every_n = 0;  // every n-th request gets Connection: close
    std::vector<DieAfterBytes> die_after_bytes;
    std::vector<std::string> read_only_paths;  // PUT/DELETE under these prefixes -> 403

    /// Parses the line-oriented fault DSL:
    ///   offline <replica> [from_request_n]
    ///   ignore-range on|off
    ///   single-range-only on|off
    ///   connection-close-every <n>
    ///   die-after-bytes <replica> <bytes>
    ///   read-only <path-prefix>
    static FaultPlan parse(std::string_view text);
};

/// Which discovery-ladder endpoints serve Metalink documents.
enum class MetalinkMode {
    off,             // no metalink anywhere
    accept,          // only content negotiation (Accept: application/metalink4+xml)
    query,           // only "?metalink"
    suffix,          // only ".meta4"
    garbage_suffix,  // ".meta4" returns non-XML garbage; others off
    all,             // every ladder endpoint
};

MetalinkMode parse_metalink_mode(std::string_view name);

struct ServerMetrics {
    std::uint64_t tcp_accepts = 0;
    std::uint64_t requests_total = 0;
    std::uint64_t ranged_requests = 0;
    std::uint64_t multipart_responses = 0;
    std::uint64_t metalink_requests = 0;
    std::map<std::uint64_t, std::uint64_t> requests_per_connection;
    std::map<std::string, std::uint64_t> requests_per_path;
    /// Request targets (path + query) per connection, in arrival order.
    std::map<std::uint64_t, std::vector<std::string>> connection_targets;

    std::string to_kv() const;
};

class TestbedServer {
public:
    struct Options {
        std::filesystem::path corpus_root;
        /// Virtual roots: requests under /<name>/ resolve against the mapped
        /// directory. The replica list also feeds Metalink generation, in
        /// order (priority = position + 1).
        std::vector<std::pair<std::string, std::filesystem::path>> replicas;
        LatencyModel latency;
        FaultPlan faults;
        MetalinkMode metalink_mode = MetalinkMode::all;
        std::string bind_host = "127.0.0.1";
        std::uint16_t port = 0;  // 0 = ephemeral
    };

    /// Binds, starts the accept loop and returns a running server. Throws
    /// BindFailed or CorpusUnreadable.
    static std::unique_ptr<TestbedServer> serve(Options options);

    ~TestbedServer();
    void stop();

    std::uint16_t port() const;
    std::string base_url() const;  // http://host:port
    std::string url(std::string_view abs_path) const;

    ServerMetrics snapshot_metrics() const;

private:
    TestbedServer() = default;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace httpio::testbed

#endif  // HTTPIO_TESTBED_HPP
