// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/bench.hpp"

#include <algorithm>
#include <deque>
#include <chrono>
#include <cstring>

#include "httpio/digest.hpp"
#include "httpio/errors.hpp"
#include "httpio/kv.hpp"
#include "httpio/metalink.hpp"
#include "httpio/range_engine.hpp"
#include "httpio/vector_io.hpp"

namespace httpio::bench {

BenchMode parse_bench_mode(std::string_view name) {
    if (name == "sequential") return BenchMode::sequential;
    if (name == "vectored") return BenchMode::vectored;
    if (name == "failover") return BenchMode::failover;
    if (name == "multistream") return BenchMode::multistream;
    throw InvalidParams("unknown bench mode '" + std::string(name) + "'");
}

std::string_view to_string(BenchMode mode) {
    switch (mode) {
        case BenchMode::sequential: return "sequential";
        case BenchMode::vectored: return "vectored";
        case BenchMode::failover: return "failover";
        case BenchMode::multistream: return "multistream";
    }
    return "sequential";
}

namespace {

struct MetricsSample {
    std::uint64_t requests_total = 0;
    std::uint64_t tcp_accepts = 0;
};

/// Metrics are fetched over a dedicated pool so the sampling requests never
/// disturb the benchmark pool's own counters.
MetricsSample fetch_metrics(SessionPool& metrics_pool, const Uri& metrics_uri) {
    SimpleResponse resp = http_request(metrics_pool, "GET", metrics_uri, {}, {});
    if (resp.status != 200)
        throw HttpError(resp.status, "metrics fetch " + metrics_uri.to_string());
    kv::Block block = kv::Block::parse(resp.body);
    MetricsSample sample;
    sample.requests_total = block.get_u64("requests_total").value_or(0);
    sample.tcp_accepts = block.get_u64("tcp_accepts").value_or(0);
    return sample;
}

struct FragmentBuffers {
    std::deque<std::string> buffers;
    std::vector<FragmentRequest> fragments;

    explicit FragmentBuffers(const AccessTrace& trace) {
        fragments.reserve(trace.fragments.size());
        for (const auto& f : trace.fragments) {
            buffers.emplace_back(static_cast<std::size_t>(f.length), '\0');
            fragments.push_back(FragmentRequest{
                f.id, ByteRange{f.offset, f.length},
                std::span(buffers.back().data(), buffers.back().size())});
        }
    }

    std::string digest() const {
        Digest d("sha-256");
        for (const auto& b : buffers) d.update(b);
        return d.hex();
    }
};

void require_all_filled(std::span<const FragmentOutcome> outcomes) {
    for (const auto& o : outcomes)
        if (!o.filled())
            throw Error("fragment " + std::to_string(o.id) + " not filled: " + o.message);
}

}  // namespace

double BenchReport::wall_ms_mean() const {
    if (repetitions.empty()) return 0;
    double sum = 0;
    for (const auto& r : repetitions) sum += r.wall_ms;
    return sum / static_cast<double>(repetitions.size());
}

double BenchReport::wall_ms_min() const {
    double best = 0;
    for (const auto& r : repetitions) best = best == 0 ? r.wall_ms : std::min(best, r.wall_ms);
    return best;
}

double BenchReport::wall_ms_max() const {
    double worst = 0;
    for (const auto& r : repetitions) worst = std::max(worst, r.wall_ms);
    return worst;
}

std::string BenchReport::to_kv() const {
    kv::Block block;
    block.set("report.version", std::string("1"));
    block.set("mode", std::string(to_string(mode)));
    block.set("valid", valid);
    if (!error.empty()) block.set("error", error);
    block.set("repetitions", static_cast<std::uint64_t>(repetitions.size()));
    block.set("wall_ms.mean", wall_ms_mean());
    block.set("wall_ms.min", wall_ms_min());
    block.set("wall_ms.max", wall_ms_max());
    std::uint64_t requests = 0, connections = 0, bytes = 0;
    std::uint64_t testbed_requests = 0, testbed_connections = 0;
    bool sampled = !repetitions.empty();
    for (const auto& r : repetitions) {
        requests += r.requests;
        connections += r.connections;
        bytes += r.bytes;
        testbed_requests += r.testbed_requests;
        testbed_connections += r.testbed_connections;
        sampled = sampled && r.testbed_sampled;
    }
    block.set("requests_issued", requests);
    block.set("tcp_connections", connections);
    block.set("bytes_transferred", bytes);
    if (sampled) {
        block.set("testbed.requests_delta", testbed_requests);
        block.set("testbed.connections_delta", testbed_connections);
    }
    block.set("extra_bytes", extra_bytes);
    if (!batch_ms.empty()) {
        std::string joined;
        for (double ms : batch_ms) {
            if (!joined.empty()) joined += ',';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", ms);
            joined += buf;
        }
        block.set("batch_ms", joined);
    }
    if (!payload_digest.empty()) block.set("payload_digest", "sha-256:" + payload_digest);
    block.set("config.pool.max_per_key",
              static_cast<std::uint64_t>(config.pool.max_sessions_per_key));
    block.set("config.pool.max_total", static_cast<std::uint64_t>(config.pool.max_total_sessions));
    block.set("config.vector.gap_threshold", config.vector.gap_threshold);
    block.set("config.vector.max_ranges_per_request",
              static_cast<std::uint64_t>(config.vector.max_ranges_per_request));
    block.set("config.vector.max_concurrent_batches",
              static_cast<std::uint64_t>(config.vector.max_concurrent_batches));
    block.set("config.metalink.strategy", std::string(httpio::to_string(config.metalink_strategy)));
    return block.to_text();
}

std::string BenchReport::to_csv() const {
    std::string out = "repetition,wall_ms,requests,connections,bytes\n";
    for (std::size_t i = 0; i < repetitions.size(); ++i) {
        const auto& r = repetitions[i];
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%zu,%.3f,%llu,%llu,%llu\n", i + 1, r.wall_ms,
                      static_cast<unsigned long long>(r.requests),
                      static_cast<unsigned long long>(r.connections),
                      static_cast<unsigned long long>(r.bytes));
        out += buf;
    }
    return out;
}

BenchReport run_benchmark(const AccessTrace& trace, BenchMode mode, const ClientConfig& config,
                          const std::string& metrics_url, std::size_t repetitions) {
    if (repetitions < 1) throw InvalidParams("repetitions must be >= 1");
    if (trace.object_uri.empty()) throw InvalidParams("trace has no object_uri");

    BenchReport report;
    report.mode = mode;
    report.config = config;

    const Uri object_uri = Uri::parse(trace.object_uri);
    SessionPool pool(config.pool);
    const EngineLimits limits = config.engine_limits();

    std::optional<Uri> metrics_uri;
    std::optional<SessionPool> metrics_pool;
    if (!metrics_url.empty()) {
        metrics_uri = Uri::parse(metrics_url);
        metrics_pool.emplace(PoolConfig{1, 1, std::chrono::seconds(60),
                                        config.pool.connect_timeout});
    }

    FragmentBuffers buffers(trace);

    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        RepetitionResult result;
        MetricsSample before;
        if (metrics_pool) before = fetch_metrics(*metrics_pool, *metrics_uri);
        PoolStats pool_before = pool.stats();

        auto t0 = std::chrono::steady_clock::now();
        try {
            switch (mode) {
                case BenchMode::sequential: {
                    for (const auto& fragment : buffers.fragments) {
                        RangedResponse resp = execute_ranged_get(
                            pool, object_uri, std::span(&fragment.range, 1), limits);
                        const MultipartPart* match = nullptr;
                        for (const auto& part : resp.parts)
                            if (part.range == fragment.range) match = &part;
                        if (!match && resp.kind == ResponseKind::full_body &&
                            !resp.parts.empty() &&
                            fragment.range.end() <= resp.parts[0].data.size()) {
                            std::memcpy(fragment.destination.data(),
                                        resp.parts[0].data.data() + fragment.range.offset,
                                        fragment.destination.size());
                        } else if (match) {
                            std::memcpy(fragment.destination.data(), match->data.data(),
                                        fragment.destination.size());
                        } else {
                            throw Error("sequential read missed range " +
                                        httpio::to_string(fragment.range));
                        }
                    }
                    break;
                }
                case BenchMode::vectored: {
                    VectorReadStats stats;
                    auto outcomes = vector_read(pool, object_uri, buffers.fragments,
                                                config.vector, limits, &stats);
                    require_all_filled(outcomes);
                    report.extra_bytes = stats.plan.extra_bytes;
                    report.batch_ms = stats.batch_ms;
                    break;
                }
                case BenchMode::failover: {
                    FailoverConfig failover{config.vector, limits};
                    auto res = failover_read(pool, object_uri, buffers.fragments, failover);
                    require_all_filled(res.outcomes);
                    break;
                }
                case BenchMode::multistream: {
                    DiscoveryResult discovery = discover_metalink(pool, object_uri, limits);
                    if (!discovery.document)
                        throw Error("no metalink discoverable for " + trace.object_uri);
                    if (!discovery.document->size) throw SizeUnknown();
                    MemorySink sink(*discovery.document->size);
                    MultistreamParams params;
                    params.chunk_size = config.metalink_chunk_size;
                    params.streams = config.metalink_streams;
                    params.limits = limits;
                    multistream_download(pool, *discovery.document, sink, params);
                    for (const auto& fragment : buffers.fragments) {
                        if (fragment.range.end() > sink.size())
                            throw Error("fragment beyond downloaded object");
                        sink.read_range(fragment.range.offset, fragment.destination.data(),
                                        fragment.destination.size());
                    }
                    break;
                }
            }
        } catch (const std::exception& e) {
            report.valid = false;
            report.error = e.what();
            report.repetitions.push_back(result);
            return report;
        }
        auto t1 = std::chrono::steady_clock::now();
        result.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        PoolStats pool_after = pool.stats();
        result.requests = pool_after.requests_dispatched - pool_before.requests_dispatched;
        result.connections = pool_after.sessions_created - pool_before.sessions_created;
        result.bytes = mode == BenchMode::multistream ? trace.object_size : trace.total_bytes();
        if (metrics_pool) {
            MetricsSample after = fetch_metrics(*metrics_pool, *metrics_uri);
            result.testbed_requests = after.requests_total - before.requests_total;
            result.testbed_connections = after.tcp_accepts - before.tcp_accepts;
            result.testbed_sampled = true;
        }
        report.repetitions.push_back(result);
    }
    report.payload_digest = buffers.digest();
    return report;
}

}  // namespace httpio::bench
