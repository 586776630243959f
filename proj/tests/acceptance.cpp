// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: ten end-to-end criteria covering connection recycling,
// vectored request reduction, latency-regime speedup, scatter-gather
// correctness, multipart round-trip, replica fail-over totality, multi-stream
// integrity, coalescing properties, the CRUD lifecycle and pool cap respect.
// One PASS/FAIL line per criterion; exit 0 only when all pass.

#include <atomic>
#include <deque>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <thread>

#include "httpio/bench.hpp"
#include "httpio/client.hpp"
#include "httpio/digest.hpp"
#include "httpio/errors.hpp"
#include "httpio/metalink.hpp"
#include "httpio/multipart.hpp"
#include "httpio/range_engine.hpp"
#include "httpio/testbed.hpp"
#include "httpio/vector_io.hpp"
#include "test_util.hpp"

using namespace httpio;
using httpio_test::TempDir;
using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define REQUIRE_MSG(cond, ...)                                        \
    do {                                                              \
        if (!(cond)) {                                                \
            char buf_[512];                                           \
            std::snprintf(buf_, sizeof(buf_), __VA_ARGS__);           \
            throw Failure(std::string(#cond) + " — " + buf_);         \
        }                                                             \
    } while (0)

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

struct FragmentSet {
    std::deque<std::string> buffers;
    std::vector<FragmentRequest> fragments;

    void add(std::uint64_t id, std::uint64_t offset, std::uint64_t length) {
        buffers.emplace_back(static_cast<std::size_t>(length), '\0');
        fragments.push_back(FragmentRequest{
            id, ByteRange{offset, length},
            std::span(buffers.back().data(), buffers.back().size())});
    }
};

// ---------------------------------------------------------------------------
// 1. Connection recycling: 100 serial GETs -> 1 accept, 1 created, 99 reused.
void criterion_connection_recycling() {
    TempDir dir;
    httpio_test::write_file(dir / "f.bin", httpio_test::corpus_bytes(1, 4096));
    testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    auto server = testbed::TestbedServer::serve(std::move(options));

    ClientConfig config;
    config.metalink_strategy = MetalinkStrategy::off;
    Client client(config);
    std::string expected = httpio_test::corpus_bytes(1, 4096);
    for (int i = 0; i < 100; ++i)
        REQUIRE_MSG(client.get(server->url("/f.bin")) == expected, "GET %d returned wrong bytes",
                    i);

    testbed::ServerMetrics metrics = server->snapshot_metrics();
    PoolStats stats = client.pool().stats();
    REQUIRE_MSG(metrics.tcp_accepts == 1, "tcp_accepts=%s", fmt_u64(metrics.tcp_accepts).c_str());
    REQUIRE_MSG(metrics.requests_total == 100, "requests_total=%s",
                fmt_u64(metrics.requests_total).c_str());
    REQUIRE_MSG(stats.sessions_created == 1, "sessions_created=%s",
                fmt_u64(stats.sessions_created).c_str());
    REQUIRE_MSG(stats.sessions_reused == 99, "sessions_reused=%s",
                fmt_u64(stats.sessions_reused).c_str());
}

// ---------------------------------------------------------------------------
// 2. Vectored round-trip reduction: 1024 fragments at 256 ranges/request ->
//    exactly 4 ranged GETs, vs 1024 in sequential mode.
void criterion_vectored_reduction() {
    TempDir dir;
    std::string content = httpio_test::corpus_bytes(2, 1024 * 50 + 64);
    httpio_test::write_file(dir / "f.bin", content);
    testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    auto server = testbed::TestbedServer::serve(std::move(options));
    SessionPool pool;
    Uri object = Uri::parse(server->url("/f.bin"));

    FragmentSet set;
    for (std::uint64_t i = 0; i < 1024; ++i) set.add(i, i * 50, 20);

    VectorConfig config;
    config.gap_threshold = 0;  // the 30-byte stride gaps must not coalesce
    config.max_ranges_per_request = 256;

    std::uint64_t before = server->snapshot_metrics().ranged_requests;
    auto outcomes = vector_read(pool, object, set.fragments, config);
    std::uint64_t vectored = server->snapshot_metrics().ranged_requests - before;
    for (const auto& o : outcomes) REQUIRE_MSG(o.filled(), "fragment %s not filled",
                                               fmt_u64(o.id).c_str());
    for (std::size_t i = 0; i < set.fragments.size(); ++i)
        REQUIRE_MSG(set.buffers[i] == content.substr(i * 50, 20), "fragment %zu bytes differ", i);
    REQUIRE_MSG(vectored == 4, "vectored mode issued %s ranged GETs, want 4",
                fmt_u64(vectored).c_str());

    before = server->snapshot_metrics().ranged_requests;
    for (const auto& fragment : set.fragments) {
        RangedResponse resp = execute_ranged_get(pool, object, std::span(&fragment.range, 1));
        REQUIRE_MSG(resp.parts.size() == 1 && resp.parts[0].data ==
                        content.substr(static_cast<std::size_t>(fragment.range.offset),
                                       static_cast<std::size_t>(fragment.range.length)),
                    "sequential fragment %s bytes differ", fmt_u64(fragment.id).c_str());
    }
    std::uint64_t sequential = server->snapshot_metrics().ranged_requests - before;
    REQUIRE_MSG(sequential == 1024, "sequential mode issued %s ranged GETs, want 1024",
                fmt_u64(sequential).c_str());
}

// ---------------------------------------------------------------------------
// 3. Latency-regime benchmark: 50 ms injected per-request latency; vectored
//    completes a 256-fragment trace at least 10x faster than sequential.
void criterion_latency_regimes() {
    TempDir dir;
    std::string content = httpio_test::corpus_bytes(3, 256 * 60 + 64);
    httpio_test::write_file(dir / "f.bin", content);
    testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    options.latency.per_request_delay = 50ms;
    auto server = testbed::TestbedServer::serve(std::move(options));
    SessionPool pool;
    Uri object = Uri::parse(server->url("/f.bin"));

    FragmentSet set;
    for (std::uint64_t i = 0; i < 256; ++i) set.add(i, i * 60, 24);
    VectorConfig config;
    config.gap_threshold = 0;
    config.max_ranges_per_request = 256;

    auto t0 = Clock::now();
    for (const auto& fragment : set.fragments)
        execute_ranged_get(pool, object, std::span(&fragment.range, 1));
    double sequential_s = std::chrono::duration<double>(Clock::now() - t0).count();

    t0 = Clock::now();
    auto outcomes = vector_read(pool, object, set.fragments, config);
    double vectored_s = std::chrono::duration<double>(Clock::now() - t0).count();
    for (const auto& o : outcomes) REQUIRE_MSG(o.filled(), "fragment not filled");

    REQUIRE_MSG(sequential_s >= 12.8, "sequential %.2fs below the forced 12.8s floor",
                sequential_s);
    double speedup = sequential_s / vectored_s;
    REQUIRE_MSG(speedup >= 10.0, "speedup %.1fx (sequential %.2fs, vectored %.2fs)", speedup,
                sequential_s, vectored_s);
    std::printf("        (sequential %.2fs, vectored %.2fs, speedup %.1fx)\n", sequential_s,
                vectored_s, speedup);
}

// ---------------------------------------------------------------------------
// 4. Scatter-gather correctness: 1000 randomized fragment sets across testbed
//    modes multipart / single-range-only / ignore-range, all oracle-equal.
void criterion_scatter_gather() {
    constexpr std::size_t kObjectSize = 16 * 1024;
    std::string content = httpio_test::corpus_bytes(4, kObjectSize);
    std::mt19937_64 rng(20260804);

    for (int mode = 0; mode < 3; ++mode) {
        TempDir dir;
        httpio_test::write_file(dir / "f.bin", content);
        testbed::TestbedServer::Options options;
        options.corpus_root = dir.path();
        if (mode == 1) options.faults.single_range_only = true;
        if (mode == 2) options.faults.ignore_range = true;
        auto server = testbed::TestbedServer::serve(std::move(options));
        SessionPool pool;
        Uri object = Uri::parse(server->url("/f.bin"));

        // Full-GET oracle fetched through the wire once per mode.
        std::string oracle = http_request(pool, "GET", object, {}, {}).body;
        REQUIRE_MSG(oracle == content, "oracle GET bytes differ in mode %d", mode);

        for (int iter = 0; iter < 334; ++iter) {
            FragmentSet set;
            std::size_t count = 1 + rng() % 16;
            for (std::size_t i = 0; i < count; ++i) {
                std::uint64_t length = 1 + rng() % 300;
                std::uint64_t offset = rng() % (kObjectSize - length + 1);
                set.add(i, offset, length);
            }
            VectorConfig config;
            config.gap_threshold = rng() % 1024;
            config.max_ranges_per_request = 1 + rng() % 8;
            auto outcomes = vector_read(pool, object, set.fragments, config);
            for (std::size_t i = 0; i < set.fragments.size(); ++i) {
                REQUIRE_MSG(outcomes[i].filled(), "mode %d iter %d fragment %zu: %s", mode, iter,
                            i, outcomes[i].message.c_str());
                const auto& range = set.fragments[i].range;
                REQUIRE_MSG(set.buffers[i] ==
                                oracle.substr(static_cast<std::size_t>(range.offset),
                                              static_cast<std::size_t>(range.length)),
                            "mode %d iter %d fragment %zu bytes differ", mode, iter, i);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 5. Multipart round-trip: parse(compose(x)) == x for 10,000 randomized part
//    sets including empty-preamble and non-empty-epilogue variants.
void criterion_multipart_roundtrip() {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 10000; ++iter) {
        std::uint64_t total = 256 + rng() % 8192;
        std::size_t count = 1 + rng() % 8;
        std::vector<MultipartPart> parts;
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t length = 1 + rng() % 128;
            std::uint64_t offset = rng() % (total - length + 1);
            std::string data(static_cast<std::size_t>(length), '\0');
            for (auto& c : data) c = static_cast<char>(rng() & 0xff);
            parts.push_back(MultipartPart{ByteRange{offset, length}, std::move(data)});
        }
        std::string preamble = (iter % 3 == 1) ? "preamble to be ignored" : "";
        std::string epilogue = (iter % 3 == 2) ? "epilogue trailing junk" : "";
        std::string boundary = choose_boundary(parts, "rt" + std::to_string(iter % 97));
        std::string body = compose_multipart(parts, total, boundary, preamble, epilogue);
        wire::MemorySource src(body);
        auto parsed = parse_multipart_byteranges(src, boundary);
        REQUIRE_MSG(parsed.size() == parts.size(), "iter %d: part count %zu != %zu", iter,
                    parsed.size(), parts.size());
        for (std::size_t i = 0; i < parts.size(); ++i)
            REQUIRE_MSG(parsed[i] == parts[i], "iter %d: part %zu differs", iter, i);
    }
}

// ---------------------------------------------------------------------------
// 6. Fail-over totality: every non-empty subset of 3 replicas serves oracle
//    bytes; a healthy primary never triggers metalink discovery.
void criterion_failover_totality() {
    std::string content = httpio_test::corpus_bytes(6, 4096);
    for (int mask = 1; mask < 8; ++mask) {
        TempDir dir;
        httpio_test::write_file(dir / "f.bin", content);
        testbed::TestbedServer::Options options;
        options.corpus_root = dir.path();
        options.replicas = {{"r0", dir.path()}, {"r1", dir.path()}, {"r2", dir.path()}};
        for (int r = 0; r < 3; ++r)
            if (!(mask & (1 << r)))
                options.faults.replica_offline.push_back({"r" + std::to_string(r), 1});
        auto server = testbed::TestbedServer::serve(std::move(options));
        SessionPool pool;

        FragmentSet set;
        set.add(0, 0, 256);
        set.add(1, 2000, 512);
        set.add(2, 4000, 96);
        FailoverResult result = failover_read(pool, Uri::parse(server->url("/r0/f.bin")),
                                              set.fragments);
        for (std::size_t i = 0; i < set.fragments.size(); ++i) {
            const auto& range = set.fragments[i].range;
            REQUIRE_MSG(result.outcomes[i].filled(), "mask %d fragment %zu: %s", mask, i,
                        result.outcomes[i].message.c_str());
            REQUIRE_MSG(set.buffers[i] ==
                            content.substr(static_cast<std::size_t>(range.offset),
                                           static_cast<std::size_t>(range.length)),
                        "mask %d fragment %zu bytes differ", mask, i);
        }
        testbed::ServerMetrics metrics = server->snapshot_metrics();
        if (mask & 1) {  // primary r0 alive: zero-cost happy path
            REQUIRE_MSG(metrics.metalink_requests == 0,
                        "mask %d: healthy primary but metalink_requests=%s", mask,
                        fmt_u64(metrics.metalink_requests).c_str());
        } else {
            REQUIRE_MSG(metrics.metalink_requests >= 1, "mask %d: expected discovery", mask);
        }
    }
}

// ---------------------------------------------------------------------------
// 7. Multi-stream integrity: 4 replicas, 64 MiB object, 8 MiB chunks, 4
//    streams, one replica dying mid-transfer; checksum must match origin.
void criterion_multistream_integrity() {
    constexpr std::uint64_t kSize = 64ull << 20;
    std::string content = httpio_test::corpus_bytes(7, static_cast<std::size_t>(kSize));
    std::string origin_digest = Digest::hex_of("sha-256", content);

    TempDir dir;
    httpio_test::write_file(dir / "big.bin", content);
    testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    options.replicas = {{"r0", dir.path()}, {"r1", dir.path()}, {"r2", dir.path()},
                        {"r3", dir.path()}};
    options.faults.die_after_bytes.push_back({"r0", 12ull << 20});  // dies in its 2nd chunk
    auto server = testbed::TestbedServer::serve(std::move(options));
    SessionPool pool;

    DiscoveryResult discovery =
        discover_metalink(pool, Uri::parse(server->url("/r1/big.bin")));
    REQUIRE_MSG(discovery.document.has_value(), "no metalink discovered");
    REQUIRE_MSG(discovery.document->size == kSize, "metalink size mismatch");

    MemorySink sink(kSize);
    MultistreamParams params;
    params.chunk_size = 8ull << 20;
    params.streams = 4;
    DownloadReport report = multistream_download(pool, *discovery.document, sink, params);

    REQUIRE_MSG(report.bytes == kSize, "bytes=%s", fmt_u64(report.bytes).c_str());
    REQUIRE_MSG(report.checksum_checked && report.checksum_verified,
                "checksum not verified against the metalink digest");
    REQUIRE_MSG(sink_digest(sink, "sha-256") == origin_digest,
                "reassembled bytes differ from origin");
    std::size_t serving_replicas = 0;
    std::size_t total_chunks = 0;
    for (const auto& [url, chunks] : report.chunks_per_replica) {
        if (chunks > 0) ++serving_replicas;
        total_chunks += chunks;
    }
    REQUIRE_MSG(total_chunks == 8, "chunk count %zu != 8", total_chunks);
    REQUIRE_MSG(serving_replicas >= 3, "only %zu replicas served chunks", serving_replicas);
}

// ---------------------------------------------------------------------------
// 8. Coalescing properties over 10,000 randomized fragment sets.
void criterion_coalescing_properties() {
    std::mt19937_64 rng(8);
    for (int iter = 0; iter < 10000; ++iter) {
        // Random disjoint ranges in random order.
        std::size_t count = 1 + rng() % 48;
        std::vector<ByteRange> ranges;
        std::uint64_t offset = rng() % 1000;
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t length = 1 + rng() % 400;
            ranges.push_back(ByteRange{offset, length});
            offset += length + 1 + rng() % 3000;
        }
        for (std::size_t i = ranges.size(); i > 1; --i)
            std::swap(ranges[i - 1], ranges[rng() % i]);

        std::uint64_t t1 = rng() % 1500;
        std::uint64_t t2 = t1 + rng() % 3000;
        VectorConfig c1, c2;
        c1.gap_threshold = t1;
        c2.gap_threshold = t2;
        VectorPlan p1 = plan_ranges(ranges, c1);
        VectorPlan p2 = plan_ranges(ranges, c2);
        REQUIRE_MSG(p2.stats.coalesced_ranges <= p1.stats.coalesced_ranges,
                    "iter %d: monotonicity violated (%zu > %zu at t1=%s t2=%s)", iter,
                    p2.stats.coalesced_ranges, p1.stats.coalesced_ranges, fmt_u64(t1).c_str(),
                    fmt_u64(t2).c_str());
        for (const VectorPlan* plan : {&p1, &p2}) {
            std::uint64_t gap = plan == &p1 ? t1 : t2;
            REQUIRE_MSG(plan->stats.extra_bytes <=
                            gap * (plan->stats.input_fragments - plan->stats.coalesced_ranges),
                        "iter %d: extra-bytes bound violated", iter);
        }
    }
}

// ---------------------------------------------------------------------------
// 9. CRUD lifecycle for 100 randomized bodies (1 B - 10 MiB), double-put
//    idempotence, delete-then-get 404.
void criterion_crud_lifecycle() {
    TempDir dir;
    httpio_test::write_file(dir / "seed.bin", "x");
    testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    auto server = testbed::TestbedServer::serve(std::move(options));
    ClientConfig config;
    config.metalink_strategy = MetalinkStrategy::off;
    Client client(config);

    std::mt19937_64 rng(9);
    constexpr std::uint64_t kMax = 10ull << 20;
    for (int i = 0; i < 100; ++i) {
        // Log-uniform sizes spanning the full range, with the endpoints
        // pinned exactly.
        std::uint64_t size;
        if (i == 0)
            size = 1;
        else if (i == 1)
            size = kMax;
        else {
            double u = static_cast<double>(rng()) / static_cast<double>(~0ull);
            size = static_cast<std::uint64_t>(std::exp(u * std::log(static_cast<double>(kMax))));
            size = std::max<std::uint64_t>(1, std::min(size, kMax));
        }
        std::string body = httpio_test::corpus_bytes(rng(), static_cast<std::size_t>(size));
        std::string uri = server->url("/data/obj_" + std::to_string(i));

        ResourceInfo info = client.put(uri, body);
        REQUIRE_MSG(info.size == size, "object %d: stat size mismatch", i);
        REQUIRE_MSG(client.get(uri) == body, "object %d: bytes differ after put", i);

        client.put(uri, body);  // double put: same final state
        REQUIRE_MSG(client.get(uri) == body, "object %d: bytes differ after double put", i);

        REQUIRE_MSG(client.remove(uri) == RemoveOutcome::removed, "object %d: remove failed", i);
        try {
            client.get(uri);
            throw Failure("object " + std::to_string(i) + ": GET after delete succeeded");
        } catch (const HttpError& e) {
            REQUIRE_MSG(e.status() == 404, "object %d: expected 404, got %d", i, e.status());
        }
    }
}

// ---------------------------------------------------------------------------
// 10. Pool cap respect under stress: 64 workers, caps (16 per key, 32 total),
//     10 seconds, sampled counts never exceed the caps, nobody starves.
void criterion_pool_caps_under_stress() {
    TempDir dir;
    httpio_test::write_file(dir / "f.bin", httpio_test::corpus_bytes(10, 2048));
    testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    auto server = testbed::TestbedServer::serve(std::move(options));

    PoolConfig pool_config;
    pool_config.max_sessions_per_key = 16;
    pool_config.max_total_sessions = 32;
    pool_config.connect_timeout = 5s;
    SessionPool pool(pool_config);
    Uri object = Uri::parse(server->url("/f.bin"));

    // Three credentials = three session keys sharing the total cap.
    const std::vector<std::string> credentials{"cred-a", "cred-b", "cred-c"};

    std::atomic<bool> stop{false};
    std::atomic<bool> cap_violation{false};
    std::atomic<bool> starved{false};
    std::atomic<std::uint64_t> completed{0};

    std::thread sampler([&] {
        while (!stop.load()) {
            PoolStats stats = pool.stats();
            if (stats.current_idle + stats.current_leased > pool_config.max_total_sessions)
                cap_violation.store(true);
            for (const auto& [key, count] : pool.open_per_key())
                if (count > pool_config.max_sessions_per_key) cap_violation.store(true);
            std::this_thread::sleep_for(2ms);
        }
    });

    std::vector<std::thread> workers;
    for (int w = 0; w < 64; ++w) {
        workers.emplace_back([&, w] {
            EngineLimits limits;
            limits.credential_id = credentials[static_cast<std::size_t>(w) % credentials.size()];
            std::vector<ByteRange> ranges{{static_cast<std::uint64_t>(w) * 16, 16}};
            while (!stop.load()) {
                try {
                    execute_ranged_get(pool, object, ranges, limits);
                    completed.fetch_add(1);
                } catch (const AcquireTimeout&) {
                    starved.store(true);
                    return;
                } catch (const Error&) {
                    // transient transport issue; keep hammering
                }
            }
        });
    }

    std::this_thread::sleep_for(10s);
    stop.store(true);
    for (auto& t : workers) t.join();
    sampler.join();

    REQUIRE_MSG(!cap_violation.load(), "sampled connection counts exceeded the caps");
    REQUIRE_MSG(!starved.load(), "a worker starved past connect_timeout");
    REQUIRE_MSG(completed.load() > 64, "too few requests completed: %s",
                fmt_u64(completed.load()).c_str());
    std::printf("        (%s requests served under caps)\n", fmt_u64(completed.load()).c_str());
}

struct Criterion {
    int number;
    const char* name;
    double budget_s;
    std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "connection-recycling", 5, criterion_connection_recycling},
        {2, "vectored-roundtrip-reduction", 10, criterion_vectored_reduction},
        {3, "latency-regime-speedup", 30, criterion_latency_regimes},
        {4, "scatter-gather-correctness", 60, criterion_scatter_gather},
        {5, "multipart-roundtrip-property", 30, criterion_multipart_roundtrip},
        {6, "failover-totality", 20, criterion_failover_totality},
        {7, "multistream-integrity", 60, criterion_multistream_integrity},
        {8, "coalescing-properties", 10, criterion_coalescing_properties},
        {9, "crud-lifecycle", 60, criterion_crud_lifecycle},
        {10, "pool-cap-stress", 20, criterion_pool_caps_under_stress},
    };

    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.number != only) continue;
        auto t0 = Clock::now();
        try {
            criterion.run();
            double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
            bool in_budget = elapsed < criterion.budget_s;
            std::printf("%s %2d %-32s (%.2fs, budget %.0fs)\n", in_budget ? "PASS" : "FAIL",
                        criterion.number, criterion.name, elapsed, criterion.budget_s);
            if (!in_budget) ++failures;
        } catch (const std::exception& e) {
            double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
            std::printf("FAIL %2d %-32s (%.2fs): %s\n", criterion.number, criterion.name, elapsed,
                        e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
