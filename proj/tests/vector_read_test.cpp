// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <deque>
#include <random>

#include "httpio/errors.hpp"
#include "httpio/testbed.hpp"
#include "httpio/vector_io.hpp"
#include "test_util.hpp"

using namespace httpio;
using httpio_test::TempDir;

namespace {

struct Bed {
    TempDir dir;
    std::string content;
    std::unique_ptr<testbed::TestbedServer> server;
    SessionPool pool;

    explicit Bed(testbed::TestbedServer::Options options = {}, std::size_t size = 64 * 1024) {
        content = httpio_test::corpus_bytes(17, size);
        httpio_test::write_file(dir / "f.bin", content);
        options.corpus_root = dir.path();
        server = testbed::TestbedServer::serve(std::move(options));
    }

    Uri object() const { return Uri::parse(server->url("/f.bin")); }
};

struct FragmentSet {
    std::deque<std::string> buffers;
    std::vector<FragmentRequest> fragments;

    void add(std::uint64_t id, std::uint64_t offset, std::uint64_t length) {
        buffers.emplace_back(static_cast<std::size_t>(length), '\0');
        fragments.push_back(FragmentRequest{id, ByteRange{offset, length},
                                            std::span(buffers.back().data(),
                                                      buffers.back().size())});
    }
};

void check_against_oracle(const FragmentSet& set, std::span<const FragmentOutcome> outcomes,
                          const std::string& oracle) {
    REQUIRE(outcomes.size() == set.fragments.size());
    for (std::size_t i = 0; i < set.fragments.size(); ++i) {
        const auto& range = set.fragments[i].range;
        REQUIRE(outcomes[i].filled());
        CHECK(set.buffers[i] == oracle.substr(static_cast<std::size_t>(range.offset),
                                              static_cast<std::size_t>(range.length)));
    }
}

}  // namespace

TEST_CASE("1024 fragments at 256 ranges per request issue exactly 4 ranged GETs") {
    Bed bed;
    FragmentSet set;
    for (std::uint64_t i = 0; i < 1024; ++i) set.add(i, i * 50, 20);

    VectorConfig config;
    config.gap_threshold = 0;  // stride keeps all 1024 ranges distinct
    config.max_ranges_per_request = 256;
    VectorReadStats stats;
    auto outcomes = vector_read(bed.pool, bed.object(), set.fragments, config, {}, &stats);

    check_against_oracle(set, outcomes, bed.content);
    CHECK(stats.plan.coalesced_ranges == 1024);
    CHECK(stats.plan.batch_count == 4);
    CHECK(stats.ranged_requests == 4);
    CHECK(bed.server->snapshot_metrics().ranged_requests == 4);
    CHECK(stats.batch_ms.size() == 4);
}

TEST_CASE("randomized fragment sets equal the oracle under every server mode") {
    for (int mode = 0; mode < 3; ++mode) {
        testbed::TestbedServer::Options options;
        if (mode == 1) options.faults.single_range_only = true;
        if (mode == 2) options.faults.ignore_range = true;
        Bed bed(std::move(options), 8192);

        std::mt19937_64 rng(4242 + mode);
        for (int iter = 0; iter < 25; ++iter) {
            FragmentSet set;
            std::size_t count = 1 + rng() % 24;
            for (std::size_t i = 0; i < count; ++i) {
                std::uint64_t length = 1 + rng() % 256;
                std::uint64_t offset = rng() % (8192 - length + 1);
                set.add(i, offset, length);
            }
            VectorConfig config;
            config.gap_threshold = rng() % 512;
            config.max_ranges_per_request = 1 + rng() % 16;
            VectorReadStats stats;
            auto outcomes = vector_read(bed.pool, bed.object(), set.fragments, config, {}, &stats);
            check_against_oracle(set, outcomes, bed.content);
            // Request-count bound: batch_count normally, up to one GET per
            // coalesced range under single-range-only degradation.
            if (mode == 1) {
                CHECK(stats.ranged_requests <= stats.plan.coalesced_ranges);
            } else {
                CHECK(stats.ranged_requests == stats.plan.batch_count);
            }
        }
    }
}

TEST_CASE("duplicate and overlapping fragments are all served") {
    Bed bed(testbed::TestbedServer::Options{}, 4096);
    FragmentSet set;
    set.add(0, 100, 50);
    set.add(1, 100, 50);  // duplicate
    set.add(2, 120, 100); // overlaps both
    set.add(3, 0, 10);
    auto outcomes = vector_read(bed.pool, bed.object(), set.fragments);
    check_against_oracle(set, outcomes, bed.content);
}

TEST_CASE("a fragment past EOF reports RangeNotSatisfiable; the rest fill") {
    Bed bed(testbed::TestbedServer::Options{}, 1000);
    FragmentSet set;
    set.add(0, 0, 100);
    set.add(1, 5000, 10);  // beyond the 1000-byte object
    set.add(2, 900, 100);

    VectorConfig config;
    config.gap_threshold = 0;
    auto outcomes = vector_read(bed.pool, bed.object(), set.fragments, config);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].filled());
    CHECK(outcomes[1].state == FragmentState::range_not_satisfiable);
    CHECK(outcomes[2].filled());
    CHECK(set.buffers[0] == bed.content.substr(0, 100));
    CHECK(set.buffers[2] == bed.content.substr(900, 100));
}

TEST_CASE("missing object marks every fragment with the http error") {
    Bed bed;
    FragmentSet set;
    set.add(0, 0, 10);
    set.add(1, 50, 10);
    auto outcomes =
        vector_read(bed.pool, Uri::parse(bed.server->url("/gone")), set.fragments);
    for (const auto& o : outcomes) {
        CHECK(o.state == FragmentState::http_error);
        CHECK(o.http_status == 404);
    }
}

TEST_CASE("unreachable server raises a whole-call TransportError") {
    SessionPool pool;
    FragmentSet set;
    set.add(0, 0, 10);
    // Port 1 on loopback: nothing listens there; every batch fails at the
    // transport level, so the whole call throws.
    CHECK_THROWS_AS(vector_read(pool, Uri::parse("http://127.0.0.1:1/x"), set.fragments),
                    TransportError);
}

TEST_CASE("empty fragment list yields an empty outcome list") {
    SessionPool pool;
    CHECK(vector_read(pool, Uri::parse("http://127.0.0.1:1/x"), {}).empty());
}

TEST_CASE("destination capacity must match the range length") {
    SessionPool pool;
    std::string buf(5, '\0');
    FragmentRequest bad{0, ByteRange{0, 10}, std::span(buf.data(), buf.size())};
    CHECK_THROWS_AS(vector_read(pool, Uri::parse("http://127.0.0.1:1/x"), std::span(&bad, 1)),
                    InvalidParams);
}
