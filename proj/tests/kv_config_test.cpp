// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "httpio/client.hpp"
#include "httpio/errors.hpp"
#include "httpio/kv.hpp"

using namespace httpio;

TEST_CASE("kv block round-trips and ignores comments") {
    kv::Block block;
    block.set("a", std::uint64_t{7});
    block.set("b.c", std::string("hello world"));
    std::string text = block.to_text();
    CHECK(text == "a=7\nb.c=hello world\n");

    kv::Block parsed = kv::Block::parse("# comment\n\na=7\n  b.c = hello world \n");
    CHECK(parsed.get_u64("a") == 7);
    CHECK(parsed.get("b.c") == "hello world");
    CHECK_FALSE(parsed.get("missing"));
}

namespace {

std::string write_temp_config(const std::string& content) {
    std::string path = std::string("/tmp/httpio_config_test_") + std::to_string(::getpid()) +
                       "_" + std::to_string(rand()) + ".conf";
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_config returns documented defaults") {
    ClientConfig config = load_config(std::nullopt, {});
    CHECK(config.pool.max_sessions_per_key == 16);
    CHECK(config.pool.max_total_sessions == 128);
    CHECK(config.pool.idle_ttl == std::chrono::seconds(60));
    CHECK(config.pool.connect_timeout == std::chrono::seconds(30));
    CHECK(config.vector.gap_threshold == 2048);
    CHECK(config.vector.max_ranges_per_request == 200);
    CHECK(config.vector.max_range_header_bytes == 7000);
    CHECK(config.vector.max_concurrent_batches == 4);
    CHECK(config.max_full_body_fallback == 64ull << 20);
    CHECK(config.metalink_strategy == MetalinkStrategy::failover);
    CHECK(config.metalink_streams == 4);
    CHECK(config.metalink_chunk_size == 8ull << 20);
    CHECK(config.credential_id == "anonymous");
}

TEST_CASE("load_config precedence: env overrides file") {
    std::string path = write_temp_config("pool.max_per_key=4\nmetalink.strategy=off\n");
    ClientConfig config = load_config(path, {{"pool.max_per_key", "8"}});
    CHECK(config.pool.max_sessions_per_key == 8);
    CHECK(config.metalink_strategy == MetalinkStrategy::off);
    std::remove(path.c_str());
}

TEST_CASE("load_config rejects bad values with the offending key") {
    std::string path = write_temp_config("pool.max_per_key=0\n");
    try {
        load_config(path, {});
        FAIL("expected ConfigInvalid");
    } catch (const ConfigInvalid& e) {
        CHECK(e.key() == "pool.max_per_key");
    }
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_config(std::nullopt, {{"no.such.key", "1"}}), ConfigInvalid);
    CHECK_THROWS_AS(load_config(std::nullopt, {{"metalink.strategy", "bogus"}}), ConfigInvalid);
    CHECK_THROWS_AS(load_config(std::nullopt, {{"pool.max_total", "2"},
                                               {"pool.max_per_key", "8"}}),
                    ConfigInvalid);
    CHECK_THROWS_AS(load_config(std::nullopt, {{"vector.gap_threshold", "abc"}}), ConfigInvalid);
}

TEST_CASE("config key aliases and strategies") {
    ClientConfig config =
        load_config(std::nullopt, {{"http.connect_timeout_s", "7"},
                                   {"metalink.strategy", "multistream"},
                                   {"http.credential_id", "cert-123"}});
    CHECK(config.pool.connect_timeout == std::chrono::seconds(7));
    CHECK(config.metalink_strategy == MetalinkStrategy::multistream);
    CHECK(config.credential_id == "cert-123");
}

TEST_CASE("environment variables mirror keys uppercased with underscores") {
    ::setenv("POOL_MAX_PER_KEY", "5", 1);
    ::setenv("METALINK_STRATEGY", "off", 1);
    auto env = environment_overrides();
    ::unsetenv("POOL_MAX_PER_KEY");
    ::unsetenv("METALINK_STRATEGY");
    CHECK(env.at("pool.max_per_key") == "5");
    CHECK(env.at("metalink.strategy") == "off");
    ClientConfig config = load_config(std::nullopt, env);
    CHECK(config.pool.max_sessions_per_key == 5);
    CHECK(config.metalink_strategy == MetalinkStrategy::off);
}
