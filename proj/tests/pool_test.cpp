// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "httpio/errors.hpp"
#include "httpio/session_pool.hpp"

using namespace httpio;
using namespace std::chrono_literals;

namespace {

/// Connector backed by socketpairs: sessions look alive to the pool's
/// liveness probe without any server. Counts dials per key.
struct FakeDialer {
    std::mutex mutex;
    std::vector<int> peers;
    std::map<SessionKey, int> dials;
    bool fail = false;

    Connector connector() {
        return [this](const SessionKey& key, std::chrono::milliseconds) {
            std::lock_guard lock(mutex);
            if (fail) throw ConnectFailed("scripted dial failure");
            ++dials[key];
            int fds[2];
            REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
            peers.push_back(fds[1]);
            return net::TcpStream(fds[0]);
        };
    }

    ~FakeDialer() {
        for (int fd : peers) ::close(fd);
    }
};

SessionKey key_of(const char* uri) { return session_key(uri, "anon"); }

}  // namespace

TEST_CASE("acquire reuses an idle session and counts it") {
    FakeDialer dialer;
    SessionPool pool(PoolConfig{}, dialer.connector());
    SessionKey key = key_of("http://h/x");

    auto lease = pool.acquire(key);
    lease.release(true);
    CHECK(pool.stats().current_idle == 1);

    auto again = pool.acquire(key);
    PoolStats stats = pool.stats();
    CHECK(stats.sessions_created == 1);
    CHECK(stats.sessions_reused == 1);
    CHECK(stats.current_idle == 0);
    CHECK(stats.current_leased == 1);
    again.release(true);
}

TEST_CASE("acquire dials a new session when no idle exists") {
    FakeDialer dialer;
    SessionPool pool(PoolConfig{}, dialer.connector());
    auto a = pool.acquire(key_of("http://h/a"));
    auto b = pool.acquire(key_of("http://h/b"));  // same key, needs a second dial
    PoolStats stats = pool.stats();
    CHECK(stats.sessions_created == 2);
    CHECK(stats.sessions_reused == 0);
    a.release(true);
    b.release(true);
}

TEST_CASE("100 serial acquire/release cycles use exactly one connection") {
    FakeDialer dialer;
    SessionPool pool(PoolConfig{}, dialer.connector());
    SessionKey key = key_of("http://h/x");
    for (int i = 0; i < 100; ++i) {
        auto lease = pool.acquire(key);
        lease.release(true);
    }
    PoolStats stats = pool.stats();
    CHECK(stats.sessions_created == 1);
    CHECK(stats.sessions_reused == 99);
    CHECK(dialer.dials[key] == 1);
    // spec invariant: created + reused == acquisitions granted
    CHECK(stats.sessions_created + stats.sessions_reused == 100);
}

TEST_CASE("non-reusable release closes instead of parking") {
    FakeDialer dialer;
    SessionPool pool(PoolConfig{}, dialer.connector());
    SessionKey key = key_of("http://h/x");
    auto lease = pool.acquire(key);
    lease.release(false);
    PoolStats stats = pool.stats();
    CHECK(stats.current_idle == 0);
    CHECK(stats.release_close_count == 1);
    // Next acquire needs a fresh dial.
    auto lease2 = pool.acquire(key);
    CHECK(pool.stats().sessions_created == 2);
    lease2.release(false);
}

TEST_CASE("dropping a lease without release closes the session") {
    FakeDialer dialer;
    SessionPool pool(PoolConfig{}, dialer.connector());
    { auto lease = pool.acquire(key_of("http://h/x")); }
    CHECK(pool.stats().current_idle == 0);
    CHECK(pool.stats().current_leased == 0);
}

TEST_CASE("idle reuse is most-recently-used first") {
    FakeDialer dialer;
    SessionPool pool(PoolConfig{}, dialer.connector());
    SessionKey key = key_of("http://h/x");
    auto a = pool.acquire(key);
    auto b = pool.acquire(key);
    PooledSession* first = &a.session();
    PooledSession* second = &b.session();
    a.release(true);   // parked first, older
    b.release(true);   // parked second, hotter
    auto next = pool.acquire(key);
    CHECK(&next.session() == second);
    auto after = pool.acquire(key);
    CHECK(&after.session() == first);
    next.release(true);
    after.release(true);
}

TEST_CASE("evict_idle honors ttl and never touches leases") {
    FakeDialer dialer;
    PoolConfig config;
    config.idle_ttl = 50ms;
    SessionPool pool(config, dialer.connector());
    SessionKey key = key_of("http://h/x");

    CHECK(pool.evict_idle() == 0);  // empty pool

    auto a = pool.acquire(key);
    auto b = pool.acquire(key);
    auto c = pool.acquire(key);
    auto leased = pool.acquire(key);
    a.release(true);
    b.release(true);
    std::this_thread::sleep_for(70ms);  // a and b age past the ttl
    c.release(true);                    // c stays fresh
    CHECK(pool.stats().current_idle == 3);

    CHECK(pool.evict_idle() == 2);
    PoolStats stats = pool.stats();
    CHECK(stats.current_idle == 1);
    CHECK(stats.current_leased == 1);  // the held lease is untouched
    CHECK(stats.sessions_evicted == 2);
    leased.release(true);
}

TEST_CASE("acquire blocks until release, then times out when saturated") {
    FakeDialer dialer;
    PoolConfig config;
    config.max_sessions_per_key = 1;
    config.max_total_sessions = 1;
    config.connect_timeout = 150ms;
    SessionPool pool(config, dialer.connector());
    SessionKey key = key_of("http://h/x");

    auto lease = pool.acquire(key);

    // A waiter gets the session once it is released.
    std::thread releaser([&] {
        std::this_thread::sleep_for(30ms);
        lease.release(true);
    });
    auto start = std::chrono::steady_clock::now();
    auto second = pool.acquire(key);
    auto waited = std::chrono::steady_clock::now() - start;
    CHECK(waited >= 20ms);
    releaser.join();

    // Saturated past the timeout: AcquireTimeout.
    CHECK_THROWS_AS(pool.acquire(key), AcquireTimeout);
    second.release(true);
}

TEST_CASE("total cap evicts the LRU idle session of another key") {
    FakeDialer dialer;
    PoolConfig config;
    config.max_sessions_per_key = 2;
    config.max_total_sessions = 2;
    SessionPool pool(config, dialer.connector());

    auto a = pool.acquire(key_of("http://a/"));
    auto b = pool.acquire(key_of("http://b/"));
    a.release(true);
    b.release(true);
    CHECK(pool.stats().current_idle == 2);

    auto c = pool.acquire(key_of("http://c/"));  // needs room: evict LRU (a)
    PoolStats stats = pool.stats();
    CHECK(stats.sessions_evicted == 1);
    CHECK(stats.current_idle == 1);
    c.release(true);
}

TEST_CASE("connector failures surface and release the reserved slot") {
    FakeDialer dialer;
    PoolConfig config;
    config.max_sessions_per_key = 1;
    config.max_total_sessions = 1;
    SessionPool pool(config, dialer.connector());
    dialer.fail = true;
    CHECK_THROWS_AS(pool.acquire(key_of("http://h/")), ConnectFailed);
    dialer.fail = false;
    auto lease = pool.acquire(key_of("http://h/"));  // slot was not leaked
    lease.release(true);
}

TEST_CASE("default connector refuses https without a TLS provider") {
    SessionPool pool;
    CHECK_THROWS_AS(pool.acquire(session_key("https://localhost:1/x", "anon")), ConnectFailed);
}

TEST_CASE("https keys pool separately from http over a loopback shim") {
    // The shim connector dials plain sockets for https keys, standing in for
    // a TLS transport; key partitioning is what is under test.
    FakeDialer dialer;
    SessionPool pool(PoolConfig{}, dialer.connector());
    SessionKey http_key = session_key("http://h:7000/x", "anon");
    SessionKey https_key = session_key("https://h:7000/x", "anon");

    auto a = pool.acquire(http_key);
    a.release(true);
    auto b = pool.acquire(https_key);  // same host:port, distinct scheme
    CHECK(pool.stats().sessions_created == 2);
    b.release(true);
    CHECK(dialer.dials[http_key] == 1);
    CHECK(dialer.dials[https_key] == 1);
}

TEST_CASE("invalid pool limits are rejected") {
    CHECK_THROWS_AS(SessionPool(PoolConfig{0, 8, 60s, 30s}), InvalidParams);
    CHECK_THROWS_AS(SessionPool(PoolConfig{8, 4, 60s, 30s}), InvalidParams);
}

TEST_CASE("randomized stress: serial-use and cap invariants hold") {
    FakeDialer dialer;
    PoolConfig config;
    config.max_sessions_per_key = 4;
    config.max_total_sessions = 8;
    config.connect_timeout = 5s;
    SessionPool pool(config, dialer.connector());

    const std::vector<SessionKey> keys{key_of("http://a/"), key_of("http://b/"),
                                       key_of("http://c/")};
    std::mutex leased_mutex;
    std::set<const PooledSession*> leased;
    std::atomic<bool> violation{false};
    std::atomic<bool> done{false};

    std::thread sampler([&] {
        while (!done.load()) {
            PoolStats stats = pool.stats();
            if (stats.current_idle + stats.current_leased > config.max_total_sessions)
                violation.store(true);
            std::this_thread::sleep_for(1ms);
        }
    });

    std::vector<std::thread> workers;
    for (int w = 0; w < 16; ++w) {
        workers.emplace_back([&, w] {
            std::mt19937_64 rng(static_cast<std::uint64_t>(w) * 7919 + 1);
            for (int i = 0; i < 200; ++i) {
                const SessionKey& key = keys[rng() % keys.size()];
                auto lease = pool.acquire(key);
                {
                    std::lock_guard lock(leased_mutex);
                    // Serial-use: the same session must never be leased twice.
                    if (!leased.insert(&lease.session()).second) violation.store(true);
                }
                std::this_thread::sleep_for(std::chrono::microseconds(rng() % 200));
                {
                    std::lock_guard lock(leased_mutex);
                    leased.erase(&lease.session());
                }
                lease.release(rng() % 8 != 0);
            }
        });
    }
    for (auto& t : workers) t.join();
    done.store(true);
    sampler.join();

    CHECK_FALSE(violation.load());
    PoolStats stats = pool.stats();
    CHECK(stats.sessions_created + stats.sessions_reused == 16 * 200);
}
