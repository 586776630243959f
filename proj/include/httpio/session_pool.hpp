// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Keep-alive connection pool. Sessions are keyed by (scheme, host, port,
// credential) and recycled most-recently-used first so repeated requests to
// the same endpoint ride one TCP connection instead of paying slow start per
// request. HTTP/1.1 without pipelining: a session serves one request at a
// time.

#ifndef HTTPIO_SESSION_POOL_HPP
#define HTTPIO_SESSION_POOL_HPP

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "httpio/uri.hpp"
#include "httpio/wire.hpp"

namespace httpio {

/// Identity of a reusable connection target. Two URIs differing only in
/// path/query/fragment share a key; distinct credentials never share one.
struct SessionKey {
    Scheme scheme = Scheme::http;
    std::string host;
    std::uint16_t port = 80;
    std::string credential_id = "anonymous";

    auto operator<=>(const SessionKey&) const = default;
    std::string to_string() const;
};

/// Normalizes an absolute http/https URI into a SessionKey (host case-folded,
/// default ports resolved). Throws MalformedUri.
SessionKey session_key(std::string_view uri, std::string_view credential_id);
SessionKey session_key(const Uri& uri, std::string_view credential_id);

struct PoolConfig {
    std::size_t max_sessions_per_key = 16;
    std::size_t max_total_sessions = 128;
    std::chrono::milliseconds idle_ttl = std::chrono::seconds(60);
    std::chrono::milliseconds connect_timeout = std::chrono::seconds(30);
};

struct PoolStats {
    std::uint64_t sessions_created = 0;
    std::uint64_t sessions_reused = 0;
    std::uint64_t sessions_evicted = 0;
    std::uint64_t release_close_count = 0;  // non-reusable releases (closes swallowed)
    std::uint64_t requests_dispatched = 0;  // requests sent over pool sessions
    std::size_t current_idle = 0;
    std::size_t current_leased = 0;
};

class SessionPool;

/// One pooled keep-alive connection. Owned by the pool while idle, by a
/// SessionLease while serving a request.
struct PooledSession {
    SessionKey key;
    wire::Connection connection;
    std::chrono::steady_clock::time_point created_at;
    std::chrono::steady_clock::time_point last_used_at;
    std::uint64_t requests_served = 0;   // lifetime requests on this connection
    std::uint64_t reported_requests = 0;  // already aggregated into pool stats

    PooledSession(SessionKey k, net::TcpStream stream)
        : key(std::move(k)),
          connection(std::move(stream)),
          created_at(std::chrono::steady_clock::now()),
          last_used_at(created_at) {}
};

/// Move-only lease on a pooled session. Exactly one in-flight request per
/// session; transferable between threads, never shared. Destruction without
/// an explicit release closes the connection (the safe default).
class SessionLease {
public:
    SessionLease() = default;
    SessionLease(SessionPool* pool, std::unique_ptr<PooledSession> session)
        : pool_(pool), session_(std::move(session)) {}
    SessionLease(SessionLease&&) noexcept = default;
    SessionLease& operator=(SessionLease&& other) noexcept;
    SessionLease(const SessionLease&) = delete;
    SessionLease& operator=(const SessionLease&) = delete;
    ~SessionLease();

    PooledSession& session() { return *session_; }
    wire::Connection& connection() { return session_->connection; }
    bool valid() const { return session_ != nullptr; }

    /// Returns the session to the pool (reusable) or closes it.
    void release(bool reusable);

private:
    SessionPool* pool_ = nullptr;
    std::unique_ptr<PooledSession> session_;
};

/// Dials a transport for a key. The default connector opens plain TCP for
/// http and refuses https (no TLS provider is bundled; embedders install one
/// via this hook, and tests use loopback shims).
using Connector =
    std::function<net::TcpStream(const SessionKey&, std::chrono::milliseconds timeout)>;

class SessionPool {
public:
    explicit SessionPool(PoolConfig config = {}, Connector connector = default_connector());
    ~SessionPool();
    SessionPool(const SessionPool&) = delete;
    SessionPool& operator=(const SessionPool&) = delete;

    /// Grants a session for the key: an idle one (MRU first) when available,
    /// a fresh connection while under the caps, otherwise blocks until a
    /// session frees up or connect_timeout elapses. Throws ConnectFailed or
    /// AcquireTimeout.
    SessionLease acquire(const SessionKey& key);

    /// Closes idle sessions not used since `now - idle_ttl`. Never touches
    /// leased sessions. Returns the count evicted.
    std::size_t evict_idle(std::chrono::steady_clock::time_point now);
    std::size_t evict_idle() { return evict_idle(std::chrono::steady_clock::now()); }

    PoolStats stats() const;
    /// Flat key=value text block of the stats, for the CLI.
    std::string format_stats() const;
    /// Open (idle + leased + connecting) session count per key, a consistent
    /// snapshot. Drives cap assertions in the stress tests.
    std::map<SessionKey, std::size_t> open_per_key() const;
    const PoolConfig& config() const { return config_; }

    static Connector default_connector();

private:
    friend class SessionLease;
    void release_session(std::unique_ptr<PooledSession> session, bool reusable);
    /// Drops the LRU idle session across all keys. Caller holds the lock.
    bool evict_one_idle_locked();
    /// Decrements the open counters for a key. Caller holds the lock.
    void drop_open_locked(const SessionKey& key);

    PoolConfig config_;
    Connector connector_;

    mutable std::mutex mutex_;
    std::condition_variable released_;
    // front = most recently used
    std::map<SessionKey, std::deque<std::unique_ptr<PooledSession>>> idle_;
    std::map<SessionKey, std::size_t> open_per_key_;  // idle + leased + connecting
    std::size_t open_total_ = 0;
    PoolStats stats_;
};

}  // namespace httpio

#endif  // HTTPIO_SESSION_POOL_HPP
