// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/session_pool.hpp"

#include <algorithm>

#include "httpio/errors.hpp"

namespace httpio {

std::string SessionKey::to_string() const {
    std::string s(httpio::to_string(scheme));
    s += "://";
    s += host;
    s += ':';
    s += std::to_string(port);
    s += '#';
    s += credential_id;
    return s;
}

SessionKey session_key(std::string_view uri, std::string_view credential_id) {
    return session_key(Uri::parse(uri), credential_id);
}

SessionKey session_key(const Uri& uri, std::string_view credential_id) {
    SessionKey key;
    key.scheme = uri.scheme;
    key.host = uri.host;
    key.port = uri.port;
    key.credential_id = credential_id.empty() ? "anonymous" : std::string(credential_id);
    return key;
}

SessionLease& SessionLease::operator=(SessionLease&& other) noexcept {
    if (this != &other) {
        if (session_) release(false);
        pool_ = other.pool_;
        session_ = std::move(other.session_);
    }
    return *this;
}

SessionLease::~SessionLease() {
    if (session_) release(false);
}

void SessionLease::release(bool reusable) {
    if (!session_) return;
    pool_->release_session(std::move(session_), reusable);
}

Connector SessionPool::default_connector() {
    return [](const SessionKey& key, std::chrono::milliseconds timeout) {
        if (key.scheme == Scheme::https)
            throw ConnectFailed("https requires an installed TLS connector");
        return net::TcpStream::connect(key.host, key.port, timeout);
    };
}

SessionPool::SessionPool(PoolConfig config, Connector connector)
    : config_(config), connector_(std::move(connector)) {
    if (config_.max_sessions_per_key < 1 || config_.max_total_sessions < config_.max_sessions_per_key)
        throw InvalidParams("pool limits must satisfy 1 <= max_per_key <= max_total");
}

SessionPool::~SessionPool() {
    std::lock_guard lock(mutex_);
    idle_.clear();  // closes all idle connections
}

bool SessionPool::evict_one_idle_locked() {
    SessionKey const* lru_key = nullptr;
    std::chrono::steady_clock::time_point oldest{};
    for (const auto& [key, sessions] : idle_) {
        if (sessions.empty()) continue;
        auto age = sessions.back()->last_used_at;  // back = least recently used
        if (!lru_key || age < oldest) {
            lru_key = &key;
            oldest = age;
        }
    }
    if (!lru_key) return false;
    auto& sessions = idle_.find(*lru_key)->second;
    sessions.pop_back();
    drop_open_locked(*lru_key);
    --stats_.current_idle;
    ++stats_.sessions_evicted;
    return true;
}

void SessionPool::drop_open_locked(const SessionKey& key) {
    auto it = open_per_key_.find(key);
    if (it != open_per_key_.end() && --it->second == 0) open_per_key_.erase(it);
    --open_total_;
}

SessionLease SessionPool::acquire(const SessionKey& key) {
    const auto deadline = std::chrono::steady_clock::now() + config_.connect_timeout;
    std::unique_lock lock(mutex_);
    for (;;) {
        // Reuse path: most recently used idle session first. Sessions the
        // server closed while parked are dropped on the spot.
        auto it = idle_.find(key);
        while (it != idle_.end() && !it->second.empty()) {
            std::unique_ptr<PooledSession> session = std::move(it->second.front());
            it->second.pop_front();
            --stats_.current_idle;
            if (!session->connection.idle_and_live()) {
                drop_open_locked(key);
                ++stats_.sessions_evicted;
                released_.notify_all();
                continue;
            }
            ++stats_.sessions_reused;
            ++stats_.current_leased;
            return SessionLease(this, std::move(session));
        }

        // Create path, capacity permitting. Both caps are hard: open sessions
        // per key and in total. When only the total cap binds, an idle
        // session of another key is evicted to make room.
        if (open_per_key_[key] < config_.max_sessions_per_key) {
            bool has_room = open_total_ < config_.max_total_sessions;
            if (!has_room && stats_.current_idle > 0) has_room = evict_one_idle_locked();
            if (has_room) {
                ++open_per_key_[key];
                ++open_total_;
                lock.unlock();
                std::unique_ptr<PooledSession> session;
                try {
                    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now());
                    if (left.count() < 1) left = std::chrono::milliseconds(1);
                    net::TcpStream stream = connector_(key, left);
                    session = std::make_unique<PooledSession>(key, std::move(stream));
                } catch (...) {
                    lock.lock();
                    drop_open_locked(key);
                    released_.notify_all();
                    throw;
                }
                lock.lock();
                ++stats_.sessions_created;
                ++stats_.current_leased;
                return SessionLease(this, std::move(session));
            }
        }

        if (released_.wait_until(lock, deadline) == std::cv_status::timeout)
            throw AcquireTimeout("pool saturated for " + key.to_string());
    }
}

void SessionPool::release_session(std::unique_ptr<PooledSession> session, bool reusable) {
    SessionKey key = session->key;
    std::lock_guard lock(mutex_);
    --stats_.current_leased;
    stats_.requests_dispatched += session->requests_served - session->reported_requests;
    session->reported_requests = session->requests_served;
    if (reusable && idle_[key].size() < config_.max_sessions_per_key) {
        session->last_used_at = std::chrono::steady_clock::now();
        idle_[key].push_front(std::move(session));
        ++stats_.current_idle;
    } else {
        // Close (drop) the connection; close errors are swallowed.
        ++stats_.release_close_count;
        drop_open_locked(key);
        session.reset();
    }
    released_.notify_all();
}

std::size_t SessionPool::evict_idle(std::chrono::steady_clock::time_point now) {
    std::lock_guard lock(mutex_);
    std::size_t evicted = 0;
    for (auto& [key, sessions] : idle_) {
        while (!sessions.empty() && now - sessions.back()->last_used_at > config_.idle_ttl) {
            sessions.pop_back();
            drop_open_locked(key);
            --stats_.current_idle;
            ++stats_.sessions_evicted;
            ++evicted;
        }
    }
    if (evicted > 0) released_.notify_all();
    return evicted;
}

PoolStats SessionPool::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

std::map<SessionKey, std::size_t> SessionPool::open_per_key() const {
    std::lock_guard lock(mutex_);
    std::map<SessionKey, std::size_t> out;
    for (const auto& [key, count] : open_per_key_)
        if (count > 0) out[key] = count;
    return out;
}

std::string SessionPool::format_stats() const {
    PoolStats s = stats();
    std::string out;
    out += "pool.sessions_created=" + std::to_string(s.sessions_created) + "\n";
    out += "pool.sessions_reused=" + std::to_string(s.sessions_reused) + "\n";
    out += "pool.sessions_evicted=" + std::to_string(s.sessions_evicted) + "\n";
    out += "pool.release_close_count=" + std::to_string(s.release_close_count) + "\n";
    out += "pool.requests_dispatched=" + std::to_string(s.requests_dispatched) + "\n";
    out += "pool.current_idle=" + std::to_string(s.current_idle) + "\n";
    out += "pool.current_leased=" + std::to_string(s.current_leased) + "\n";
    return out;
}

}  // namespace httpio
