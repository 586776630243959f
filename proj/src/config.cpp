// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httpio/client.hpp"
#include "httpio/errors.hpp"
#include "httpio/kv.hpp"

namespace httpio {

MetalinkStrategy parse_metalink_strategy(std::string_view name) {
    if (name == "off") return MetalinkStrategy::off;
    if (name == "failover") return MetalinkStrategy::failover;
    if (name == "multistream") return MetalinkStrategy::multistream;
    throw ConfigInvalid("metalink.strategy", "unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(MetalinkStrategy strategy) {
    switch (strategy) {
        case MetalinkStrategy::off: return "off";
        case MetalinkStrategy::failover: return "failover";
        case MetalinkStrategy::multistream: return "multistream";
    }
    return "failover";
}

EngineLimits ClientConfig::engine_limits() const {
    EngineLimits limits;
    limits.max_full_body_fallback = max_full_body_fallback;
    limits.credential_id = credential_id;
    limits.io_timeout = io_timeout;
    return limits;
}

namespace {

std::uint64_t parse_u64_key(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || p != value.data() + value.size())
        throw ConfigInvalid(key, "not an unsigned integer: '" + value + "'");
    return out;
}

const char* const kKnownKeys[] = {
    "pool.max_per_key",
    "pool.max_total",
    "pool.idle_ttl_s",
    "pool.connect_timeout_s",
    "vector.gap_threshold",
    "vector.max_ranges_per_request",
    "vector.max_range_header_bytes",
    "vector.max_concurrent_batches",
    "engine.max_full_body_fallback",
    "metalink.strategy",
    "metalink.streams",
    "metalink.chunk_size",
    "http.credential_id",
    "http.connect_timeout_s",
    "http.io_timeout_s",
};

void apply_key(ClientConfig& config, const std::string& key, const std::string& value) {
    if (key == "pool.max_per_key") {
        config.pool.max_sessions_per_key = static_cast<std::size_t>(parse_u64_key(key, value));
        if (config.pool.max_sessions_per_key < 1) throw ConfigInvalid(key, "must be >= 1");
    } else if (key == "pool.max_total") {
        config.pool.max_total_sessions = static_cast<std::size_t>(parse_u64_key(key, value));
    } else if (key == "pool.idle_ttl_s") {
        config.pool.idle_ttl = std::chrono::seconds(parse_u64_key(key, value));
    } else if (key == "pool.connect_timeout_s" || key == "http.connect_timeout_s") {
        std::uint64_t s = parse_u64_key(key, value);
        if (s < 1) throw ConfigInvalid(key, "must be >= 1");
        config.pool.connect_timeout = std::chrono::seconds(s);
    } else if (key == "vector.gap_threshold") {
        config.vector.gap_threshold = parse_u64_key(key, value);
    } else if (key == "vector.max_ranges_per_request") {
        config.vector.max_ranges_per_request = static_cast<std::size_t>(parse_u64_key(key, value));
        if (config.vector.max_ranges_per_request < 1) throw ConfigInvalid(key, "must be >= 1");
    } else if (key == "vector.max_range_header_bytes") {
        config.vector.max_range_header_bytes = static_cast<std::size_t>(parse_u64_key(key, value));
        if (config.vector.max_range_header_bytes < 48)
            throw ConfigInvalid(key, "too small to carry a single range");
    } else if (key == "vector.max_concurrent_batches") {
        config.vector.max_concurrent_batches = static_cast<std::size_t>(parse_u64_key(key, value));
        if (config.vector.max_concurrent_batches < 1) throw ConfigInvalid(key, "must be >= 1");
    } else if (key == "engine.max_full_body_fallback") {
        config.max_full_body_fallback = parse_u64_key(key, value);
        if (config.max_full_body_fallback < 1) throw ConfigInvalid(key, "must be >= 1");
    } else if (key == "metalink.strategy") {
        config.metalink_strategy = parse_metalink_strategy(value);
    } else if (key == "metalink.streams") {
        config.metalink_streams = static_cast<std::size_t>(parse_u64_key(key, value));
        if (config.metalink_streams < 1) throw ConfigInvalid(key, "must be >= 1");
    } else if (key == "metalink.chunk_size") {
        config.metalink_chunk_size = parse_u64_key(key, value);
        if (config.metalink_chunk_size < 1) throw ConfigInvalid(key, "must be >= 1");
    } else if (key == "http.credential_id") {
        if (value.empty()) throw ConfigInvalid(key, "must not be empty");
        config.credential_id = value;
    } else if (key == "http.io_timeout_s") {
        std::uint64_t s = parse_u64_key(key, value);
        if (s < 1) throw ConfigInvalid(key, "must be >= 1");
        config.io_timeout = std::chrono::seconds(s);
    } else {
        throw ConfigInvalid(key, "unknown key");
    }
}

void validate(const ClientConfig& config) {
    if (config.pool.max_total_sessions < config.pool.max_sessions_per_key)
        throw ConfigInvalid("pool.max_total", "must be >= pool.max_per_key");
}

std::string env_name_for(std::string key) {
    for (char& c : key) {
        if (c == '.') c = '_';
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return key;
}

}  // namespace

std::map<std::string, std::string> environment_overrides() {
    std::map<std::string, std::string> out;
    for (const char* key : kKnownKeys) {
        if (const char* v = std::getenv(env_name_for(key).c_str())) out[key] = v;
    }
    return out;
}

ClientConfig load_config(const std::optional<std::string>& file_path,
                         const std::map<std::string, std::string>& env_overrides) {
    ClientConfig config;
    if (file_path) {
        std::ifstream in(*file_path);
        if (!in) throw ConfigInvalid(*file_path, "cannot read config file");
        std::string line;
        while (std::getline(in, line)) {
            if (auto kv = kv::parse_line(line)) apply_key(config, kv->first, kv->second);
        }
    }
    for (const auto& [key, value] : env_overrides) apply_key(config, key, value);
    validate(config);
    return config;
}

}  // namespace httpio
