// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// User-facing object API: CRUD over HTTP verbs plus a positional file-read
// handle layered on the range engine and vector I/O, with optional Metalink
// replica fail-over.

#ifndef HTTPIO_CLIENT_HPP
#define HTTPIO_CLIENT_HPP

#include <chrono>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "httpio/metalink.hpp"
#include "httpio/range_engine.hpp"
#include "httpio/session_pool.hpp"
#include "httpio/uri.hpp"
#include "httpio/vector_io.hpp"

namespace httpio {

enum class MetalinkStrategy { off, failover, multistream };

MetalinkStrategy parse_metalink_strategy(std::string_view name);
std::string_view to_string(MetalinkStrategy strategy);

struct ClientConfig {
    PoolConfig pool;
    VectorConfig vector;
    std::uint64_t max_full_body_fallback = 64ull << 20;
    MetalinkStrategy metalink_strategy = MetalinkStrategy::failover;
    std::size_t metalink_streams = 4;
    std::uint64_t metalink_chunk_size = 8ull << 20;
    std::string credential_id = "anonymous";
    std::chrono::milliseconds io_timeout = std::chrono::seconds(30);

    EngineLimits engine_limits() const;
};

/// Builds a config as defaults <- file <- environment overrides. Unknown or
/// out-of-range keys throw ConfigInvalid naming the offending key. The env
/// map uses config-file key spelling ("pool.max_per_key"); see
/// environment_overrides() for process-environment lookup.
ClientConfig load_config(const std::optional<std::string>& file_path,
                         const std::map<std::string, std::string>& env_overrides = {});

/// Reads the known config keys from the process environment (keys uppercased,
/// dots replaced by underscores: pool.max_per_key -> POOL_MAX_PER_KEY).
std::map<std::string, std::string> environment_overrides();

struct ResourceInfo {
    std::string uri;
    std::optional<std::uint64_t> size;
    std::optional<std::string> last_modified;  // raw HTTP-date from the server
    std::optional<std::string> etag;
    bool supports_ranges = false;
};

enum class RemoveOutcome { removed, already_absent };

/// Positional read handle. Single owner for read() (it mutates position);
/// pread/preadvec on the same handle are safe concurrently.
struct RemoteFileHandle {
    Uri uri;  // resolved target: the original URI or the surviving replica
    ResourceInfo info;
    std::uint64_t position = 0;
    bool failover_enabled = false;
};

class Client {
public:
    explicit Client(ClientConfig config = {});

    SessionPool& pool() { return pool_; }
    const ClientConfig& config() const { return config_; }

    /// Object-level idempotent write; 2xx required. Returns refreshed info.
    ResourceInfo put(const std::string& uri, std::string_view body);

    /// Full object bytes on 200.
    std::string get(const std::string& uri);

    /// DELETE with success-of-intent semantics: a 404 reports already_absent
    /// rather than an error.
    RemoveOutcome remove(const std::string& uri);

    /// HEAD mapping.
    ResourceInfo stat(const std::string& uri);

    /// Stats the resource and positions at 0. With fail-over enabled, a dead
    /// primary resolves to the first live replica from the Metalink.
    RemoteFileHandle open(const std::string& uri);

    /// Single-range positional read. Clamps to EOF when the size is known;
    /// throws RangeNotSatisfiable at or after EOF.
    std::string pread(const RemoteFileHandle& handle, std::uint64_t offset, std::uint64_t length);

    /// Vectored positional read; fragments are filled in place.
    std::vector<FragmentOutcome> preadvec(const RemoteFileHandle& handle,
                                          std::span<const FragmentRequest> fragments);

    /// Sequential read advancing position; short only at EOF.
    std::string read(RemoteFileHandle& handle, std::uint64_t length);

private:
    SimpleResponse request(const std::string& method, const Uri& uri,
                           const wire::Headers& extra, std::string_view body,
                           std::uint64_t max_body = ~0ull);
    ResourceInfo info_from_head(const Uri& uri, const SimpleResponse& resp) const;

    ClientConfig config_;
    SessionPool pool_;
};

}  // namespace httpio

#endif  // HTTPIO_CLIENT_HPP
