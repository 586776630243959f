// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Metalink (RFC 5854 subset) parsing and the two replica strategies built on
// it: seamless fail-over (zero extra requests while the primary is healthy)
// and multi-source multi-stream download with chunk migration away from
// failing replicas.

#ifndef HTTPIO_METALINK_HPP
#define HTTPIO_METALINK_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "httpio/bytes.hpp"
#include "httpio/range_engine.hpp"
#include "httpio/session_pool.hpp"
#include "httpio/vector_io.hpp"

namespace httpio {

struct Replica {
    std::string url;                    // absolute http(s) URI
    std::uint32_t priority = 999999;    // RFC 5854: lower is preferred
    std::string location;               // optional country code
    std::size_t document_order = 0;     // 0-based position in the Metalink
};

struct MetalinkDocument {
    std::string name;
    std::optional<std::uint64_t> size;
    std::map<std::string, std::string> checksums;  // algorithm -> lowercase hex
    std::vector<Replica> replicas;                 // document order, http(s) only
    std::size_t filtered_non_http = 0;             // urls dropped at parse time
};

/// Parses a Metalink/4 document: first file element's name, size, hashes and
/// http(s) urls with priority/location attributes. Throws MalformedMetalink
/// when the input is not XML, has no file element, or no usable replica.
MetalinkDocument parse_metalink(std::string_view xml);

struct DiscoveryResult {
    std::optional<MetalinkDocument> document;
    std::vector<std::string> attempts;  // one log line per discovery attempt
};

/// Tries the discovery ladder: (1) content negotiation via Accept, (2) the
/// "?metalink" query, (3) the ".meta4" suffix. First parseable document wins.
/// Failures are never surfaced, only logged per attempt.
DiscoveryResult discover_metalink(SessionPool& pool, const Uri& uri,
                                  const EngineLimits& limits = {});

/// Live replicas sorted by (priority ascending, document order ascending).
/// Throws NoReplicaAvailable when nothing remains.
std::vector<Replica> order_replicas(const MetalinkDocument& doc,
                                    const std::set<std::string>& dead_urls);

struct FailoverConfig {
    VectorConfig vector;
    EngineLimits limits;
};

struct FailoverResult {
    std::vector<FragmentOutcome> outcomes;
    std::string served_by;               // URI that finally served the data
    std::vector<std::string> discovery_log;
};

/// vector_read with replica fail-over: the primary URI is tried first (the
/// happy path adds zero requests); on transport failures, 404 or 5xx the
/// Metalink is discovered and replicas are tried one by one. 401/403 are
/// surfaced immediately, not failed over. Throws AllReplicasFailed.
FailoverResult failover_read(SessionPool& pool, const Uri& uri,
                             std::span<const FragmentRequest> fragments,
                             const FailoverConfig& config = {});

/// Random-access output for multi-stream downloads. Implementations must
/// allow concurrent write_at on disjoint regions.
class RandomAccessSink {
public:
    virtual ~RandomAccessSink() = default;
    virtual void write_at(std::uint64_t offset, std::string_view data) = 0;
    virtual void read_range(std::uint64_t offset, char* dst, std::size_t n) const = 0;
    virtual std::uint64_t size() const = 0;
};

class MemorySink : public RandomAccessSink {
public:
    explicit MemorySink(std::uint64_t size) : buffer_(static_cast<std::size_t>(size), '\0') {}
    void write_at(std::uint64_t offset, std::string_view data) override;
    void read_range(std::uint64_t offset, char* dst, std::size_t n) const override;
    std::uint64_t size() const override { return buffer_.size(); }
    const std::string& bytes() const { return buffer_; }

private:
    std::string buffer_;
};

class FileSink : public RandomAccessSink {
public:
    FileSink(const std::string& path, std::uint64_t size);
    ~FileSink();
    void write_at(std::uint64_t offset, std::string_view data) override;
    void read_range(std::uint64_t offset, char* dst, std::size_t n) const override;
    std::uint64_t size() const override { return size_; }

private:
    int fd_ = -1;
    std::uint64_t size_ = 0;
};

/// Hex digest of the sink's full contents.
std::string sink_digest(const RandomAccessSink& sink, std::string_view algorithm);

enum class ChunkState { pending, active, done, failed };

struct StreamPlan {
    struct Chunk {
        ByteRange range;
        std::size_t replica_index = 0;
        ChunkState state = ChunkState::pending;
    };
    std::uint64_t chunk_size = 8ull << 20;
    std::vector<Chunk> chunks;  // tile [0, size) exactly, last chunk may be short
    std::size_t streams = 1;
};

/// Tiles [0, size) into chunks and assigns them round-robin over the
/// replicas.
StreamPlan make_stream_plan(std::uint64_t size, std::uint64_t chunk_size, std::size_t streams,
                            std::size_t replica_count);

struct MultistreamParams {
    std::uint64_t chunk_size = 8ull << 20;
    std::size_t streams = 4;
    EngineLimits limits;
};

struct DownloadReport {
    std::uint64_t bytes = 0;
    std::map<std::string, std::size_t> chunks_per_replica;  // url -> chunks served
    bool checksum_checked = false;
    bool checksum_verified = false;
    std::string checksum_algorithm;
    std::vector<std::string> events;  // demotions and chunk migrations
};

/// Multi-source download: min(streams, live replicas) workers pull chunks
/// from a shared queue, each chunk fetched with a single-range GET from its
/// assigned replica. A chunk failing on one replica migrates to another and
/// the failing replica is demoted for the rest of the call. Verifies the
/// strongest supported document checksum when present. Throws SizeUnknown,
/// AllReplicasFailed, ChecksumMismatch.
DownloadReport multistream_download(SessionPool& pool, const MetalinkDocument& doc,
                                    RandomAccessSink& sink, const MultistreamParams& params = {});

}  // namespace httpio

#endif  // HTTPIO_METALINK_HPP
