// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/metalink.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <sstream>
#include <thread>

#include "httpio/digest.hpp"
#include "httpio/errors.hpp"

namespace httpio {

namespace {

namespace pt = boost::property_tree;

/// Local element name with any namespace prefix stripped.
std::string_view local_name(std::string_view key) {
    auto colon = key.rfind(':');
    return colon == std::string_view::npos ? key : key.substr(colon + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

const pt::ptree* find_child(const pt::ptree& node, std::string_view local) {
    for (const auto& [key, value] : node)
        if (local_name(key) == local) return &value;
    return nullptr;
}

std::string attribute(const pt::ptree& node, const std::string& name) {
    if (auto attrs = node.get_child_optional("<xmlattr>"))
        if (auto v = attrs->get_optional<std::string>(name)) return *v;
    return {};
}

bool is_http_url(std::string_view url) {
    std::string l = lower(std::string(url.substr(0, 8)));
    return l.rfind("http://", 0) == 0 || l.rfind("https://", 0) == 0;
}

/// Canonical form for replica-url comparison (dead sets).
std::string canonical_url(const std::string& url) {
    try {
        return Uri::parse(url).to_string();
    } catch (const MalformedUri&) {
        return url;
    }
}

constexpr std::uint64_t kMaxMetalinkBytes = 8ull << 20;
constexpr std::string_view kMetalinkMediaType = "application/metalink4+xml";

}  // namespace

MetalinkDocument parse_metalink(std::string_view xml) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw MalformedMetalink(std::string("not XML: ") + e.what());
    }

    const pt::ptree* metalink = find_child(tree, "metalink");
    if (!metalink) throw MalformedMetalink("no metalink element");
    const pt::ptree* file = find_child(*metalink, "file");
    if (!file) throw MalformedMetalink("no file element");

    MetalinkDocument doc;
    doc.name = attribute(*file, "name");

    for (const auto& [key, node] : *file) {
        std::string_view name = local_name(key);
        if (name == "size") {
            std::string_view text = trim(node.get_value<std::string>());
            std::uint64_t size = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), size);
            if (ec == std::errc() && p == text.data() + text.size()) doc.size = size;
        } else if (name == "hash") {
            std::string type = lower(attribute(node, "type"));
            std::string digest = lower(std::string(trim(node.get_value<std::string>())));
            if (!type.empty() && !digest.empty()) doc.checksums[type] = digest;
        } else if (name == "url") {
            std::string url(trim(node.get_value<std::string>()));
            if (!is_http_url(url)) {
                if (!url.empty()) ++doc.filtered_non_http;
                continue;
            }
            Replica replica;
            replica.url = url;
            replica.document_order = doc.replicas.size();
            std::string priority = attribute(node, "priority");
            if (!priority.empty()) {
                std::uint32_t p = 0;
                auto [ptr, ec] =
                    std::from_chars(priority.data(), priority.data() + priority.size(), p);
                if (ec == std::errc() && ptr == priority.data() + priority.size() && p >= 1)
                    replica.priority = p;
            }
            replica.location = attribute(node, "location");
            doc.replicas.push_back(std::move(replica));
        }
    }
    if (doc.replicas.empty()) throw MalformedMetalink("no usable replica");
    return doc;
}

DiscoveryResult discover_metalink(SessionPool& pool, const Uri& uri, const EngineLimits& limits) {
    DiscoveryResult result;

    auto attempt = [&](const std::string& label, const Uri& target, const wire::Headers& extra,
                       bool require_metalink_type) -> bool {
        try {
            SimpleResponse resp =
                http_request(pool, "GET", target, extra, {}, limits, kMaxMetalinkBytes);
            if (resp.status / 100 != 2) {
                result.attempts.push_back(label + ": http " + std::to_string(resp.status));
                return false;
            }
            if (require_metalink_type) {
                auto ct = resp.headers.get("Content-Type");
                if (!ct || ct->find("metalink") == std::string_view::npos) {
                    result.attempts.push_back(
                        label + ": rejected (content-type " +
                        std::string(ct.value_or("missing")) + ")");
                    return false;
                }
            }
            result.document = parse_metalink(resp.body);
            result.attempts.push_back(label + ": ok (" +
                                      std::to_string(result.document->replicas.size()) +
                                      " replicas)");
            return true;
        } catch (const MalformedMetalink& e) {
            result.attempts.push_back(label + ": parse failed: " + e.what());
        } catch (const Error& e) {
            result.attempts.push_back(label + ": " + e.what());
        }
        return false;
    };

    wire::Headers accept;
    accept.add("Accept", std::string(kMetalinkMediaType));
    if (attempt("accept-negotiation", uri, accept, true)) return result;

    Uri query_uri = uri;
    query_uri.query = query_uri.query.empty() ? "metalink" : query_uri.query + "&metalink";
    if (attempt("query", query_uri, {}, false)) return result;

    Uri suffix_uri = uri;
    suffix_uri.path += ".meta4";
    attempt("suffix", suffix_uri, {}, false);
    return result;
}

std::vector<Replica> order_replicas(const MetalinkDocument& doc,
                                    const std::set<std::string>& dead_urls) {
    std::set<std::string> dead_canonical;
    for (const auto& url : dead_urls) dead_canonical.insert(canonical_url(url));

    std::vector<Replica> live;
    for (const auto& replica : doc.replicas)
        if (!dead_canonical.count(canonical_url(replica.url))) live.push_back(replica);
    std::stable_sort(live.begin(), live.end(), [](const Replica& a, const Replica& b) {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.document_order < b.document_order;
    });
    if (live.empty()) throw NoReplicaAvailable();
    return live;
}

namespace {

bool failover_eligible(const FragmentOutcome& outcome) {
    if (outcome.state == FragmentState::transport_error) return true;
    if (outcome.state == FragmentState::http_error)
        return outcome.http_status == 0 || outcome.http_status == 404 ||
               outcome.http_status >= 500;
    return false;
}

bool any_failover_eligible(std::span<const FragmentOutcome> outcomes) {
    return std::any_of(outcomes.begin(), outcomes.end(), failover_eligible);
}

std::string first_error(std::span<const FragmentOutcome> outcomes) {
    for (const auto& o : outcomes)
        if (failover_eligible(o)) return o.message.empty() ? "request failed" : o.message;
    return "request failed";
}

}  // namespace

FailoverResult failover_read(SessionPool& pool, const Uri& uri,
                             std::span<const FragmentRequest> fragments,
                             const FailoverConfig& config) {
    FailoverResult result;
    std::vector<std::string> failures;

    std::optional<std::vector<FragmentOutcome>> primary;
    try {
        primary = vector_read(pool, uri, fragments, config.vector, config.limits);
    } catch (const TransportError& e) {
        failures.push_back("primary " + uri.to_string() + ": " + e.what());
    }
    if (primary && !any_failover_eligible(*primary)) {
        result.outcomes = std::move(*primary);
        result.served_by = uri.to_string();
        return result;
    }
    if (primary)
        failures.push_back("primary " + uri.to_string() + ": " + first_error(*primary));

    DiscoveryResult discovery = discover_metalink(pool, uri, config.limits);
    result.discovery_log = discovery.attempts;
    if (!discovery.document) {
        failures.push_back("metalink discovery found nothing");
        throw AllReplicasFailed(std::move(failures));
    }

    std::set<std::string> dead;
    dead.insert(uri.to_string());  // the primary already failed
    std::vector<Replica> ordered;
    try {
        ordered = order_replicas(*discovery.document, dead);
    } catch (const NoReplicaAvailable&) {
        failures.push_back("no replica beyond the failed primary");
        throw AllReplicasFailed(std::move(failures));
    }

    for (const auto& replica : ordered) {
        Uri replica_uri;
        try {
            replica_uri = Uri::parse(replica.url);
        } catch (const MalformedUri& e) {
            failures.push_back(replica.url + ": " + e.what());
            continue;
        }
        try {
            auto outcomes = vector_read(pool, replica_uri, fragments, config.vector,
                                        config.limits);
            if (!any_failover_eligible(outcomes)) {
                result.outcomes = std::move(outcomes);
                result.served_by = replica.url;
                return result;
            }
            failures.push_back(replica.url + ": " + first_error(outcomes));
        } catch (const TransportError& e) {
            failures.push_back(replica.url + ": " + e.what());
        }
    }
    throw AllReplicasFailed(std::move(failures));
}

void MemorySink::write_at(std::uint64_t offset, std::string_view data) {
    if (offset + data.size() > buffer_.size()) throw InvalidParams("sink write out of bounds");
    std::memcpy(buffer_.data() + static_cast<std::size_t>(offset), data.data(), data.size());
}

void MemorySink::read_range(std::uint64_t offset, char* dst, std::size_t n) const {
    if (offset + n > buffer_.size()) throw InvalidParams("sink read out of bounds");
    std::memcpy(dst, buffer_.data() + static_cast<std::size_t>(offset), n);
}

FileSink::FileSink(const std::string& path, std::uint64_t size) : size_(size) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd_ < 0) throw InvalidParams("cannot open sink file '" + path + "'");
    if (::ftruncate(fd_, static_cast<off_t>(size)) != 0) {
        ::close(fd_);
        throw InvalidParams("cannot size sink file '" + path + "'");
    }
}

FileSink::~FileSink() {
    if (fd_ >= 0) ::close(fd_);
}

void FileSink::write_at(std::uint64_t offset, std::string_view data) {
    if (offset + data.size() > size_) throw InvalidParams("sink write out of bounds");
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::pwrite(fd_, data.data() + done, data.size() - done,
                             static_cast<off_t>(offset + done));
        if (n <= 0) throw TransportError("pwrite failed");
        done += static_cast<std::size_t>(n);
    }
}

void FileSink::read_range(std::uint64_t offset, char* dst, std::size_t n) const {
    std::size_t done = 0;
    while (done < n) {
        ssize_t got = ::pread(fd_, dst + done, n - done, static_cast<off_t>(offset + done));
        if (got <= 0) throw TransportError("pread failed");
        done += static_cast<std::size_t>(got);
    }
}

std::string sink_digest(const RandomAccessSink& sink, std::string_view algorithm) {
    Digest digest(algorithm);
    std::vector<char> buf(256 * 1024);
    std::uint64_t offset = 0;
    while (offset < sink.size()) {
        std::size_t take = static_cast<std::size_t>(
            std::min<std::uint64_t>(buf.size(), sink.size() - offset));
        sink.read_range(offset, buf.data(), take);
        digest.update(std::string_view(buf.data(), take));
        offset += take;
    }
    return digest.hex();
}

StreamPlan make_stream_plan(std::uint64_t size, std::uint64_t chunk_size, std::size_t streams,
                            std::size_t replica_count) {
    if (chunk_size < 1) throw InvalidParams("chunk_size must be >= 1");
    if (streams < 1) throw InvalidParams("streams must be >= 1");
    if (replica_count < 1) throw InvalidParams("need at least one replica");
    StreamPlan plan;
    plan.chunk_size = chunk_size;
    plan.streams = streams;
    for (std::uint64_t offset = 0; offset < size; offset += chunk_size) {
        StreamPlan::Chunk chunk;
        chunk.range = ByteRange{offset, std::min(chunk_size, size - offset)};
        chunk.replica_index = plan.chunks.size() % replica_count;
        plan.chunks.push_back(chunk);
    }
    return plan;
}

namespace {

/// Shared state of one multi-stream download.
struct MultistreamState {
    std::mutex mutex;
    std::condition_variable wake;
    StreamPlan plan;
    std::deque<std::size_t> pending;
    std::vector<std::set<std::size_t>> attempted;  // per chunk: replica indices tried
    std::vector<bool> replica_dead;
    std::size_t done = 0;
    std::size_t active = 0;
    bool fatal = false;
    std::vector<std::string> failures;
    std::map<std::string, std::size_t> chunks_per_replica;
    std::vector<std::string> events;
};

}  // namespace

DownloadReport multistream_download(SessionPool& pool, const MetalinkDocument& doc,
                                    RandomAccessSink& sink, const MultistreamParams& params) {
    if (!doc.size) throw SizeUnknown();
    std::vector<Replica> replicas = order_replicas(doc, {});  // NoReplicaAvailable propagates

    MultistreamState st;
    st.plan = make_stream_plan(*doc.size, params.chunk_size, params.streams, replicas.size());
    st.attempted.resize(st.plan.chunks.size());
    st.replica_dead.assign(replicas.size(), false);
    for (std::size_t i = 0; i < st.plan.chunks.size(); ++i) st.pending.push_back(i);

    auto next_live_replica = [&](const std::set<std::size_t>& tried) -> std::optional<std::size_t> {
        for (std::size_t r = 0; r < replicas.size(); ++r)
            if (!st.replica_dead[r] && !tried.count(r)) return r;
        return std::nullopt;
    };

    auto worker = [&] {
        for (;;) {
            std::size_t chunk_index = 0;
            std::size_t replica_index = 0;
            {
                std::unique_lock lock(st.mutex);
                st.wake.wait(lock, [&] {
                    return st.fatal || !st.pending.empty() ||
                           st.done == st.plan.chunks.size() ||
                           (st.active == 0 && st.pending.empty());
                });
                if (st.fatal || st.done == st.plan.chunks.size()) return;
                if (st.pending.empty()) return;  // nothing left to pick up
                chunk_index = st.pending.front();
                st.pending.pop_front();
                auto& chunk = st.plan.chunks[chunk_index];
                // Chunk's assigned replica if usable, otherwise the first
                // live replica not yet tried for this chunk.
                if (!st.replica_dead[chunk.replica_index] &&
                    !st.attempted[chunk_index].count(chunk.replica_index)) {
                    replica_index = chunk.replica_index;
                } else if (auto r = next_live_replica(st.attempted[chunk_index])) {
                    replica_index = *r;
                    st.events.push_back("chunk " + std::to_string(chunk_index) +
                                        " migrated to " + replicas[*r].url);
                } else {
                    st.fatal = true;
                    st.failures.push_back("chunk " + std::to_string(chunk_index) +
                                          " exhausted all replicas");
                    st.wake.notify_all();
                    return;
                }
                chunk.replica_index = replica_index;
                chunk.state = ChunkState::active;
                ++st.active;
            }

            const ByteRange range = st.plan.chunks[chunk_index].range;
            const std::string& url = replicas[replica_index].url;
            bool ok = false;
            std::string error;
            try {
                Uri uri = Uri::parse(url);
                RangedResponse resp =
                    execute_ranged_get(pool, uri, std::span(&range, 1), params.limits);
                std::string_view payload;
                if (resp.kind == ResponseKind::full_body) {
                    if (!resp.parts.empty() && range.end() <= resp.parts[0].data.size())
                        payload = std::string_view(resp.parts[0].data)
                                      .substr(static_cast<std::size_t>(range.offset),
                                              static_cast<std::size_t>(range.length));
                } else {
                    for (const auto& part : resp.parts)
                        if (part.range == range) payload = part.data;
                }
                if (payload.size() == range.length) {
                    sink.write_at(range.offset, payload);
                    ok = true;
                } else {
                    error = "replica did not return the full chunk";
                }
            } catch (const std::exception& e) {
                error = e.what();
            }

            std::lock_guard lock(st.mutex);
            --st.active;
            auto& chunk = st.plan.chunks[chunk_index];
            if (ok) {
                chunk.state = ChunkState::done;
                ++st.done;
                ++st.chunks_per_replica[url];
            } else {
                chunk.state = ChunkState::pending;
                st.attempted[chunk_index].insert(replica_index);
                if (!st.replica_dead[replica_index]) {
                    st.replica_dead[replica_index] = true;
                    st.events.push_back("replica " + url + " demoted: " + error);
                }
                st.pending.push_front(chunk_index);
            }
            st.wake.notify_all();
        }
    };

    std::size_t worker_count = std::min(params.streams, replicas.size());
    worker_count = std::max<std::size_t>(1, worker_count);
    if (st.plan.chunks.empty()) worker_count = 0;
    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (std::size_t i = 0; i < worker_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (st.fatal || st.done != st.plan.chunks.size()) {
        if (st.failures.empty()) st.failures.push_back("download incomplete");
        for (const auto& e : st.events) st.failures.push_back(e);
        throw AllReplicasFailed(std::move(st.failures));
    }

    DownloadReport report;
    report.bytes = *doc.size;
    report.chunks_per_replica = std::move(st.chunks_per_replica);
    report.events = std::move(st.events);

    // Verify the strongest supported checksum the document carries.
    static const char* kPreference[] = {"sha-512", "sha-256", "sha-1", "md5"};
    for (const char* algo : kPreference) {
        auto it = doc.checksums.find(algo);
        if (it == doc.checksums.end() || !Digest::supported(algo)) continue;
        report.checksum_checked = true;
        report.checksum_algorithm = algo;
        std::string actual = sink_digest(sink, algo);
        if (actual != it->second) throw ChecksumMismatch(algo, it->second, actual);
        report.checksum_verified = true;
        break;
    }
    if (!report.checksum_checked)
        report.events.push_back("no supported checksum in document; verification skipped");
    return report;
}

}  // namespace httpio
