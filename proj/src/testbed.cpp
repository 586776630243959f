// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/testbed.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "httpio/digest.hpp"
#include "httpio/errors.hpp"
#include "httpio/kv.hpp"
#include "httpio/net.hpp"
#include "httpio/range_headers.hpp"
#include "httpio/wire.hpp"

namespace httpio::testbed {

namespace {

using namespace std::chrono_literals;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string http_date(std::time_t t) {
    char buf[64];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%a, %d %b %Y %H:%M:%S GMT", &tm);
    return buf;
}

struct RangeSpec {
    std::uint64_t first = 0;
    std::optional<std::uint64_t> last;
};

/// Parses "bytes=a-b,c-" (first-last and open-ended forms). Returns nullopt
/// for anything else, which per RFC means the header is ignored.
std::optional<std::vector<RangeSpec>> parse_range_header(std::string_view value) {
    if (value.rfind("bytes=", 0) != 0) return std::nullopt;
    value = value.substr(6);
    std::vector<RangeSpec> specs;
    while (!value.empty()) {
        auto comma = value.find(',');
        std::string_view spec = value.substr(0, comma);
        value = comma == std::string_view::npos ? std::string_view() : value.substr(comma + 1);
        while (!spec.empty() && spec.front() == ' ') spec.remove_prefix(1);
        while (!spec.empty() && spec.back() == ' ') spec.remove_suffix(1);
        auto dash = spec.find('-');
        if (dash == std::string_view::npos || dash == 0) return std::nullopt;  // suffix form unsupported
        RangeSpec rs;
        auto parse_num = [](std::string_view s, std::uint64_t& out) {
            if (s.empty()) return false;
            out = 0;
            for (char c : s) {
                if (c < '0' || c > '9') return false;
                out = out * 10 + static_cast<std::uint64_t>(c - '0');
            }
            return true;
        };
        if (!parse_num(spec.substr(0, dash), rs.first)) return std::nullopt;
        std::string_view last_part = spec.substr(dash + 1);
        if (!last_part.empty()) {
            std::uint64_t last = 0;
            if (!parse_num(last_part, last) || last < rs.first) return std::nullopt;
            rs.last = last;
        }
        specs.push_back(rs);
    }
    if (specs.empty()) return std::nullopt;
    return specs;
}

struct ParsedRequest {
    std::string method;
    std::string target;
    std::string path;
    std::string query;
    wire::Headers headers;
    std::string body;
    bool http11 = true;
};

struct RouteInfo {
    std::string replica;  // "" = corpus root
    std::filesystem::path root;
    std::string rel_path;  // without leading '/'
};

constexpr std::string_view kMetalinkMediaType = "application/metalink4+xml";

}  // namespace

std::chrono::milliseconds LatencyModel::delay_for(std::uint64_t request_n) const {
    std::int64_t delay = per_request_delay.count();
    if (jitter.count() > 0) {
        std::uint64_t h = splitmix64(seed ^ (request_n * 0x9e3779b97f4a7c15ull));
        std::int64_t span = 2 * jitter.count() + 1;
        delay += static_cast<std::int64_t>(h % static_cast<std::uint64_t>(span)) - jitter.count();
    }
    return std::chrono::milliseconds(std::max<std::int64_t>(0, delay));
}

FaultPlan FaultPlan::parse(std::string_view text) {
    FaultPlan plan;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word) || word[0] == '#') continue;
        auto bad = [&](const std::string& why) {
            throw InvalidParams("fault plan line " + std::to_string(line_no) + ": " + why);
        };
        if (word == "offline") {
            ReplicaOffline ev;
            if (!(ls >> ev.replica)) bad("offline needs a replica name");
            if (!(ls >> ev.from_request)) ev.from_request = 1;
            plan.replica_offline.push_back(ev);
        } else if (word == "ignore-range" || word == "single-range-only") {
            std::string flag;
            if (!(ls >> flag) || (flag != "on" && flag != "off")) bad(word + " needs on|off");
            (word == "ignore-range" ? plan.ignore_range : plan.single_range_only) = flag == "on";
        } else if (word == "connection-close-every") {
            if (!(ls >> plan.connection_close_every_n)) bad("needs a count");
        } else if (word == "die-after-bytes") {
            DieAfterBytes ev;
            if (!(ls >> ev.replica >> ev.bytes)) bad("die-after-bytes needs replica and bytes");
            plan.die_after_bytes.push_back(ev);
        } else if (word == "read-only") {
            std::string prefix;
            if (!(ls >> prefix)) bad("read-only needs a path prefix");
            plan.read_only_paths.push_back(prefix);
        } else {
            bad("unknown directive '" + word + "'");
        }
    }
    return plan;
}

MetalinkMode parse_metalink_mode(std::string_view name) {
    if (name == "off") return MetalinkMode::off;
    if (name == "accept") return MetalinkMode::accept;
    if (name == "query") return MetalinkMode::query;
    if (name == "suffix") return MetalinkMode::suffix;
    if (name == "garbage") return MetalinkMode::garbage_suffix;
    if (name == "all") return MetalinkMode::all;
    throw InvalidParams("unknown metalink mode '" + std::string(name) + "'");
}

std::string ServerMetrics::to_kv() const {
    kv::Block block;
    block.set("tcp_accepts", tcp_accepts);
    block.set("requests_total", requests_total);
    block.set("ranged_requests", ranged_requests);
    block.set("multipart_responses", multipart_responses);
    block.set("metalink_requests", metalink_requests);
    for (const auto& [conn, count] : requests_per_connection)
        block.set("connection." + std::to_string(conn) + ".requests", count);
    for (const auto& [path, count] : requests_per_path) block.set("path." + path, count);
    return block.to_text();
}

struct TestbedServer::Impl {
    Options options;
    net::Listener listener;
    std::thread accept_thread;
    std::atomic<bool> stopping{false};

    std::mutex conn_mutex;
    std::vector<std::thread> conn_threads;

    std::mutex metrics_mutex;
    ServerMetrics metrics;
    std::uint64_t request_counter = 0;    // counted (non-metrics) requests
    std::uint64_t connection_counter = 0;

    std::mutex replica_mutex;
    std::map<std::string, std::uint64_t> replica_bytes_served;
    std::map<std::string, bool> replica_hard_dead;  // die_after_bytes tripped

    std::mutex hash_mutex;
    std::map<std::string, std::string> hash_cache;  // path|size|mtime -> sha-256

    // ---- routing ----------------------------------------------------------

    RouteInfo route(const std::string& path) const {
        RouteInfo info;
        info.root = options.corpus_root;
        std::string_view rest = std::string_view(path).substr(1);  // skip '/'
        auto slash = rest.find('/');
        std::string_view first = rest.substr(0, slash);
        for (const auto& [name, root] : options.replicas) {
            if (first == name) {
                info.replica = name;
                info.root = root;
                info.rel_path =
                    slash == std::string_view::npos ? "" : std::string(rest.substr(slash + 1));
                return info;
            }
        }
        info.rel_path = std::string(rest);
        return info;
    }

    static bool safe_rel_path(const std::string& rel) {
        if (rel.empty()) return false;
        std::string_view rest = rel;
        while (!rest.empty()) {
            auto slash = rest.find('/');
            std::string_view seg = rest.substr(0, slash);
            if (seg.empty() || seg == "." || seg == "..") return false;
            rest = slash == std::string_view::npos ? std::string_view() : rest.substr(slash + 1);
        }
        return true;
    }

    bool replica_offline(const std::string& replica, std::uint64_t request_n) const {
        for (const auto& ev : options.faults.replica_offline)
            if (ev.replica == replica && request_n >= std::max<std::uint64_t>(1, ev.from_request))
                return true;
        return false;
    }

    bool replica_dead(const std::string& replica) {
        std::lock_guard lock(replica_mutex);
        auto it = replica_hard_dead.find(replica);
        return it != replica_hard_dead.end() && it->second;
    }

    std::optional<std::uint64_t> die_limit(const std::string& replica) const {
        for (const auto& ev : options.faults.die_after_bytes)
            if (ev.replica == replica) return ev.bytes;
        return std::nullopt;
    }

    bool path_read_only(const std::string& path) const {
        for (const auto& prefix : options.faults.read_only_paths)
            if (path.rfind(prefix, 0) == 0) return true;
        return false;
    }

    // ---- metrics ----------------------------------------------------------

    /// Counts a data/metalink request and returns (request_n, connection_id).
    std::pair<std::uint64_t, std::uint64_t> count_request(std::uint64_t& conn_id,
                                                          const ParsedRequest& req) {
        std::lock_guard lock(metrics_mutex);
        std::uint64_t n = ++request_counter;
        if (conn_id == 0) {
            conn_id = ++connection_counter;
            ++metrics.tcp_accepts;
        }
        ++metrics.requests_total;
        ++metrics.requests_per_connection[conn_id];
        metrics.connection_targets[conn_id].push_back(req.target);
        ++metrics.requests_per_path[req.path];
        if (req.headers.get("Range")) ++metrics.ranged_requests;
        return {n, conn_id};
    }

    void count_multipart() {
        std::lock_guard lock(metrics_mutex);
        ++metrics.multipart_responses;
    }

    void count_metalink() {
        std::lock_guard lock(metrics_mutex);
        ++metrics.metalink_requests;
    }

    // ---- body sending with shaping and scripted death ----------------------

    /// Sends body bytes in chunks, applying per-megabyte delay and the
    /// die_after_bytes fault. Returns false when the connection was killed.
    bool send_shaped(wire::Connection& conn, const std::string& replica, const char* data,
                     std::size_t len) {
        constexpr std::size_t kChunk = 64 * 1024;
        auto limit = die_limit(replica);
        std::size_t sent = 0;
        while (sent < len) {
            std::size_t take = std::min(kChunk, len - sent);
            if (limit) {
                std::lock_guard lock(replica_mutex);
                std::uint64_t& served = replica_bytes_served[replica];
                if (served + take > *limit) {
                    std::size_t allowed = static_cast<std::size_t>(
                        *limit > served ? *limit - served : 0);
                    if (allowed > 0)
                        conn.stream().write_all(std::string_view(data + sent, allowed), 30s);
                    served = *limit;
                    replica_hard_dead[replica] = true;
                    conn.stream().abort();
                    return false;
                }
                served += take;
            }
            conn.stream().write_all(std::string_view(data + sent, take), 30s);
            sent += take;
            if (options.latency.per_megabyte_delay.count() > 0) {
                auto ns = std::chrono::nanoseconds(options.latency.per_megabyte_delay) * take /
                          (1024 * 1024);
                std::this_thread::sleep_for(ns);
            }
        }
        return true;
    }

    bool send_file_shaped(wire::Connection& conn, const std::string& replica, int fd,
                          std::uint64_t offset, std::uint64_t len) {
        std::vector<char> buf(256 * 1024);
        std::uint64_t done = 0;
        while (done < len) {
            std::size_t want = static_cast<std::size_t>(
                std::min<std::uint64_t>(buf.size(), len - done));
            ssize_t got = ::pread(fd, buf.data(), want, static_cast<off_t>(offset + done));
            if (got <= 0) throw TransportError("pread failed on corpus file");
            if (!send_shaped(conn, replica, buf.data(), static_cast<std::size_t>(got)))
                return false;
            done += static_cast<std::uint64_t>(got);
        }
        return true;
    }

    // ---- responses ---------------------------------------------------------

    void send_head(wire::Connection& conn, int status, wire::Headers& headers, bool close) {
        headers.set("Server", "httpio-testbed");
        headers.set("Connection", close ? "close" : "keep-alive");
        conn.stream().write_all(
            wire::serialize_response_head(status, wire::status_reason(status), headers), 30s);
    }

    /// Simple in-memory response; returns keep-alive.
    bool respond(wire::Connection& conn, int status, std::string_view body, bool close,
                 wire::Headers headers = {}, const std::string& replica = std::string(),
                 bool head_only = false) {
        headers.set("Content-Length", std::to_string(body.size()));
        send_head(conn, status, headers, close);
        if (!head_only && !body.empty())
            if (!send_shaped(conn, replica, body.data(), body.size())) return false;
        return !close;
    }

    // ---- metalink generation ----------------------------------------------

    std::string file_hash(const std::filesystem::path& file, std::uint64_t size,
                          std::time_t mtime) {
        std::string key = file.string() + "|" + std::to_string(size) + "|" + std::to_string(mtime);
        {
            std::lock_guard lock(hash_mutex);
            auto it = hash_cache.find(key);
            if (it != hash_cache.end()) return it->second;
        }
        Digest digest("sha-256");
        std::ifstream in(file, std::ios::binary);
        std::vector<char> buf(256 * 1024);
        while (in) {
            in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
            digest.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
        }
        std::string hex = digest.hex();
        std::lock_guard lock(hash_mutex);
        hash_cache[key] = hex;
        return hex;
    }

    /// Builds a Metalink/4 document listing every replica that holds the
    /// file. Returns nullopt when no replica has it.
    std::optional<std::string> generate_metalink(const std::string& rel_path) {
        struct Entry {
            std::string url;
            std::size_t priority;
        };
        std::vector<Entry> entries;
        std::optional<std::uint64_t> size;
        std::string hash;
        std::string name = rel_path.substr(rel_path.rfind('/') + 1);
        std::size_t index = 0;
        for (const auto& [replica_name, root] : options.replicas) {
            ++index;
            std::filesystem::path file = root / rel_path;
            std::error_code ec;
            auto status = std::filesystem::status(file, ec);
            if (ec || !std::filesystem::is_regular_file(status)) continue;
            if (!size) {
                size = std::filesystem::file_size(file, ec);
                if (ec) continue;
                struct stat st{};
                if (::stat(file.c_str(), &st) == 0) hash = file_hash(file, *size, st.st_mtime);
            }
            entries.push_back(
                Entry{base_url_ + "/" + replica_name + "/" + rel_path, index});
        }
        if (entries.empty()) return std::nullopt;

        std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        xml += "<metalink xmlns=\"urn:ietf:params:xml:ns:metalink\">\n";
        xml += "  <file name=\"" + xml_escape(name) + "\">\n";
        if (size) xml += "    <size>" + std::to_string(*size) + "</size>\n";
        if (!hash.empty()) xml += "    <hash type=\"sha-256\">" + hash + "</hash>\n";
        for (const auto& e : entries)
            xml += "    <url priority=\"" + std::to_string(e.priority) + "\">" +
                   xml_escape(e.url) + "</url>\n";
        xml += "  </file>\n</metalink>\n";
        return xml;
    }

    // ---- request handling --------------------------------------------------

    /// Metalink discovery endpoints. Returns true when the request was
    /// answered at the federation layer (result in keep).
    bool try_metalink(wire::Connection& conn, const ParsedRequest& req, bool close, bool& keep) {
        if (req.method != "GET") return false;
        MetalinkMode mode = options.metalink_mode;
        if (mode == MetalinkMode::off) return false;

        bool by_accept = false;
        if (auto accept = req.headers.get("Accept"))
            by_accept = accept->find(kMetalinkMediaType) != std::string_view::npos;
        bool by_query = req.query == "metalink";
        bool by_suffix = req.path.size() > 6 && req.path.ends_with(".meta4");

        std::string data_path = req.path;
        bool serve_garbage = false;
        bool matched = false;
        if (by_accept && (mode == MetalinkMode::accept || mode == MetalinkMode::all)) {
            matched = true;
        } else if (by_query && (mode == MetalinkMode::query || mode == MetalinkMode::all)) {
            matched = true;
        } else if (by_suffix) {
            if (mode == MetalinkMode::suffix || mode == MetalinkMode::all) {
                matched = true;
                data_path = req.path.substr(0, req.path.size() - 6);
            } else if (mode == MetalinkMode::garbage_suffix) {
                matched = true;
                serve_garbage = true;
            }
        }
        if (!matched) return false;

        count_metalink();
        if (serve_garbage) {
            wire::Headers h;
            h.set("Content-Type", "text/plain");
            keep = respond(conn, 200, "this is not a metalink document", close, std::move(h));
            return true;
        }
        RouteInfo route_info = route(data_path);
        auto xml = safe_rel_path(route_info.rel_path) ? generate_metalink(route_info.rel_path)
                                                      : std::nullopt;
        if (!xml) {
            keep = respond(conn, 404, "no replicas known for this resource\n", close);
            return true;
        }
        wire::Headers h;
        h.set("Content-Type", std::string(kMetalinkMediaType));
        keep = respond(conn, 200, *xml, close, std::move(h));
        return true;
    }

    bool handle_get_head(wire::Connection& conn, const ParsedRequest& req, const RouteInfo& ri,
                         std::uint64_t request_n, bool close) {
        bool head_only = req.method == "HEAD";
        std::filesystem::path file = ri.root / ri.rel_path;
        struct stat st{};
        if (!safe_rel_path(ri.rel_path) || ::stat(file.c_str(), &st) != 0 ||
            !S_ISREG(st.st_mode))
            return respond(conn, 404, "not found: " + req.path + "\n", close);

        const std::uint64_t size = static_cast<std::uint64_t>(st.st_size);
        wire::Headers h;
        h.set("Content-Type", "application/octet-stream");
        h.set("Accept-Ranges", options.faults.ignore_range ? "none" : "bytes");
        h.set("Last-Modified", http_date(st.st_mtime));
        h.set("ETag", "\"" + std::to_string(splitmix64(size ^ static_cast<std::uint64_t>(
                                                                  st.st_mtime))) + "\"");

        auto range_header = req.headers.get("Range");
        std::optional<std::vector<RangeSpec>> specs;
        if (range_header && !options.faults.ignore_range && !head_only)
            specs = parse_range_header(*range_header);

        int fd = ::open(file.c_str(), O_RDONLY | O_CLOEXEC);
        if (fd < 0) return respond(conn, 404, "unreadable\n", close);
        struct FdGuard {
            int fd;
            ~FdGuard() { ::close(fd); }
        } guard{fd};

        if (!specs) {
            // Plain 200 (also the ignore_range fault path for ranged GETs).
            h.set("Content-Length", std::to_string(size));
            send_head(conn, 200, h, close);
            if (head_only) return !close;
            if (!send_file_shaped(conn, ri.replica, fd, 0, size)) return false;
            return !close;
        }

        // Clip to the object; collect satisfiable ranges.
        std::vector<ByteRange> ranges;
        for (const auto& spec : *specs) {
            if (spec.first >= size) continue;
            std::uint64_t last = spec.last ? std::min(*spec.last, size - 1) : size - 1;
            ranges.push_back(ByteRange{spec.first, last - spec.first + 1});
        }
        if (ranges.empty()) {
            wire::Headers h416;
            h416.set("Content-Range", "bytes */" + std::to_string(size));
            return respond(conn, 416, "range not satisfiable\n", close, std::move(h416));
        }
        if (options.faults.single_range_only && ranges.size() > 1) ranges.resize(1);

        if (ranges.size() == 1) {
            const ByteRange& r = ranges[0];
            std::string body(static_cast<std::size_t>(r.length), '\0');
            if (::pread(fd, body.data(), body.size(), static_cast<off_t>(r.offset)) !=
                static_cast<ssize_t>(body.size()))
                throw TransportError("pread failed");
            h.set("Content-Range", "bytes " + std::to_string(r.offset) + "-" +
                                       std::to_string(r.last()) + "/" + std::to_string(size));
            return respond(conn, 206, body, close, std::move(h), ri.replica);
        }

        // Multi-range: multipart/byteranges, deterministic boundary per
        // request index.
        std::vector<MultipartPart> parts;
        parts.reserve(ranges.size());
        for (const auto& r : ranges) {
            std::string data(static_cast<std::size_t>(r.length), '\0');
            if (::pread(fd, data.data(), data.size(), static_cast<off_t>(r.offset)) !=
                static_cast<ssize_t>(data.size()))
                throw TransportError("pread failed");
            parts.push_back(MultipartPart{r, std::move(data)});
        }
        std::string boundary = choose_boundary(parts, "tbpart" + std::to_string(request_n));
        std::string body = compose_multipart(parts, size, boundary);
        count_multipart();
        h.set("Content-Type", "multipart/byteranges; boundary=" + boundary);
        return respond(conn, 206, body, close, std::move(h), ri.replica);
    }

    bool handle_put(wire::Connection& conn, const ParsedRequest& req, const RouteInfo& ri,
                    bool close) {
        if (path_read_only(req.path))
            return respond(conn, 403, "read-only path\n", close);
        if (!safe_rel_path(ri.rel_path)) return respond(conn, 400, "bad path\n", close);
        std::filesystem::path file = ri.root / ri.rel_path;
        std::error_code ec;
        bool existed = std::filesystem::exists(file, ec);
        std::filesystem::create_directories(file.parent_path(), ec);
        static std::atomic<std::uint64_t> tmp_counter{0};
        std::filesystem::path tmp = file;
        tmp += ".put-tmp." + std::to_string(tmp_counter.fetch_add(1));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) return respond(conn, 500, "cannot write\n", close);
            out.write(req.body.data(), static_cast<std::streamsize>(req.body.size()));
        }
        std::filesystem::rename(tmp, file, ec);
        if (ec) return respond(conn, 500, "rename failed\n", close);
        return respond(conn, existed ? 204 : 201, existed ? "" : "created\n", close);
    }

    bool handle_delete(wire::Connection& conn, const ParsedRequest& req, const RouteInfo& ri,
                       bool close) {
        if (path_read_only(req.path)) return respond(conn, 403, "read-only path\n", close);
        if (!safe_rel_path(ri.rel_path)) return respond(conn, 400, "bad path\n", close);
        std::filesystem::path file = ri.root / ri.rel_path;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(file, ec))
            return respond(conn, 404, "not found\n", close);
        std::filesystem::remove(file, ec);
        if (ec) return respond(conn, 500, "remove failed\n", close);
        return respond(conn, 204, "", close);
    }

    /// One request/response exchange. Returns false to close the connection.
    bool handle(wire::Connection& conn, ParsedRequest& req, std::uint64_t& conn_id) {
        if (req.path == "/.metrics") {
            // Reserved path: no counting, no latency, no faults.
            ServerMetrics snapshot;
            {
                std::lock_guard lock(metrics_mutex);
                snapshot = metrics;
            }
            wire::Headers h;
            h.set("Content-Type", "text/plain");
            return respond(conn, 200, snapshot.to_kv(), false, std::move(h));
        }

        auto [request_n, cid] = count_request(conn_id, req);
        bool close = options.faults.connection_close_every_n > 0 &&
                     request_n % options.faults.connection_close_every_n == 0;
        if (!req.http11) close = true;

        bool keep = false;
        if (try_metalink(conn, req, close, keep)) return keep;

        RouteInfo ri = route(req.path);
        if (!ri.replica.empty() &&
            (replica_offline(ri.replica, request_n) || replica_dead(ri.replica))) {
            conn.stream().abort();  // scripted outage: reset without replying
            return false;
        }

        std::this_thread::sleep_for(options.latency.delay_for(request_n));

        if (req.method == "GET" || req.method == "HEAD")
            return handle_get_head(conn, req, ri, request_n, close);
        if (req.method == "PUT") return handle_put(conn, req, ri, close);
        if (req.method == "DELETE") return handle_delete(conn, req, ri, close);
        return respond(conn, 405, "method not allowed\n", close);
    }

    // ---- connection loop ---------------------------------------------------

    std::optional<ParsedRequest> read_request(wire::Connection& conn) {
        std::string line;
        try {
            line = conn.read_line(10s);
        } catch (const TransportError&) {
            return std::nullopt;  // peer closed between requests
        }
        if (line.empty()) return std::nullopt;
        ParsedRequest req;
        auto sp1 = line.find(' ');
        auto sp2 = line.rfind(' ');
        if (sp1 == std::string::npos || sp2 == sp1) throw TransportError("bad request line");
        req.method = line.substr(0, sp1);
        req.target = line.substr(sp1 + 1, sp2 - sp1 - 1);
        req.http11 = line.substr(sp2 + 1) != "HTTP/1.0";
        auto qmark = req.target.find('?');
        req.path = qmark == std::string::npos ? req.target : req.target.substr(0, qmark);
        if (qmark != std::string::npos) req.query = req.target.substr(qmark + 1);
        if (req.path.empty() || req.path[0] != '/') throw TransportError("bad target");

        for (;;) {
            std::string header = conn.read_line(10s);
            if (header.empty()) break;
            auto colon = header.find(':');
            if (colon == std::string::npos || colon == 0)
                throw TransportError("bad request header");
            std::string value = header.substr(colon + 1);
            while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
                value.erase(value.begin());
            req.headers.add(header.substr(0, colon), std::move(value));
        }

        if (auto len = req.headers.content_length()) {
            if (*len > (1ull << 31)) throw TransportError("request body too large");
            req.body.resize(static_cast<std::size_t>(*len));
            std::size_t got = 0;
            while (got < req.body.size()) {
                std::size_t n = conn.read_raw(req.body.data() + got, req.body.size() - got, 30s);
                if (n == 0) throw TransportError("request body truncated");
                got += n;
            }
        } else if (req.method == "PUT" || req.method == "POST") {
            // Length required; no chunked upload support in the testbed.
            wire::Headers h;
            respond(conn, 411, "length required\n", true, std::move(h));
            return std::nullopt;
        }
        return req;
    }

    void connection_loop(net::TcpStream stream) {
        wire::Connection conn(std::move(stream));
        std::uint64_t conn_id = 0;
        try {
            while (!stopping.load()) {
                if (!conn.has_buffered()) {
                    if (!conn.stream().wait_readable(200ms)) continue;
                }
                auto req = read_request(conn);
                if (!req) break;
                if (!handle(conn, *req, conn_id)) break;
            }
        } catch (const Error&) {
            // bad request or client went away: drop the connection
        } catch (const std::exception&) {
        }
    }

    void accept_loop() {
        while (!stopping.load()) {
            auto stream = listener.accept();
            if (!stream) break;
            std::lock_guard lock(conn_mutex);
            if (stopping.load()) break;
            conn_threads.emplace_back(
                [this, s = std::make_shared<net::TcpStream>(std::move(*stream))]() mutable {
                    connection_loop(std::move(*s));
                });
        }
    }

    std::string base_url_;
};

std::unique_ptr<TestbedServer> TestbedServer::serve(Options options) {
    std::error_code ec;
    if (!std::filesystem::is_directory(options.corpus_root, ec))
        throw CorpusUnreadable(options.corpus_root.string());
    for (const auto& [name, root] : options.replicas)
        if (!std::filesystem::is_directory(root, ec))
            throw CorpusUnreadable("replica " + name + ": " + root.string());

    auto server = std::unique_ptr<TestbedServer>(new TestbedServer());
    server->impl_ = std::make_unique<Impl>();
    Impl& impl = *server->impl_;
    impl.options = std::move(options);
    impl.listener = net::Listener::bind(impl.options.bind_host, impl.options.port);
    impl.base_url_ = "http://" + impl.options.bind_host + ":" +
                     std::to_string(impl.listener.port());
    impl.accept_thread = std::thread([&impl] { impl.accept_loop(); });
    return server;
}

TestbedServer::~TestbedServer() { stop(); }

void TestbedServer::stop() {
    if (!impl_) return;
    impl_->stopping.store(true);
    impl_->listener.close();
    if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(impl_->conn_mutex);
        threads.swap(impl_->conn_threads);
    }
    for (auto& t : threads)
        if (t.joinable()) t.join();
}

std::uint16_t TestbedServer::port() const { return impl_->listener.port(); }

std::string TestbedServer::base_url() const { return impl_->base_url_; }

std::string TestbedServer::url(std::string_view abs_path) const {
    return impl_->base_url_ + std::string(abs_path);
}

ServerMetrics TestbedServer::snapshot_metrics() const {
    std::lock_guard lock(impl_->metrics_mutex);
    return impl_->metrics;
}

}  // namespace httpio::testbed
