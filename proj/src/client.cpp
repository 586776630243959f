// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/client.hpp"

#include <algorithm>

#include "httpio/errors.hpp"
#include "httpio/metalink.hpp"

namespace httpio {

Client::Client(ClientConfig config) : config_(std::move(config)), pool_(config_.pool) {}

SimpleResponse Client::request(const std::string& method, const Uri& uri,
                               const wire::Headers& extra, std::string_view body,
                               std::uint64_t max_body) {
    return http_request(pool_, method, uri, extra, body, config_.engine_limits(), max_body);
}

ResourceInfo Client::info_from_head(const Uri& uri, const SimpleResponse& resp) const {
    ResourceInfo info;
    info.uri = uri.to_string();
    info.size = resp.headers.content_length();
    if (auto lm = resp.headers.get("Last-Modified")) info.last_modified = std::string(*lm);
    if (auto etag = resp.headers.get("ETag")) info.etag = std::string(*etag);
    if (auto ar = resp.headers.get("Accept-Ranges"))
        info.supports_ranges = ar->find("bytes") != std::string_view::npos;
    return info;
}

ResourceInfo Client::put(const std::string& uri, std::string_view body) {
    Uri target = Uri::parse(uri);
    SimpleResponse resp = request("PUT", target, {}, body);
    if (resp.status / 100 != 2) throw HttpError(resp.status, "PUT " + uri);
    return stat(uri);
}

std::string Client::get(const std::string& uri) {
    Uri target = Uri::parse(uri);
    SimpleResponse resp = request("GET", target, {}, {});
    if (resp.status / 100 != 2) throw HttpError(resp.status, "GET " + uri);
    return std::move(resp.body);
}

RemoveOutcome Client::remove(const std::string& uri) {
    Uri target = Uri::parse(uri);
    SimpleResponse resp = request("DELETE", target, {}, {});
    if (resp.status == 404) return RemoveOutcome::already_absent;
    if (resp.status / 100 != 2) throw HttpError(resp.status, "DELETE " + uri);
    return RemoveOutcome::removed;
}

ResourceInfo Client::stat(const std::string& uri) {
    Uri target = Uri::parse(uri);
    SimpleResponse resp = request("HEAD", target, {}, {});
    if (resp.status / 100 != 2) throw HttpError(resp.status, "HEAD " + uri);
    return info_from_head(target, resp);
}

RemoteFileHandle Client::open(const std::string& uri) {
    RemoteFileHandle handle;
    handle.failover_enabled = config_.metalink_strategy != MetalinkStrategy::off;
    handle.uri = Uri::parse(uri);
    try {
        handle.info = stat(uri);
        return handle;
    } catch (const Error& e) {
        // 401/403 and client-side errors surface; availability errors may
        // resolve through a replica.
        bool eligible = false;
        if (auto http = dynamic_cast<const HttpError*>(&e))
            eligible = http->status() == 404 || http->status() >= 500;
        else if (dynamic_cast<const TransportError*>(&e) ||
                 dynamic_cast<const ConnectFailed*>(&e))
            eligible = true;
        if (!eligible || !handle.failover_enabled) throw;

        DiscoveryResult discovery =
            discover_metalink(pool_, handle.uri, config_.engine_limits());
        if (!discovery.document) throw;
        std::set<std::string> dead{handle.uri.to_string()};
        std::vector<Replica> ordered;
        try {
            ordered = order_replicas(*discovery.document, dead);
        } catch (const NoReplicaAvailable&) {
            throw AllReplicasFailed({uri + ": " + e.what(), "no further replicas"});
        }
        std::vector<std::string> failures{uri + ": " + e.what()};
        for (const auto& replica : ordered) {
            try {
                handle.info = stat(replica.url);
                handle.uri = Uri::parse(replica.url);
                return handle;
            } catch (const Error& replica_error) {
                failures.push_back(replica.url + ": " + replica_error.what());
            }
        }
        throw AllReplicasFailed(std::move(failures));
    }
}

std::vector<FragmentOutcome> Client::preadvec(const RemoteFileHandle& handle,
                                              std::span<const FragmentRequest> fragments) {
    if (handle.failover_enabled) {
        FailoverConfig failover;
        failover.vector = config_.vector;
        failover.limits = config_.engine_limits();
        return failover_read(pool_, handle.uri, fragments, failover).outcomes;
    }
    return vector_read(pool_, handle.uri, fragments, config_.vector, config_.engine_limits());
}

std::string Client::pread(const RemoteFileHandle& handle, std::uint64_t offset,
                          std::uint64_t length) {
    if (handle.info.size) {
        if (offset >= *handle.info.size) throw RangeNotSatisfiable(handle.info.size);
        length = std::min(length, *handle.info.size - offset);
    }
    if (length == 0) return {};

    std::string buffer(static_cast<std::size_t>(length), '\0');
    FragmentRequest fragment{0, ByteRange{offset, length}, std::span(buffer.data(), buffer.size())};
    auto outcomes = preadvec(handle, std::span(&fragment, 1));
    const FragmentOutcome& outcome = outcomes.at(0);
    switch (outcome.state) {
        case FragmentState::filled:
            return buffer;
        case FragmentState::range_not_satisfiable:
            throw RangeNotSatisfiable(handle.info.size);
        case FragmentState::transport_error:
            throw TransportError(outcome.message);
        default:
            throw HttpError(outcome.http_status, outcome.message);
    }
}

std::string Client::read(RemoteFileHandle& handle, std::uint64_t length) {
    if (handle.info.size) {
        std::uint64_t remaining =
            handle.position < *handle.info.size ? *handle.info.size - handle.position : 0;
        length = std::min(length, remaining);
    }
    if (length == 0) return {};
    std::string data;
    try {
        data = pread(handle, handle.position, length);
    } catch (const RangeNotSatisfiable&) {
        return {};  // size unknown and position at/after EOF
    }
    handle.position += data.size();
    return data;
}

}  // namespace httpio
