// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HTTPIO_URI_HPP
#define HTTPIO_URI_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace httpio {

enum class Scheme { http, https };

std::string_view to_string(Scheme s);

/// Absolute http/https URI, parsed into the pieces the toolkit needs.
/// Host is case-folded; an absent port resolves to the scheme default.
struct Uri {
    Scheme scheme = Scheme::http;
    std::string host;
    std::uint16_t port = 80;
    bool explicit_port = false;
    std::string path;   // always starts with '/', "/" when absent
    std::string query;  // without leading '?', empty when absent

    /// Parses an absolute URI. Throws MalformedUri for non-http(s) schemes,
    /// missing host, or bad port.
    static Uri parse(std::string_view uri);

    /// Request target in origin-form: path plus '?' query when present.
    std::string target() const;

    /// Host header value: host, plus ":port" when the port is non-default.
    std::string host_header() const;

    std::string to_string() const;

    bool default_port() const;

    /// Resolves an HTTP Location value against this URI. Handles absolute
    /// URIs, absolute paths, and relative paths (RFC 3986 merge, simplified).
    Uri resolve(std::string_view location) const;
};

}  // namespace httpio

#endif  // HTTPIO_URI_HPP
