// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/uri.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "httpio/errors.hpp"

namespace httpio {

std::string_view to_string(Scheme s) { return s == Scheme::http ? "http" : "https"; }

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::uint16_t default_port_for(Scheme s) { return s == Scheme::http ? 80 : 443; }

}  // namespace

Uri Uri::parse(std::string_view uri) {
    auto scheme_end = uri.find("://");
    if (scheme_end == std::string_view::npos) throw MalformedUri(std::string(uri));
    std::string scheme_str = lower(uri.substr(0, scheme_end));
    Uri out;
    if (scheme_str == "http")
        out.scheme = Scheme::http;
    else if (scheme_str == "https")
        out.scheme = Scheme::https;
    else
        throw MalformedUri("unsupported scheme '" + scheme_str + "'");

    std::string_view rest = uri.substr(scheme_end + 3);
    auto authority_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, authority_end);
    if (authority.empty()) throw MalformedUri("missing host in '" + std::string(uri) + "'");

    // userinfo@ is not supported; credentials travel via credential_id.
    if (authority.find('@') != std::string_view::npos)
        throw MalformedUri("userinfo not supported in '" + std::string(uri) + "'");

    std::string_view host_part = authority;
    std::string_view port_part;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) throw MalformedUri("unterminated IPv6 literal");
        host_part = authority.substr(0, close + 1);
        if (close + 1 < authority.size()) {
            if (authority[close + 1] != ':') throw MalformedUri("bad IPv6 authority");
            port_part = authority.substr(close + 2);
        }
    } else {
        auto colon = authority.rfind(':');
        if (colon != std::string_view::npos) {
            host_part = authority.substr(0, colon);
            port_part = authority.substr(colon + 1);
        }
    }
    if (host_part.empty()) throw MalformedUri("missing host in '" + std::string(uri) + "'");
    out.host = lower(host_part);

    if (!port_part.empty()) {
        unsigned int port = 0;
        auto [p, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), port);
        if (ec != std::errc() || p != port_part.data() + port_part.size() || port < 1 ||
            port > 65535)
            throw MalformedUri("bad port '" + std::string(port_part) + "'");
        out.port = static_cast<std::uint16_t>(port);
        out.explicit_port = true;
    } else {
        out.port = default_port_for(out.scheme);
        out.explicit_port = false;
    }

    if (authority_end == std::string_view::npos) {
        out.path = "/";
        return out;
    }
    rest = rest.substr(authority_end);
    auto frag = rest.find('#');
    if (frag != std::string_view::npos) rest = rest.substr(0, frag);
    auto qmark = rest.find('?');
    if (qmark != std::string_view::npos) {
        out.query = std::string(rest.substr(qmark + 1));
        rest = rest.substr(0, qmark);
    }
    out.path = rest.empty() ? "/" : std::string(rest);
    if (out.path.front() != '/') throw MalformedUri("bad path in '" + std::string(uri) + "'");
    return out;
}

std::string Uri::target() const {
    std::string t = path;
    if (!query.empty()) {
        t += '?';
        t += query;
    }
    return t;
}

bool Uri::default_port() const { return port == default_port_for(scheme); }

std::string Uri::host_header() const {
    if (default_port()) return host;
    return host + ":" + std::to_string(port);
}

std::string Uri::to_string() const {
    std::string s(httpio::to_string(scheme));
    s += "://";
    s += host_header();
    s += target();
    return s;
}

Uri Uri::resolve(std::string_view location) const {
    if (location.find("://") != std::string_view::npos) return Uri::parse(location);
    Uri out = *this;
    out.query.clear();
    if (!location.empty() && location.front() == '/') {
        auto q = location.find('?');
        if (q != std::string_view::npos) {
            out.query = std::string(location.substr(q + 1));
            location = location.substr(0, q);
        }
        out.path = std::string(location);
        return out;
    }
    // Relative path: replace the last segment.
    auto slash = out.path.rfind('/');
    out.path = out.path.substr(0, slash + 1) + std::string(location);
    auto q = out.path.find('?');
    if (q != std::string::npos) {
        out.query = out.path.substr(q + 1);
        out.path = out.path.substr(0, q);
    }
    return out;
}

}  // namespace httpio
