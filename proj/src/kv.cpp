// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/kv.hpp"

#include <charconv>
#include <cstdio>

namespace httpio::kv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

void Block::set(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
}

void Block::set(std::string key, std::uint64_t value) {
    set(std::move(key), std::to_string(value));
}

void Block::set(std::string key, std::int64_t value) {
    set(std::move(key), std::to_string(value));
}

void Block::set(std::string key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    set(std::move(key), std::string(buf));
}

void Block::set(std::string key, bool value) {
    set(std::move(key), std::string(value ? "true" : "false"));
}

std::optional<std::string_view> Block::get(std::string_view key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return std::string_view(v);
    return std::nullopt;
}

std::optional<std::uint64_t> Block::get_u64(std::string_view key) const {
    auto v = get(key);
    if (!v) return std::nullopt;
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || p != v->data() + v->size()) return std::nullopt;
    return out;
}

std::string Block::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

Block Block::parse(std::string_view text) {
    Block b;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = (nl == std::string_view::npos) ? std::string_view() : text.substr(nl + 1);
        if (auto kv = parse_line(line)) b.entries_.push_back(std::move(*kv));
    }
    return b;
}

std::optional<std::pair<std::string, std::string>> parse_line(std::string_view line) {
    line = trim(line);
    if (line.empty() || line.front() == '#') return std::nullopt;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) return std::nullopt;
    return std::make_pair(std::string(key), std::string(value));
}

}  // namespace httpio::kv
