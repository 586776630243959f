// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value text blocks: the exchange format used by pool stats, testbed
// metrics, benchmark reports and the config file. One "key=value" pair per
// line, '#' starts a comment, order preserved on write.

#ifndef HTTPIO_KV_HPP
#define HTTPIO_KV_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace httpio::kv {

class Block {
public:
    void set(std::string key, std::string value);
    void set(std::string key, std::uint64_t value);
    void set(std::string key, std::int64_t value);
    void set(std::string key, double value);
    void set(std::string key, bool value);

    std::optional<std::string_view> get(std::string_view key) const;
    std::optional<std::uint64_t> get_u64(std::string_view key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string to_text() const;
    static Block parse(std::string_view text);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses one "key=value" line. Returns nullopt for blanks and comments.
std::optional<std::pair<std::string, std::string>> parse_line(std::string_view line);

}  // namespace httpio::kv

#endif  // HTTPIO_KV_HPP
