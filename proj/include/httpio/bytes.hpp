// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HTTPIO_BYTES_HPP
#define HTTPIO_BYTES_HPP

#include <cstdint>
#include <limits>
#include <string>

#include "httpio/errors.hpp"

namespace httpio {

/// An (offset, length) slice of a remote object. Length is always >= 1 for a
/// usable range; offset + length must not wrap 64-bit arithmetic.
struct ByteRange {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    /// One past the last byte covered.
    std::uint64_t end() const { return offset + length; }

    /// Inclusive last-byte position (RFC 7233 style). Requires length >= 1.
    std::uint64_t last() const { return offset + length - 1; }

    bool contains(const ByteRange& other) const {
        return offset <= other.offset && other.end() <= end();
    }

    bool operator==(const ByteRange&) const = default;
};

inline void validate_range(const ByteRange& r) {
    if (r.length == 0)
        throw InvalidParams("range length must be >= 1");
    if (r.offset > std::numeric_limits<std::uint64_t>::max() - r.length)
        throw InvalidParams("range offset + length overflows");
}

inline std::string to_string(const ByteRange& r) {
    return "[" + std::to_string(r.offset) + "," + std::to_string(r.length) + ")";
}

}  // namespace httpio

#endif  // HTTPIO_BYTES_HPP
