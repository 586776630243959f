// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HTTPIO_ERRORS_HPP
#define HTTPIO_ERRORS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace httpio {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class MalformedUri : public Error {
public:
    explicit MalformedUri(const std::string& what) : Error("malformed uri: " + what) {}
};

class ConnectFailed : public Error {
public:
    explicit ConnectFailed(const std::string& what) : Error("connect failed: " + what) {}
};

class AcquireTimeout : public Error {
public:
    explicit AcquireTimeout(const std::string& what) : Error("acquire timeout: " + what) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error("transport error: " + what) {}
};

class HttpError : public Error {
public:
    HttpError(int status, const std::string& what)
        : Error("http error " + std::to_string(status) + ": " + what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

class EmptyRangeSet : public Error {
public:
    EmptyRangeSet() : Error("empty range set") {}
};

class OverlappingRanges : public Error {
public:
    explicit OverlappingRanges(const std::string& what)
        : Error("overlapping or unsorted ranges: " + what) {}
};

class MalformedContentRange : public Error {
public:
    explicit MalformedContentRange(const std::string& what)
        : Error("malformed content-range: " + what) {}
};

class MalformedMultipart : public Error {
public:
    explicit MalformedMultipart(const std::string& what)
        : Error("malformed multipart/byteranges: " + what) {}
};

class FullBodyTooLarge : public Error {
public:
    explicit FullBodyTooLarge(const std::string& what)
        : Error("full body fallback too large: " + what) {}
};

/// 416: the server rejected every requested range. Carries the total object
/// size when the reply advertised one ("bytes */total").
class RangeNotSatisfiable : public Error {
public:
    explicit RangeNotSatisfiable(std::optional<std::uint64_t> total)
        : Error("range not satisfiable" +
                (total ? " (total " + std::to_string(*total) + ")" : std::string())),
          total_(total) {}
    std::optional<std::uint64_t> total() const { return total_; }

private:
    std::optional<std::uint64_t> total_;
};

class MalformedMetalink : public Error {
public:
    explicit MalformedMetalink(const std::string& what) : Error("malformed metalink: " + what) {}
};

class NoReplicaAvailable : public Error {
public:
    NoReplicaAvailable() : Error("no replica available") {}
};

class AllReplicasFailed : public Error {
public:
    explicit AllReplicasFailed(std::vector<std::string> attempts)
        : Error(join(attempts)), attempts_(std::move(attempts)) {}
    const std::vector<std::string>& attempts() const { return attempts_; }

private:
    static std::string join(const std::vector<std::string>& attempts) {
        std::string s = "all replicas failed";
        for (const auto& a : attempts) {
            s += "; ";
            s += a;
        }
        return s;
    }
    std::vector<std::string> attempts_;
};

class SizeUnknown : public Error {
public:
    SizeUnknown() : Error("resource size unknown") {}
};

class ChecksumMismatch : public Error {
public:
    ChecksumMismatch(const std::string& algo, const std::string& expected, const std::string& got)
        : Error("checksum mismatch (" + algo + "): expected " + expected + ", got " + got) {}
};

class ConfigInvalid : public Error {
public:
    explicit ConfigInvalid(const std::string& key, const std::string& detail = "")
        : Error("invalid config: " + key + (detail.empty() ? "" : " (" + detail + ")")),
          key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class InvalidParams : public Error {
public:
    explicit InvalidParams(const std::string& what) : Error("invalid parameters: " + what) {}
};

class InvalidPart : public Error {
public:
    explicit InvalidPart(const std::string& what) : Error("invalid multipart part: " + what) {}
};

class BindFailed : public Error {
public:
    explicit BindFailed(const std::string& what) : Error("bind failed: " + what) {}
};

class CorpusUnreadable : public Error {
public:
    explicit CorpusUnreadable(const std::string& what) : Error("corpus unreadable: " + what) {}
};

}  // namespace httpio

#endif  // HTTPIO_ERRORS_HPP
