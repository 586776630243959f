// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#ifndef HTTPIO_DIGEST_HPP
#define HTTPIO_DIGEST_HPP

#include <memory>
#include <string>
#include <string_view>

namespace httpio {

/// Incremental message digest over OpenSSL EVP. Algorithm names use the
/// Metalink/IANA spelling: "sha-256", "sha-512", "sha-1", "md5".
class Digest {
public:
    explicit Digest(std::string_view algorithm);
    ~Digest();
    Digest(Digest&&) noexcept;
    Digest& operator=(Digest&&) noexcept;

    static bool supported(std::string_view algorithm);

    void update(std::string_view data);
    /// Finalizes and returns the lowercase hex digest. The object may not be
    /// updated afterwards.
    std::string hex();

    static std::string hex_of(std::string_view algorithm, std::string_view data);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace httpio

#endif  // HTTPIO_DIGEST_HPP
