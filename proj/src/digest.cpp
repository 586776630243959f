// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/digest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <stdexcept>

#include "httpio/errors.hpp"

namespace httpio {

namespace {

std::string evp_name(std::string_view algorithm) {
    std::string name;
    name.reserve(algorithm.size());
    for (char c : algorithm)
        if (c != '-') name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return name;  // "sha-256" -> "sha256"
}

const EVP_MD* lookup(std::string_view algorithm) {
    return EVP_get_digestbyname(evp_name(algorithm).c_str());
}

}  // namespace

struct Digest::Impl {
    EVP_MD_CTX* ctx = nullptr;
};

Digest::Digest(std::string_view algorithm) : impl_(std::make_unique<Impl>()) {
    const EVP_MD* md = lookup(algorithm);
    if (!md) throw InvalidParams("unsupported digest algorithm: " + std::string(algorithm));
    impl_->ctx = EVP_MD_CTX_new();
    if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, md, nullptr) != 1)
        throw std::runtime_error("EVP_DigestInit failed");
}

Digest::~Digest() {
    if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

Digest::Digest(Digest&&) noexcept = default;
Digest& Digest::operator=(Digest&&) noexcept = default;

bool Digest::supported(std::string_view algorithm) { return lookup(algorithm) != nullptr; }

void Digest::update(std::string_view data) {
    if (EVP_DigestUpdate(impl_->ctx, data.data(), data.size()) != 1)
        throw std::runtime_error("EVP_DigestUpdate failed");
}

std::string Digest::hex() {
    unsigned char raw[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(impl_->ctx, raw, &len) != 1)
        throw std::runtime_error("EVP_DigestFinal failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += digits[raw[i] >> 4];
        out += digits[raw[i] & 0xf];
    }
    return out;
}

std::string Digest::hex_of(std::string_view algorithm, std::string_view data) {
    Digest d(algorithm);
    d.update(data);
    return d.hex();
}

}  // namespace httpio
