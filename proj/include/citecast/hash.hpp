#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "citecast/error.hpp"

namespace citecast {

/// Lower-case hex SHA-256 of a byte string. Requires linking libcrypto.
[[nodiscard]] inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    std::string hex(2 * len, '0');
    for (unsigned int i = 0; i < len; ++i) std::snprintf(hex.data() + 2 * i, 3, "%02x", md[i]);
    return hex;
}

[[nodiscard]] inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

[[nodiscard]] inline std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

}  // namespace citecast
