#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsign::hash {

using Bytes = std::vector<std::uint8_t>;
using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> data);
Sha256Digest sha256(std::string_view data);
Bytes shake256(std::span<const std::uint8_t> data, std::size_t out_len);

std::string to_hex(std::span<const std::uint8_t> data, bool upper = false);
// Throws contract_violation on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);
// Standard alphabet, no '=' padding.
std::string base64_unpadded(std::span<const std::uint8_t> data);

// Cryptographically secure random bytes (OpenSSL RAND_bytes).
Bytes random_bytes(std::size_t n);
std::uint64_t random_u64();

// Constant-time equality; differing lengths compare unequal.
bool constant_time_equal(std::string_view a, std::string_view b);

void append_be16(Bytes& out, std::uint16_t v);
void append_be64(Bytes& out, std::uint64_t v);
void append(Bytes& out, std::string_view s);

}  // namespace qsign::hash
