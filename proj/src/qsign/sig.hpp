#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "qsign/backend.hpp"

namespace qsign::sig {

struct HslColor {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;  // percent, [70, 100]
  double l = 0.0;  // percent, [45, 65]

  bool operator==(const HslColor&) const = default;
};

struct Badge {
  int q_num = 0;
  std::string pk_hash;    // 12 uppercase hex characters
  std::string signature;  // 24 base64 characters, unpadded
  HslColor color;
  std::string nonce_hex;  // 64 lowercase hex characters

  bool operator==(const Badge&) const = default;
};

// Golden-angle hue from q_num; saturation from P(00), lightness from P(11).
HslColor encode_color(int q_num, const qsim::BellVector& bell);
inline HslColor encode_color(const backend::QuantumResult& qr) {
  return encode_color(qr.q_num, qr.bell);
}

// ToyLWE-style badge:
//   S = SHAKE-256(utf8(username) || be16(q_num) || nonce)[0:64]
//   pk_hash = HEX(SHA-256(S[0:32]))[0:12]
//   G = SHA-256(hex(SHA-256(text)) ":" hex(SHA-256(dec(q_num))) ":" pk_hash)
//   signature = base64(G[0:18])
Badge derive_badge(std::string_view username, std::string_view message_text,
                   const backend::QuantumResult& qr, std::span<const std::uint8_t> nonce);
Badge derive_badge(std::string_view username, std::string_view message_text, int q_num,
                   const qsim::BellVector& bell, std::span<const std::uint8_t> nonce);

// "Q#452 | 7B284BB3D413"
std::string render(const Badge& badge);

bool is_valid_pk_hash(std::string_view s);
bool is_valid_signature(std::string_view s);

}  // namespace qsign::sig
