#include "qsign/sig.hpp"

#include <cmath>

#include "qsign/error.hpp"
#include "qsign/hash.hpp"

namespace qsign::sig {

HslColor encode_color(int q_num, const qsim::BellVector& bell) {
  // q_num * 137.5 is exact in binary floating point for every q_num in range.
  double h = std::fmod(static_cast<double>(q_num) * 137.5, 360.0);
  if (h < 0.0) h += 360.0;
  return {h, 70.0 + bell.p00 * 30.0, 45.0 + bell.p11 * 20.0};
}

Badge derive_badge(std::string_view username, std::string_view message_text, int q_num,
                   const qsim::BellVector& bell, std::span<const std::uint8_t> nonce) {
  if (nonce.size() != backend::kNonceSize) {
    contract_violation("badge nonce must be exactly 32 bytes, got " + std::to_string(nonce.size()));
  }
  if (q_num < 0 || q_num > 1000) contract_violation("q_num out of range [0,1000]");

  hash::Bytes seed_input;
  hash::append(seed_input, username);
  hash::append_be16(seed_input, static_cast<std::uint16_t>(q_num));
  seed_input.insert(seed_input.end(), nonce.begin(), nonce.end());
  const auto seed = hash::shake256(seed_input, 64);

  const auto pk_digest = hash::sha256(std::span(seed).first(32));
  Badge badge;
  badge.q_num = q_num;
  badge.pk_hash = hash::to_hex(std::span(pk_digest).first(6), /*upper=*/true);

  const auto msg_hex = hash::to_hex(hash::sha256(message_text));
  const auto ent_hex = hash::to_hex(hash::sha256(std::to_string(q_num)));
  const auto g = hash::sha256(msg_hex + ":" + ent_hex + ":" + badge.pk_hash);
  badge.signature = hash::base64_unpadded(std::span(g).first(18));

  badge.color = encode_color(q_num, bell);
  badge.nonce_hex = hash::to_hex(nonce);
  return badge;
}

Badge derive_badge(std::string_view username, std::string_view message_text,
                   const backend::QuantumResult& qr, std::span<const std::uint8_t> nonce) {
  return derive_badge(username, message_text, qr.q_num, qr.bell, nonce);
}

std::string render(const Badge& badge) {
  return "Q#" + std::to_string(badge.q_num) + " | " + badge.pk_hash;
}

bool is_valid_pk_hash(std::string_view s) {
  if (s.size() != 12) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'A' && c <= 'F'))) return false;
  }
  return true;
}

bool is_valid_signature(std::string_view s) {
  if (s.size() != 24) return false;
  for (char c : s) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '+' || c == '/';
    if (!ok) return false;
  }
  return true;
}

}  // namespace qsign::sig
