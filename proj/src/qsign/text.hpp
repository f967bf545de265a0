#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qsign::text {

// Lenient UTF-8 decode: a malformed byte decodes to itself as one code point.
std::vector<std::uint32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, std::uint32_t cp);

// Slice of `s` addressed in UTF-16 code units, as chat platforms report
// entity offsets. Returns false when the range is out of bounds or splits a
// surrogate pair.
bool utf16_slice(std::string_view s, std::size_t offset, std::size_t length, std::string& out);

std::string to_lower_ascii(std::string_view s);

}  // namespace qsign::text
