#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lmprep::util {

// Strict UTF-8 validation: rejects overlong forms, surrogates, and
// codepoints beyond U+10FFFF.
bool utf8_valid(std::string_view s);

// Decodes the codepoint starting at s[pos]. Returns the codepoint and
// advances pos past it. Behaviour is undefined on invalid UTF-8; validate
// first at the boundary.
uint32_t utf8_decode(std::string_view s, size_t& pos);

// Appends the UTF-8 encoding of cp to out.
void utf8_encode(uint32_t cp, std::string& out);

// Number of codepoints in a valid UTF-8 string.
size_t utf8_length(std::string_view s);

// Unicode general categories L* / N*, plus the White_Space property.
bool is_letter(uint32_t cp);
bool is_digit(uint32_t cp);
bool is_whitespace(uint32_t cp);

} // namespace lmprep::util
