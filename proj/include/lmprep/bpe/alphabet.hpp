#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lmprep::bpe {

// Byte-level base alphabet: a bijection between the 256 byte values and
// printable unicode codepoints. Printable latin-1 bytes map to themselves;
// the rest are relocated to U+0100.. so every symbol survives plain-text
// serialization. Any byte stream is representable, so encoding never needs
// an unknown token.
class ByteAlphabet {
public:
    static const ByteAlphabet& instance();

    uint32_t symbol(uint8_t byte) const { return byte_to_symbol_[byte]; }
    const std::string& symbol_str(uint8_t byte) const { return byte_to_symbol_str_[byte]; }
    std::optional<uint8_t> byte_for(uint32_t codepoint) const;

    // Raw bytes -> symbol string (one codepoint per byte).
    std::string bytes_to_symbols(std::string_view bytes) const;
    // Inverse. Throws InvalidArgument on a codepoint outside the alphabet.
    std::string symbols_to_bytes(std::string_view symbols) const;

private:
    ByteAlphabet();

    std::array<uint32_t, 256> byte_to_symbol_{};
    std::array<std::string, 256> byte_to_symbol_str_{};
};

} // namespace lmprep::bpe
