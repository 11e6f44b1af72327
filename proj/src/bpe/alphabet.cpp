#include "lmprep/bpe/alphabet.hpp"

#include <unordered_map>

#include "lmprep/error.hpp"
#include "lmprep/util/unicode.hpp"

namespace lmprep::bpe {

namespace {

// symbol codepoint -> byte, for the relocated range only
const std::unordered_map<uint32_t, uint8_t>& relocated_map();

} // namespace

ByteAlphabet::ByteAlphabet() {
    auto printable = [](int b) {
        return (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
    };
    uint32_t next = 256;
    for (int b = 0; b < 256; ++b) {
        uint32_t cp = printable(b) ? uint32_t(b) : next++;
        byte_to_symbol_[size_t(b)] = cp;
        util::utf8_encode(cp, byte_to_symbol_str_[size_t(b)]);
    }
}

const ByteAlphabet& ByteAlphabet::instance() {
    static const ByteAlphabet alphabet;
    return alphabet;
}

std::optional<uint8_t> ByteAlphabet::byte_for(uint32_t codepoint) const {
    if (codepoint < 256) {
        uint8_t b = uint8_t(codepoint);
        if (byte_to_symbol_[b] == codepoint) return b;
        return std::nullopt;
    }
    const auto& map = relocated_map();
    auto it = map.find(codepoint);
    if (it == map.end()) return std::nullopt;
    return it->second;
}

std::string ByteAlphabet::bytes_to_symbols(std::string_view bytes) const {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (char c : bytes) out += byte_to_symbol_str_[size_t(uint8_t(c))];
    return out;
}

std::string ByteAlphabet::symbols_to_bytes(std::string_view symbols) const {
    std::string out;
    out.reserve(symbols.size());
    size_t pos = 0;
    while (pos < symbols.size()) {
        uint32_t cp = util::utf8_decode(symbols, pos);
        auto byte = byte_for(cp);
        if (!byte)
            throw InvalidArgument("codepoint U+" + std::to_string(cp) +
                                  " is not a byte alphabet symbol");
        out.push_back(char(*byte));
    }
    return out;
}

namespace {

const std::unordered_map<uint32_t, uint8_t>& relocated_map() {
    static const std::unordered_map<uint32_t, uint8_t> map = [] {
        std::unordered_map<uint32_t, uint8_t> m;
        const ByteAlphabet& a = ByteAlphabet::instance();
        for (int b = 0; b < 256; ++b) {
            uint32_t cp = a.symbol(uint8_t(b));
            if (cp >= 256) m.emplace(cp, uint8_t(b));
        }
        return m;
    }();
    return map;
}

} // namespace

} // namespace lmprep::bpe
