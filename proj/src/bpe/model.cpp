#include "lmprep/bpe/model.hpp"

#include <algorithm>
#include <limits>

#include "lmprep/bpe/alphabet.hpp"
#include "lmprep/bpe/pre_split.hpp"
#include "lmprep/error.hpp"
#include "lmprep/util/unicode.hpp"

namespace lmprep::bpe {

namespace {

uint64_t pair_key(uint32_t left, uint32_t right) { return (uint64_t(left) << 32) | right; }

} // namespace

bool Vocabulary::is_special(int32_t id) const {
    return id == specials.bos || id == specials.pad || id == specials.eos ||
           id == specials.unk || id == specials.mask;
}

Vocabulary Vocabulary::build(const MergeTable& merges) {
    Vocabulary v;
    v.id_to_token = {kBosToken, kPadToken, kEosToken, kUnkToken, kMaskToken};
    const ByteAlphabet& alphabet = ByteAlphabet::instance();
    for (int b = 0; b < 256; ++b) v.id_to_token.push_back(alphabet.symbol_str(uint8_t(b)));
    for (const auto& [left, right] : merges.merges) v.id_to_token.push_back(left + right);
    v.token_to_id.reserve(v.id_to_token.size());
    for (size_t i = 0; i < v.id_to_token.size(); ++i) {
        auto [it, inserted] = v.token_to_id.emplace(v.id_to_token[i], int32_t(i));
        if (!inserted)
            throw InvalidArgument("duplicate token produced by merges: '" + v.id_to_token[i] + "'");
    }
    return v;
}

void Vocabulary::validate(const MergeTable& merges) const {
    if (id_to_token.size() != token_to_id.size())
        throw InvalidArgument("vocabulary ids are not unique");
    for (size_t i = 0; i < id_to_token.size(); ++i) {
        auto it = token_to_id.find(id_to_token[i]);
        if (it == token_to_id.end() || it->second != int32_t(i))
            throw InvalidArgument("vocabulary ids are not dense");
    }
    const struct {
        const char* token;
        int32_t id;
    } expected[] = {{kBosToken, specials.bos},
                    {kPadToken, specials.pad},
                    {kEosToken, specials.eos},
                    {kUnkToken, specials.unk},
                    {kMaskToken, specials.mask}};
    for (const auto& [token, id] : expected) {
        auto it = token_to_id.find(token);
        if (it == token_to_id.end() || it->second != id)
            throw InvalidArgument(std::string("special token missing or misplaced: ") + token);
    }
    const ByteAlphabet& alphabet = ByteAlphabet::instance();
    for (int b = 0; b < 256; ++b)
        if (!token_to_id.count(alphabet.symbol_str(uint8_t(b))))
            throw InvalidArgument("vocabulary is missing base symbol for byte " + std::to_string(b));
    for (const auto& [left, right] : merges.merges) {
        if (!token_to_id.count(left) || !token_to_id.count(right) ||
            !token_to_id.count(left + right))
            throw InvalidArgument("vocabulary is missing merge token '" + left + right + "'");
    }
}

Tokenizer::Tokenizer(MergeTable merges, Vocabulary vocab)
    : merges_(std::move(merges)), vocab_(std::move(vocab)) {
    vocab_.validate(merges_);

    const ByteAlphabet& alphabet = ByteAlphabet::instance();
    symbol_str_.reserve(256 + merges_.size());
    symbol_bytes_.reserve(256 + merges_.size());
    std::unordered_map<std::string, uint32_t> symbol_id;
    symbol_id.reserve(256 + merges_.size());
    for (int b = 0; b < 256; ++b) {
        symbol_str_.push_back(alphabet.symbol_str(uint8_t(b)));
        symbol_bytes_.push_back(1);
        symbol_id.emplace(symbol_str_.back(), uint32_t(b));
    }
    pair_rank_.reserve(merges_.size());
    for (size_t rank = 0; rank < merges_.size(); ++rank) {
        const auto& [left, right] = merges_.merges[rank];
        auto li = symbol_id.find(left);
        auto ri = symbol_id.find(right);
        if (li == symbol_id.end() || ri == symbol_id.end())
            throw InvalidArgument("merge " + std::to_string(rank) +
                                  " references an undefined symbol: '" + left + "' + '" + right +
                                  "'");
        uint64_t key = pair_key(li->second, ri->second);
        if (!pair_rank_.emplace(key, uint32_t(rank)).second)
            throw InvalidArgument("duplicate merge pair at rank " + std::to_string(rank));
        uint32_t sym = uint32_t(symbol_str_.size());
        symbol_str_.push_back(left + right);
        symbol_bytes_.push_back(symbol_bytes_[li->second] + symbol_bytes_[ri->second]);
        if (!symbol_id.emplace(symbol_str_.back(), sym).second)
            throw InvalidArgument("merge " + std::to_string(rank) +
                                  " recreates existing token '" + symbol_str_.back() + "'");
    }

    symbol_to_vocab_id_.resize(symbol_str_.size());
    for (size_t s = 0; s < symbol_str_.size(); ++s)
        symbol_to_vocab_id_[s] = vocab_.token_to_id.at(symbol_str_[s]);
}

void Tokenizer::encode_piece(std::string_view piece, size_t piece_offset, size_t merge_limit,
                             TokenSequence& out) const {
    // bytes -> base symbol ids
    std::vector<uint32_t> syms;
    syms.reserve(piece.size());
    for (char c : piece) syms.push_back(uint32_t(uint8_t(c)));

    // repeatedly apply the lowest-ranked adjacent pair
    while (syms.size() > 1) {
        uint32_t best_rank = std::numeric_limits<uint32_t>::max();
        for (size_t i = 0; i + 1 < syms.size(); ++i) {
            auto it = pair_rank_.find(pair_key(syms[i], syms[i + 1]));
            if (it != pair_rank_.end() && it->second < best_rank && it->second < merge_limit)
                best_rank = it->second;
        }
        if (best_rank == std::numeric_limits<uint32_t>::max()) break;

        // merge all non-overlapping occurrences left to right
        std::vector<uint32_t> next;
        next.reserve(syms.size());
        uint32_t merged = 256 + best_rank;
        size_t i = 0;
        while (i < syms.size()) {
            if (i + 1 < syms.size()) {
                auto it = pair_rank_.find(pair_key(syms[i], syms[i + 1]));
                if (it != pair_rank_.end() && it->second == best_rank) {
                    next.push_back(merged);
                    i += 2;
                    continue;
                }
            }
            next.push_back(syms[i]);
            ++i;
        }
        syms.swap(next);
    }

    size_t byte_pos = piece_offset;
    for (uint32_t s : syms) {
        out.ids.push_back(symbol_to_vocab_id_[s]);
        out.offsets.emplace_back(uint32_t(byte_pos), uint32_t(byte_pos + symbol_bytes_[s]));
        byte_pos += symbol_bytes_[s];
    }
}

TokenSequence Tokenizer::encode(std::string_view text) const {
    return encode_with_prefix(text, merges_.size());
}

TokenSequence Tokenizer::encode_with_prefix(std::string_view text, size_t merge_count) const {
    if (!util::utf8_valid(text)) throw ParseError("encode input is not valid UTF-8");
    TokenSequence out;
    for (const Piece& piece : pre_split(text))
        encode_piece(text.substr(piece.begin, piece.end - piece.begin), piece.begin, merge_count,
                     out);
    return out;
}

std::string Tokenizer::decode(std::span<const int32_t> ids) const {
    const ByteAlphabet& alphabet = ByteAlphabet::instance();
    std::string out;
    for (int32_t id : ids) {
        if (id < 0 || id >= vocab_.size())
            throw InvalidArgument("unknown token id " + std::to_string(id));
        if (vocab_.is_special(id)) continue;
        out += alphabet.symbols_to_bytes(vocab_.id_to_token[size_t(id)]);
    }
    return out;
}

} // namespace lmprep::bpe
