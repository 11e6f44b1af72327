#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lmprep::bpe {

// Ordered merge rules over symbol strings. Rank = list index; lower rank
// applies first during encoding.
struct MergeTable {
    std::vector<std::pair<std::string, std::string>> merges;

    size_t size() const { return merges.size(); }
};

// The five special tokens, at fixed low ids.
struct Specials {
    int32_t bos = 0;  // <s>
    int32_t pad = 1;  // <pad>
    int32_t eos = 2;  // </s>
    int32_t unk = 3;  // <unk>
    int32_t mask = 4; // <mask>

    static constexpr int32_t count = 5;
    std::vector<int32_t> ids() const { return {bos, pad, eos, unk, mask}; }
};

inline constexpr const char* kBosToken = "<s>";
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kMaskToken = "<mask>";

struct Vocabulary {
    std::unordered_map<std::string, int32_t> token_to_id;
    std::vector<std::string> id_to_token; // dense: index == id
    Specials specials;

    int32_t size() const { return int32_t(id_to_token.size()); }
    bool is_special(int32_t id) const;

    // Canonical layout: specials at 0..4, the 256 base symbols in byte
    // order, then one token per merge.
    static Vocabulary build(const MergeTable& merges);

    // Checks density, uniqueness, special tokens, and that every merge
    // side and result has an id.
    void validate(const MergeTable& merges) const;
};

// Encoded ids plus per-token byte ranges back into the source text.
// Offsets are sorted, non-overlapping, and contiguous; decoding the ids
// reproduces the source bytes exactly.
struct TokenSequence {
    std::vector<int32_t> ids;
    std::vector<std::pair<uint32_t, uint32_t>> offsets;

    size_t size() const { return ids.size(); }
};

// Immutable encode/decode engine over a trained (MergeTable, Vocabulary)
// pair. Construction validates consistency and builds the fast lookup
// tables; afterwards the object is read-only and safe to share across
// threads.
class Tokenizer {
public:
    Tokenizer(MergeTable merges, Vocabulary vocab);

    // Pre-split, map bytes to base symbols, apply merges in rank order.
    // Throws ParseError on invalid UTF-8.
    TokenSequence encode(std::string_view text) const;

    // Exact byte inverse of encode. Specials decode to nothing. Throws
    // InvalidArgument on an out-of-range id.
    std::string decode(std::span<const int32_t> ids) const;

    const MergeTable& merges() const { return merges_; }
    const Vocabulary& vocab() const { return vocab_; }

    // Encode restricted to the first `merge_count` merges; used to compare
    // vocabulary sizes without retraining (a trained merge list is
    // greedy-prefix stable).
    TokenSequence encode_with_prefix(std::string_view text, size_t merge_count) const;

private:
    void encode_piece(std::string_view piece, size_t piece_offset, size_t merge_limit,
                      TokenSequence& out) const;

    MergeTable merges_;
    Vocabulary vocab_;

    // internal symbol space: 0..255 base alphabet, 256+k = result of merge k
    std::vector<std::string> symbol_str_;
    std::vector<uint32_t> symbol_bytes_;              // source bytes covered
    std::unordered_map<uint64_t, uint32_t> pair_rank_; // (left<<32)|right -> rank
    std::vector<int32_t> symbol_to_vocab_id_;
};

} // namespace lmprep::bpe
