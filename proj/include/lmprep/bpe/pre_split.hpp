#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace lmprep::bpe {

// Identifies the segmentation rule in model metadata. Bump when the rule
// changes; models are only compatible within one version.
inline constexpr const char* kPreSplitVersion = "v1";

// Half-open byte range into the source text. Pieces tile the text exactly:
// piece[i].end == piece[i+1].begin, first begins at 0, last ends at size.
struct Piece {
    size_t begin = 0;
    size_t end = 0;
};

// Segments text into the pieces merges may act within:
//   - maximal letter runs (any script) and digit runs,
//   - every other non-whitespace codepoint as a singleton,
//   - a single preceding ASCII space attaches to the piece that follows it,
//   - remaining whitespace runs form their own pieces.
// Input must be valid UTF-8.
std::vector<Piece> pre_split(std::string_view text);

} // namespace lmprep::bpe
