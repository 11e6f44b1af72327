#include "lmprep/bpe/pre_split.hpp"

#include "lmprep/util/unicode.hpp"

namespace lmprep::bpe {

namespace {

enum class Kind { letter, digit, whitespace, other };

Kind classify(uint32_t cp) {
    if (util::is_whitespace(cp)) return Kind::whitespace;
    if (util::is_letter(cp)) return Kind::letter;
    if (util::is_digit(cp)) return Kind::digit;
    return Kind::other;
}

} // namespace

std::vector<Piece> pre_split(std::string_view text) {
    std::vector<Piece> pieces;
    const size_t n = text.size();
    size_t pos = 0;
    size_t piece_start = 0;

    auto flush = [&](size_t end) {
        if (end > piece_start) pieces.push_back(Piece{piece_start, end});
        piece_start = end;
    };

    while (pos < n) {
        size_t cp_start = pos;
        uint32_t cp = util::utf8_decode(text, pos);
        Kind kind = classify(cp);

        if (kind == Kind::whitespace) {
            flush(cp_start);
            // collect the whole whitespace run
            size_t run_end = pos;
            size_t last_start = cp_start;
            uint32_t last_cp = cp;
            while (run_end < n) {
                size_t next_pos = run_end;
                uint32_t next_cp = util::utf8_decode(text, next_pos);
                if (classify(next_cp) != Kind::whitespace) break;
                last_start = run_end;
                last_cp = next_cp;
                run_end = next_pos;
            }
            pos = run_end;
            // an ASCII space just before a non-whitespace piece attaches to it
            if (last_cp == ' ' && run_end < n) {
                // leave piece_start at the space so it attaches to the next piece
                flush(last_start);
            } else {
                flush(run_end);
            }
            continue;
        }

        if (kind == Kind::other) {
            // punctuation singleton, optionally with its attached space
            pieces.push_back(Piece{piece_start, pos});
            piece_start = pos;
            continue;
        }

        // letter or digit run
        size_t run_end = pos;
        while (run_end < n) {
            size_t next_pos = run_end;
            uint32_t next_cp = util::utf8_decode(text, next_pos);
            if (classify(next_cp) != kind) break;
            run_end = next_pos;
        }
        pos = run_end;
        pieces.push_back(Piece{piece_start, run_end});
        piece_start = run_end;
    }
    flush(n);
    return pieces;
}

} // namespace lmprep::bpe
