#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lmprep/error.hpp"
#include "lmprep/util/rng.hpp"

namespace testutil {

// Scratch directory that cleans up after itself. Each instance gets a
// fresh subdirectory under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        uint64_t nonce = lmprep::util::mix_seed(
            uint64_t(std::chrono::steady_clock::now().time_since_epoch().count()),
            uint64_t(reinterpret_cast<uintptr_t>(this)));
        path_ = std::filesystem::temp_directory_path() /
                ("lmprep_test_" + tag + "_" + std::to_string(nonce));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw lmprep::IoError("test helper failed to write " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw lmprep::IoError("test helper failed to read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(char(cp));
    } else if (cp < 0x800) {
        out.push_back(char(0xC0 | (cp >> 6)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(char(0xE0 | (cp >> 12)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(char(0xF0 | (cp >> 18)));
        out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    }
}

// Random valid UTF-8 mixing ASCII, Hebrew, Latin-1 punctuation, CJK and
// emoji, with whitespace sprinkled in so the pre-splitter sees realistic
// boundaries.
inline std::string random_utf8(lmprep::util::Rng& rng, size_t max_codepoints) {
    size_t n = rng.next_below(max_codepoints + 1);
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        uint32_t cp = 0;
        switch (rng.next_below(10)) {
        case 0:
        case 1:
        case 2: cp = uint32_t(0x20 + rng.next_below(0x5F)); break;           // ASCII
        case 3:
        case 4:
        case 5: cp = uint32_t(0x05D0 + rng.next_below(27)); break;           // Hebrew letters
        case 6: cp = uint32_t(0x00A1 + rng.next_below(0x50)); break;         // Latin-1 extras
        case 7: cp = uint32_t(0x4E00 + rng.next_below(0x200)); break;        // CJK
        case 8: cp = uint32_t(0x1F600 + rng.next_below(0x30)); break;        // emoji
        default: cp = ' '; break;
        }
        // keep the surrogate range out; everything else here is valid
        if (cp >= 0xD800 && cp < 0xE000) cp = 'x';
        append_utf8(out, cp);
    }
    return out;
}

// A small Hebrew word sampled from a fixed synthetic inventory. Word
// identity is fully determined by (seed, index) so corpora are
// reproducible.
inline std::string hebrew_word(uint64_t seed, uint64_t index, size_t min_len = 2,
                               size_t max_len = 7) {
    lmprep::util::Rng rng(seed, index);
    size_t len = min_len + rng.next_below(max_len - min_len + 1);
    std::string word;
    for (size_t i = 0; i < len; ++i) append_utf8(word, uint32_t(0x05D0 + rng.next_below(22)));
    return word;
}

} // namespace testutil
