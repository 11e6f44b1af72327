#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "lmprep/bpe/pre_split.hpp"
#include "lmprep/util/rng.hpp"

using namespace lmprep;
using bpe::Piece;

namespace {

std::vector<std::string> pieces_of(std::string_view text) {
    std::vector<std::string> out;
    for (const Piece& p : bpe::pre_split(text))
        out.emplace_back(text.substr(p.begin, p.end - p.begin));
    return out;
}

} // namespace

TEST_SUITE("pre_split") {

TEST_CASE("letter runs, digits and punctuation split apart") {
    CHECK(pieces_of("hello") == std::vector<std::string>{"hello"});
    CHECK(pieces_of("hello world") == std::vector<std::string>{"hello", " world"});
    CHECK(pieces_of("abc123") == std::vector<std::string>{"abc", "123"});
    CHECK(pieces_of("a,b") == std::vector<std::string>{"a", ",", "b"});
    CHECK(pieces_of("don't") == std::vector<std::string>{"don", "'", "t"});
}

TEST_CASE("a single space attaches to the following piece") {
    CHECK(pieces_of("a b") == std::vector<std::string>{"a", " b"});
    CHECK(pieces_of(" lead") == std::vector<std::string>{" lead"});
    CHECK(pieces_of("x  y") == std::vector<std::string>{"x", " ", " y"});
    CHECK(pieces_of("end ") == std::vector<std::string>{"end", " "});
    CHECK(pieces_of("a \tb") == std::vector<std::string>{"a", " \t", "b"});
}

TEST_CASE("hebrew text forms letter runs like latin text") {
    std::string text = "\xD7\xA9\xD7\x9C\xD7\x95\xD7\x9D \xD7\xA2\xD7\x95\xD7\x9C\xD7\x9D";
    auto pieces = pieces_of(text);
    REQUIRE(pieces.size() == 2);
    CHECK(pieces[0] == "\xD7\xA9\xD7\x9C\xD7\x95\xD7\x9D");
    CHECK(pieces[1] == " \xD7\xA2\xD7\x95\xD7\x9C\xD7\x9D");
}

TEST_CASE("degenerate inputs") {
    CHECK(pieces_of("").empty());
    CHECK(pieces_of(" ") == std::vector<std::string>{" "});
    CHECK(pieces_of("\n\n") == std::vector<std::string>{"\n\n"});
}

TEST_CASE("pieces tile the input exactly on random text") {
    util::Rng rng(2024);
    for (int round = 0; round < 300; ++round) {
        std::string text = testutil::random_utf8(rng, 120);
        auto pieces = bpe::pre_split(text);
        size_t cursor = 0;
        for (const Piece& p : pieces) {
            CHECK(p.begin == cursor);
            CHECK(p.end > p.begin);
            cursor = p.end;
        }
        CHECK(cursor == text.size());
    }
}

} // TEST_SUITE
