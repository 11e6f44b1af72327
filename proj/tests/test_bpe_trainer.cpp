#include <string>
#include <vector>

#include "bpe_oracle.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "lmprep/bpe/text_source.hpp"
#include "lmprep/bpe/trainer.hpp"
#include "lmprep/util/rng.hpp"

using namespace lmprep;

namespace {

// small corpora with deliberately clashing pair frequencies so ties and
// merge interactions actually occur
std::vector<std::string> toy_corpus(uint64_t seed) {
    util::Rng rng(seed);
    const char* alphabets[] = {"ab", "abc", "abcd", "xyz", "aeiou"};
    const std::string alphabet = alphabets[rng.next_below(5)];

    size_t target_bytes = 200 + rng.next_below(2000);
    std::vector<std::string> docs;
    size_t total = 0;
    while (total < target_bytes) {
        std::string doc;
        size_t words = 1 + rng.next_below(12);
        for (size_t w = 0; w < words; ++w) {
            if (w) doc += ' ';
            size_t len = 1 + rng.next_below(6);
            for (size_t i = 0; i < len; ++i)
                doc += alphabet[rng.next_below(alphabet.size())];
            if (rng.next_below(8) == 0) doc += ',';
        }
        if (rng.next_below(4) == 0) doc += " " + testutil::hebrew_word(seed, rng.next_below(6), 1, 3);
        total += doc.size();
        docs.push_back(std::move(doc));
    }
    return docs;
}

} // namespace

TEST_SUITE("bpe_trainer") {

TEST_CASE("trained merges match the recount-from-scratch reference") {
    for (uint64_t seed = 1; seed <= 12; ++seed) {
        std::vector<std::string> docs = toy_corpus(seed);

        util::Rng rng(seed, 77);
        bpe::TrainOptions options;
        options.vocab_size = 261 + 5 + int32_t(rng.next_below(60)); // 5..64 merges
        options.min_pair_frequency = 1 + int64_t(rng.next_below(3));

        bpe::VectorTextSource source(docs);
        bpe::TrainResult trained = bpe::train(source, options);
        testutil::NaiveBpe expected =
            testutil::naive_bpe_train(docs, options.vocab_size, options.min_pair_frequency);

        REQUIRE(trained.merges.merges.size() == expected.merges.size());
        for (size_t i = 0; i < expected.merges.size(); ++i) {
            CAPTURE(seed);
            CAPTURE(i);
            CHECK(trained.merges.merges[i] == expected.merges[i]);
        }
        CHECK(trained.reached_target == expected.reached_target);
    }
}

TEST_CASE("frequency ties break toward the lexicographically lowest pair") {
    // "dc" and "ba" each appear twice; (b,a) must merge before (d,c)
    std::vector<std::string> docs = {"dc ba", "ba dc"};
    bpe::VectorTextSource source(docs);
    bpe::TrainOptions options;
    options.vocab_size = 261 + 2;
    bpe::TrainResult trained = bpe::train(source, options);
    REQUIRE(trained.merges.merges.size() >= 2);
    CHECK(trained.merges.merges[0] == std::pair<std::string, std::string>{"b", "a"});
}

TEST_CASE("pairs below min_pair_frequency are never merged") {
    // every pair occurs exactly once, so with the default threshold of 2
    // training stops immediately
    std::vector<std::string> docs = {"abcdefg"};
    bpe::VectorTextSource source(docs);
    bpe::TrainOptions options;
    options.vocab_size = 300;
    bpe::TrainResult trained = bpe::train(source, options);
    CHECK(trained.merges.merges.empty());
    CHECK_FALSE(trained.reached_target);
}

TEST_CASE("documents with invalid utf8 are rejected up front") {
    std::vector<std::string> docs = {"fine", "\xFF"
                                             "broken"};
    bpe::VectorTextSource source(docs);
    bpe::TrainOptions options;
    options.vocab_size = 300;
    CHECK_THROWS_AS(bpe::train(source, options), ParseError);
}

TEST_CASE("counting statistics describe the stream") {
    std::vector<std::string> docs = {"aa bb", "aa bb", "cc"};
    bpe::VectorTextSource source(docs);
    bpe::TrainOptions options;
    options.vocab_size = 262;
    options.min_pair_frequency = 1;
    bpe::TrainResult trained = bpe::train(source, options);
    CHECK(trained.document_count == 3);
    CHECK(trained.corpus_bytes == 5 + 5 + 2);
    // pieces: "aa", " bb" from two docs, "cc" once; first-doc pieces carry
    // no leading space
    CHECK(trained.distinct_pretokens == 3);
    CHECK(trained.corpus_fingerprint.size() == 32);
}

} // TEST_SUITE
