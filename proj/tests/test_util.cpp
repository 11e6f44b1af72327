#include <algorithm>
#include <atomic>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "lmprep/error.hpp"
#include "lmprep/util/hash.hpp"
#include "lmprep/util/log.hpp"
#include "lmprep/util/parallel.hpp"
#include "lmprep/util/rng.hpp"
#include "lmprep/util/unicode.hpp"

using namespace lmprep;

TEST_SUITE("util") {

TEST_CASE("mix_seed is deterministic and spreads nearby inputs") {
    CHECK(util::mix_seed(1) == util::mix_seed(1));
    CHECK(util::mix_seed(1, 2) == util::mix_seed(1, 2));
    CHECK(util::mix_seed(1, 2) != util::mix_seed(2, 1));
    std::set<uint64_t> seen;
    for (uint64_t i = 0; i < 1000; ++i) seen.insert(util::mix_seed(i));
    CHECK(seen.size() == 1000);
}

TEST_CASE("rng draws are reproducible and in range") {
    util::Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) differs = true;
    }
    CHECK(differs);

    util::Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.next_below(13) < 13);
        double d = r.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
    CHECK(r.next_below(0) == 0);
    CHECK(r.next_below(1) == 0);
}

TEST_CASE("seeded_shuffle permutes without losing elements") {
    std::vector<int> items(257);
    std::iota(items.begin(), items.end(), 0);
    std::vector<int> original = items;

    util::seeded_shuffle(items, 99);
    CHECK(items != original); // 257 elements staying put would be astonishing
    std::vector<int> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == original);

    std::vector<int> again = original;
    util::seeded_shuffle(again, 99);
    CHECK(again == items);

    std::vector<int> other = original;
    util::seeded_shuffle(other, 100);
    CHECK(other != items);
}

TEST_CASE("murmur3 hashes are stable and sensitive") {
    auto h1 = util::murmur3_128("hello world", 0);
    auto h2 = util::murmur3_128("hello world", 0);
    CHECK(h1.hi == h2.hi);
    CHECK(h1.lo == h2.lo);

    auto h3 = util::murmur3_128("hello worlb", 0);
    CHECK((h1.hi != h3.hi || h1.lo != h3.lo));

    auto h4 = util::murmur3_128("hello world", 1);
    CHECK((h1.hi != h4.hi || h1.lo != h4.lo));

    CHECK(util::murmur3_64("abc") == util::murmur3_64("abc"));
    CHECK(util::murmur3_64("abc") != util::murmur3_64("abd"));
    CHECK(util::murmur3_128("", 0).hex().size() == 32);
}

TEST_CASE("parallel_for_index covers every index once for any worker count") {
    for (int workers : {1, 2, 4, 7}) {
        std::vector<std::atomic<int>> hits(1000);
        util::parallel_for_index(hits.size(), workers,
                                 [&](size_t i) { hits[i].fetch_add(1); });
        for (auto& h : hits) CHECK(h.load() == 1);
    }
}

TEST_CASE("parallel_for_index rethrows a worker exception") {
    auto boom = [] {
        util::parallel_for_index(64, 4, [](size_t i) {
            if (i == 17) throw Error("worker failure");
        });
    };
    CHECK_THROWS_AS(boom(), Error);
}

TEST_CASE("utf8 validation accepts real text and rejects broken bytes") {
    CHECK(util::utf8_valid("plain ascii"));
    CHECK(util::utf8_valid("\xD7\xA9\xD7\x9C\xD7\x95\xD7\x9D")); // Hebrew
    CHECK(util::utf8_valid("\xF0\x9F\x98\x80"));                 // emoji
    CHECK(util::utf8_valid(""));
    CHECK_FALSE(util::utf8_valid("\xFF"));
    CHECK_FALSE(util::utf8_valid("\xC3"));             // truncated sequence
    CHECK_FALSE(util::utf8_valid("\xED\xA0\x80"));     // surrogate half
    CHECK_FALSE(util::utf8_valid("\xC0\xAF"));         // overlong
}

TEST_CASE("log level names parse and bad ones are refused") {
    CHECK(util::set_log_level("debug"));
    CHECK(util::set_log_level("warn"));
    CHECK_FALSE(util::set_log_level("chatty"));
    CHECK(util::set_log_level("info")); // restore the default for other tests
}

} // TEST_SUITE
