#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "lmprep/corpus/corpus.hpp"
#include "lmprep/corpus/manifest_source.hpp"
#include "lmprep/error.hpp"
#include "lmprep/util/rng.hpp"

using namespace lmprep;

namespace {

std::vector<std::string> manifest_texts(const corpus::CorpusManifest& manifest) {
    corpus::ManifestTextSource source(manifest);
    std::vector<std::string> texts;
    while (auto doc = source.next()) texts.push_back(std::move(*doc));
    return texts;
}

// writes a JSONL input file with n unique documents plus optional extras
std::string jsonl_records(int n, uint64_t first_id = 0) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        out += "{\"id\": " + std::to_string(first_id + uint64_t(i)) +
               ", \"text\": \"document number " + std::to_string(first_id + uint64_t(i)) +
               " with a bit of text\"}\n";
    }
    return out;
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("ingest reads jsonl and plain text and tallies rejects") {
    testutil::TempDir dir("ingest");
    testutil::write_file(dir / "in.jsonl",
                         jsonl_records(5) +
                             "not json at all\n"
                             "{\"id\": 100}\n"                     // no text field
                             "{\"id\": 2, \"text\": \"dup id\"}\n" // id 2 again
                             "{\"id\": 102, \"text\": \"good tail\"}\n");
    // the middle block carries a byte that is not UTF-8
    testutil::write_file(dir / "in.txt",
                         "first block\n\nbad \xFF block\n\nsecond block\nstill second\n");

    corpus::IngestOptions options;
    corpus::CorpusManifest manifest =
        corpus::ingest({dir / "in.jsonl", dir / "in.txt"}, dir / "out", options);

    // 5 + 1 good jsonl records, 2 text blocks
    CHECK(manifest.total_documents == 8);
    CHECK(manifest.rejects.malformed == 1);
    CHECK(manifest.rejects.missing_text == 1);
    CHECK(manifest.rejects.duplicate_id == 1);
    CHECK(manifest.rejects.invalid_utf8 == 1);
    CHECK(manifest.rejects.total() == 4);

    std::vector<std::string> texts = manifest_texts(manifest);
    REQUIRE(texts.size() == 8);
    CHECK(texts[0] == "document number 0 with a bit of text");
    CHECK(texts[5] == "good tail");
    CHECK(texts[6] == "first block");
    CHECK(texts[7] == "second block\nstill second");

    uint64_t bytes = 0;
    for (const auto& t : texts) bytes += t.size();
    CHECK(manifest.total_bytes == bytes);

    // the manifest file round-trips
    corpus::CorpusManifest loaded = corpus::CorpusManifest::load(dir / "out" / "manifest.json");
    CHECK(loaded.total_documents == manifest.total_documents);
    CHECK(loaded.total_bytes == manifest.total_bytes);
    CHECK(manifest_texts(loaded) == texts);
}

TEST_CASE("ingest fails hard on unreadable inputs") {
    testutil::TempDir dir("ingest_bad");
    corpus::IngestOptions options;
    CHECK_THROWS_AS(corpus::ingest({dir / "nope.jsonl"}, dir / "out", options), IoError);
}

TEST_CASE("small shard limit rolls over to multiple shards") {
    testutil::TempDir dir("shards");
    testutil::write_file(dir / "in.jsonl", jsonl_records(50));

    corpus::IngestOptions options;
    options.shard_bytes = 256; // a few documents per shard
    corpus::CorpusManifest manifest = corpus::ingest({dir / "in.jsonl"}, dir / "out", options);

    CHECK(manifest.shards.size() > 3);
    uint64_t docs = 0, bytes = 0;
    for (const auto& shard : manifest.shards) {
        docs += shard.document_count;
        bytes += shard.byte_count;
        CHECK(shard.document_count > 0);
    }
    CHECK(docs == 50);
    CHECK(bytes == manifest.total_bytes);
    CHECK(manifest_texts(manifest).size() == 50);
}

TEST_CASE("dedup keeps the first occurrence and is idempotent") {
    testutil::TempDir dir("dedup");
    std::string input = jsonl_records(6);
    input += "{\"id\": 50, \"text\": \"document number 2 with a bit of text\"}\n"; // exact dup
    input += "{\"id\": 51, \"text\": \"document number 3 with a bit of text  \"}\n"; // trailing ws
    input += "{\"id\": 52, \"text\": \"fresh text\"}\n";
    testutil::write_file(dir / "in.jsonl", input);

    corpus::IngestOptions options;
    corpus::CorpusManifest ingested = corpus::ingest({dir / "in.jsonl"}, dir / "raw", options);
    REQUIRE(ingested.total_documents == 9);

    corpus::CorpusManifest deduped = corpus::dedup_exact(ingested, dir / "dedup");
    CHECK(deduped.total_documents == 7);
    CHECK(deduped.dedup_fingerprint_count == 7);
    std::vector<std::string> texts = manifest_texts(deduped);
    REQUIRE(texts.size() == 7);
    CHECK(texts[2] == "document number 2 with a bit of text"); // first copy survived in place
    CHECK(texts[6] == "fresh text");

    corpus::CorpusManifest again = corpus::dedup_exact(deduped, dir / "dedup2");
    CHECK(again.total_documents == 7);
    CHECK(manifest_texts(again) == texts);
}

TEST_CASE("shuffle is a seeded permutation of the documents") {
    testutil::TempDir dir("shuffle");
    testutil::write_file(dir / "in.jsonl", jsonl_records(200));
    corpus::IngestOptions options;
    corpus::CorpusManifest ingested = corpus::ingest({dir / "in.jsonl"}, dir / "raw", options);
    std::vector<std::string> original = manifest_texts(ingested);

    corpus::CorpusManifest shuffled = corpus::shuffle(ingested, 42, dir / "s42");
    std::vector<std::string> texts = manifest_texts(shuffled);
    CHECK(shuffled.shuffle_seed == uint64_t(42));
    CHECK(texts != original);

    std::vector<std::string> a = original, b = texts;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);

    corpus::CorpusManifest repeat = corpus::shuffle(ingested, 42, dir / "s42b");
    CHECK(manifest_texts(repeat) == texts);
    corpus::CorpusManifest other = corpus::shuffle(ingested, 43, dir / "s43");
    CHECK(manifest_texts(other) != texts);
}

TEST_CASE("sampling stops at the byte target and flags undersized corpora") {
    testutil::TempDir dir("sample");
    testutil::write_file(dir / "in.jsonl", jsonl_records(300));
    corpus::IngestOptions options;
    corpus::CorpusManifest ingested = corpus::ingest({dir / "in.jsonl"}, dir / "raw", options);

    const uint64_t target = 2000;
    corpus::CorpusManifest sampled = corpus::sample_bytes(ingested, target, 9, dir / "sampled");
    CHECK_FALSE(sampled.undersized);
    CHECK(sampled.total_bytes >= target);
    std::vector<std::string> texts = manifest_texts(sampled);
    REQUIRE(!texts.empty());
    // dropping the last drawn document lands under the target, so the draw
    // stopped as soon as the budget was reached
    CHECK(sampled.total_bytes - texts.back().size() < target);

    corpus::CorpusManifest repeat = corpus::sample_bytes(ingested, target, 9, dir / "sampled2");
    CHECK(manifest_texts(repeat) == texts);

    corpus::CorpusManifest all =
        corpus::sample_bytes(ingested, ingested.total_bytes * 10, 9, dir / "oversized");
    CHECK(all.undersized);
    CHECK(all.total_documents == ingested.total_documents);
}

TEST_CASE("pipeline output is identical for any worker count") {
    testutil::TempDir dir("workers");
    std::string input = jsonl_records(120);
    input += "{\"id\": 900, \"text\": \"document number 7 with a bit of text\"}\n";
    testutil::write_file(dir / "in.jsonl", input);

    auto run = [&](int workers, const std::string& tag) {
        corpus::IngestOptions options;
        options.workers = workers;
        corpus::CorpusManifest m = corpus::ingest({dir / "in.jsonl"}, dir / (tag + "_raw"), options);
        m = corpus::dedup_exact(m, dir / (tag + "_dedup"), 512ull << 20, workers);
        m = corpus::shuffle(m, 5, dir / (tag + "_shuffle"), 512ull << 20, workers);
        return manifest_texts(m);
    };
    CHECK(run(1, "w1") == run(4, "w4"));
}

} // TEST_SUITE
