#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmprep::corpus {

enum class Source { web_corpus, wikipedia, other };

std::string_view to_string(Source source);
Source source_from_string(std::string_view name); // throws InvalidArgument

struct Document {
    uint64_t id = 0;
    Source source = Source::other;
    std::string text; // valid UTF-8
    uint64_t byte_len() const { return text.size(); }
};

struct ShardInfo {
    std::string path; // file name, relative to the manifest directory
    uint64_t document_count = 0;
    uint64_t byte_count = 0; // sum of document text bytes, not file size
};

// Tally of records skipped at ingest. Nothing is dropped silently; every
// skip lands in one of these buckets.
struct RejectStats {
    uint64_t invalid_utf8 = 0;
    uint64_t malformed = 0;
    uint64_t missing_text = 0;
    uint64_t duplicate_id = 0;
    uint64_t total() const { return invalid_utf8 + malformed + missing_text + duplicate_id; }
};

struct CorpusManifest {
    std::vector<ShardInfo> shards;
    uint64_t total_documents = 0;
    uint64_t total_bytes = 0; // equals the sum of shard byte_counts
    uint64_t dedup_fingerprint_count = 0; // distinct texts seen by the dedup pass
    std::optional<uint64_t> shuffle_seed;
    bool undersized = false; // sampling asked for more bytes than existed
    RejectStats rejects;

    // where the shard files live; set by load()/save(), never serialized
    std::filesystem::path base_dir;

    std::filesystem::path shard_path(size_t index) const;

    void save(const std::filesystem::path& file) const;
    static CorpusManifest load(const std::filesystem::path& file);
};

enum class InputFormat { auto_detect, jsonl, text };

struct IngestOptions {
    Source default_source = Source::other;
    InputFormat format = InputFormat::auto_detect;
    uint64_t shard_bytes = 512ull << 20;
    int workers = 1;
};

// Streams the input files into canonical sharded JSONL under out_dir and
// returns the manifest (also written to out_dir/manifest.json). Memory use
// is bounded by one record plus the shard buffer, not the corpus size.
CorpusManifest ingest(const std::vector<std::filesystem::path>& inputs,
                      const std::filesystem::path& out_dir, const IngestOptions& options);

// Keeps the first occurrence (in shard then record order) of every
// distinct text, where distinct means byte-identical after trimming
// trailing whitespace. Fingerprints are 128-bit content hashes.
CorpusManifest dedup_exact(const CorpusManifest& input, const std::filesystem::path& out_dir,
                           uint64_t shard_bytes = 512ull << 20, int workers = 1);

// Rewrites the corpus as a seeded uniform permutation of its documents.
CorpusManifest shuffle(const CorpusManifest& input, uint64_t seed,
                       const std::filesystem::path& out_dir,
                       uint64_t shard_bytes = 512ull << 20, int workers = 1);

// Draws documents in seeded shuffled order until their cumulative text
// bytes first reach target_bytes. When the corpus is smaller than the
// target the whole corpus comes back with undersized set.
CorpusManifest sample_bytes(const CorpusManifest& input, uint64_t target_bytes, uint64_t seed,
                            const std::filesystem::path& out_dir,
                            uint64_t shard_bytes = 512ull << 20, int workers = 1);

} // namespace lmprep::corpus
