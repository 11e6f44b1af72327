#pragma once

#include <cstdint>
#include <string>

#include "lmprep/bpe/model.hpp"
#include "lmprep/bpe/text_source.hpp"

namespace lmprep::bpe {

struct TrainOptions {
    int32_t vocab_size = 0;
    int64_t min_pair_frequency = 2;
    int workers = 1;

    void validate() const; // vocab_size must exceed 256 + specials
};

struct TrainResult {
    MergeTable merges;
    Vocabulary vocab;
    // false when the corpus ran out of frequent pairs before vocab_size
    bool reached_target = true;
    uint64_t corpus_bytes = 0;
    uint64_t document_count = 0;
    uint64_t distinct_pretokens = 0;
    std::string corpus_fingerprint; // order-sensitive content hash, hex
    double count_seconds = 0.0;     // pair-counting phase (throughput report)
    double merge_seconds = 0.0;
};

// Greedy byte-level BPE training. Counting is a single pass that weights
// each distinct pre-token by its frequency; the merge loop then repeatedly
// takes the globally most frequent adjacent symbol pair, breaking ties
// toward the lexicographically lowest (left, right) symbol strings. The
// result is a deterministic function of the document stream and options,
// independent of worker count.
TrainResult train(TextSource& source, const TrainOptions& options);

} // namespace lmprep::bpe
