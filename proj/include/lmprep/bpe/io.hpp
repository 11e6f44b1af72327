#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "lmprep/bpe/model.hpp"

namespace lmprep::bpe {

// Sidecar facts recorded next to the vocabulary and merge list. The
// fingerprint ties a trained model back to the exact document stream it
// was trained on.
struct ModelMeta {
    int64_t vocab_size = 0;
    int64_t min_pair_frequency = 0;
    std::string pre_split_version;
    std::string corpus_fingerprint;
    bool reached_target = true;
};

struct LoadedModel {
    MergeTable merges;
    Vocabulary vocab;
    ModelMeta meta;
};

// Writes vocab.json (token to id), merges.txt (one merge per line, rank =
// line order, version comment first) and meta.json into `dir`, creating it
// if needed.
void save_model(const std::filesystem::path& dir, const MergeTable& merges,
                const Vocabulary& vocab, const ModelMeta& meta);

// Reads the three files back and cross-checks them: the vocabulary must be
// exactly the one the merge list implies. Throws IoError when a file is
// unreadable and ParseError (with a line number for merges.txt) when
// content is malformed or inconsistent.
LoadedModel load_model(const std::filesystem::path& dir);

} // namespace lmprep::bpe
