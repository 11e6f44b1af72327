#pragma once

#include <optional>

#include "lmprep/bpe/text_source.hpp"
#include "lmprep/corpus/corpus.hpp"
#include "lmprep/corpus/shard_io.hpp"

namespace lmprep::corpus {

// Streams the documents of a corpus, in shard then record order, as a
// tokenizer training source.
class ManifestTextSource : public bpe::TextSource {
  public:
    explicit ManifestTextSource(CorpusManifest manifest) : manifest_(std::move(manifest)) {}

    void reset() override {
        shard_ = 0;
        reader_.reset();
    }

    std::optional<std::string> next() override {
        for (;;) {
            if (!reader_) {
                if (shard_ >= manifest_.shards.size()) return std::nullopt;
                reader_.emplace(manifest_.shard_path(shard_));
            }
            if (auto doc = reader_->next()) return std::move(doc->text);
            reader_.reset();
            ++shard_;
        }
    }

  private:
    CorpusManifest manifest_;
    size_t shard_ = 0;
    std::optional<ShardReader> reader_;
};

} // namespace lmprep::corpus
