#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lmprep::bpe {

// Streaming document feed for vocabulary training. Implementations must
// yield the same documents in the same order on every pass.
class TextSource {
public:
    virtual ~TextSource() = default;
    virtual void reset() = 0;
    virtual std::optional<std::string> next() = 0;
};

class VectorTextSource final : public TextSource {
public:
    explicit VectorTextSource(std::vector<std::string> docs) : docs_(std::move(docs)) {}

    void reset() override { index_ = 0; }
    std::optional<std::string> next() override {
        if (index_ >= docs_.size()) return std::nullopt;
        return docs_[index_++];
    }

private:
    std::vector<std::string> docs_;
    size_t index_ = 0;
};

} // namespace lmprep::bpe
