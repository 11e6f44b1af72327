#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lmprep/corpus/corpus.hpp"

namespace lmprep::corpus {

std::string record_to_line(const Document& doc); // canonical JSON, no newline
Document record_from_line(std::string_view line, const std::filesystem::path& context,
                          uint64_t lineno);

// Sequential reader over one canonical shard file. After a successful
// next(), record_offset()/record_bytes() describe the raw line just read
// (newline excluded) so callers can index or copy it verbatim.
class ShardReader {
  public:
    explicit ShardReader(std::filesystem::path path);
    std::optional<Document> next();
    uint64_t record_offset() const { return offset_; }
    uint32_t record_bytes() const { return bytes_; }
    const std::string& record_line() const { return line_; }

  private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::string line_;
    uint64_t next_offset_ = 0;
    uint64_t offset_ = 0;
    uint32_t bytes_ = 0;
    uint64_t lineno_ = 0;
};

// Appends canonical record lines, rolling to a new shard file whenever the
// accumulated text bytes would pass the limit. A single oversized document
// still gets a shard of its own.
class ShardWriter {
  public:
    ShardWriter(std::filesystem::path dir, uint64_t shard_bytes);
    void append(std::string_view line, uint64_t text_bytes);
    void append(const Document& doc);
    std::vector<ShardInfo> finish(); // closes the current shard

  private:
    void roll_if_needed(uint64_t incoming_text_bytes);
    void open_next();

    std::filesystem::path dir_;
    uint64_t shard_bytes_;
    std::ofstream out_;
    std::string current_name_;
    uint64_t current_docs_ = 0;
    uint64_t current_text_bytes_ = 0;
    int next_index_ = 0;
    std::vector<ShardInfo> finished_;
};

} // namespace lmprep::corpus
