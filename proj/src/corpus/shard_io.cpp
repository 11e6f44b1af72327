#include "lmprep/corpus/shard_io.hpp"

#include <nlohmann/json.hpp>

#include "lmprep/error.hpp"

namespace lmprep::corpus {

namespace {
using nlohmann::json;

std::string shard_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "shard-%05d.jsonl", index);
    return buf;
}
} // namespace

std::string record_to_line(const Document& doc) {
    json record = {{"id", doc.id}, {"source", to_string(doc.source)}, {"text", doc.text}};
    return record.dump();
}

Document record_from_line(std::string_view line, const std::filesystem::path& context,
                          uint64_t lineno) {
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object() || !record.contains("id") ||
        !record["id"].is_number_unsigned() || !record.contains("source") ||
        !record["source"].is_string() || !record.contains("text") || !record["text"].is_string())
        throw ParseError("malformed record in " + context.string(), int64_t(lineno));
    Document doc;
    doc.id = record["id"].get<uint64_t>();
    doc.source = source_from_string(record["source"].get<std::string>());
    doc.text = record["text"].get<std::string>();
    return doc;
}

ShardReader::ShardReader(std::filesystem::path path)
    : path_(std::move(path)), in_(path_, std::ios::binary) {
    if (!in_) throw IoError("cannot open shard " + path_.string());
}

std::optional<Document> ShardReader::next() {
    while (std::getline(in_, line_)) {
        uint64_t offset = next_offset_;
        next_offset_ += line_.size() + 1; // the consumed newline
        ++lineno_;
        if (line_.empty()) continue; // tolerate a stray final newline
        offset_ = offset;
        bytes_ = uint32_t(line_.size());
        return record_from_line(line_, path_, lineno_);
    }
    if (in_.bad()) throw IoError("read failed for shard " + path_.string());
    return std::nullopt;
}

ShardWriter::ShardWriter(std::filesystem::path dir, uint64_t shard_bytes)
    : dir_(std::move(dir)), shard_bytes_(shard_bytes) {
    if (shard_bytes_ == 0) throw InvalidArgument("shard_bytes must be positive");
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create directory " + dir_.string() + ": " + ec.message());
}

void ShardWriter::roll_if_needed(uint64_t incoming_text_bytes) {
    if (!out_.is_open()) {
        open_next();
        return;
    }
    if (current_docs_ > 0 && current_text_bytes_ + incoming_text_bytes > shard_bytes_) {
        finished_.push_back(ShardInfo{current_name_, current_docs_, current_text_bytes_});
        out_.close();
        if (!out_) throw IoError("close failed for shard " + current_name_);
        open_next();
    }
}

void ShardWriter::open_next() {
    current_name_ = shard_name(next_index_++);
    out_.clear();
    out_.open(dir_ / current_name_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open shard " + (dir_ / current_name_).string());
    current_docs_ = 0;
    current_text_bytes_ = 0;
}

void ShardWriter::append(std::string_view line, uint64_t text_bytes) {
    roll_if_needed(text_bytes);
    out_.write(line.data(), std::streamsize(line.size()));
    out_.put('\n');
    if (!out_) throw IoError("write failed for shard " + (dir_ / current_name_).string());
    ++current_docs_;
    current_text_bytes_ += text_bytes;
}

void ShardWriter::append(const Document& doc) { append(record_to_line(doc), doc.byte_len()); }

std::vector<ShardInfo> ShardWriter::finish() {
    if (out_.is_open()) {
        out_.flush();
        if (!out_) throw IoError("write failed for shard " + (dir_ / current_name_).string());
        finished_.push_back(ShardInfo{current_name_, current_docs_, current_text_bytes_});
        out_.close();
    }
    return std::move(finished_);
}

} // namespace lmprep::corpus
