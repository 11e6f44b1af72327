#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lmprep/corpus/corpus.hpp"
#include "lmprep/corpus/shard_io.hpp"
#include "lmprep/error.hpp"
#include "lmprep/util/hash.hpp"
#include "lmprep/util/log.hpp"
#include "lmprep/util/parallel.hpp"
#include "lmprep/util/rng.hpp"
#include "lmprep/util/unicode.hpp"

namespace lmprep::corpus {

namespace {

using nlohmann::json;

struct FileStats {
    uint64_t records = 0;
    RejectStats rejects;
    bool has_provided_ids = false;
};

InputFormat detect_format(const std::filesystem::path& path, InputFormat requested) {
    if (requested != InputFormat::auto_detect) return requested;
    std::string ext = path.extension().string();
    return (ext == ".jsonl" || ext == ".ndjson") ? InputFormat::jsonl : InputFormat::text;
}

// Line reader that strips a UTF-8 BOM on the first line and a trailing
// carriage return on every line.
class LineReader {
  public:
    explicit LineReader(const std::filesystem::path& path)
        : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot open " + path.string());
    }
    bool next(std::string& line) {
        if (!std::getline(in_, line)) {
            if (in_.bad()) throw IoError("read failed for " + path_.string());
            return false;
        }
        if (first_) {
            first_ = false;
            if (line.size() >= 3 && uint8_t(line[0]) == 0xEF && uint8_t(line[1]) == 0xBB &&
                uint8_t(line[2]) == 0xBF)
                line.erase(0, 3);
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

  private:
    std::filesystem::path path_;
    std::ifstream in_;
    bool first_ = true;
};

// Intermediate per-input spool format, one record per line:
// "<text_bytes>\t<id>\t<canonical json>". The prefix lets the merge pass
// drive shard accounting and id checks without re-parsing JSON.
class SpoolWriter {
  public:
    explicit SpoolWriter(const std::filesystem::path& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    }
    void append(const Document& doc) {
        out_ << doc.byte_len() << '\t' << doc.id << '\t' << record_to_line(doc) << '\n';
        if (!out_) throw IoError("write failed for " + path_.string());
    }
    void close() {
        out_.flush();
        if (!out_) throw IoError("write failed for " + path_.string());
        out_.close();
    }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

uint64_t synth_id(size_t file_idx, uint64_t ordinal) {
    return (uint64_t(file_idx) << 32) | ordinal;
}

void ingest_jsonl(size_t file_idx, const std::filesystem::path& path, Source default_source,
                  SpoolWriter& spool, FileStats& stats) {
    LineReader lines(path);
    std::string line;
    uint64_t ordinal = 0;
    while (lines.next(line)) {
        if (line.empty()) continue;
        uint64_t this_ordinal = ordinal++;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            ++stats.rejects.malformed;
            continue;
        }
        if (!record.contains("text") || !record["text"].is_string()) {
            ++stats.rejects.missing_text;
            continue;
        }
        Document doc;
        doc.text = record["text"].get<std::string>();
        if (!util::utf8_valid(doc.text)) {
            ++stats.rejects.invalid_utf8;
            continue;
        }
        if (record.contains("id")) {
            if (!record["id"].is_number_unsigned()) {
                ++stats.rejects.malformed;
                continue;
            }
            doc.id = record["id"].get<uint64_t>();
            stats.has_provided_ids = true;
        } else {
            doc.id = synth_id(file_idx, this_ordinal);
        }
        if (record.contains("source")) {
            if (!record["source"].is_string()) {
                ++stats.rejects.malformed;
                continue;
            }
            try {
                doc.source = source_from_string(record["source"].get<std::string>());
            } catch (const InvalidArgument&) {
                ++stats.rejects.malformed;
                continue;
            }
        } else {
            doc.source = default_source;
        }
        spool.append(doc);
        ++stats.records;
    }
}

void ingest_text(size_t file_idx, const std::filesystem::path& path, Source default_source,
                 SpoolWriter& spool, FileStats& stats) {
    LineReader lines(path);
    std::string line;
    std::string block;
    uint64_t ordinal = 0;
    bool in_block = false;

    auto flush_block = [&] {
        if (!in_block) return;
        in_block = false;
        uint64_t this_ordinal = ordinal++;
        std::string text = std::move(block);
        block.clear();
        if (!util::utf8_valid(text)) {
            ++stats.rejects.invalid_utf8;
            return;
        }
        Document doc;
        doc.id = synth_id(file_idx, this_ordinal);
        doc.source = default_source;
        doc.text = std::move(text);
        spool.append(doc);
        ++stats.records;
    };

    while (lines.next(line)) {
        if (line.empty()) {
            flush_block();
            continue;
        }
        if (in_block) block += '\n';
        block += line;
        in_block = true;
    }
    flush_block();
}

// Splits a spool line into (text_bytes, id, json). Spool files are internal
// so a parse failure here means the run itself is broken.
void split_spool_line(const std::string& line, uint64_t& text_bytes, uint64_t& id,
                      std::string_view& payload) {
    const char* begin = line.data();
    const char* end = begin + line.size();
    auto first = std::from_chars(begin, end, text_bytes);
    if (first.ec != std::errc() || first.ptr == end || *first.ptr != '\t')
        throw Error("corrupt ingest spool line");
    auto second = std::from_chars(first.ptr + 1, end, id);
    if (second.ec != std::errc() || second.ptr == end || *second.ptr != '\t')
        throw Error("corrupt ingest spool line");
    payload = std::string_view(second.ptr + 1, size_t(end - (second.ptr + 1)));
}

std::string trim_trailing_whitespace(const std::string& text) {
    size_t end = text.size();
    while (end > 0) {
        char c = text[end - 1];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f')
            --end;
        else
            break;
    }
    return text.substr(0, end);
}

struct DocIndexEntry {
    uint32_t shard = 0;
    uint32_t line_bytes = 0;
    uint64_t offset = 0;
    uint64_t text_bytes = 0;
};

// Parallel pass that records where every record line lives and how many
// text bytes it carries, in (shard, record) order.
std::vector<DocIndexEntry> build_doc_index(const CorpusManifest& input, int workers) {
    std::vector<std::vector<DocIndexEntry>> per_shard(input.shards.size());
    util::parallel_for_index(input.shards.size(), workers, [&](size_t i) {
        ShardReader reader(input.shard_path(i));
        per_shard[i].reserve(input.shards[i].document_count);
        while (auto doc = reader.next())
            per_shard[i].push_back(DocIndexEntry{uint32_t(i), reader.record_bytes(),
                                                 reader.record_offset(), doc->byte_len()});
    });
    std::vector<DocIndexEntry> index;
    index.reserve(input.total_documents);
    for (auto& shard : per_shard)
        index.insert(index.end(), shard.begin(), shard.end());
    return index;
}

// Copies the indexed lines, in index order, into fresh shards under
// out_dir. Source shards are read through seek-and-read handles.
std::vector<ShardInfo> copy_indexed(const CorpusManifest& input,
                                    const std::vector<DocIndexEntry>& index,
                                    const std::filesystem::path& out_dir, uint64_t shard_bytes) {
    std::vector<std::ifstream> inputs;
    inputs.reserve(input.shards.size());
    for (size_t i = 0; i < input.shards.size(); ++i) {
        inputs.emplace_back(input.shard_path(i), std::ios::binary);
        if (!inputs.back()) throw IoError("cannot open shard " + input.shard_path(i).string());
    }
    ShardWriter writer(out_dir, shard_bytes);
    std::string buf;
    for (const DocIndexEntry& entry : index) {
        buf.resize(entry.line_bytes);
        std::ifstream& in = inputs[entry.shard];
        in.seekg(std::streamoff(entry.offset));
        in.read(buf.data(), std::streamsize(entry.line_bytes));
        if (!in) throw IoError("read failed for shard " + input.shard_path(entry.shard).string());
        writer.append(buf, entry.text_bytes);
    }
    return writer.finish();
}

CorpusManifest finalize(CorpusManifest manifest, std::vector<ShardInfo> shards,
                        const std::filesystem::path& out_dir) {
    manifest.shards = std::move(shards);
    manifest.total_documents = 0;
    manifest.total_bytes = 0;
    for (const ShardInfo& shard : manifest.shards) {
        manifest.total_documents += shard.document_count;
        manifest.total_bytes += shard.byte_count;
    }
    manifest.base_dir = out_dir;
    manifest.save(out_dir / "manifest.json");
    return manifest;
}

} // namespace

CorpusManifest ingest(const std::vector<std::filesystem::path>& inputs,
                      const std::filesystem::path& out_dir, const IngestOptions& options) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());

    // pass 1: parse every input into a spool file, in parallel
    std::vector<FileStats> stats(inputs.size());
    std::vector<std::filesystem::path> spools(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i)
        spools[i] = out_dir / (".ingest-spool-" + std::to_string(i));

    util::parallel_for_index(inputs.size(), options.workers, [&](size_t i) {
        SpoolWriter spool(spools[i]);
        InputFormat format = detect_format(inputs[i], options.format);
        if (format == InputFormat::jsonl)
            ingest_jsonl(i, inputs[i], options.default_source, spool, stats[i]);
        else
            ingest_text(i, inputs[i], options.default_source, spool, stats[i]);
        spool.close();
    });

    CorpusManifest manifest;
    bool check_ids = false;
    for (const FileStats& s : stats) {
        manifest.rejects.invalid_utf8 += s.rejects.invalid_utf8;
        manifest.rejects.malformed += s.rejects.malformed;
        manifest.rejects.missing_text += s.rejects.missing_text;
        check_ids = check_ids || s.has_provided_ids;
    }

    // pass 2: concatenate the spools, in input order, into real shards.
    // Id uniqueness is only tracked when some record supplied its own id;
    // synthesized ids are unique by construction.
    std::unordered_set<uint64_t> seen_ids;
    ShardWriter writer(out_dir, options.shard_bytes);
    for (size_t i = 0; i < inputs.size(); ++i) {
        std::ifstream spool(spools[i], std::ios::binary);
        if (!spool) throw IoError("cannot reopen spool " + spools[i].string());
        std::string line;
        while (std::getline(spool, line)) {
            uint64_t text_bytes = 0, id = 0;
            std::string_view payload;
            split_spool_line(line, text_bytes, id, payload);
            if (check_ids && !seen_ids.insert(id).second) {
                ++manifest.rejects.duplicate_id;
                continue;
            }
            writer.append(payload, text_bytes);
        }
        if (spool.bad()) throw IoError("read failed for spool " + spools[i].string());
    }
    for (const auto& spool : spools) std::filesystem::remove(spool, ec);

    uint64_t rejected = manifest.rejects.total();
    if (rejected > 0)
        LMPREP_LOG_WARN("ingest: skipped %llu records (utf8 %llu, malformed %llu, "
                        "missing text %llu, duplicate id %llu)",
                        (unsigned long long)rejected,
                        (unsigned long long)manifest.rejects.invalid_utf8,
                        (unsigned long long)manifest.rejects.malformed,
                        (unsigned long long)manifest.rejects.missing_text,
                        (unsigned long long)manifest.rejects.duplicate_id);

    return finalize(std::move(manifest), writer.finish(), out_dir);
}

CorpusManifest dedup_exact(const CorpusManifest& input, const std::filesystem::path& out_dir,
                           uint64_t shard_bytes, int workers) {
    // fingerprint every document, in parallel over shards
    std::vector<std::vector<util::Hash128>> fingerprints(input.shards.size());
    util::parallel_for_index(input.shards.size(), workers, [&](size_t i) {
        ShardReader reader(input.shard_path(i));
        fingerprints[i].reserve(input.shards[i].document_count);
        while (auto doc = reader.next())
            fingerprints[i].push_back(util::murmur3_128(trim_trailing_whitespace(doc->text)));
    });

    // first occurrence in (shard, record) order wins
    std::unordered_set<util::Hash128, util::Hash128Hasher> seen;
    std::vector<std::vector<bool>> keep(fingerprints.size());
    for (size_t i = 0; i < fingerprints.size(); ++i) {
        keep[i].reserve(fingerprints[i].size());
        for (const util::Hash128& fp : fingerprints[i])
            keep[i].push_back(seen.insert(fp).second);
    }

    ShardWriter writer(out_dir, shard_bytes);
    for (size_t i = 0; i < input.shards.size(); ++i) {
        ShardReader reader(input.shard_path(i));
        size_t j = 0;
        while (auto doc = reader.next()) {
            if (keep[i][j]) writer.append(reader.record_line(), doc->byte_len());
            ++j;
        }
    }

    CorpusManifest manifest;
    manifest.rejects = input.rejects;
    manifest.shuffle_seed = input.shuffle_seed;
    manifest.dedup_fingerprint_count = seen.size();
    return finalize(std::move(manifest), writer.finish(), out_dir);
}

CorpusManifest shuffle(const CorpusManifest& input, uint64_t seed,
                       const std::filesystem::path& out_dir, uint64_t shard_bytes, int workers) {
    std::vector<DocIndexEntry> index = build_doc_index(input, workers);
    util::seeded_shuffle(index, seed);

    CorpusManifest manifest;
    manifest.rejects = input.rejects;
    manifest.dedup_fingerprint_count = input.dedup_fingerprint_count;
    manifest.shuffle_seed = seed;
    return finalize(std::move(manifest), copy_indexed(input, index, out_dir, shard_bytes),
                    out_dir);
}

CorpusManifest sample_bytes(const CorpusManifest& input, uint64_t target_bytes, uint64_t seed,
                            const std::filesystem::path& out_dir, uint64_t shard_bytes,
                            int workers) {
    if (target_bytes == 0) throw InvalidArgument("target_bytes must be positive");

    std::vector<DocIndexEntry> index = build_doc_index(input, workers);
    util::seeded_shuffle(index, seed);

    uint64_t cumulative = 0;
    size_t taken = 0;
    while (taken < index.size() && cumulative < target_bytes)
        cumulative += index[taken++].text_bytes;
    bool undersized = cumulative < target_bytes;
    if (undersized)
        LMPREP_LOG_WARN("sample: corpus has only %llu bytes of the requested %llu; "
                        "returning everything",
                        (unsigned long long)cumulative, (unsigned long long)target_bytes);
    index.resize(taken);

    CorpusManifest manifest;
    manifest.rejects = input.rejects;
    manifest.dedup_fingerprint_count = input.dedup_fingerprint_count;
    manifest.shuffle_seed = seed;
    manifest.undersized = undersized;
    return finalize(std::move(manifest), copy_indexed(input, index, out_dir, shard_bytes),
                    out_dir);
}

} // namespace lmprep::corpus
