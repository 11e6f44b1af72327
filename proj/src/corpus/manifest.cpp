#include "lmprep/corpus/corpus.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lmprep/error.hpp"

namespace lmprep::corpus {

namespace {
using nlohmann::json;
constexpr int kManifestFormatVersion = 1;
} // namespace

std::string_view to_string(Source source) {
    switch (source) {
    case Source::web_corpus: return "web_corpus";
    case Source::wikipedia: return "wikipedia";
    case Source::other: return "other";
    }
    return "other";
}

Source source_from_string(std::string_view name) {
    if (name == "web_corpus") return Source::web_corpus;
    if (name == "wikipedia") return Source::wikipedia;
    if (name == "other") return Source::other;
    throw InvalidArgument("unknown source tag \"" + std::string(name) +
                          "\" (expected web_corpus, wikipedia or other)");
}

std::filesystem::path CorpusManifest::shard_path(size_t index) const {
    return base_dir / shards.at(index).path;
}

void CorpusManifest::save(const std::filesystem::path& file) const {
    json shard_list = json::array();
    for (const ShardInfo& shard : shards)
        shard_list.push_back({{"path", shard.path},
                              {"documents", shard.document_count},
                              {"bytes", shard.byte_count}});
    json doc = {
        {"format_version", kManifestFormatVersion},
        {"shards", std::move(shard_list)},
        {"total_documents", total_documents},
        {"total_bytes", total_bytes},
        {"dedup_fingerprint_count", dedup_fingerprint_count},
        {"undersized", undersized},
        {"rejects",
         {{"invalid_utf8", rejects.invalid_utf8},
          {"malformed", rejects.malformed},
          {"missing_text", rejects.missing_text},
          {"duplicate_id", rejects.duplicate_id}}},
    };
    if (shuffle_seed) doc["shuffle_seed"] = *shuffle_seed;

    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("write failed for " + file.string());
}

CorpusManifest CorpusManifest::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + file.string());

    json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ParseError("invalid manifest JSON in " + file.string());
    if (doc.value("format_version", -1) != kManifestFormatVersion)
        throw ParseError("unsupported manifest format_version in " + file.string());

    CorpusManifest manifest;
    manifest.base_dir = file.parent_path();
    for (const json& entry : doc.value("shards", json::array())) {
        ShardInfo shard;
        shard.path = entry.value("path", std::string());
        shard.document_count = entry.value("documents", uint64_t(0));
        shard.byte_count = entry.value("bytes", uint64_t(0));
        if (shard.path.empty()) throw ParseError("manifest shard entry missing path");
        manifest.shards.push_back(std::move(shard));
    }
    manifest.total_documents = doc.value("total_documents", uint64_t(0));
    manifest.total_bytes = doc.value("total_bytes", uint64_t(0));
    manifest.dedup_fingerprint_count = doc.value("dedup_fingerprint_count", uint64_t(0));
    manifest.undersized = doc.value("undersized", false);
    if (doc.contains("shuffle_seed")) manifest.shuffle_seed = doc["shuffle_seed"].get<uint64_t>();
    if (doc.contains("rejects")) {
        const json& r = doc["rejects"];
        manifest.rejects.invalid_utf8 = r.value("invalid_utf8", uint64_t(0));
        manifest.rejects.malformed = r.value("malformed", uint64_t(0));
        manifest.rejects.missing_text = r.value("missing_text", uint64_t(0));
        manifest.rejects.duplicate_id = r.value("duplicate_id", uint64_t(0));
    }

    uint64_t shard_docs = 0, shard_bytes = 0;
    for (const ShardInfo& shard : manifest.shards) {
        shard_docs += shard.document_count;
        shard_bytes += shard.byte_count;
    }
    if (shard_docs != manifest.total_documents || shard_bytes != manifest.total_bytes)
        throw ParseError("manifest totals disagree with its shard list in " + file.string());
    return manifest;
}

} // namespace lmprep::corpus
