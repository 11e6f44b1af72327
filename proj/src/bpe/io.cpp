#include "lmprep/bpe/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lmprep/bpe/pre_split.hpp"
#include "lmprep/error.hpp"

namespace lmprep::bpe {

namespace {

constexpr const char* kVocabFile = "vocab.json";
constexpr const char* kMergesFile = "merges.txt";
constexpr const char* kMetaFile = "meta.json";
constexpr const char* kMergesHeader = "#version: v1";
constexpr int kMetaFormatVersion = 1;

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path.string());
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

json parse_json_file(const std::filesystem::path& path) {
    std::string text = read_file(path);
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) throw ParseError("invalid JSON in " + path.string());
    return parsed;
}

} // namespace

void save_model(const std::filesystem::path& dir, const MergeTable& merges,
                const Vocabulary& vocab, const ModelMeta& meta) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    json vocab_json = json::object();
    for (const auto& [token, id] : vocab.token_to_id) vocab_json[token] = id;
    write_file(dir / kVocabFile, vocab_json.dump());

    std::string merges_text;
    merges_text.reserve(merges.merges.size() * 12 + 16);
    merges_text += kMergesHeader;
    merges_text += '\n';
    for (const auto& [left, right] : merges.merges) {
        merges_text += left;
        merges_text += ' ';
        merges_text += right;
        merges_text += '\n';
    }
    write_file(dir / kMergesFile, merges_text);

    json meta_json = {
        {"format_version", kMetaFormatVersion},
        {"vocab_size", meta.vocab_size},
        {"min_pair_frequency", meta.min_pair_frequency},
        {"pre_split_version", meta.pre_split_version},
        {"corpus_fingerprint", meta.corpus_fingerprint},
        {"reached_target", meta.reached_target},
        {"special_tokens",
         {{kBosToken, vocab.specials.bos},
          {kPadToken, vocab.specials.pad},
          {kEosToken, vocab.specials.eos},
          {kUnkToken, vocab.specials.unk},
          {kMaskToken, vocab.specials.mask}}},
    };
    write_file(dir / kMetaFile, meta_json.dump(2) + "\n");
}

LoadedModel load_model(const std::filesystem::path& dir) {
    LoadedModel model;

    // merges.txt is the source of truth for the token inventory
    {
        std::string text = read_file(dir / kMergesFile);
        std::istringstream lines(text);
        std::string line;
        int lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (lineno == 1) {
                if (line != kMergesHeader)
                    throw ParseError("unsupported merges file header: expected \"" +
                                         std::string(kMergesHeader) + "\"",
                                     lineno);
                continue;
            }
            size_t space = line.find(' ');
            if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
                line.find(' ', space + 1) != std::string::npos)
                throw ParseError("malformed merge line", lineno);
            model.merges.merges.emplace_back(line.substr(0, space), line.substr(space + 1));
        }
        if (lineno == 0) throw ParseError("empty merges file", 1);
    }

    Vocabulary expected;
    try {
        expected = Vocabulary::build(model.merges);
    } catch (const Error& e) {
        throw ParseError("merges file implies an invalid vocabulary: " + std::string(e.what()));
    }

    // vocab.json must agree with what the merge list implies
    {
        json vocab_json = parse_json_file(dir / kVocabFile);
        if (!vocab_json.is_object())
            throw ParseError("vocabulary file must be a JSON object of token to id");
        if (vocab_json.size() != expected.token_to_id.size())
            throw ParseError("vocabulary file has " + std::to_string(vocab_json.size()) +
                             " tokens but the merges imply " +
                             std::to_string(expected.token_to_id.size()));
        for (const auto& [token, id] : vocab_json.items()) {
            if (!id.is_number_integer())
                throw ParseError("vocabulary id for \"" + token + "\" is not an integer");
            auto it = expected.token_to_id.find(token);
            if (it == expected.token_to_id.end() || it->second != id.get<int32_t>())
                throw ParseError("vocabulary file does not match the merges file at token \"" +
                                 token + "\"");
        }
    }
    model.vocab = std::move(expected);

    {
        json meta_json = parse_json_file(dir / kMetaFile);
        if (!meta_json.is_object()) throw ParseError("metadata file must be a JSON object");
        if (meta_json.value("format_version", -1) != kMetaFormatVersion)
            throw ParseError("unsupported metadata format_version");
        model.meta.vocab_size = meta_json.value("vocab_size", int64_t(0));
        model.meta.min_pair_frequency = meta_json.value("min_pair_frequency", int64_t(0));
        model.meta.pre_split_version = meta_json.value("pre_split_version", std::string());
        model.meta.corpus_fingerprint = meta_json.value("corpus_fingerprint", std::string());
        model.meta.reached_target = meta_json.value("reached_target", true);

        if (model.meta.pre_split_version != kPreSplitVersion)
            throw ParseError("model was built with pre-splitter \"" +
                             model.meta.pre_split_version + "\" but this build implements \"" +
                             std::string(kPreSplitVersion) + "\"");
        if (model.meta.vocab_size != int64_t(model.vocab.size()))
            throw ParseError("metadata vocab_size " + std::to_string(model.meta.vocab_size) +
                             " does not match the actual vocabulary size " +
                             std::to_string(model.vocab.size()));
    }

    return model;
}

} // namespace lmprep::bpe
