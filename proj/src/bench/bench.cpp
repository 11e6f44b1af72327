#include "lmprep/bench/bench.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lmprep/util/log.hpp"
#include "lmprep/util/unicode.hpp"

namespace lmprep::bench {

namespace {

using nlohmann::json;

// Split files land in directories that may not exist yet.
std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

// first-line BOM and trailing-CR tolerant getline
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
        ++lineno_;
        if (lineno_ == 1 && line.size() >= 3 && uint8_t(line[0]) == 0xEF &&
            uint8_t(line[1]) == 0xBB && uint8_t(line[2]) == 0xBF)
            line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    uint64_t lineno() const { return lineno_; }

  private:
    std::filesystem::path path_;
    std::ifstream in_;
    uint64_t lineno_ = 0;
};

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

// "O" or "B-/I-" plus a nonempty type; anything else is a format error,
// not a sequencing violation
bool tag_syntax_ok(const std::string& tag) {
    if (tag == "O") return true;
    if (tag.size() < 3) return false;
    if (tag[0] != 'B' && tag[0] != 'I') return false;
    return tag[1] == '-';
}

std::string_view tag_type(const std::string& tag) {
    return tag == "O" ? std::string_view{} : std::string_view(tag).substr(2);
}

} // namespace

std::string_view to_string(Polarity p) {
    switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::neutral: return "neutral";
    case Polarity::negative: return "negative";
    }
    return "neutral";
}

Polarity polarity_from_string(std::string_view name) {
    if (name == "positive") return Polarity::positive;
    if (name == "neutral") return Polarity::neutral;
    if (name == "negative") return Polarity::negative;
    throw InvalidArgument("unknown sentiment label \"" + std::string(name) + "\"");
}

void SplitSpec::validate() const {
    auto in_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_unit(train_fraction) || !in_unit(valid_fraction) || !in_unit(test_fraction))
        throw InvalidArgument("split fractions must lie strictly between 0 and 1");
    double sum = train_fraction + valid_fraction + test_fraction;
    if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9)
        throw InvalidArgument("split fractions must sum to 1");
}

std::vector<LabeledText> load_sentiment_tsv(const std::filesystem::path& path) {
    LineReader lines(path);
    std::vector<LabeledText> out;
    std::string line;
    while (lines.next(line)) {
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw ParseError("expected exactly two tab-separated columns in " + path.string(),
                             int64_t(lines.lineno()));
        std::string_view text = std::string_view(line).substr(0, tab);
        std::string_view label = std::string_view(line).substr(tab + 1);
        if (!util::utf8_valid(text))
            throw ParseError("text column is not valid UTF-8 in " + path.string(),
                             int64_t(lines.lineno()));
        LabeledText sample;
        try {
            sample.label = polarity_from_string(label);
        } catch (const InvalidArgument& e) {
            throw ParseError(std::string(e.what()) + " in " + path.string(),
                             int64_t(lines.lineno()));
        }
        sample.tokens = split_whitespace(text);
        if (sample.tokens.empty())
            throw ParseError("empty text column in " + path.string(), int64_t(lines.lineno()));
        out.push_back(std::move(sample));
    }
    return out;
}

LeakageReport audit_leakage(
    const std::vector<std::pair<std::string, const std::vector<LabeledText>*>>& splits) {
    struct Sightings {
        std::vector<std::pair<std::string, size_t>> where;
        std::vector<bool> splits_seen;
    };
    std::unordered_map<std::string, Sightings> by_text;
    for (size_t s = 0; s < splits.size(); ++s) {
        const auto& [name, data] = splits[s];
        for (size_t row = 0; row < data->size(); ++row) {
            Sightings& sight = by_text[join_tokens((*data)[row].tokens)];
            sight.splits_seen.resize(splits.size(), false);
            sight.splits_seen[s] = true;
            sight.where.emplace_back(name, row);
        }
    }
    LeakageReport report;
    for (auto& [text, sight] : by_text) {
        int distinct = 0;
        for (bool seen : sight.splits_seen) distinct += seen ? 1 : 0;
        if (distinct >= 2)
            report.collisions.push_back(LeakageCollision{text, std::move(sight.where)});
    }
    // map iteration order is unspecified; fix the report order
    std::sort(report.collisions.begin(), report.collisions.end(),
              [](const LeakageCollision& a, const LeakageCollision& b) { return a.text < b.text; });
    return report;
}

std::vector<size_t> bio_violations(const std::vector<std::string>& tags) {
    std::vector<size_t> out;
    for (size_t i = 0; i < tags.size(); ++i) {
        const std::string& tag = tags[i];
        if (tag.empty() || tag[0] != 'I') continue;
        bool headed = i > 0 && !tags[i - 1].empty() &&
                      (tags[i - 1][0] == 'B' || tags[i - 1][0] == 'I') &&
                      tag_type(tags[i - 1]) == tag_type(tag);
        if (!headed) out.push_back(i);
    }
    return out;
}

void bio_repair(std::vector<std::string>& tags) {
    for (size_t i : bio_violations(tags)) tags[i][0] = 'B';
}

ConllData load_conll(const std::filesystem::path& path, bool repair) {
    LineReader lines(path);
    ConllData data;
    data.repaired = repair;
    TaggedSentence current;
    std::string line;

    auto flush_sentence = [&] {
        if (current.tokens.empty()) return;
        size_t sentence_index = data.sentences.size();
        for (size_t pos : bio_violations(current.tags))
            data.violations.push_back(BioViolation{sentence_index, pos, current.tags[pos]});
        if (repair) bio_repair(current.tags);
        data.sentences.push_back(std::move(current));
        current = TaggedSentence{};
    };

    while (lines.next(line)) {
        if (line.empty()) {
            flush_sentence();
            continue;
        }
        std::vector<std::string> cols = split_whitespace(line);
        if (cols.size() != 2)
            throw ParseError("expected two columns (token, tag) in " + path.string() + " but got " +
                                 std::to_string(cols.size()),
                             int64_t(lines.lineno()));
        if (!util::utf8_valid(cols[0]))
            throw ParseError("token is not valid UTF-8 in " + path.string(),
                             int64_t(lines.lineno()));
        if (!tag_syntax_ok(cols[1]))
            throw ParseError("malformed BIO tag \"" + cols[1] + "\" in " + path.string(),
                             int64_t(lines.lineno()));
        current.tokens.push_back(std::move(cols[0]));
        current.tags.push_back(std::move(cols[1]));
    }
    flush_sentence();

    if (!data.violations.empty())
        LMPREP_LOG_WARN("%s: %zu BIO sequencing violation(s)%s", path.string().c_str(),
                        data.violations.size(), repair ? ", repaired in memory" : "");
    return data;
}

void save_conll(const std::filesystem::path& path, const std::vector<TaggedSentence>& sentences) {
    std::ofstream out = open_for_write(path);
    for (size_t s = 0; s < sentences.size(); ++s) {
        const TaggedSentence& sentence = sentences[s];
        if (sentence.tokens.size() != sentence.tags.size())
            throw InvalidArgument("sentence " + std::to_string(s) +
                                  " has mismatched token and tag counts");
        for (size_t i = 0; i < sentence.tokens.size(); ++i)
            out << sentence.tokens[i] << '\t' << sentence.tags[i] << '\n';
        if (s + 1 < sentences.size()) out << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

void save_labeled_jsonl(const std::filesystem::path& path, const std::vector<LabeledText>& data) {
    std::ofstream out = open_for_write(path);
    for (const LabeledText& sample : data) {
        json record = {{"tokens", sample.tokens}, {"label", to_string(sample.label)}};
        out << record.dump() << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<LabeledText> load_labeled_jsonl(const std::filesystem::path& path) {
    LineReader lines(path);
    std::vector<LabeledText> out;
    std::string line;
    while (lines.next(line)) {
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("tokens") ||
            !record["tokens"].is_array() || !record.contains("label") ||
            !record["label"].is_string())
            throw ParseError("malformed sample in " + path.string(), int64_t(lines.lineno()));
        LabeledText sample;
        sample.tokens = record["tokens"].get<std::vector<std::string>>();
        sample.label = polarity_from_string(record["label"].get<std::string>());
        out.push_back(std::move(sample));
    }
    return out;
}

void save_tagged_jsonl(const std::filesystem::path& path,
                       const std::vector<TaggedSentence>& data) {
    std::ofstream out = open_for_write(path);
    for (const TaggedSentence& sentence : data) {
        json record = {{"tokens", sentence.tokens}, {"tags", sentence.tags}};
        out << record.dump() << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TaggedSentence> load_tagged_jsonl(const std::filesystem::path& path) {
    LineReader lines(path);
    std::vector<TaggedSentence> out;
    std::string line;
    while (lines.next(line)) {
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("tokens") ||
            !record["tokens"].is_array() || !record.contains("tags") ||
            !record["tags"].is_array())
            throw ParseError("malformed sentence in " + path.string(), int64_t(lines.lineno()));
        TaggedSentence sentence;
        sentence.tokens = record["tokens"].get<std::vector<std::string>>();
        sentence.tags = record["tags"].get<std::vector<std::string>>();
        if (sentence.tokens.size() != sentence.tags.size())
            throw ParseError("token and tag counts differ in " + path.string(),
                             int64_t(lines.lineno()));
        out.push_back(std::move(sentence));
    }
    return out;
}

void save_split_manifest(const std::filesystem::path& path, const SplitSpec& spec,
                         const std::map<std::string, uint64_t>& counts) {
    json doc = {
        {"fractions",
         {{"train", spec.train_fraction},
          {"valid", spec.valid_fraction},
          {"test", spec.test_fraction}}},
        {"seed", spec.seed},
        {"official_test", spec.official_test},
        {"counts", counts},
    };
    std::ofstream out = open_for_write(path);
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace lmprep::bench
