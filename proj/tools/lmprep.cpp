// lmprep: one binary exposing the corpus, tokenizer, benchmark, metrics,
// pretraining-prep and tuning commands. Every subcommand is deterministic
// given its inputs and seeds; timestamps only ever appear in logs.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lmprep/bench/bench.hpp"
#include "lmprep/bpe/io.hpp"
#include "lmprep/bpe/model.hpp"
#include "lmprep/bpe/pre_split.hpp"
#include "lmprep/bpe/text_source.hpp"
#include "lmprep/bpe/trainer.hpp"
#include "lmprep/corpus/corpus.hpp"
#include "lmprep/corpus/manifest_source.hpp"
#include "lmprep/error.hpp"
#include "lmprep/metrics/metrics.hpp"
#include "lmprep/pretrain/prep.hpp"
#include "lmprep/tune/tune.hpp"
#include "lmprep/util/log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Globals {
    uint64_t seed = 0;
    int workers = 1;
    std::string log_level = "info";
};

std::string shell_quote(const std::string& arg) {
    bool plain = !arg.empty() && arg.find_first_of(" \t\"'\\$") == std::string::npos;
    if (plain) return arg;
    std::string quoted = "'";
    for (char c : arg) {
        if (c == '\'')
            quoted += "'\\''";
        else
            quoted += c;
    }
    quoted += "'";
    return quoted;
}

// Logged once per run so any artifact can be traced back to the exact
// invocation that produced it.
void startup(const Globals& g, const std::string& command_line) {
    if (!lmprep::util::set_log_level(g.log_level))
        throw lmprep::InvalidArgument("unknown log level \"" + g.log_level +
                                      "\" (expected debug, info, warn, error or off)");
    LMPREP_LOG_INFO("lmprep %s", kVersion);
    LMPREP_LOG_INFO("invocation: %s", command_line.c_str());
    LMPREP_LOG_INFO("seed=%llu workers=%d log-level=%s", (unsigned long long)g.seed, g.workers,
                    g.log_level.c_str());
}

void emit(const json& report) { std::cout << report.dump(2) << "\n"; }

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw lmprep::IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw lmprep::IoError("short write to " + path.string());
}

// Line-oriented reader over a file or stdin ("-"), with BOM and CRLF
// stripping so Windows-edited inputs behave.
class LineInput {
  public:
    explicit LineInput(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw lmprep::IoError("cannot open " + path + " for reading");
            in_ = &file_;
        } else {
            in_ = &std::cin;
        }
    }

    bool next(std::string& line) {
        if (!std::getline(*in_, line)) return false;
        if (first_) {
            first_ = false;
            if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

  private:
    std::ifstream file_;
    std::istream* in_ = nullptr;
    bool first_ = true;
};

class Output {
  public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            fs::path p(path);
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            file_.open(p, std::ios::binary | std::ios::trunc);
            if (!file_) throw lmprep::IoError("cannot open " + path + " for writing");
            out_ = &file_;
            path_ = path;
        } else {
            out_ = &std::cout;
        }
    }

    std::ostream& stream() { return *out_; }

    void finish() {
        out_->flush();
        if (!*out_) throw lmprep::IoError("short write to " + (path_.empty() ? "stdout" : path_));
    }

  private:
    std::ofstream file_;
    std::ostream* out_ = nullptr;
    std::string path_;
};

// Streams a plain text file as one document per non-empty line, for
// tokenizer training without a corpus manifest.
class LineFileTextSource : public lmprep::bpe::TextSource {
  public:
    explicit LineFileTextSource(fs::path path) : path_(std::move(path)) { open(); }

    void reset() override { open(); }

    std::optional<std::string> next() override {
        std::string line;
        while (std::getline(in_, line)) {
            if (first_) {
                first_ = false;
                if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            }
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            return line;
        }
        return std::nullopt;
    }

  private:
    void open() {
        in_ = std::ifstream(path_, std::ios::binary);
        if (!in_) throw lmprep::IoError("cannot open " + path_.string() + " for reading");
        first_ = true;
    }

    fs::path path_;
    std::ifstream in_;
    bool first_ = true;
};

json manifest_summary(const lmprep::corpus::CorpusManifest& m, const fs::path& out_dir) {
    json rejects = {{"invalid_utf8", m.rejects.invalid_utf8},
                    {"malformed", m.rejects.malformed},
                    {"missing_text", m.rejects.missing_text},
                    {"duplicate_id", m.rejects.duplicate_id}};
    json j = {{"manifest", (out_dir / "manifest.json").string()},
              {"documents", m.total_documents},
              {"text_bytes", m.total_bytes},
              {"shards", m.shards.size()},
              {"rejects", rejects}};
    if (m.shuffle_seed) j["shuffle_seed"] = *m.shuffle_seed;
    if (m.dedup_fingerprint_count > 0) j["distinct_texts"] = m.dedup_fingerprint_count;
    if (m.undersized) j["undersized"] = true;
    return j;
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::toupper(c)); });
    return s;
}

std::vector<lmprep::bench::TaggedSentence> load_tagged_any(const fs::path& path) {
    if (path.extension() == ".jsonl") return lmprep::bench::load_tagged_jsonl(path);
    return lmprep::bench::load_conll(path).sentences;
}

std::vector<lmprep::bench::LabeledText> load_labeled_any(const fs::path& path) {
    if (path.extension() == ".jsonl") return lmprep::bench::load_labeled_jsonl(path);
    return lmprep::bench::load_sentiment_tsv(path);
}

// Texts for length statistics: raw lines, the text column of a labeled
// TSV, or space-joined CoNLL tokens.
std::vector<std::string> load_texts(const std::string& path, const std::string& format) {
    std::vector<std::string> texts;
    auto join = [](const std::vector<std::string>& tokens) {
        std::string s;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (i) s += ' ';
            s += tokens[i];
        }
        return s;
    };
    if (format == "tsv" || (format == "auto" && fs::path(path).extension() == ".tsv")) {
        for (const auto& sample : lmprep::bench::load_sentiment_tsv(path))
            texts.push_back(join(sample.tokens));
    } else if (format == "conll" || (format == "auto" && fs::path(path).extension() == ".conll")) {
        for (const auto& sentence : lmprep::bench::load_conll(path).sentences)
            texts.push_back(join(sentence.tokens));
    } else if (format == "jsonl" || (format == "auto" && fs::path(path).extension() == ".jsonl")) {
        for (const auto& sample : lmprep::bench::load_labeled_jsonl(path))
            texts.push_back(join(sample.tokens));
    } else {
        LineInput in(path);
        std::string line;
        while (in.next(line))
            if (!line.empty()) texts.push_back(line);
    }
    return texts;
}

lmprep::tune::TaskData load_task_data(lmprep::tune::Task task, const fs::path& dir) {
    lmprep::tune::TaskData data;
    data.task = task;
    if (data.is_ner()) {
        data.ner_train = lmprep::bench::load_tagged_jsonl(dir / "train.jsonl");
        data.ner_valid = lmprep::bench::load_tagged_jsonl(dir / "valid.jsonl");
        data.ner_test = lmprep::bench::load_tagged_jsonl(dir / "test.jsonl");
    } else {
        data.cls_train = lmprep::bench::load_labeled_jsonl(dir / "train.jsonl");
        data.cls_valid = lmprep::bench::load_labeled_jsonl(dir / "valid.jsonl");
        data.cls_test = lmprep::bench::load_labeled_jsonl(dir / "test.jsonl");
    }
    data.validate();
    return data;
}

json leakage_json(const lmprep::bench::LeakageReport& report) {
    json collisions = json::array();
    for (const auto& c : report.collisions) {
        json occurrences = json::array();
        for (const auto& [split, row] : c.occurrences)
            occurrences.push_back({{"split", split}, {"row", row}});
        collisions.push_back({{"text", c.text}, {"occurrences", occurrences}});
    }
    return {{"clean", report.clean()}, {"collisions", collisions}};
}

} // namespace

int main(int argc, char** argv) {
    std::string command_line;
    for (int i = 0; i < argc; ++i) {
        if (i) command_line += ' ';
        command_line += shell_quote(argv[i]);
    }

    CLI::App app{"corpus, tokenizer and benchmark preparation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("lmprep ") + kVersion);
    app.set_config("--config", "", "TOML file supplying any of the options below");
    app.get_formatter()->column_width(30);

    Globals g;
    app.add_option("--seed", g.seed, "global random seed; subcommand --seed overrides")
        ->capture_default_str();
    app.add_option("--workers", g.workers, "worker thread cap for all parallel stages (0 = all cores)")
        ->capture_default_str();
    app.add_option("--log-level", g.log_level, "debug, info, warn, error or off")
        ->capture_default_str();

    // ---- corpus ----
    auto* corpus_cmd = app.add_subcommand("corpus", "ingest, dedup, shuffle and sample document corpora");
    corpus_cmd->require_subcommand(1);

    struct {
        std::vector<std::string> inputs;
        std::string out_dir;
        std::string format = "auto";
        std::string source = "other";
        uint64_t shard_bytes = 512ull << 20;
    } ingest_args;
    auto* ingest_cmd = corpus_cmd->add_subcommand(
        "ingest", "convert JSONL or blank-line-separated text files into sharded canonical JSONL");
    ingest_cmd->add_option("inputs", ingest_args.inputs, "input files")->required()->expected(-1);
    ingest_cmd->add_option("--out-dir", ingest_args.out_dir, "output directory")->required();
    ingest_cmd->add_option("--format", ingest_args.format, "auto, jsonl or text")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "jsonl", "text"}));
    ingest_cmd->add_option("--source", ingest_args.source, "source tag for records that carry none")
        ->capture_default_str()
        ->check(CLI::IsMember({"web_corpus", "wikipedia", "other"}));
    ingest_cmd->add_option("--shard-bytes", ingest_args.shard_bytes, "text bytes per output shard")
        ->capture_default_str();
    ingest_cmd->callback([&] {
        startup(g, command_line);
        lmprep::corpus::IngestOptions options;
        options.default_source = lmprep::corpus::source_from_string(ingest_args.source);
        options.format = ingest_args.format == "jsonl" ? lmprep::corpus::InputFormat::jsonl
                         : ingest_args.format == "text" ? lmprep::corpus::InputFormat::text
                                                        : lmprep::corpus::InputFormat::auto_detect;
        options.shard_bytes = ingest_args.shard_bytes;
        options.workers = g.workers;
        std::vector<fs::path> inputs(ingest_args.inputs.begin(), ingest_args.inputs.end());
        auto manifest = lmprep::corpus::ingest(inputs, ingest_args.out_dir, options);
        emit(manifest_summary(manifest, ingest_args.out_dir));
    });

    struct {
        std::string manifest;
        std::string out_dir;
        uint64_t shard_bytes = 512ull << 20;
    } dedup_args;
    auto* dedup_cmd = corpus_cmd->add_subcommand(
        "dedup", "drop every document whose text (modulo trailing whitespace) was seen before");
    dedup_cmd->add_option("manifest", dedup_args.manifest, "corpus manifest.json")->required();
    dedup_cmd->add_option("--out-dir", dedup_args.out_dir, "output directory")->required();
    dedup_cmd->add_option("--shard-bytes", dedup_args.shard_bytes, "text bytes per output shard")
        ->capture_default_str();
    dedup_cmd->callback([&] {
        startup(g, command_line);
        auto input = lmprep::corpus::CorpusManifest::load(dedup_args.manifest);
        auto manifest = lmprep::corpus::dedup_exact(input, dedup_args.out_dir,
                                                    dedup_args.shard_bytes, g.workers);
        json j = manifest_summary(manifest, dedup_args.out_dir);
        j["removed"] = input.total_documents - manifest.total_documents;
        emit(j);
    });

    struct {
        std::string manifest;
        std::string out_dir;
        uint64_t seed = 0;
        uint64_t shard_bytes = 512ull << 20;
    } shuffle_args;
    auto* shuffle_cmd =
        corpus_cmd->add_subcommand("shuffle", "rewrite the corpus in seeded uniform random order");
    shuffle_cmd->add_option("manifest", shuffle_args.manifest, "corpus manifest.json")->required();
    shuffle_cmd->add_option("--out-dir", shuffle_args.out_dir, "output directory")->required();
    auto* shuffle_seed_opt = shuffle_cmd->add_option("--seed", shuffle_args.seed, "shuffle seed");
    shuffle_cmd->add_option("--shard-bytes", shuffle_args.shard_bytes, "text bytes per output shard")
        ->capture_default_str();
    shuffle_cmd->callback([&] {
        startup(g, command_line);
        uint64_t seed = shuffle_seed_opt->count() ? shuffle_args.seed : g.seed;
        auto input = lmprep::corpus::CorpusManifest::load(shuffle_args.manifest);
        auto manifest = lmprep::corpus::shuffle(input, seed, shuffle_args.out_dir,
                                                shuffle_args.shard_bytes, g.workers);
        emit(manifest_summary(manifest, shuffle_args.out_dir));
    });

    struct {
        std::string manifest;
        std::string out_dir;
        uint64_t target_bytes = 0;
        uint64_t seed = 0;
        uint64_t shard_bytes = 512ull << 20;
    } sample_args;
    auto* sample_cmd = corpus_cmd->add_subcommand(
        "sample", "draw documents in seeded order until a text-byte budget is reached");
    sample_cmd->add_option("manifest", sample_args.manifest, "corpus manifest.json")->required();
    sample_cmd->add_option("--out-dir", sample_args.out_dir, "output directory")->required();
    sample_cmd->add_option("--target-bytes", sample_args.target_bytes, "text bytes to draw")
        ->required();
    auto* sample_seed_opt = sample_cmd->add_option("--seed", sample_args.seed, "sampling seed");
    sample_cmd->add_option("--shard-bytes", sample_args.shard_bytes, "text bytes per output shard")
        ->capture_default_str();
    sample_cmd->callback([&] {
        startup(g, command_line);
        uint64_t seed = sample_seed_opt->count() ? sample_args.seed : g.seed;
        auto input = lmprep::corpus::CorpusManifest::load(sample_args.manifest);
        auto manifest =
            lmprep::corpus::sample_bytes(input, sample_args.target_bytes, seed,
                                         sample_args.out_dir, sample_args.shard_bytes, g.workers);
        emit(manifest_summary(manifest, sample_args.out_dir));
    });

    // ---- bpe ----
    auto* bpe_cmd = app.add_subcommand("bpe", "train and apply byte-level BPE tokenizers");
    bpe_cmd->require_subcommand(1);

    struct {
        std::string input;
        std::string out_dir;
        int32_t vocab_size = 0;
        int64_t min_pair_frequency = 2;
        std::string input_format = "auto";
    } bpe_train_args;
    auto* bpe_train_cmd = bpe_cmd->add_subcommand(
        "train", "train merges on a corpus manifest or a one-document-per-line text file");
    bpe_train_cmd->add_option("input", bpe_train_args.input, "manifest.json or text file")
        ->required();
    bpe_train_cmd->add_option("--out-dir", bpe_train_args.out_dir, "model output directory")
        ->required();
    bpe_train_cmd
        ->add_option("--vocab-size", bpe_train_args.vocab_size,
                     "target vocabulary size including specials and base bytes")
        ->required();
    bpe_train_cmd
        ->add_option("--min-pair-frequency", bpe_train_args.min_pair_frequency,
                     "stop merging below this pair count")
        ->capture_default_str();
    bpe_train_cmd->add_option("--input-format", bpe_train_args.input_format, "auto, manifest or text")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "manifest", "text"}));
    bpe_train_cmd->callback([&] {
        startup(g, command_line);
        bool is_manifest = bpe_train_args.input_format == "manifest" ||
                           (bpe_train_args.input_format == "auto" &&
                            fs::path(bpe_train_args.input).extension() == ".json");
        std::unique_ptr<lmprep::bpe::TextSource> source;
        if (is_manifest)
            source = std::make_unique<lmprep::corpus::ManifestTextSource>(
                lmprep::corpus::CorpusManifest::load(bpe_train_args.input));
        else
            source = std::make_unique<LineFileTextSource>(bpe_train_args.input);

        lmprep::bpe::TrainOptions options;
        options.vocab_size = bpe_train_args.vocab_size;
        options.min_pair_frequency = bpe_train_args.min_pair_frequency;
        options.workers = g.workers;
        auto result = lmprep::bpe::train(*source, options);

        lmprep::bpe::ModelMeta meta;
        meta.vocab_size = result.vocab.size();
        meta.min_pair_frequency = options.min_pair_frequency;
        meta.pre_split_version = lmprep::bpe::kPreSplitVersion;
        meta.corpus_fingerprint = result.corpus_fingerprint;
        meta.reached_target = result.reached_target;
        lmprep::bpe::save_model(bpe_train_args.out_dir, result.merges, result.vocab, meta);

        double mb = double(result.corpus_bytes) / 1e6;
        json j = {{"model_dir", bpe_train_args.out_dir},
                  {"vocab_size", result.vocab.size()},
                  {"merges", result.merges.size()},
                  {"reached_target", result.reached_target},
                  {"documents", result.document_count},
                  {"corpus_bytes", result.corpus_bytes},
                  {"distinct_pretokens", result.distinct_pretokens},
                  {"corpus_fingerprint", result.corpus_fingerprint},
                  {"count_seconds", result.count_seconds},
                  {"merge_seconds", result.merge_seconds}};
        if (result.count_seconds > 0) j["count_mb_per_second"] = mb / result.count_seconds;
        emit(j);
    });

    struct {
        std::string model;
        std::string input = "-";
        std::string output = "-";
        std::string format = "ids";
    } bpe_encode_args;
    auto* bpe_encode_cmd =
        bpe_cmd->add_subcommand("encode", "encode text lines to token ids (one line in, one line out)");
    bpe_encode_cmd->add_option("--model", bpe_encode_args.model, "model directory")->required();
    bpe_encode_cmd->add_option("--input", bpe_encode_args.input, "input file or - for stdin")
        ->capture_default_str();
    bpe_encode_cmd->add_option("--output", bpe_encode_args.output, "output file or - for stdout")
        ->capture_default_str();
    bpe_encode_cmd->add_option("--format", bpe_encode_args.format, "ids, tokens or json")
        ->capture_default_str()
        ->check(CLI::IsMember({"ids", "tokens", "json"}));
    bpe_encode_cmd->callback([&] {
        startup(g, command_line);
        auto model = lmprep::bpe::load_model(bpe_encode_args.model);
        lmprep::bpe::Tokenizer tokenizer(std::move(model.merges), std::move(model.vocab));
        LineInput in(bpe_encode_args.input);
        Output out(bpe_encode_args.output);
        std::string line;
        uint64_t lines = 0, tokens = 0;
        while (in.next(line)) {
            auto seq = tokenizer.encode(line);
            ++lines;
            tokens += seq.size();
            if (bpe_encode_args.format == "ids") {
                for (size_t i = 0; i < seq.ids.size(); ++i)
                    out.stream() << (i ? " " : "") << seq.ids[i];
                out.stream() << "\n";
            } else if (bpe_encode_args.format == "tokens") {
                for (size_t i = 0; i < seq.ids.size(); ++i)
                    out.stream() << (i ? " " : "")
                                 << tokenizer.vocab().id_to_token[size_t(seq.ids[i])];
                out.stream() << "\n";
            } else {
                json offsets = json::array();
                for (auto [b, e] : seq.offsets) offsets.push_back({b, e});
                out.stream() << json{{"ids", seq.ids}, {"offsets", offsets}}.dump() << "\n";
            }
        }
        out.finish();
        LMPREP_LOG_INFO("encoded %llu lines into %llu tokens", (unsigned long long)lines,
                        (unsigned long long)tokens);
    });

    struct {
        std::string model;
        std::string input = "-";
        std::string output = "-";
    } bpe_decode_args;
    auto* bpe_decode_cmd =
        bpe_cmd->add_subcommand("decode", "decode lines of space-separated token ids back to text");
    bpe_decode_cmd->add_option("--model", bpe_decode_args.model, "model directory")->required();
    bpe_decode_cmd->add_option("--input", bpe_decode_args.input, "input file or - for stdin")
        ->capture_default_str();
    bpe_decode_cmd->add_option("--output", bpe_decode_args.output, "output file or - for stdout")
        ->capture_default_str();
    bpe_decode_cmd->callback([&] {
        startup(g, command_line);
        auto model = lmprep::bpe::load_model(bpe_decode_args.model);
        lmprep::bpe::Tokenizer tokenizer(std::move(model.merges), std::move(model.vocab));
        LineInput in(bpe_decode_args.input);
        Output out(bpe_decode_args.output);
        std::string line;
        long lineno = 0;
        while (in.next(line)) {
            ++lineno;
            std::vector<int32_t> ids;
            std::istringstream fields(line);
            std::string field;
            while (fields >> field) {
                try {
                    size_t used = 0;
                    int value = std::stoi(field, &used);
                    if (used != field.size()) throw std::invalid_argument(field);
                    ids.push_back(value);
                } catch (const std::exception&) {
                    throw lmprep::ParseError("not a token id: \"" + field + "\"", lineno);
                }
            }
            out.stream() << tokenizer.decode(ids) << "\n";
        }
        out.finish();
    });

    struct {
        std::string model;
        size_t merges = 10;
    } bpe_inspect_args;
    auto* bpe_inspect_cmd = bpe_cmd->add_subcommand("inspect", "print a model summary as JSON");
    bpe_inspect_cmd->add_option("--model", bpe_inspect_args.model, "model directory")->required();
    bpe_inspect_cmd
        ->add_option("--merges", bpe_inspect_args.merges, "number of leading merges to include")
        ->capture_default_str();
    bpe_inspect_cmd->callback([&] {
        startup(g, command_line);
        auto model = lmprep::bpe::load_model(bpe_inspect_args.model);
        json first = json::array();
        for (size_t i = 0; i < model.merges.size() && i < bpe_inspect_args.merges; ++i)
            first.push_back({model.merges.merges[i].first, model.merges.merges[i].second});
        const auto& sp = model.vocab.specials;
        emit(json{{"vocab_size", model.vocab.size()},
                  {"merges", model.merges.size()},
                  {"specials",
                   {{lmprep::bpe::kBosToken, sp.bos},
                    {lmprep::bpe::kPadToken, sp.pad},
                    {lmprep::bpe::kEosToken, sp.eos},
                    {lmprep::bpe::kUnkToken, sp.unk},
                    {lmprep::bpe::kMaskToken, sp.mask}}},
                  {"pre_split_version", model.meta.pre_split_version},
                  {"min_pair_frequency", model.meta.min_pair_frequency},
                  {"corpus_fingerprint", model.meta.corpus_fingerprint},
                  {"reached_target", model.meta.reached_target},
                  {"first_merges", first}});
    });

    // ---- data ----
    auto* data_cmd = app.add_subcommand("data", "load, split and audit benchmark datasets");
    data_cmd->require_subcommand(1);

    struct {
        std::string input;
        std::string out_dir;
        std::string official_test;
        double train_fraction = 0.72;
        double valid_fraction = 0.08;
        double test_fraction = 0.20;
        uint64_t seed = 0;
    } split_cls_args;
    auto* split_cls_cmd = data_cmd->add_subcommand(
        "split-cls", "split a labeled TSV into train/valid/test JSONL with a leakage audit");
    split_cls_cmd->add_option("input", split_cls_args.input, "text<TAB>label file")->required();
    split_cls_cmd->add_option("--out-dir", split_cls_args.out_dir, "output directory")->required();
    split_cls_cmd->add_option("--official-test", split_cls_args.official_test,
                              "held-out test TSV; only validation is carved from the input");
    split_cls_cmd->add_option("--train-fraction", split_cls_args.train_fraction, "")
        ->capture_default_str();
    split_cls_cmd->add_option("--valid-fraction", split_cls_args.valid_fraction, "")
        ->capture_default_str();
    split_cls_cmd->add_option("--test-fraction", split_cls_args.test_fraction, "")
        ->capture_default_str();
    auto* split_cls_seed_opt = split_cls_cmd->add_option("--seed", split_cls_args.seed, "split seed");
    split_cls_cmd->callback([&] {
        startup(g, command_line);
        lmprep::bench::SplitSpec spec;
        spec.train_fraction = split_cls_args.train_fraction;
        spec.valid_fraction = split_cls_args.valid_fraction;
        spec.test_fraction = split_cls_args.test_fraction;
        spec.seed = split_cls_seed_opt->count() ? split_cls_args.seed : g.seed;
        spec.official_test = !split_cls_args.official_test.empty();
        spec.validate();

        auto samples = lmprep::bench::load_sentiment_tsv(split_cls_args.input);
        std::vector<lmprep::bench::LabeledText> train, valid, test;
        if (spec.official_test) {
            std::tie(train, valid) = lmprep::bench::carve_validation(samples, spec);
            test = lmprep::bench::load_sentiment_tsv(split_cls_args.official_test);
        } else {
            auto three = lmprep::bench::split_three_way(samples, spec);
            train = std::move(three.train);
            valid = std::move(three.valid);
            test = std::move(three.test);
        }

        fs::path out_dir(split_cls_args.out_dir);
        lmprep::bench::save_labeled_jsonl(out_dir / "train.jsonl", train);
        lmprep::bench::save_labeled_jsonl(out_dir / "valid.jsonl", valid);
        lmprep::bench::save_labeled_jsonl(out_dir / "test.jsonl", test);
        std::map<std::string, uint64_t> counts = {
            {"train", train.size()}, {"valid", valid.size()}, {"test", test.size()}};
        lmprep::bench::save_split_manifest(out_dir / "split-manifest.json", spec, counts);

        auto report = lmprep::bench::audit_leakage(
            {{"train", &train}, {"valid", &valid}, {"test", &test}});
        if (!report.clean())
            LMPREP_LOG_WARN("leakage audit found %zu cross-split duplicate texts",
                            report.collisions.size());
        json j = {{"out_dir", split_cls_args.out_dir},
                  {"counts", counts},
                  {"leakage", leakage_json(report)}};
        emit(j);
    });

    struct {
        std::string input;
        std::string out_dir;
        std::string official_test;
        bool repair = false;
        double train_fraction = 0.72;
        double valid_fraction = 0.08;
        double test_fraction = 0.20;
        uint64_t seed = 0;
    } split_ner_args;
    auto* split_ner_cmd = data_cmd->add_subcommand(
        "split-ner", "split a two-column CoNLL file into train/valid/test JSONL");
    split_ner_cmd->add_option("input", split_ner_args.input, "token<TAB>tag file")->required();
    split_ner_cmd->add_option("--out-dir", split_ner_args.out_dir, "output directory")->required();
    split_ner_cmd->add_option("--official-test", split_ner_args.official_test,
                              "held-out test CoNLL; only validation is carved from the input");
    split_ner_cmd->add_flag("--repair", split_ner_args.repair, "promote unheaded I tags to B");
    split_ner_cmd->add_option("--train-fraction", split_ner_args.train_fraction, "")
        ->capture_default_str();
    split_ner_cmd->add_option("--valid-fraction", split_ner_args.valid_fraction, "")
        ->capture_default_str();
    split_ner_cmd->add_option("--test-fraction", split_ner_args.test_fraction, "")
        ->capture_default_str();
    auto* split_ner_seed_opt = split_ner_cmd->add_option("--seed", split_ner_args.seed, "split seed");
    split_ner_cmd->callback([&] {
        startup(g, command_line);
        lmprep::bench::SplitSpec spec;
        spec.train_fraction = split_ner_args.train_fraction;
        spec.valid_fraction = split_ner_args.valid_fraction;
        spec.test_fraction = split_ner_args.test_fraction;
        spec.seed = split_ner_seed_opt->count() ? split_ner_args.seed : g.seed;
        spec.official_test = !split_ner_args.official_test.empty();
        spec.validate();

        auto loaded = lmprep::bench::load_conll(split_ner_args.input, split_ner_args.repair);
        std::vector<lmprep::bench::TaggedSentence> train, valid, test;
        if (spec.official_test) {
            std::tie(train, valid) = lmprep::bench::carve_validation(loaded.sentences, spec);
            test = lmprep::bench::load_conll(split_ner_args.official_test, split_ner_args.repair)
                       .sentences;
        } else {
            auto three = lmprep::bench::split_three_way(loaded.sentences, spec);
            train = std::move(three.train);
            valid = std::move(three.valid);
            test = std::move(three.test);
        }

        fs::path out_dir(split_ner_args.out_dir);
        lmprep::bench::save_tagged_jsonl(out_dir / "train.jsonl", train);
        lmprep::bench::save_tagged_jsonl(out_dir / "valid.jsonl", valid);
        lmprep::bench::save_tagged_jsonl(out_dir / "test.jsonl", test);
        std::map<std::string, uint64_t> counts = {
            {"train", train.size()}, {"valid", valid.size()}, {"test", test.size()}};
        lmprep::bench::save_split_manifest(out_dir / "split-manifest.json", spec, counts);

        emit(json{{"out_dir", split_ner_args.out_dir},
                  {"counts", counts},
                  {"bio_violations", loaded.violations.size()},
                  {"repaired", loaded.repaired}});
    });

    struct {
        std::string train, valid, test;
    } audit_args;
    auto* audit_cmd = data_cmd->add_subcommand(
        "audit", "report texts that appear byte-identically in more than one split");
    audit_cmd->add_option("--train", audit_args.train, "TSV or JSONL split")->required();
    audit_cmd->add_option("--valid", audit_args.valid, "TSV or JSONL split")->required();
    audit_cmd->add_option("--test", audit_args.test, "TSV or JSONL split")->required();
    audit_cmd->callback([&] {
        startup(g, command_line);
        auto train = load_labeled_any(audit_args.train);
        auto valid = load_labeled_any(audit_args.valid);
        auto test = load_labeled_any(audit_args.test);
        auto report = lmprep::bench::audit_leakage(
            {{"train", &train}, {"valid", &valid}, {"test", &test}});
        emit(leakage_json(report));
    });

    struct {
        std::string input;
        std::string out;
        bool repair = false;
    } check_bio_args;
    auto* check_bio_cmd =
        data_cmd->add_subcommand("check-bio", "validate BIO tag sequencing in a CoNLL file");
    check_bio_cmd->add_option("input", check_bio_args.input, "token<TAB>tag file")->required();
    check_bio_cmd->add_flag("--repair", check_bio_args.repair, "promote unheaded I tags to B");
    check_bio_cmd->add_option("--out", check_bio_args.out, "write the (repaired) file here");
    check_bio_cmd->callback([&] {
        startup(g, command_line);
        auto loaded = lmprep::bench::load_conll(check_bio_args.input, check_bio_args.repair);
        json violations = json::array();
        for (const auto& v : loaded.violations)
            violations.push_back({{"sentence", v.sentence}, {"position", v.position}, {"tag", v.tag}});
        if (!check_bio_args.out.empty())
            lmprep::bench::save_conll(check_bio_args.out, loaded.sentences);
        emit(json{{"sentences", loaded.sentences.size()},
                  {"violations", violations},
                  {"repaired", loaded.repaired}});
    });

    // ---- metrics ----
    auto* metrics_cmd = app.add_subcommand("metrics", "score predictions and measure sequence lengths");
    metrics_cmd->require_subcommand(1);

    struct {
        std::string gold, pred;
    } eval_ner_args;
    auto* eval_ner_cmd = metrics_cmd->add_subcommand(
        "eval-ner", "span micro-F1 (and per-type breakdown) of predicted vs gold BIO tags");
    eval_ner_cmd->add_option("--gold", eval_ner_args.gold, "CoNLL or tagged JSONL")->required();
    eval_ner_cmd->add_option("--pred", eval_ner_args.pred, "CoNLL or tagged JSONL")->required();
    eval_ner_cmd->callback([&] {
        startup(g, command_line);
        auto gold = load_tagged_any(eval_ner_args.gold);
        auto pred = load_tagged_any(eval_ner_args.pred);
        if (gold.size() != pred.size())
            throw lmprep::InvalidArgument("gold has " + std::to_string(gold.size()) +
                                          " sentences, predictions have " +
                                          std::to_string(pred.size()));
        size_t repaired_gold = 0, repaired_pred = 0;
        std::vector<std::vector<lmprep::metrics::Span>> gold_spans, pred_spans;
        for (size_t i = 0; i < gold.size(); ++i) {
            if (gold[i].tags.size() != pred[i].tags.size())
                throw lmprep::InvalidArgument("sentence " + std::to_string(i) +
                                              ": gold and predicted tag counts differ");
            auto gt = gold[i].tags;
            auto pt = pred[i].tags;
            repaired_gold += lmprep::bench::bio_violations(gt).size();
            repaired_pred += lmprep::bench::bio_violations(pt).size();
            lmprep::bench::bio_repair(gt);
            lmprep::bench::bio_repair(pt);
            gold_spans.push_back(lmprep::metrics::bio_to_spans(gt));
            pred_spans.push_back(lmprep::metrics::bio_to_spans(pt));
        }
        auto micro = lmprep::metrics::micro_f1_spans(gold_spans, pred_spans);

        std::set<std::string> types;
        for (const auto& spans : gold_spans)
            for (const auto& s : spans) types.insert(s.type);
        for (const auto& spans : pred_spans)
            for (const auto& s : spans) types.insert(s.type);
        json per_type = json::object();
        std::vector<double> type_f1s;
        for (const auto& type : types) {
            auto filter = [&](const std::vector<std::vector<lmprep::metrics::Span>>& all) {
                std::vector<std::vector<lmprep::metrics::Span>> kept(all.size());
                for (size_t i = 0; i < all.size(); ++i)
                    for (const auto& s : all[i])
                        if (s.type == type) kept[i].push_back(s);
                return kept;
            };
            auto f1 = lmprep::metrics::micro_f1_spans(filter(gold_spans), filter(pred_spans));
            per_type[type] = {{"precision", f1.precision},
                              {"recall", f1.recall},
                              {"f1", f1.f1},
                              {"gold_spans", f1.gold_spans},
                              {"predicted_spans", f1.predicted_spans}};
            type_f1s.push_back(f1.f1);
        }
        json j = {{"sentences", gold.size()},
                  {"micro",
                   {{"precision", micro.precision},
                    {"recall", micro.recall},
                    {"f1", micro.f1},
                    {"true_positives", micro.true_positives},
                    {"gold_spans", micro.gold_spans},
                    {"predicted_spans", micro.predicted_spans},
                    {"degenerate", micro.degenerate}}},
                  {"per_type", per_type},
                  {"repaired_gold_tags", repaired_gold},
                  {"repaired_predicted_tags", repaired_pred}};
        if (!type_f1s.empty()) j["macro_over_types"] = lmprep::metrics::unweighted_mean(type_f1s);
        emit(j);
    });

    struct {
        std::string gold, pred;
        int classes = lmprep::bench::kPolarityClasses;
    } eval_cls_args;
    auto* eval_cls_cmd = metrics_cmd->add_subcommand(
        "eval-cls", "macro-F1 of predicted vs gold labels, one label per line");
    eval_cls_cmd->add_option("--gold", eval_cls_args.gold, "label file")->required();
    eval_cls_cmd->add_option("--pred", eval_cls_args.pred, "label file")->required();
    eval_cls_cmd->add_option("--classes", eval_cls_args.classes, "number of classes")
        ->capture_default_str();
    eval_cls_cmd->callback([&] {
        startup(g, command_line);
        auto read_labels = [](const std::string& path) {
            std::vector<int> labels;
            LineInput in(path);
            std::string line;
            long lineno = 0;
            while (in.next(line)) {
                ++lineno;
                if (line.empty()) continue;
                try {
                    size_t used = 0;
                    labels.push_back(std::stoi(line, &used));
                    if (used != line.size()) throw std::invalid_argument(line);
                } catch (const std::exception&) {
                    labels.push_back(int(lmprep::bench::polarity_from_string(line)));
                }
                (void)lineno;
            }
            return labels;
        };
        auto gold = read_labels(eval_cls_args.gold);
        auto pred = read_labels(eval_cls_args.pred);
        auto result = lmprep::metrics::macro_f1(gold, pred, eval_cls_args.classes);
        emit(json{{"samples", gold.size()},
                  {"macro_f1", result.macro},
                  {"per_class_f1", result.per_class_f1},
                  {"degenerate_classes", result.degenerate_classes}});
    });

    struct {
        std::vector<std::string> tokenizers;
        std::string input;
        std::string format = "auto";
    } seqstats_args;
    auto* seqstats_cmd = metrics_cmd->add_subcommand(
        "seqstats", "token length statistics per tokenizer and the padded bucket they imply");
    seqstats_cmd->add_option("--tokenizer", seqstats_args.tokenizers,
                             "model directory (repeatable); omit to count whitespace tokens");
    seqstats_cmd->add_option("--input", seqstats_args.input, "text corpus to measure")->required();
    seqstats_cmd->add_option("--format", seqstats_args.format, "auto, lines, tsv, jsonl or conll")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "lines", "tsv", "jsonl", "conll"}));
    seqstats_cmd->callback([&] {
        startup(g, command_line);
        auto texts = load_texts(seqstats_args.input, seqstats_args.format);
        if (texts.empty()) throw lmprep::InvalidArgument("no texts found in " + seqstats_args.input);
        std::vector<lmprep::metrics::LengthStats> stats;
        json rows = json::array();
        auto add = [&](const std::string& name, const std::vector<int>& lengths) {
            auto s = lmprep::metrics::length_stats(lengths);
            stats.push_back(s);
            rows.push_back({{"tokenizer", name}, {"max", s.max}, {"mean", s.mean}, {"p95", s.p95}});
        };
        if (seqstats_args.tokenizers.empty()) {
            std::vector<int> lengths;
            for (const auto& text : texts) {
                std::istringstream words(text);
                std::string w;
                int n = 0;
                while (words >> w) ++n;
                lengths.push_back(n);
            }
            add("whitespace", lengths);
        } else {
            for (const auto& dir : seqstats_args.tokenizers) {
                auto model = lmprep::bpe::load_model(dir);
                lmprep::bpe::Tokenizer tokenizer(std::move(model.merges), std::move(model.vocab));
                std::vector<int> lengths;
                for (const auto& text : texts) lengths.push_back(int(tokenizer.encode(text).size()));
                add(dir, lengths);
            }
        }
        emit(json{{"texts", texts.size()},
                  {"stats", rows},
                  {"bucket", lmprep::metrics::select_bucket(stats)}});
    });

    // ---- pretrain ----
    auto* pretrain_cmd =
        app.add_subcommand("pretrain", "masked-LM batch preparation, schedules and budgets");
    pretrain_cmd->require_subcommand(1);

    struct {
        std::string model;
        std::string input;
        std::string out = "-";
        int length = 512;
        bool no_separator = false;
    } pack_args;
    auto* pack_cmd = pretrain_cmd->add_subcommand(
        "pack", "encode documents and pack them into fixed-length id sequences");
    pack_cmd->add_option("--model", pack_args.model, "tokenizer model directory")->required();
    pack_cmd->add_option("--input", pack_args.input, "one document per line")->required();
    pack_cmd->add_option("--out", pack_args.out, "JSONL output, one {\"ids\": [...]} per sequence")
        ->capture_default_str();
    pack_cmd->add_option("--length", pack_args.length, "sequence length")->capture_default_str();
    pack_cmd->add_flag("--no-separator", pack_args.no_separator,
                       "concatenate documents without a separator token");
    pack_cmd->callback([&] {
        startup(g, command_line);
        auto model = lmprep::bpe::load_model(pack_args.model);
        lmprep::bpe::Tokenizer tokenizer(std::move(model.merges), std::move(model.vocab));
        std::vector<std::vector<int32_t>> streams;
        {
            LineInput in(pack_args.input);
            std::string line;
            while (in.next(line)) {
                if (line.empty()) continue;
                streams.push_back(tokenizer.encode(line).ids);
            }
        }
        const auto& sp = tokenizer.vocab().specials;
        std::optional<int32_t> separator;
        if (!pack_args.no_separator) separator = sp.eos;
        auto packed = lmprep::pretrain::pack_sequences(streams, pack_args.length, sp.pad, separator);
        Output out(pack_args.out);
        for (const auto& seq : packed.sequences) out.stream() << json{{"ids", seq}}.dump() << "\n";
        out.finish();
        LMPREP_LOG_INFO("packed %zu documents into %zu sequences", streams.size(),
                        packed.sequences.size());
        if (pack_args.out != "-")
            emit(json{{"out", pack_args.out},
                      {"documents", streams.size()},
                      {"sequences", packed.sequences.size()},
                      {"input_tokens", packed.input_tokens},
                      {"separator_tokens", packed.separator_tokens},
                      {"pad_tokens", packed.pad_tokens}});
    });

    struct {
        std::string model;
        std::string input;
        std::string out = "-";
        uint64_t epoch_seed = 0;
        uint64_t seed = 0;
        double mask_probability = 0.15;
        double mask_token_share = 0.8;
        double random_token_share = 0.1;
        double keep_share = 0.1;
    } mask_args;
    auto* mask_cmd = pretrain_cmd->add_subcommand(
        "mask", "apply dynamic masking to packed sequences, emitting targets per sequence");
    mask_cmd->add_option("--model", mask_args.model, "tokenizer model directory")->required();
    mask_cmd->add_option("--input", mask_args.input, "packed JSONL from the pack command")
        ->required();
    mask_cmd->add_option("--out", mask_args.out, "JSONL output")->capture_default_str();
    mask_cmd->add_option("--epoch-seed", mask_args.epoch_seed,
                         "vary per epoch to re-sample the mask pattern")
        ->capture_default_str();
    auto* mask_seed_opt = mask_cmd->add_option("--seed", mask_args.seed, "policy seed");
    mask_cmd->add_option("--mask-probability", mask_args.mask_probability, "")
        ->capture_default_str();
    mask_cmd->add_option("--mask-token-share", mask_args.mask_token_share, "")
        ->capture_default_str();
    mask_cmd->add_option("--random-token-share", mask_args.random_token_share, "")
        ->capture_default_str();
    mask_cmd->add_option("--keep-share", mask_args.keep_share, "")->capture_default_str();
    mask_cmd->callback([&] {
        startup(g, command_line);
        auto model = lmprep::bpe::load_model(mask_args.model);
        lmprep::pretrain::MaskingPolicy policy;
        policy.mask_probability = mask_args.mask_probability;
        policy.mask_token_share = mask_args.mask_token_share;
        policy.random_token_share = mask_args.random_token_share;
        policy.keep_share = mask_args.keep_share;
        policy.seed = mask_seed_opt->count() ? mask_args.seed : g.seed;
        policy.validate();
        lmprep::pretrain::MaskingVocab vocab;
        vocab.vocab_size = model.vocab.size();
        vocab.mask_id = model.vocab.specials.mask;
        vocab.special_ids = model.vocab.specials.ids();
        std::sort(vocab.special_ids.begin(), vocab.special_ids.end());
        vocab.validate();

        LineInput in(mask_args.input);
        Output out(mask_args.out);
        std::string line;
        long lineno = 0;
        uint64_t sequences = 0, selected = 0, to_mask = 0, to_random = 0, kept = 0;
        while (in.next(line)) {
            ++lineno;
            if (line.empty()) continue;
            json row = json::parse(line, nullptr, false);
            if (row.is_discarded() || !row.is_object() || !row.contains("ids") ||
                !row.at("ids").is_array())
                throw lmprep::ParseError("expected {\"ids\": [...]} in " + mask_args.input, lineno);
            std::vector<int32_t> ids = row.at("ids").get<std::vector<int32_t>>();
            auto masked = lmprep::pretrain::apply_masking(ids, policy, mask_args.epoch_seed, vocab);
            ++sequences;
            selected += masked.target_positions.size();
            for (size_t i = 0; i < masked.target_positions.size(); ++i) {
                int32_t now = masked.corrupted[size_t(masked.target_positions[i])];
                if (now == vocab.mask_id)
                    ++to_mask;
                else if (now == masked.target_ids[i])
                    ++kept;
                else
                    ++to_random;
            }
            out.stream() << json{{"ids", masked.corrupted},
                                 {"positions", masked.target_positions},
                                 {"targets", masked.target_ids}}
                                .dump()
                         << "\n";
        }
        out.finish();
        LMPREP_LOG_INFO("masked %llu sequences: %llu positions (%llu mask, %llu random, %llu kept)",
                        (unsigned long long)sequences, (unsigned long long)selected,
                        (unsigned long long)to_mask, (unsigned long long)to_random,
                        (unsigned long long)kept);
        if (mask_args.out != "-")
            emit(json{{"out", mask_args.out},
                      {"sequences", sequences},
                      {"selected_positions", selected},
                      {"mask_replacements", to_mask},
                      {"random_replacements", to_random},
                      {"kept", kept}});
    });

    struct {
        std::string kind = "polynomial";
        int64_t total_steps = 0;
        int64_t warmup_steps = -1;
        double warmup_fraction = 0.10;
        double peak_lr = 0.0;
        double end_lr = 0.0;
        double power = 1.0;
        std::string dump_csv;
        int64_t every = 1;
    } schedule_args;
    auto* schedule_cmd =
        pretrain_cmd->add_subcommand("schedule", "evaluate a warmup/decay learning-rate schedule");
    schedule_cmd->add_option("--kind", schedule_args.kind, "polynomial or linear")
        ->capture_default_str()
        ->check(CLI::IsMember({"polynomial", "linear"}));
    schedule_cmd->add_option("--total-steps", schedule_args.total_steps, "")->required();
    schedule_cmd->add_option("--warmup-steps", schedule_args.warmup_steps,
                             "explicit warmup length; otherwise --warmup-fraction applies");
    schedule_cmd->add_option("--warmup-fraction", schedule_args.warmup_fraction, "")
        ->capture_default_str();
    schedule_cmd->add_option("--peak-lr", schedule_args.peak_lr, "")->required();
    schedule_cmd->add_option("--end-lr", schedule_args.end_lr, "")->capture_default_str();
    schedule_cmd->add_option("--power", schedule_args.power, "decay exponent")
        ->capture_default_str();
    schedule_cmd->add_option("--dump-csv", schedule_args.dump_csv, "write step,lr rows here");
    schedule_cmd->add_option("--every", schedule_args.every, "row stride for --dump-csv")
        ->capture_default_str();
    schedule_cmd->callback([&] {
        startup(g, command_line);
        lmprep::pretrain::ScheduleSpec spec;
        spec.kind = schedule_args.kind == "linear" ? lmprep::pretrain::ScheduleKind::linear
                                                   : lmprep::pretrain::ScheduleKind::polynomial_decay;
        spec.total_steps = schedule_args.total_steps;
        spec.warmup_steps = schedule_args.warmup_steps >= 0
                                ? schedule_args.warmup_steps
                                : int64_t(std::llround(schedule_args.warmup_fraction *
                                                       double(schedule_args.total_steps)));
        spec.peak_lr = schedule_args.peak_lr;
        spec.end_lr = schedule_args.end_lr;
        spec.power = schedule_args.power;
        spec.validate();

        if (!schedule_args.dump_csv.empty()) {
            if (schedule_args.every < 1)
                throw lmprep::InvalidArgument("--every must be at least 1");
            std::ostringstream rows;
            rows << "step,lr\n";
            for (int64_t step = 0; step <= spec.total_steps; step += schedule_args.every)
                rows << step << "," << lmprep::pretrain::lr_at(step, spec) << "\n";
            if ((spec.total_steps % schedule_args.every) != 0)
                rows << spec.total_steps << "," << lmprep::pretrain::lr_at(spec.total_steps, spec)
                     << "\n";
            write_text_file(schedule_args.dump_csv, rows.str());
        }
        json j = {{"kind", schedule_args.kind},
                  {"total_steps", spec.total_steps},
                  {"warmup_steps", spec.warmup_steps},
                  {"peak_lr", spec.peak_lr},
                  {"end_lr", spec.end_lr},
                  {"power", spec.power},
                  {"lr_at_warmup", lmprep::pretrain::lr_at(spec.warmup_steps, spec)},
                  {"lr_at_total", lmprep::pretrain::lr_at(spec.total_steps, spec)}};
        if (!schedule_args.dump_csv.empty()) j["csv"] = schedule_args.dump_csv;
        emit(j);
    });

    struct {
        int64_t total_steps = 0;
        int64_t batch = 0;
        int64_t length = 0;
        int64_t corpus_tokens = 0;
        double epochs = 0.0;
    } epochs_args;
    auto* epochs_cmd = pretrain_cmd->add_subcommand(
        "epochs", "how many corpus passes a step budget covers (or the corpus size a pass count implies)");
    epochs_cmd->add_option("--total-steps", epochs_args.total_steps, "")->required();
    epochs_cmd->add_option("--batch", epochs_args.batch, "sequences per update step")->required();
    epochs_cmd->add_option("--length", epochs_args.length, "tokens per sequence")->required();
    auto* corpus_tokens_opt =
        epochs_cmd->add_option("--corpus-tokens", epochs_args.corpus_tokens, "corpus size in tokens");
    auto* epochs_opt =
        epochs_cmd->add_option("--epochs", epochs_args.epochs, "solve for the corpus size instead");
    epochs_cmd->callback([&] {
        startup(g, command_line);
        if (corpus_tokens_opt->count()) {
            lmprep::pretrain::BudgetSpec budget;
            budget.total_steps = epochs_args.total_steps;
            budget.global_batch_sequences = epochs_args.batch;
            budget.sequence_length = epochs_args.length;
            budget.corpus_tokens = epochs_args.corpus_tokens;
            emit(json{{"epochs", lmprep::pretrain::estimate_epochs(budget)}});
        } else if (epochs_opt->count()) {
            emit(json{{"corpus_tokens", lmprep::pretrain::corpus_tokens_for_epochs(
                                            epochs_args.epochs, epochs_args.total_steps,
                                            epochs_args.batch, epochs_args.length)}});
        } else {
            throw lmprep::InvalidArgument("pass --corpus-tokens or --epochs");
        }
    });

    // ---- tune ----
    auto* tune_cmd = app.add_subcommand("tune", "grid-search fine-tuning protocol and reports");
    tune_cmd->require_subcommand(1);

    struct {
        std::string task;
        std::string trainer = "mock";
        std::string journal;
        std::string data_dir;
        std::vector<int> batch_sizes;
        std::vector<double> learning_rates;
        int max_epochs = 30;
        int patience = 3;
        double warmup_fraction = 0.10;
        uint64_t seed = 0;
        std::vector<uint64_t> replicate_seeds;
    } tune_run_args;
    auto* tune_run_cmd = tune_cmd->add_subcommand(
        "run", "run every grid trial not yet journaled, then select and score the winner");
    tune_run_cmd->add_option("--task", tune_run_args.task, "bmc, nemo or smcd")->required();
    tune_run_cmd->add_option("--trainer", tune_run_args.trainer, "mock or probe")
        ->capture_default_str()
        ->check(CLI::IsMember({"mock", "probe"}));
    tune_run_cmd->add_option("--journal", tune_run_args.journal, "append-only trial journal (JSONL)")
        ->required();
    tune_run_cmd->add_option("--data-dir", tune_run_args.data_dir,
                             "directory holding train/valid/test.jsonl (required for probe)");
    tune_run_cmd->add_option("--batch-sizes", tune_run_args.batch_sizes, "grid batch sizes")
        ->delimiter(',');
    tune_run_cmd->add_option("--learning-rates", tune_run_args.learning_rates, "grid learning rates")
        ->delimiter(',');
    tune_run_cmd->add_option("--max-epochs", tune_run_args.max_epochs, "")->capture_default_str();
    tune_run_cmd->add_option("--patience", tune_run_args.patience, "")->capture_default_str();
    tune_run_cmd->add_option("--warmup-fraction", tune_run_args.warmup_fraction, "")
        ->capture_default_str();
    auto* tune_seed_opt = tune_run_cmd->add_option("--seed", tune_run_args.seed, "shared trial seed");
    tune_run_cmd->add_option("--replicate-seeds", tune_run_args.replicate_seeds,
                             "run every grid point once per listed seed")
        ->delimiter(',');
    tune_run_cmd->callback([&] {
        startup(g, command_line);
        auto task = lmprep::tune::task_from_string(upper(tune_run_args.task));
        lmprep::tune::GridOptions options;
        if (!tune_run_args.batch_sizes.empty()) options.batch_sizes = tune_run_args.batch_sizes;
        if (!tune_run_args.learning_rates.empty())
            options.learning_rates = tune_run_args.learning_rates;
        options.max_epochs = tune_run_args.max_epochs;
        options.patience = tune_run_args.patience;
        options.warmup_fraction = tune_run_args.warmup_fraction;
        options.seed = tune_seed_opt->count() ? tune_run_args.seed : g.seed;
        options.replicate_seeds = tune_run_args.replicate_seeds;
        options.workers = g.workers;

        lmprep::tune::TaskData data;
        data.task = task;
        if (!tune_run_args.data_dir.empty())
            data = load_task_data(task, tune_run_args.data_dir);
        else if (tune_run_args.trainer == "probe")
            throw lmprep::InvalidArgument("the probe trainer needs --data-dir");

        std::unique_ptr<lmprep::tune::Trainer> trainer;
        if (tune_run_args.trainer == "mock")
            trainer = std::make_unique<lmprep::tune::MockTrainer>();
        else
            trainer = std::make_unique<lmprep::tune::LinearProbeTrainer>();

        lmprep::tune::Journal journal(tune_run_args.journal);
        size_t already = journal.completed_trials().size();
        auto result = lmprep::tune::run_grid(task, data, *trainer, options, &journal);
        size_t after = journal.completed_trials().size();

        const auto& best = result.selected;
        emit(json{{"task", std::string(lmprep::tune::to_string(task))},
                  {"trainer", tune_run_args.trainer},
                  {"journal", tune_run_args.journal},
                  {"grid_trials", result.records.size()},
                  {"new_trials", after - already},
                  {"selected",
                   {{"config_hash", best.config.config_hash()},
                    {"batch_size", best.config.batch_size},
                    {"learning_rate", best.config.learning_rate},
                    {"seed", best.config.seed},
                    {"best_epoch", best.best_epoch},
                    {"best_valid", best.best_valid()},
                    {"test_score", best.test_score ? json(*best.test_score) : json()}}},
                  {"wall", lmprep::tune::format_hours_minutes(result.wall_ms_total)}});
    });

    struct {
        std::vector<std::string> journals;
        std::vector<std::string> models;
        std::vector<std::string> size_classes;
        std::string format = "csv";
        std::string out;
    } tune_report_args;
    auto* tune_report_cmd = tune_cmd->add_subcommand(
        "report", "render journaled results as a scores table plus winning hyperparameters");
    tune_report_cmd->add_option("--journal", tune_report_args.journals, "journal file (repeatable)")
        ->required();
    tune_report_cmd->add_option("--model", tune_report_args.models,
                                "row label per journal (default: journal file stem)");
    tune_report_cmd->add_option("--size-class", tune_report_args.size_classes,
                                "rows sharing a class compete for best/second-best marks");
    tune_report_cmd->add_option("--format", tune_report_args.format, "csv or md")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "md"}));
    tune_report_cmd->add_option("--out", tune_report_args.out, "write the table here instead of stdout");
    tune_report_cmd->callback([&] {
        startup(g, command_line);
        if (!tune_report_args.models.empty() &&
            tune_report_args.models.size() != tune_report_args.journals.size())
            throw lmprep::InvalidArgument("--model must be given once per --journal");
        if (!tune_report_args.size_classes.empty() &&
            tune_report_args.size_classes.size() != tune_report_args.journals.size())
            throw lmprep::InvalidArgument("--size-class must be given once per --journal");
        std::vector<lmprep::tune::ModelResults> rows;
        for (size_t i = 0; i < tune_report_args.journals.size(); ++i) {
            lmprep::tune::Journal journal(tune_report_args.journals[i]);
            std::string model = !tune_report_args.models.empty()
                                    ? tune_report_args.models[i]
                                    : fs::path(tune_report_args.journals[i]).stem().string();
            std::string size_class =
                !tune_report_args.size_classes.empty() ? tune_report_args.size_classes[i] : "all";
            rows.push_back(lmprep::tune::results_from_journal(journal, model, size_class));
        }
        std::string table = tune_report_args.format == "md"
                                ? lmprep::tune::render_report_md(rows)
                                : lmprep::tune::render_report_csv(rows);
        if (tune_report_args.out.empty())
            std::cout << table;
        else
            write_text_file(tune_report_args.out, table);
    });

    struct {
        std::vector<std::string> journals;
    } tune_time_args;
    auto* tune_time_cmd =
        tune_cmd->add_subcommand("time", "sum journaled trial wall time per task and overall");
    tune_time_cmd->add_option("--journal", tune_time_args.journals, "journal file (repeatable)")
        ->required();
    tune_time_cmd->callback([&] {
        startup(g, command_line);
        std::vector<std::pair<lmprep::tune::Task, int64_t>> times;
        for (const auto& path : tune_time_args.journals) {
            lmprep::tune::Journal journal(path);
            for (const auto& [hash, record] : journal.completed_trials())
                times.push_back({record.config.task, record.wall_ms});
        }
        auto summary = lmprep::tune::track_wall_time(times);
        json per_task = json::object();
        for (const auto& [task, ms] : summary.per_task_ms)
            per_task[std::string(lmprep::tune::to_string(task))] =
                lmprep::tune::format_hours_minutes(ms);
        emit(json{{"trials", times.size()},
                  {"per_task", per_task},
                  {"total", lmprep::tune::format_hours_minutes(summary.total_ms)}});
    });

    if (argc <= 1) {
        std::cerr << app.help() << std::flush;
        return 2;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n"
                  << "Run 'lmprep --help' (or a subcommand with --help) for usage.\n";
        return 2;
    } catch (const lmprep::ParseError& e) {
        std::cerr << json{{"error", {{"type", "parse"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const lmprep::IoError& e) {
        std::cerr << json{{"error", {{"type", "io"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const lmprep::InvalidArgument& e) {
        std::cerr << json{{"error", {{"type", "invalid_argument"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 1;
    } catch (const lmprep::Error& e) {
        std::cerr << json{{"error", {{"type", "failure"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
    return 0;
}
