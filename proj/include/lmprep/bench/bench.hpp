#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmprep/error.hpp"
#include "lmprep/util/rng.hpp"

namespace lmprep::bench {

enum class Polarity { positive = 0, neutral = 1, negative = 2 };
constexpr int kPolarityClasses = 3;

std::string_view to_string(Polarity p);
Polarity polarity_from_string(std::string_view name); // throws InvalidArgument

// One sentiment sample. Tokens are the pre-tokenized words of the text.
struct LabeledText {
    std::vector<std::string> tokens;
    Polarity label = Polarity::neutral;
    bool operator==(const LabeledText&) const = default;
};

// One NER sentence with aligned BIO tags.
struct TaggedSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
    bool operator==(const TaggedSentence&) const = default;
};

// How to partition a dataset. Fractions apply to the whole set; when the
// test portion is an official release, carve_validation splits only the
// remaining train pool using valid/(train+valid).
struct SplitSpec {
    double train_fraction = 0.72;
    double valid_fraction = 0.08;
    double test_fraction = 0.20;
    uint64_t seed = 0;
    bool official_test = false;
    void validate() const;
};

// ---- sentiment TSV ----

// Reads "text<TAB>label" rows. Unknown labels, missing columns and empty
// texts are hard failures naming the offending row.
std::vector<LabeledText> load_sentiment_tsv(const std::filesystem::path& path);

// ---- leakage audit ----

struct LeakageCollision {
    std::string text; // canonical space-joined form
    std::vector<std::pair<std::string, size_t>> occurrences; // (split name, row index)
};

struct LeakageReport {
    std::vector<LeakageCollision> collisions; // texts present in 2+ splits
    bool clean() const { return collisions.empty(); }
};

// Flags texts that appear, byte-identically, in more than one split.
LeakageReport audit_leakage(
    const std::vector<std::pair<std::string, const std::vector<LabeledText>*>>& splits);

// ---- CoNLL ----

struct BioViolation {
    size_t sentence = 0; // index in file order
    size_t position = 0; // token index within the sentence
    std::string tag;     // the offending tag as read
};

struct ConllData {
    std::vector<TaggedSentence> sentences;
    std::vector<BioViolation> violations;
    bool repaired = false;
};

// Reads two-column lines (token, whitespace, BIO tag) with blank-line
// sentence boundaries. Tag-syntax and column errors are hard failures;
// BIO sequencing violations are reported, and promoted I -> B when
// repair is requested.
ConllData load_conll(const std::filesystem::path& path, bool repair = false);
void save_conll(const std::filesystem::path& path, const std::vector<TaggedSentence>& sentences);

// Sequencing check usable outside file loading. Returns the violating
// positions within one sentence.
std::vector<size_t> bio_violations(const std::vector<std::string>& tags);
void bio_repair(std::vector<std::string>& tags); // promote unheaded I to B

// ---- JSONL split output ----

void save_labeled_jsonl(const std::filesystem::path& path, const std::vector<LabeledText>& data);
std::vector<LabeledText> load_labeled_jsonl(const std::filesystem::path& path);
void save_tagged_jsonl(const std::filesystem::path& path, const std::vector<TaggedSentence>& data);
std::vector<TaggedSentence> load_tagged_jsonl(const std::filesystem::path& path);

void save_split_manifest(const std::filesystem::path& path, const SplitSpec& spec,
                         const std::map<std::string, uint64_t>& counts);

// ---- splitting ----

namespace detail {
// Seeded permutation of [0, n); selected index sets keep original order.
inline std::vector<size_t> split_permutation(size_t n, uint64_t seed) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));
    util::seeded_shuffle(order, seed);
    return order;
}
} // namespace detail

// Pulls the validation share out of an already test-free training pool.
// The carve size is round(valid/(train+valid) * n); both outputs preserve
// the input's relative order.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> carve_validation(const std::vector<T>& train_pool,
                                                           const SplitSpec& spec) {
    spec.validate();
    const size_t n = train_pool.size();
    double share = spec.valid_fraction / (spec.train_fraction + spec.valid_fraction);
    size_t n_valid = size_t(std::llround(share * double(n)));

    std::vector<size_t> order = detail::split_permutation(n, spec.seed);
    std::vector<bool> is_valid(n, false);
    for (size_t i = 0; i < n_valid; ++i) is_valid[order[i]] = true;

    std::pair<std::vector<T>, std::vector<T>> out;
    out.first.reserve(n - n_valid);
    out.second.reserve(n_valid);
    for (size_t i = 0; i < n; ++i)
        (is_valid[i] ? out.second : out.first).push_back(train_pool[i]);
    return out;
}

template <typename T>
struct ThreeWaySplit {
    std::vector<T> train, valid, test;
};

// Full random partition: test = round(test_fraction * n) drawn first, the
// validation share then carved from the remainder, everything keeping
// original relative order.
template <typename T>
ThreeWaySplit<T> split_three_way(const std::vector<T>& data, const SplitSpec& spec) {
    spec.validate();
    if (spec.official_test)
        throw InvalidArgument("official_test split has no test fraction to draw; "
                              "use carve_validation on the train pool");
    const size_t n = data.size();
    size_t n_test = size_t(std::llround(spec.test_fraction * double(n)));
    double share = spec.valid_fraction / (spec.train_fraction + spec.valid_fraction);
    size_t n_valid = size_t(std::llround(share * double(n - n_test)));

    std::vector<size_t> order = detail::split_permutation(n, spec.seed);
    // 0 = train, 1 = valid, 2 = test
    std::vector<uint8_t> bucket(n, 0);
    for (size_t i = 0; i < n_test; ++i) bucket[order[i]] = 2;
    for (size_t i = n_test; i < n_test + n_valid; ++i) bucket[order[i]] = 1;

    ThreeWaySplit<T> out;
    out.train.reserve(n - n_test - n_valid);
    out.valid.reserve(n_valid);
    out.test.reserve(n_test);
    for (size_t i = 0; i < n; ++i) {
        if (bucket[i] == 2)
            out.test.push_back(data[i]);
        else if (bucket[i] == 1)
            out.valid.push_back(data[i]);
        else
            out.train.push_back(data[i]);
    }
    return out;
}

} // namespace lmprep::bench
