#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lmprep::metrics {

// Typed entity span over tokens, end exclusive.
struct Span {
    int start = 0;
    int end = 0;
    std::string type;

    bool operator==(const Span&) const = default;
    bool operator<(const Span& o) const {
        if (start != o.start) return start < o.start;
        if (end != o.end) return end < o.end;
        return type < o.type;
    }
};

struct LengthStats {
    int max = 0;
    double mean = 0.0;
    int p95 = 0; // nearest-rank percentile
};

struct SpanF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    uint64_t true_positives = 0;
    uint64_t gold_spans = 0;
    uint64_t predicted_spans = 0;
    // Both sides empty: scored 1.0 but flagged so callers can exclude it
    // from averages if they want.
    bool degenerate = false;
};

struct MacroF1 {
    std::vector<double> per_class_f1;
    double macro = 0.0;
    // Classes absent from both gold and predictions; each contributes 0.
    std::vector<int> degenerate_classes;
};

// Converts a validated BIO tag sequence ("O", "B-TYPE", "I-TYPE") into
// spans: maximal same-type B..I runs. An I tag without a matching head is
// rejected; run bench::bio_violations / bio_repair first.
std::vector<Span> bio_to_spans(std::span<const std::string> tags);

// Inverse of bio_to_spans for non-overlapping, in-range span sets.
std::vector<std::string> spans_to_bio(std::span<const Span> spans, int length);

// Span micro-F1 pooled over sentences: a true positive is an exact
// (start, end, type) match. Throws InvalidArgument on misaligned sentence
// counts.
SpanF1 micro_f1_spans(const std::vector<std::vector<Span>>& gold,
                      const std::vector<std::vector<Span>>& predicted);

// Unweighted mean of per-class F1 over class ids [0, class_count).
MacroF1 macro_f1(std::span<const int> gold_labels, std::span<const int> predicted_labels,
                 int class_count);

double unweighted_mean(std::span<const double> scores);

// exp-of-mean over per-position negative log-likelihoods. `base` names the
// logarithm base the losses were taken in (natural by default).
double perplexity(std::span<const double> negative_log_likelihoods, double base = 0.0);

LengthStats length_stats(std::span<const int> token_lengths);

// Picks the fixed training length for a dataset from per-tokenizer stats.
// Buckets are multiples of 64. Base bucket covers the worst-case p95; when
// the global max lands within one bucket above the base, the bucket is
// extended to cover it outright.
int select_bucket(std::span<const LengthStats> per_tokenizer_stats);

} // namespace lmprep::metrics
