#include "lmprep/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lmprep/error.hpp"

namespace lmprep::metrics {

namespace {

bool is_bio_head(const std::string& tag) { return tag.size() > 2 && tag[0] == 'B' && tag[1] == '-'; }
bool is_bio_inside(const std::string& tag) { return tag.size() > 2 && tag[0] == 'I' && tag[1] == '-'; }

} // namespace

std::vector<Span> bio_to_spans(std::span<const std::string> tags) {
    std::vector<Span> spans;
    Span current;
    bool open = false;
    for (int i = 0; i < int(tags.size()); ++i) {
        const std::string& tag = tags[i];
        if (is_bio_head(tag)) {
            if (open) spans.push_back(current);
            current = Span{i, i + 1, tag.substr(2)};
            open = true;
        } else if (is_bio_inside(tag)) {
            if (!open || current.type != tag.substr(2))
                throw InvalidArgument("unheaded I tag at position " + std::to_string(i) +
                                      "; validate or repair BIO input first");
            current.end = i + 1;
        } else if (tag == "O") {
            if (open) spans.push_back(current);
            open = false;
        } else {
            throw InvalidArgument("not a BIO tag: '" + tag + "'");
        }
    }
    if (open) spans.push_back(current);
    return spans;
}

std::vector<std::string> spans_to_bio(std::span<const Span> spans, int length) {
    std::vector<std::string> tags(size_t(length), "O");
    std::vector<Span> sorted(spans.begin(), spans.end());
    std::sort(sorted.begin(), sorted.end());
    int prev_end = 0;
    for (const Span& s : sorted) {
        if (s.start < 0 || s.end > length || s.start >= s.end)
            throw InvalidArgument("span out of range");
        if (s.start < prev_end) throw InvalidArgument("overlapping spans");
        prev_end = s.end;
        tags[size_t(s.start)] = "B-" + s.type;
        for (int i = s.start + 1; i < s.end; ++i) tags[size_t(i)] = "I-" + s.type;
    }
    return tags;
}

SpanF1 micro_f1_spans(const std::vector<std::vector<Span>>& gold,
                      const std::vector<std::vector<Span>>& predicted) {
    if (gold.size() != predicted.size())
        throw InvalidArgument("gold and predicted sentence counts differ: " +
                              std::to_string(gold.size()) + " vs " +
                              std::to_string(predicted.size()));
    SpanF1 r;
    for (size_t s = 0; s < gold.size(); ++s) {
        std::multiset<Span> gold_set(gold[s].begin(), gold[s].end());
        r.gold_spans += gold[s].size();
        r.predicted_spans += predicted[s].size();
        for (const Span& p : predicted[s]) {
            auto it = gold_set.find(p);
            if (it != gold_set.end()) {
                ++r.true_positives;
                gold_set.erase(it);
            }
        }
    }
    if (r.gold_spans == 0 && r.predicted_spans == 0) {
        r.precision = r.recall = r.f1 = 1.0;
        r.degenerate = true;
        return r;
    }
    r.precision = r.predicted_spans ? double(r.true_positives) / double(r.predicted_spans) : 0.0;
    r.recall = r.gold_spans ? double(r.true_positives) / double(r.gold_spans) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

MacroF1 macro_f1(std::span<const int> gold_labels, std::span<const int> predicted_labels,
                 int class_count) {
    if (gold_labels.size() != predicted_labels.size())
        throw InvalidArgument("gold and predicted label counts differ");
    if (class_count <= 0) throw InvalidArgument("class_count must be positive");

    const size_t n_classes = size_t(class_count);
    std::vector<uint64_t> tp(n_classes), fp(n_classes), fn(n_classes);
    for (size_t i = 0; i < gold_labels.size(); ++i) {
        int g = gold_labels[i], p = predicted_labels[i];
        if (g < 0 || g >= class_count || p < 0 || p >= class_count)
            throw InvalidArgument("label out of range at index " + std::to_string(i));
        if (g == p) {
            ++tp[size_t(g)];
        } else {
            ++fn[size_t(g)];
            ++fp[size_t(p)];
        }
    }

    MacroF1 r;
    r.per_class_f1.resize(size_t(class_count));
    for (int c = 0; c < class_count; ++c) {
        uint64_t t = tp[size_t(c)], f_pos = fp[size_t(c)], f_neg = fn[size_t(c)];
        if (t + f_pos + f_neg == 0) {
            r.per_class_f1[size_t(c)] = 0.0;
            r.degenerate_classes.push_back(c);
            continue;
        }
        r.per_class_f1[size_t(c)] = 2.0 * double(t) / double(2 * t + f_pos + f_neg);
    }
    r.macro = unweighted_mean(r.per_class_f1);
    return r;
}

double unweighted_mean(std::span<const double> scores) {
    if (scores.empty()) throw InvalidArgument("mean of empty list");
    return std::accumulate(scores.begin(), scores.end(), 0.0) / double(scores.size());
}

double perplexity(std::span<const double> negative_log_likelihoods, double base) {
    if (negative_log_likelihoods.empty())
        throw InvalidArgument("perplexity of empty loss list");
    double mean = unweighted_mean(negative_log_likelihoods);
    if (base <= 0.0) return std::exp(mean);
    return std::pow(base, mean);
}

LengthStats length_stats(std::span<const int> token_lengths) {
    if (token_lengths.empty()) throw InvalidArgument("length_stats of empty list");
    std::vector<int> sorted(token_lengths.begin(), token_lengths.end());
    std::sort(sorted.begin(), sorted.end());
    LengthStats s;
    s.max = sorted.back();
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / double(sorted.size());
    // nearest-rank: value at ceil(0.95 * n), 1-indexed
    size_t k = size_t(std::ceil(0.95 * double(sorted.size())));
    if (k == 0) k = 1;
    s.p95 = sorted[k - 1];
    return s;
}

namespace {
int round_up_64(int v) { return v <= 0 ? 0 : ((v + 63) / 64) * 64; }
} // namespace

int select_bucket(std::span<const LengthStats> per_tokenizer_stats) {
    if (per_tokenizer_stats.empty()) throw InvalidArgument("select_bucket with no stats");
    int worst_p95 = 0, global_max = 0;
    for (const LengthStats& s : per_tokenizer_stats) {
        worst_p95 = std::max(worst_p95, s.p95);
        global_max = std::max(global_max, s.max);
    }
    int base = std::max(64, round_up_64(worst_p95));
    int full = round_up_64(global_max);
    if (full <= base + 64) return std::max(base, full);
    return base;
}

} // namespace lmprep::metrics
