#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "lmprep/bpe/model.hpp"
#include "lmprep/bpe/text_source.hpp"
#include "lmprep/bpe/trainer.hpp"
#include "lmprep/error.hpp"
#include "lmprep/metrics/metrics.hpp"
#include "lmprep/tune/tune.hpp"
#include "lmprep/util/hash.hpp"
#include "lmprep/util/rng.hpp"

namespace lmprep::tune {

// ---- mock trainer ----

namespace {

struct MockState : Trainer::State {
    int epochs = 0;
};

// Deterministic single-peak validation curve: rises by 0.05 per epoch to a
// config-dependent peak somewhere in epochs 2..9, then strictly declines.
// That exercises both early stopping (after the peak) and the epoch cap
// (when the cap lands before the decline has lasted `patience` epochs).
double mock_peak(const TrialConfig& config) {
    uint64_t h = util::mix_seed(util::murmur3_64(config.canonical_json()), 0x6D6F636BU);
    return 0.70 + double((h >> 8) % 2000) / 10000.0; // 0.70 .. 0.8999
}

double mock_valid_score(const TrialConfig& config, int epoch) {
    uint64_t h = util::mix_seed(util::murmur3_64(config.canonical_json()), 0x6D6F636BU);
    int peak_epoch = int(h % 8) + 2;
    double decline = 0.01 + double((h >> 24) % 10) / 1000.0;
    if (epoch <= peak_epoch) return mock_peak(config) - 0.05 * double(peak_epoch - epoch);
    return mock_peak(config) - decline * double(epoch - peak_epoch);
}

// Test score sits a deterministic notch below the peak validation score.
double mock_test_score(const TrialConfig& config) {
    uint64_t h = util::mix_seed(util::murmur3_64(config.canonical_json()), 0x74657374U);
    return mock_peak(config) - 0.005 - double(h % 100) / 10000.0;
}

} // namespace

MockTrainer::MockTrainer() : valid_fn_(mock_valid_score), test_fn_(mock_test_score) {}

MockTrainer::MockTrainer(ValidFn valid_fn, TestFn test_fn)
    : valid_fn_(std::move(valid_fn)), test_fn_(std::move(test_fn)) {
    if (!valid_fn_ || !test_fn_) throw InvalidArgument("mock trainer needs both score functions");
}

std::unique_ptr<Trainer::State> MockTrainer::init(const TrialConfig&, const TaskData&) {
    return std::make_unique<MockState>();
}

void MockTrainer::train_one_epoch(State& state, const TrialConfig&, const TaskData&,
                                  const pretrain::ScheduleSpec&, int epoch) {
    if (epoch == fail_at_epoch_) throw Error("simulated trainer failure");
    static_cast<MockState&>(state).epochs = epoch + 1;
}

double MockTrainer::evaluate(const State& state, const TrialConfig& config, const TaskData&,
                             Split split) const {
    const auto& mock = static_cast<const MockState&>(state);
    int last_epoch = std::max(0, mock.epochs - 1);
    if (split == Split::test) return test_fn_(config);
    return valid_fn_(config, last_epoch);
}

// ---- linear probe ----

namespace {

constexpr uint32_t kFeatureDim = 1u << 15;
constexpr int kBiasFeature = 0;

// The grid's learning rates are sized for full encoder fine-tuning; plain
// SGD from zero weights needs a far larger step to move off the majority
// class within the early-stopping window. A constant factor keeps the
// warmup/decay ramp shape intact while putting the probe in its own
// workable range.
constexpr double kProbeLrScale = 150.0;

uint32_t feature_slot(uint64_t role, uint64_t value) {
    return uint32_t(util::mix_seed(role, value) & (kFeatureDim - 1));
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

struct ProbeState : Trainer::State {
    std::unique_ptr<bpe::Tokenizer> tokenizer;

    int num_classes = 0;
    std::vector<std::string> tag_names; // NER: class id -> tag string
    std::vector<double> weights;        // [num_classes][kFeatureDim], flat

    struct Example {
        std::vector<uint32_t> features;
        int label = -1; // -1 when the gold tag is unseen in train (eval only)
    };
    struct SplitCache {
        std::vector<Example> examples;
        // NER: examples grouped into sentences, plus gold spans per sentence
        std::vector<std::pair<size_t, size_t>> sentences;
        std::vector<std::vector<metrics::Span>> gold_spans;
        // classification: gold labels in example order
        std::vector<int> gold_labels;
    };
    SplitCache train, valid, test;

    const SplitCache& cache(Split split) const {
        switch (split) {
        case Split::train: return train;
        case Split::valid: return valid;
        case Split::test: return test;
        }
        return train;
    }

    double* class_weights(int cls) { return weights.data() + size_t(cls) * kFeatureDim; }
    const double* class_weights(int cls) const {
        return weights.data() + size_t(cls) * kFeatureDim;
    }
};

void subword_features(const bpe::Tokenizer& tokenizer, const std::string& text, uint64_t role,
                      std::vector<uint32_t>& out) {
    for (int32_t id : tokenizer.encode(text).ids)
        out.push_back(feature_slot(role, uint64_t(uint32_t(id))));
}

std::vector<uint32_t> classification_features(const bpe::Tokenizer& tokenizer,
                                              const bench::LabeledText& sample) {
    std::vector<uint32_t> features;
    features.push_back(kBiasFeature);
    subword_features(tokenizer, join_tokens(sample.tokens), 1, features);
    return features;
}

// No bias feature here: an always-on slot only learns the tag prior, and
// with O dominating every NER corpus that prior drowns the per-token
// evidence for long enough that early stopping kills the trial while the
// validation score is still flat at zero.
std::vector<uint32_t> token_features(const bpe::Tokenizer& tokenizer,
                                     const std::vector<std::string>& tokens, size_t position) {
    std::vector<uint32_t> features;
    subword_features(tokenizer, tokens[position], 1, features);
    if (position > 0) subword_features(tokenizer, tokens[position - 1], 2, features);
    if (position + 1 < tokens.size()) subword_features(tokenizer, tokens[position + 1], 3, features);
    return features;
}

std::vector<metrics::Span> gold_spans_of(const std::vector<std::string>& tags) {
    std::vector<std::string> repaired = tags;
    bench::bio_repair(repaired);
    return metrics::bio_to_spans(repaired);
}

void build_cls_cache(const bpe::Tokenizer& tokenizer,
                     const std::vector<bench::LabeledText>& split, ProbeState::SplitCache& cache) {
    cache.examples.reserve(split.size());
    cache.gold_labels.reserve(split.size());
    for (const bench::LabeledText& sample : split) {
        ProbeState::Example example;
        example.features = classification_features(tokenizer, sample);
        example.label = int(sample.label);
        cache.gold_labels.push_back(example.label);
        cache.examples.push_back(std::move(example));
    }
}

void build_ner_cache(const bpe::Tokenizer& tokenizer,
                     const std::vector<bench::TaggedSentence>& split,
                     const std::unordered_map<std::string, int>& tag_ids,
                     ProbeState::SplitCache& cache) {
    for (const bench::TaggedSentence& sentence : split) {
        size_t begin = cache.examples.size();
        for (size_t i = 0; i < sentence.tokens.size(); ++i) {
            ProbeState::Example example;
            example.features = token_features(tokenizer, sentence.tokens, i);
            auto it = tag_ids.find(sentence.tags[i]);
            example.label = it == tag_ids.end() ? -1 : it->second;
            cache.examples.push_back(std::move(example));
        }
        cache.sentences.emplace_back(begin, cache.examples.size());
        cache.gold_spans.push_back(gold_spans_of(sentence.tags));
    }
}

int predict(const ProbeState& state, const ProbeState::Example& example) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int cls = 0; cls < state.num_classes; ++cls) {
        const double* w = state.class_weights(cls);
        double score = 0.0;
        for (uint32_t f : example.features) score += w[f];
        if (score > best_score) { // first class wins ties
            best_score = score;
            best = cls;
        }
    }
    return best;
}

} // namespace

std::unique_ptr<Trainer::State> LinearProbeTrainer::init(const TrialConfig& config,
                                                         const TaskData& data) {
    data.validate();
    auto state = std::make_unique<ProbeState>();

    // a small subword inventory trained on this task's train split keeps
    // the probe self-contained and a pure function of (config, data)
    std::vector<std::string> train_texts;
    if (data.is_ner()) {
        train_texts.reserve(data.ner_train.size());
        for (const auto& sentence : data.ner_train) train_texts.push_back(join_tokens(sentence.tokens));
    } else {
        train_texts.reserve(data.cls_train.size());
        for (const auto& sample : data.cls_train) train_texts.push_back(join_tokens(sample.tokens));
    }
    bpe::VectorTextSource source(std::move(train_texts));
    bpe::TrainOptions train_options;
    train_options.vocab_size = 600;
    train_options.min_pair_frequency = 2;
    train_options.workers = 1;
    bpe::TrainResult trained = bpe::train(source, train_options);
    state->tokenizer =
        std::make_unique<bpe::Tokenizer>(std::move(trained.merges), std::move(trained.vocab));

    if (data.is_ner()) {
        // class inventory = tags seen in train, sorted for stable ids
        std::unordered_map<std::string, int> tag_ids;
        for (const auto& sentence : data.ner_train)
            for (const std::string& tag : sentence.tags) tag_ids.emplace(tag, 0);
        state->tag_names.reserve(tag_ids.size());
        for (const auto& [tag, unused] : tag_ids) state->tag_names.push_back(tag);
        std::sort(state->tag_names.begin(), state->tag_names.end());
        for (size_t i = 0; i < state->tag_names.size(); ++i) tag_ids[state->tag_names[i]] = int(i);
        state->num_classes = int(state->tag_names.size());

        build_ner_cache(*state->tokenizer, data.ner_train, tag_ids, state->train);
        build_ner_cache(*state->tokenizer, data.ner_valid, tag_ids, state->valid);
        build_ner_cache(*state->tokenizer, data.ner_test, tag_ids, state->test);
    } else {
        state->num_classes = bench::kPolarityClasses;
        build_cls_cache(*state->tokenizer, data.cls_train, state->train);
        build_cls_cache(*state->tokenizer, data.cls_valid, state->valid);
        build_cls_cache(*state->tokenizer, data.cls_test, state->test);
    }

    state->weights.assign(size_t(state->num_classes) * kFeatureDim, 0.0);
    (void)config;
    return state;
}

void LinearProbeTrainer::train_one_epoch(State& raw_state, const TrialConfig& config,
                                         const TaskData&, const pretrain::ScheduleSpec& schedule,
                                         int epoch) {
    auto& state = static_cast<ProbeState&>(raw_state);
    const std::vector<ProbeState::Example>& examples = state.train.examples;

    // trainable examples only (NER tokens always have train-side labels)
    std::vector<size_t> order;
    order.reserve(examples.size());
    for (size_t i = 0; i < examples.size(); ++i)
        if (examples[i].label >= 0) order.push_back(i);
    util::seeded_shuffle(order, util::mix_seed(config.seed, uint64_t(epoch), 0x70726F62U));

    // example counting is sentence-based for NER, so "epoch steps" follow
    // the harness schedule only approximately there; the lr ramp itself is
    // exactly lr_at over consumed optimizer steps
    const int64_t steps_per_epoch =
        std::max<int64_t>(1, schedule.total_steps / std::max(1, config.max_epochs));
    int64_t base_step = int64_t(epoch) * steps_per_epoch;
    size_t per_step = (order.size() + size_t(steps_per_epoch) - 1) /
                      std::max<size_t>(1, size_t(steps_per_epoch));
    per_step = std::max<size_t>(1, per_step);

    std::vector<double> logits(size_t(state.num_classes));
    for (size_t n = 0; n < order.size(); ++n) {
        const ProbeState::Example& example = examples[order[n]];
        int64_t step = base_step + int64_t(n / per_step);
        double lr = kProbeLrScale * pretrain::lr_at(std::min(step, schedule.total_steps), schedule);

        double max_logit = -std::numeric_limits<double>::infinity();
        for (int cls = 0; cls < state.num_classes; ++cls) {
            const double* w = state.class_weights(cls);
            double score = 0.0;
            for (uint32_t f : example.features) score += w[f];
            logits[size_t(cls)] = score;
            max_logit = std::max(max_logit, score);
        }
        double denom = 0.0;
        for (double& logit : logits) {
            logit = std::exp(logit - max_logit);
            denom += logit;
        }
        for (int cls = 0; cls < state.num_classes; ++cls) {
            double gradient = logits[size_t(cls)] / denom - (cls == example.label ? 1.0 : 0.0);
            double delta = lr * gradient;
            double* w = state.class_weights(cls);
            for (uint32_t f : example.features) w[f] -= delta;
        }
    }
}

double LinearProbeTrainer::evaluate(const State& raw_state, const TrialConfig& config,
                                    const TaskData& data, Split split) const {
    const auto& state = static_cast<const ProbeState&>(raw_state);
    const ProbeState::SplitCache& cache = state.cache(split);
    (void)config;

    if (!data.is_ner()) {
        std::vector<int> predicted;
        predicted.reserve(cache.examples.size());
        for (const auto& example : cache.examples) predicted.push_back(predict(state, example));
        return metrics::macro_f1(cache.gold_labels, predicted, bench::kPolarityClasses).macro;
    }

    std::vector<std::vector<metrics::Span>> predicted_spans;
    predicted_spans.reserve(cache.sentences.size());
    std::vector<std::string> tags;
    for (const auto& [begin, end] : cache.sentences) {
        tags.clear();
        for (size_t i = begin; i < end; ++i)
            tags.push_back(state.tag_names[size_t(predict(state, cache.examples[i]))]);
        bench::bio_repair(tags);
        predicted_spans.push_back(metrics::bio_to_spans(tags));
    }
    return metrics::micro_f1_spans(cache.gold_spans, predicted_spans).f1;
}

} // namespace lmprep::tune
