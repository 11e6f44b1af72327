#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "lmprep/error.hpp"
#include "lmprep/pretrain/prep.hpp"
#include "lmprep/util/rng.hpp"

using namespace lmprep;
using pretrain::MaskingPolicy;
using pretrain::MaskingVocab;
using pretrain::ScheduleSpec;

namespace {

ScheduleSpec base_pretrain_schedule() {
    ScheduleSpec spec;
    spec.kind = pretrain::ScheduleKind::polynomial_decay;
    spec.total_steps = 100000;
    spec.warmup_steps = 10000;
    spec.peak_lr = 0.0004;
    spec.end_lr = 0.0;
    spec.power = 1.0;
    return spec;
}

MaskingVocab small_vocab() {
    MaskingVocab vocab;
    vocab.vocab_size = 600;
    vocab.mask_id = 4;
    vocab.special_ids = {0, 1, 2, 3, 4};
    return vocab;
}

} // namespace

TEST_SUITE("pretrain") {

TEST_CASE("learning rate hits the published anchor points") {
    ScheduleSpec spec = base_pretrain_schedule();
    CHECK(pretrain::lr_at(0, spec) == 0.0);
    CHECK(pretrain::lr_at(10000, spec) == 0.0004); // peak, exact
    CHECK(pretrain::lr_at(100000, spec) == spec.end_lr);
    CHECK(std::fabs(pretrain::lr_at(55000, spec) - 0.0002) <= 0.0002 * 1e-12);
}

TEST_CASE("warmup rises linearly and decay falls monotonically") {
    ScheduleSpec spec = base_pretrain_schedule();
    spec.end_lr = 1e-5;

    double previous = -1.0;
    for (int64_t step = 0; step <= spec.warmup_steps; step += 500) {
        double lr = pretrain::lr_at(step, spec);
        CHECK(lr > previous);
        previous = lr;
        // warmup is exactly linear
        CHECK(std::fabs(lr - spec.peak_lr * double(step) / double(spec.warmup_steps)) <= 1e-18);
    }
    previous = pretrain::lr_at(spec.warmup_steps, spec);
    for (int64_t step = spec.warmup_steps + 500; step <= spec.total_steps; step += 500) {
        double lr = pretrain::lr_at(step, spec);
        CHECK(lr < previous);
        CHECK(lr >= spec.end_lr);
        previous = lr;
    }
    // past the horizon the rate stays parked at end_lr
    CHECK(pretrain::lr_at(spec.total_steps + 12345, spec) == spec.end_lr);
}

TEST_CASE("quadratic decay stays between the linear curve and end_lr") {
    ScheduleSpec linear = base_pretrain_schedule();
    ScheduleSpec quadratic = base_pretrain_schedule();
    quadratic.power = 2.0;
    for (int64_t step : {20000, 40000, 60000, 80000, 99999}) {
        double l = pretrain::lr_at(step, linear);
        double q = pretrain::lr_at(step, quadratic);
        CHECK(q <= l);
        CHECK(q >= 0.0);
    }
}

TEST_CASE("fine-tune schedule puts warmup at a tenth of the horizon") {
    util::Rng rng(404);
    for (int round = 0; round < 20; ++round) {
        int64_t total = 1 + int64_t(rng.next_below(500000));
        ScheduleSpec spec = pretrain::linear_finetune_schedule(total, 2e-5);
        CHECK(spec.warmup_steps == int64_t(std::llround(0.10 * double(total))));
        CHECK(spec.total_steps == total);
        CHECK(spec.kind == pretrain::ScheduleKind::linear);
        CHECK(spec.peak_lr == 2e-5);
    }
    ScheduleSpec custom = pretrain::linear_finetune_schedule(1000, 1e-5, 0.25);
    CHECK(custom.warmup_steps == 250);
}

TEST_CASE("schedule specs reject nonsense") {
    ScheduleSpec spec = base_pretrain_schedule();
    spec.warmup_steps = spec.total_steps + 1;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = base_pretrain_schedule();
    spec.total_steps = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = base_pretrain_schedule();
    spec.peak_lr = -1.0;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}

TEST_CASE("epoch budget round trips through its inverse") {
    pretrain::BudgetSpec budget;
    budget.total_steps = 100000;
    budget.global_batch_sequences = 8192;
    budget.sequence_length = 512;
    budget.corpus_tokens = pretrain::corpus_tokens_for_epochs(61.0, 100000, 8192, 512);

    double epochs = pretrain::estimate_epochs(budget);
    CHECK(std::fabs(epochs - 61.0) < 0.5);

    // proportionality is exact in floating point for these scalings
    pretrain::BudgetSpec doubled = budget;
    doubled.total_steps *= 2;
    CHECK(pretrain::estimate_epochs(doubled) == 2.0 * epochs);
    pretrain::BudgetSpec bigger_corpus = budget;
    bigger_corpus.corpus_tokens *= 2;
    CHECK(pretrain::estimate_epochs(bigger_corpus) == epochs / 2.0);

    pretrain::BudgetSpec bad = budget;
    bad.corpus_tokens = 0;
    CHECK_THROWS_AS(pretrain::estimate_epochs(bad), InvalidArgument);
}

TEST_CASE("packing preserves every token in order") {
    std::vector<std::vector<int32_t>> streams = {
        {10, 11, 12}, {20, 21}, {30, 31, 32, 33, 34}};
    const int32_t pad = 1, sep = 2;

    pretrain::PackResult packed = pretrain::pack_sequences(streams, 4, pad, sep);
    // stream: 10 11 12 | 2 | 20 21 | 2 | 30 31 32 33 34  -> 12 tokens, 3 seqs
    REQUIRE(packed.sequences.size() == 3);
    CHECK(packed.input_tokens == 10);
    CHECK(packed.separator_tokens == 2);
    CHECK(packed.pad_tokens == 0);
    CHECK(packed.sequences[0] == std::vector<int32_t>{10, 11, 12, sep});
    CHECK(packed.sequences[1] == std::vector<int32_t>{20, 21, sep, 30});
    CHECK(packed.sequences[2] == std::vector<int32_t>{31, 32, 33, 34});

    pretrain::PackResult padded = pretrain::pack_sequences(streams, 5, pad, sep);
    REQUIRE(padded.sequences.size() == 3);
    CHECK(padded.pad_tokens == 3);
    CHECK(padded.sequences[1] == std::vector<int32_t>{21, sep, 30, 31, 32});
    CHECK(padded.sequences[2] == std::vector<int32_t>{33, 34, pad, pad, pad});

    uint64_t accounted = padded.input_tokens + padded.separator_tokens + padded.pad_tokens;
    CHECK(accounted == 15);

    pretrain::PackResult no_sep = pretrain::pack_sequences(streams, 4, pad);
    CHECK(no_sep.separator_tokens == 0);
    CHECK(no_sep.input_tokens == 10);
    // flattening minus padding reproduces the concatenated streams
    std::vector<int32_t> flat;
    for (const auto& seq : no_sep.sequences) flat.insert(flat.end(), seq.begin(), seq.end());
    while (!flat.empty() && flat.back() == pad) flat.pop_back();
    CHECK(flat == std::vector<int32_t>{10, 11, 12, 20, 21, 30, 31, 32, 33, 34});

    pretrain::PackResult empty = pretrain::pack_sequences({}, 4, pad, sep);
    CHECK(empty.sequences.empty());
}

TEST_CASE("masking policy and vocab validation") {
    MaskingPolicy policy;
    CHECK_NOTHROW(policy.validate());
    policy.mask_token_share = 0.5; // shares no longer sum to one
    CHECK_THROWS_AS(policy.validate(), InvalidArgument);
    policy = MaskingPolicy{};
    policy.mask_probability = 1.5;
    CHECK_THROWS_AS(policy.validate(), InvalidArgument);

    MaskingVocab vocab = small_vocab();
    CHECK_NOTHROW(vocab.validate());
    vocab.special_ids = {4, 0}; // must be sorted
    CHECK_THROWS_AS(vocab.validate(), InvalidArgument);
}

TEST_CASE("masking replaces the three category shares correctly") {
    MaskingVocab vocab = small_vocab();
    MaskingPolicy policy;
    policy.seed = 9;

    // one long sequence with specials sprinkled in
    std::vector<int32_t> sequence;
    util::Rng rng(1234);
    for (int i = 0; i < 20000; ++i) {
        if (i % 100 == 0) sequence.push_back(int32_t(rng.next_below(5)));
        sequence.push_back(int32_t(5 + rng.next_below(595)));
    }

    pretrain::MaskingResult result = pretrain::apply_masking(sequence, policy, 1, vocab);
    REQUIRE(result.corrupted.size() == sequence.size());
    REQUIRE(result.target_positions.size() == result.target_ids.size());

    size_t masked = 0, random = 0, kept = 0;
    std::set<int32_t> touched;
    for (size_t i = 0; i < result.target_positions.size(); ++i) {
        int32_t pos = result.target_positions[i];
        CHECK_FALSE(vocab.is_special(sequence[size_t(pos)]));
        CHECK(result.target_ids[i] == sequence[size_t(pos)]);
        touched.insert(pos);
        int32_t now = result.corrupted[size_t(pos)];
        if (now == vocab.mask_id) {
            ++masked;
        } else if (now == sequence[size_t(pos)]) {
            ++kept;
        } else {
            ++random;
            CHECK_FALSE(vocab.is_special(now));
            CHECK(now < vocab.vocab_size);
        }
    }
    CHECK(touched.size() == result.target_positions.size());

    // untouched positions are unchanged
    for (size_t i = 0; i < sequence.size(); ++i)
        if (!touched.count(int32_t(i))) CHECK(result.corrupted[i] == sequence[i]);

    // loose 4-sigma bands; the tight statistical check lives in the
    // acceptance suite
    double n = 20000.0;
    double expect = n * 0.15;
    double sigma = std::sqrt(n * 0.15 * 0.85);
    CHECK(std::fabs(double(result.target_positions.size()) - expect) < 4 * sigma);
    double sel = double(result.target_positions.size());
    CHECK(std::fabs(double(masked) - sel * 0.8) < 4 * std::sqrt(sel * 0.8 * 0.2));
    CHECK(std::fabs(double(random) - sel * 0.1) < 4 * std::sqrt(sel * 0.1 * 0.9));
    CHECK(std::fabs(double(kept) - sel * 0.1) < 4 * std::sqrt(sel * 0.1 * 0.9));
}

TEST_CASE("masking is reproducible and epoch seeds refresh the pattern") {
    MaskingVocab vocab = small_vocab();
    MaskingPolicy policy;
    policy.seed = 77;

    std::vector<int32_t> sequence;
    util::Rng rng(55);
    for (int i = 0; i < 2000; ++i) sequence.push_back(int32_t(5 + rng.next_below(595)));

    pretrain::MaskingResult a = pretrain::apply_masking(sequence, policy, 3, vocab);
    pretrain::MaskingResult b = pretrain::apply_masking(sequence, policy, 3, vocab);
    CHECK(a.corrupted == b.corrupted);
    CHECK(a.target_positions == b.target_positions);

    pretrain::MaskingResult next_epoch = pretrain::apply_masking(sequence, policy, 4, vocab);
    CHECK(a.target_positions != next_epoch.target_positions);

    MaskingPolicy other = policy;
    other.seed = 78;
    pretrain::MaskingResult reseeded = pretrain::apply_masking(sequence, other, 3, vocab);
    CHECK(a.target_positions != reseeded.target_positions);
}

} // TEST_SUITE
