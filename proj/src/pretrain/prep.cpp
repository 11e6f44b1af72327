#include "lmprep/pretrain/prep.hpp"

#include <algorithm>
#include <cmath>

#include "lmprep/error.hpp"
#include "lmprep/util/hash.hpp"
#include "lmprep/util/rng.hpp"

namespace lmprep::pretrain {

void ScheduleSpec::validate() const {
    if (total_steps <= 0) throw InvalidArgument("schedule: total_steps must be positive");
    if (warmup_steps < 0 || warmup_steps >= total_steps)
        throw InvalidArgument("schedule: warmup_steps must be in [0, total_steps)");
    if (end_lr < 0.0 || peak_lr <= end_lr)
        throw InvalidArgument("schedule: need peak_lr > end_lr >= 0");
    if (power <= 0.0) throw InvalidArgument("schedule: power must be positive");
}

double lr_at(int64_t step, const ScheduleSpec& spec) {
    spec.validate();
    step = std::clamp<int64_t>(step, 0, spec.total_steps);
    if (step <= spec.warmup_steps) {
        if (spec.warmup_steps == 0) return spec.peak_lr;
        return spec.peak_lr * double(step) / double(spec.warmup_steps);
    }
    double remaining = double(spec.total_steps - step) / double(spec.total_steps - spec.warmup_steps);
    double power = spec.kind == ScheduleKind::linear ? 1.0 : spec.power;
    return spec.end_lr + (spec.peak_lr - spec.end_lr) * std::pow(remaining, power);
}

ScheduleSpec linear_finetune_schedule(int64_t total_steps, double peak_lr, double warmup_fraction) {
    ScheduleSpec spec;
    spec.kind = ScheduleKind::linear;
    spec.total_steps = total_steps;
    spec.warmup_steps = int64_t(std::llround(warmup_fraction * double(total_steps)));
    if (spec.warmup_steps >= total_steps) spec.warmup_steps = total_steps - 1;
    spec.peak_lr = peak_lr;
    spec.end_lr = 0.0;
    spec.power = 1.0;
    spec.validate();
    return spec;
}

void BudgetSpec::validate() const {
    if (total_steps <= 0 || global_batch_sequences <= 0 || sequence_length <= 0 ||
        corpus_tokens <= 0)
        throw InvalidArgument("budget: all fields must be positive");
}

double estimate_epochs(const BudgetSpec& budget) {
    budget.validate();
    return double(budget.total_steps) * double(budget.global_batch_sequences) *
           double(budget.sequence_length) / double(budget.corpus_tokens);
}

int64_t corpus_tokens_for_epochs(double epochs, int64_t total_steps,
                                 int64_t global_batch_sequences, int64_t sequence_length) {
    if (epochs <= 0.0) throw InvalidArgument("epochs must be positive");
    double tokens = double(total_steps) * double(global_batch_sequences) *
                    double(sequence_length) / epochs;
    return int64_t(std::llround(tokens));
}

PackResult pack_sequences(const std::vector<std::vector<int32_t>>& token_streams,
                          int sequence_length, int32_t pad_id,
                          std::optional<int32_t> separator_id) {
    if (sequence_length <= 0) throw InvalidArgument("pack: sequence_length must be positive");

    PackResult result;
    std::vector<int32_t> current;
    current.reserve(size_t(sequence_length));

    auto push_token = [&](int32_t id) {
        current.push_back(id);
        if (int(current.size()) == sequence_length) {
            result.sequences.push_back(std::move(current));
            current = {};
            current.reserve(size_t(sequence_length));
        }
    };

    bool first = true;
    for (const auto& stream : token_streams) {
        if (!first && separator_id) {
            push_token(*separator_id);
            ++result.separator_tokens;
        }
        first = false;
        for (int32_t id : stream) push_token(id);
        result.input_tokens += stream.size();
    }
    if (!current.empty()) {
        result.pad_tokens = uint64_t(sequence_length) - current.size();
        current.resize(size_t(sequence_length), pad_id);
        result.sequences.push_back(std::move(current));
    }
    return result;
}

void MaskingPolicy::validate() const {
    if (mask_probability < 0.0 || mask_probability > 1.0)
        throw InvalidArgument("masking: mask_probability must be in [0, 1]");
    for (double share : {mask_token_share, random_token_share, keep_share})
        if (share < 0.0 || share > 1.0)
            throw InvalidArgument("masking: shares must be in [0, 1]");
    if (std::abs(mask_token_share + random_token_share + keep_share - 1.0) > 1e-9)
        throw InvalidArgument("masking: shares must sum to 1");
}

void MaskingVocab::validate() const {
    if (vocab_size <= 0) throw InvalidArgument("masking: vocab_size must be positive");
    if (mask_id < 0 || mask_id >= vocab_size)
        throw InvalidArgument("masking: mask_id out of range");
    if (int(special_ids.size()) >= vocab_size)
        throw InvalidArgument("masking: no non-special ids to sample from");
    if (!std::is_sorted(special_ids.begin(), special_ids.end()))
        throw InvalidArgument("masking: special_ids must be sorted");
}

bool MaskingVocab::is_special(int32_t id) const {
    return std::binary_search(special_ids.begin(), special_ids.end(), id);
}

MaskingResult apply_masking(std::span<const int32_t> sequence, const MaskingPolicy& policy,
                            uint64_t epoch_seed, const MaskingVocab& vocab) {
    policy.validate();
    vocab.validate();

    uint64_t content =
        util::murmur3_128_bytes(sequence.data(), sequence.size() * sizeof(int32_t)).lo;
    util::Rng rng(policy.seed, epoch_seed, content);

    MaskingResult result;
    result.corrupted.assign(sequence.begin(), sequence.end());
    for (size_t i = 0; i < sequence.size(); ++i) {
        int32_t original = sequence[i];
        if (vocab.is_special(original)) continue;
        if (rng.next_double() >= policy.mask_probability) continue;

        result.target_positions.push_back(int32_t(i));
        result.target_ids.push_back(original);

        double v = rng.next_double();
        if (v < policy.mask_token_share) {
            result.corrupted[i] = vocab.mask_id;
        } else if (v < policy.mask_token_share + policy.random_token_share) {
            // rejection-sample a non-special id
            int32_t candidate;
            do {
                candidate = int32_t(rng.next_below(uint64_t(vocab.vocab_size)));
            } while (vocab.is_special(candidate));
            result.corrupted[i] = candidate;
        }
        // else: keep the original token
    }
    return result;
}

} // namespace lmprep::pretrain
