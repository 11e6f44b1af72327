#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lmprep::pretrain {

enum class ScheduleKind { polynomial_decay, linear };

// Learning-rate schedule: linear warmup from 0 to peak_lr over
// warmup_steps, then polynomial decay to end_lr at total_steps. power = 1
// is the linear fine-tuning schedule.
struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::polynomial_decay;
    int64_t total_steps = 0;
    int64_t warmup_steps = 0;
    double peak_lr = 0.0;
    double end_lr = 0.0;
    double power = 1.0;

    void validate() const;
};

double lr_at(int64_t step, const ScheduleSpec& spec);

// Fine-tuning schedule: linear decay with warmup_steps = round(0.10 * total).
ScheduleSpec linear_finetune_schedule(int64_t total_steps, double peak_lr,
                                      double warmup_fraction = 0.10);

struct BudgetSpec {
    int64_t total_steps = 0;
    int64_t global_batch_sequences = 0;
    int64_t sequence_length = 0;
    int64_t corpus_tokens = 0;

    void validate() const;
};

// Epochs the budget covers, counting padding: steps * batch * length /
// corpus_tokens.
double estimate_epochs(const BudgetSpec& budget);

// Inverse of estimate_epochs: corpus size that makes the budget equal the
// given epoch count.
int64_t corpus_tokens_for_epochs(double epochs, int64_t total_steps,
                                 int64_t global_batch_sequences, int64_t sequence_length);

struct PackResult {
    std::vector<std::vector<int32_t>> sequences; // each exactly sequence_length long
    uint64_t input_tokens = 0;
    uint64_t separator_tokens = 0;
    uint64_t pad_tokens = 0;
};

// Concatenates document token streams, inserting separator_id between
// documents when given, and chunks the stream into fixed-length sequences.
// The final partial chunk is padded with pad_id. No tokens are lost or
// reordered.
PackResult pack_sequences(const std::vector<std::vector<int32_t>>& token_streams,
                          int sequence_length, int32_t pad_id,
                          std::optional<int32_t> separator_id = std::nullopt);

// Masking policy: select non-special positions with mask_probability, then
// replace with the mask token / a random non-special token / the original
// (mask_token_share / random_token_share / keep_share). Shares must sum
// to 1.
struct MaskingPolicy {
    double mask_probability = 0.15;
    double mask_token_share = 0.8;
    double random_token_share = 0.1;
    double keep_share = 0.1;
    uint64_t seed = 0;

    void validate() const;
};

// What masking needs to know about the vocabulary. Special ids are never
// selected and never produced as random replacements.
struct MaskingVocab {
    int32_t vocab_size = 0;
    int32_t mask_id = 0;
    std::vector<int32_t> special_ids; // sorted ascending

    void validate() const;
    bool is_special(int32_t id) const;
};

struct MaskingResult {
    std::vector<int32_t> corrupted;
    std::vector<int32_t> target_positions;
    std::vector<int32_t> target_ids; // original ids at target positions
};

// Dynamic masking: the pattern is a pure function of (sequence contents,
// policy.seed, epoch_seed), so re-masking each epoch with a fresh
// epoch_seed yields fresh patterns while staying reproducible.
MaskingResult apply_masking(std::span<const int32_t> sequence, const MaskingPolicy& policy,
                            uint64_t epoch_seed, const MaskingVocab& vocab);

} // namespace lmprep::pretrain
