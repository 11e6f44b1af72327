#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmprep/bench/bench.hpp"
#include "lmprep/pretrain/prep.hpp"

namespace lmprep::tune {

enum class Task { BMC, NEMO, SMCD };
std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

// validation/test metric a trial is scored with; fixed per task (span
// micro-F1 for the two NER tasks, label macro-F1 for sentiment) and
// recorded in every trial so archived journals are self-describing
enum class Metric { micro_f1, macro_f1 };
std::string_view to_string(Metric metric);
Metric metric_from_string(std::string_view name);
Metric default_metric(Task task);

struct TrialConfig {
    Task task = Task::SMCD;
    int batch_size = 16;
    double learning_rate = 1e-5;
    int max_epochs = 30;
    int patience = 3;
    double warmup_fraction = 0.10;
    int sequence_length = 0;
    uint64_t seed = 0;
    Metric metric = Metric::macro_f1;

    void validate() const;
    std::string canonical_json() const; // sorted keys; the hash input
    std::string config_hash() const;    // 128-bit content hash, hex
};

enum class StopReason { early_stop, epoch_cap, error };
std::string_view to_string(StopReason reason);
StopReason stop_reason_from_string(std::string_view name);

struct TrialRecord {
    TrialConfig config;
    std::vector<double> per_epoch_valid;
    int best_epoch = -1; // argmax of per_epoch_valid, first on ties
    std::optional<double> test_score; // set only on the selected trial
    StopReason stop_reason = StopReason::error;
    std::string error_message; // only meaningful for StopReason::error
    int64_t wall_ms = 0;       // volatile across runs
    std::string started_at;    // UTC timestamp, volatile across runs

    double best_valid() const; // -inf when no epoch completed
};

// The splits one task hands to a trainer. NER tasks fill the tagged
// vectors, sentiment fills the labeled ones.
struct TaskData {
    Task task = Task::SMCD;
    std::vector<bench::LabeledText> cls_train, cls_valid, cls_test;
    std::vector<bench::TaggedSentence> ner_train, ner_valid, ner_test;

    bool is_ner() const { return task != Task::SMCD; }
    size_t train_size() const { return is_ner() ? ner_train.size() : cls_train.size(); }
    void validate() const;
};

enum class Split { train, valid, test };

// Pluggable fine-tuning backend. Implementations must be deterministic
// functions of (config.seed, data); evaluate never mutates state.
class Trainer {
  public:
    struct State {
        virtual ~State() = default;
    };

    virtual ~Trainer() = default;
    virtual std::string_view name() const = 0;
    virtual bool concurrent_safe() const = 0;
    virtual std::unique_ptr<State> init(const TrialConfig& config, const TaskData& data) = 0;
    virtual void train_one_epoch(State& state, const TrialConfig& config, const TaskData& data,
                                 const pretrain::ScheduleSpec& schedule, int epoch) = 0;
    virtual double evaluate(const State& state, const TrialConfig& config, const TaskData& data,
                            Split split) const = 0;
};

// Scripted trainer for exercising the harness. The default score shape is
// a deterministic single-peak curve derived from the config, so early
// stopping, selection and reporting can be traced by hand when the test
// injects its own functions.
class MockTrainer : public Trainer {
  public:
    using ValidFn = std::function<double(const TrialConfig&, int /*epoch*/)>;
    using TestFn = std::function<double(const TrialConfig&)>;

    MockTrainer();
    MockTrainer(ValidFn valid_fn, TestFn test_fn);

    std::string_view name() const override { return "mock"; }
    bool concurrent_safe() const override { return true; }
    std::unique_ptr<State> init(const TrialConfig&, const TaskData&) override;
    void train_one_epoch(State&, const TrialConfig&, const TaskData&,
                         const pretrain::ScheduleSpec&, int epoch) override;
    double evaluate(const State&, const TrialConfig&, const TaskData&, Split) const override;

    void fail_at_epoch(int epoch) { fail_at_epoch_ = epoch; } // simulate a crash

  private:
    ValidFn valid_fn_;
    TestFn test_fn_;
    int fail_at_epoch_ = -1;
};

// Bag-of-subwords logistic model, trained with plain SGD under the trial's
// learning-rate schedule. Classification scores the label directly; NER
// classifies each token from its own and neighboring subword bags, then
// repairs the tag sequence and scores spans. Small, deterministic, and
// real enough to give the harness meaningful score differences.
class LinearProbeTrainer : public Trainer {
  public:
    std::string_view name() const override { return "probe"; }
    bool concurrent_safe() const override { return true; }
    std::unique_ptr<State> init(const TrialConfig&, const TaskData&) override;
    void train_one_epoch(State&, const TrialConfig&, const TaskData&,
                         const pretrain::ScheduleSpec&, int epoch) override;
    double evaluate(const State&, const TrialConfig&, const TaskData&, Split) const override;
};

// ---- grid enumeration and trials ----

struct GridOptions {
    std::vector<int> batch_sizes = {16, 32};
    std::vector<double> learning_rates = {5e-6, 7e-6, 1e-5, 2e-5, 5e-5};
    int max_epochs = 30;
    int patience = 3;
    double warmup_fraction = 0.10;
    uint64_t seed = 0;
    // optional seed replication: when non-empty, every grid point runs
    // once per listed seed (default mode is the single shared seed)
    std::vector<uint64_t> replicate_seeds;
    int workers = 1;
    void validate() const;
};

// Cartesian product, batch sizes ascending then learning rates ascending.
std::vector<TrialConfig> enumerate_grid(const std::vector<int>& batch_sizes,
                                        const std::vector<double>& learning_rates, Task task);

// Token-count statistics of all three splits run through the bucket rule,
// giving the padded sequence length for the task.
int compute_sequence_length(const TaskData& data);

// Trains until the validation score has not improved (strictly) for
// `patience` consecutive epochs, or max_epochs is reached. The schedule
// is the linear-warmup/linear-decay ramp laid out over the full
// max_epochs horizon. A throwing trainer yields stop_reason=error.
TrialRecord run_trial(const TrialConfig& config, Trainer& trainer, const TaskData& data);

// Highest best-validation score; ties prefer smaller learning rate, then
// smaller batch size, then earlier position. Error trials never win.
const TrialRecord& select_best(const std::vector<TrialRecord>& records);

// ---- journal ----

// Append-only JSONL journal. One "trial" line per finished TrialRecord,
// keyed by config hash for idempotent resume; one "selection" line per
// completed grid recording the winner and its test score.
class Journal {
  public:
    explicit Journal(std::filesystem::path file);

    const std::filesystem::path& path() const { return file_; }

    // loads existing lines; missing file = empty journal
    std::map<std::string, TrialRecord> completed_trials() const;
    struct Selection {
        Task task = Task::SMCD;
        std::string config_hash;
        double best_valid = 0.0;
        double test_score = 0.0;
    };
    std::vector<Selection> selections() const;

    void append_trial(const TrialRecord& record);
    void append_selection(const Selection& selection);

  private:
    std::filesystem::path file_;
};

// ---- grid orchestration ----

struct GridResult {
    std::vector<TrialRecord> records; // enumeration order, resumed ones included
    TrialRecord selected;             // with test_score filled in
    int64_t wall_ms_total = 0;
};

// Runs every grid point not yet in the journal (parallel up to
// options.workers when the trainer allows it, journal lines appended in
// enumeration order), selects the winner, re-runs it to its best epoch
// for the one test-set evaluation, and journals the selection.
GridResult run_grid(Task task, const TaskData& data, Trainer& trainer, const GridOptions& options,
                    Journal* journal);

// ---- reporting ----

struct ModelResults {
    std::string model;      // row label
    std::string size_class; // rows sharing a class compete for bold/underline
    std::map<Task, double> test_scores; // headline score per task, 0..1
    std::map<Task, std::pair<int, double>> winners; // (batch size, learning rate)
};

// Collapses a journal into one ModelResults row (latest selection per task
// wins; winner configs come from the matching trial lines).
ModelResults results_from_journal(const Journal& journal, const std::string& model,
                                  const std::string& size_class);

// Table layout: Model, BMC, NEMO, AVG (NER), SMCD, AVG. Scores are
// percentages with two decimals. Markdown marks the best score per column
// bold and the runner-up underlined within each size class; CSV stays
// plain. A companion table lists the winning (BS, LR) per task.
std::string render_report_csv(const std::vector<ModelResults>& rows);
std::string render_report_md(const std::vector<ModelResults>& rows);

// ---- wall-clock accounting ----

struct WallTimeSummary {
    std::map<Task, int64_t> per_task_ms;
    int64_t total_ms = 0;
};

WallTimeSummary track_wall_time(const std::vector<std::pair<Task, int64_t>>& trial_times);
std::string format_hours_minutes(int64_t ms); // floor to whole minutes, "H:MM"

} // namespace lmprep::tune
