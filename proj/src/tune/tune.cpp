#include "lmprep/tune/tune.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "lmprep/error.hpp"
#include "lmprep/metrics/metrics.hpp"
#include "lmprep/util/hash.hpp"
#include "lmprep/util/log.hpp"
#include "lmprep/util/parallel.hpp"

namespace lmprep::tune {

namespace {

using nlohmann::json;

std::string timestamp_utc() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
}

pretrain::ScheduleSpec trial_schedule(const TrialConfig& config, const TaskData& data) {
    int64_t steps_per_epoch =
        std::max<int64_t>(1, int64_t((data.train_size() + size_t(config.batch_size) - 1) /
                                     size_t(config.batch_size)));
    return pretrain::linear_finetune_schedule(int64_t(config.max_epochs) * steps_per_epoch,
                                              config.learning_rate, config.warmup_fraction);
}

TrialConfig config_from_json(const json& j) {
    TrialConfig config;
    config.task = task_from_string(j.at("task").get<std::string>());
    config.batch_size = j.at("batch_size").get<int>();
    config.learning_rate = j.at("learning_rate").get<double>();
    config.max_epochs = j.at("max_epochs").get<int>();
    config.patience = j.at("patience").get<int>();
    config.warmup_fraction = j.at("warmup_fraction").get<double>();
    config.sequence_length = j.at("sequence_length").get<int>();
    config.seed = j.at("seed").get<uint64_t>();
    config.metric = metric_from_string(j.at("metric").get<std::string>());
    return config;
}

json trial_to_json(const TrialRecord& record) {
    json j = {
        {"kind", "trial"},
        {"config_hash", record.config.config_hash()},
        {"config", json::parse(record.config.canonical_json())},
        {"per_epoch_valid", record.per_epoch_valid},
        {"best_epoch", record.best_epoch}, // 0-based index into per_epoch_valid
        {"stop_reason", to_string(record.stop_reason)},
        {"wall_ms", record.wall_ms},
        {"started_at", record.started_at},
    };
    if (record.test_score) j["test_score"] = *record.test_score;
    if (!record.error_message.empty()) j["error"] = record.error_message;
    return j;
}

TrialRecord trial_from_json(const json& j) {
    TrialRecord record;
    record.config = config_from_json(j.at("config"));
    record.per_epoch_valid = j.at("per_epoch_valid").get<std::vector<double>>();
    record.best_epoch = j.at("best_epoch").get<int>();
    record.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    record.wall_ms = j.value("wall_ms", int64_t(0));
    record.started_at = j.value("started_at", std::string());
    record.error_message = j.value("error", std::string());
    if (j.contains("test_score") && !j["test_score"].is_null())
        record.test_score = j["test_score"].get<double>();
    return record;
}

// deterministic replay of a finished trial up to its best epoch, for the
// single test-set evaluation of the selected configuration
double rerun_and_score_test(const TrialRecord& record, Trainer& trainer, const TaskData& data) {
    pretrain::ScheduleSpec schedule = trial_schedule(record.config, data);
    std::unique_ptr<Trainer::State> state = trainer.init(record.config, data);
    for (int epoch = 0; epoch <= record.best_epoch; ++epoch)
        trainer.train_one_epoch(*state, record.config, data, schedule, epoch);
    return trainer.evaluate(*state, record.config, data, Split::test);
}

} // namespace

std::string_view to_string(Task task) {
    switch (task) {
    case Task::BMC: return "BMC";
    case Task::NEMO: return "NEMO";
    case Task::SMCD: return "SMCD";
    }
    return "SMCD";
}

Task task_from_string(std::string_view name) {
    if (name == "BMC") return Task::BMC;
    if (name == "NEMO") return Task::NEMO;
    if (name == "SMCD") return Task::SMCD;
    throw InvalidArgument("unknown task \"" + std::string(name) +
                          "\" (expected BMC, NEMO or SMCD)");
}

std::string_view to_string(Metric metric) {
    return metric == Metric::micro_f1 ? "micro_f1" : "macro_f1";
}

Metric metric_from_string(std::string_view name) {
    if (name == "micro_f1") return Metric::micro_f1;
    if (name == "macro_f1") return Metric::macro_f1;
    throw InvalidArgument("unknown metric \"" + std::string(name) + "\"");
}

Metric default_metric(Task task) {
    return task == Task::SMCD ? Metric::macro_f1 : Metric::micro_f1;
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
    case StopReason::early_stop: return "early_stop";
    case StopReason::epoch_cap: return "epoch_cap";
    case StopReason::error: return "error";
    }
    return "error";
}

StopReason stop_reason_from_string(std::string_view name) {
    if (name == "early_stop") return StopReason::early_stop;
    if (name == "epoch_cap") return StopReason::epoch_cap;
    if (name == "error") return StopReason::error;
    throw InvalidArgument("unknown stop reason \"" + std::string(name) + "\"");
}

void TrialConfig::validate() const {
    if (batch_size < 1) throw InvalidArgument("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
    if (max_epochs < 1) throw InvalidArgument("max_epochs must be at least 1");
    if (patience < 1) throw InvalidArgument("patience must be at least 1");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
        throw InvalidArgument("warmup_fraction must lie in [0, 1)");
    if (sequence_length < 0) throw InvalidArgument("sequence_length cannot be negative");
}

std::string TrialConfig::canonical_json() const {
    json j = {
        {"task", to_string(task)},
        {"batch_size", batch_size},
        {"learning_rate", learning_rate},
        {"max_epochs", max_epochs},
        {"patience", patience},
        {"warmup_fraction", warmup_fraction},
        {"sequence_length", sequence_length},
        {"seed", seed},
        {"metric", to_string(metric)},
    };
    return j.dump(); // keys come out sorted, numbers in shortest round-trip form
}

std::string TrialConfig::config_hash() const { return util::murmur3_128(canonical_json()).hex(); }

double TrialRecord::best_valid() const {
    if (best_epoch < 0 || size_t(best_epoch) >= per_epoch_valid.size())
        return -std::numeric_limits<double>::infinity();
    return per_epoch_valid[size_t(best_epoch)];
}

void TaskData::validate() const {
    if (is_ner()) {
        if (ner_train.empty() || ner_valid.empty() || ner_test.empty())
            throw InvalidArgument(std::string(to_string(task)) +
                                  " needs non-empty tagged train/valid/test splits");
    } else {
        if (cls_train.empty() || cls_valid.empty() || cls_test.empty())
            throw InvalidArgument(std::string(to_string(task)) +
                                  " needs non-empty labeled train/valid/test splits");
    }
}

void GridOptions::validate() const {
    if (batch_sizes.empty()) throw InvalidArgument("batch_sizes must not be empty");
    if (learning_rates.empty()) throw InvalidArgument("learning_rates must not be empty");
    for (int b : batch_sizes)
        if (b < 1) throw InvalidArgument("batch sizes must be positive");
    for (double lr : learning_rates)
        if (!(lr > 0.0)) throw InvalidArgument("learning rates must be positive");
    if (max_epochs < 1) throw InvalidArgument("max_epochs must be at least 1");
    if (patience < 1) throw InvalidArgument("patience must be at least 1");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
        throw InvalidArgument("warmup_fraction must lie in [0, 1)");
}

std::vector<TrialConfig> enumerate_grid(const std::vector<int>& batch_sizes,
                                        const std::vector<double>& learning_rates, Task task) {
    if (batch_sizes.empty() || learning_rates.empty())
        throw InvalidArgument("grid axes must not be empty");
    std::vector<int> batches = batch_sizes;
    std::vector<double> rates = learning_rates;
    std::sort(batches.begin(), batches.end());
    batches.erase(std::unique(batches.begin(), batches.end()), batches.end());
    std::sort(rates.begin(), rates.end());
    rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

    std::vector<TrialConfig> out;
    out.reserve(batches.size() * rates.size());
    for (int batch : batches) {
        for (double lr : rates) {
            TrialConfig config;
            config.task = task;
            config.batch_size = batch;
            config.learning_rate = lr;
            config.metric = default_metric(task);
            out.push_back(config);
        }
    }
    return out;
}

int compute_sequence_length(const TaskData& data) {
    data.validate();
    auto cls_lengths = [](const std::vector<bench::LabeledText>& split) {
        std::vector<int> out;
        out.reserve(split.size());
        for (const auto& sample : split) out.push_back(int(sample.tokens.size()));
        return out;
    };
    auto ner_lengths = [](const std::vector<bench::TaggedSentence>& split) {
        std::vector<int> out;
        out.reserve(split.size());
        for (const auto& sentence : split) out.push_back(int(sentence.tokens.size()));
        return out;
    };
    std::vector<metrics::LengthStats> stats;
    if (data.is_ner()) {
        for (const auto* split : {&data.ner_train, &data.ner_valid, &data.ner_test}) {
            std::vector<int> lengths = ner_lengths(*split);
            stats.push_back(metrics::length_stats(lengths));
        }
    } else {
        for (const auto* split : {&data.cls_train, &data.cls_valid, &data.cls_test}) {
            std::vector<int> lengths = cls_lengths(*split);
            stats.push_back(metrics::length_stats(lengths));
        }
    }
    return metrics::select_bucket(stats);
}

TrialRecord run_trial(const TrialConfig& config, Trainer& trainer, const TaskData& data) {
    config.validate();
    TrialRecord record;
    record.config = config;
    record.started_at = timestamp_utc();
    auto start = std::chrono::steady_clock::now();

    try {
        pretrain::ScheduleSpec schedule = trial_schedule(config, data);
        std::unique_ptr<Trainer::State> state = trainer.init(config, data);

        double best = -std::numeric_limits<double>::infinity();
        int epochs_without_improvement = 0;
        bool stopped_early = false;
        for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
            trainer.train_one_epoch(*state, config, data, schedule, epoch);
            double score = trainer.evaluate(*state, config, data, Split::valid);
            record.per_epoch_valid.push_back(score);
            if (score > best) {
                best = score;
                record.best_epoch = epoch;
                epochs_without_improvement = 0;
            } else if (++epochs_without_improvement >= config.patience) {
                stopped_early = true;
                break;
            }
        }
        record.stop_reason = stopped_early ? StopReason::early_stop : StopReason::epoch_cap;
    } catch (const std::exception& e) {
        record.stop_reason = StopReason::error;
        record.error_message = e.what();
        LMPREP_LOG_WARN("trial %s failed: %s", record.config.config_hash().c_str(), e.what());
    }

    record.wall_ms = elapsed_ms(start);
    return record;
}

const TrialRecord& select_best(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw InvalidArgument("no trial records to select from");
    const TrialRecord* best = nullptr;
    for (const TrialRecord& record : records) {
        if (record.stop_reason == StopReason::error || record.per_epoch_valid.empty()) continue;
        if (!best) {
            best = &record;
            continue;
        }
        double a = record.best_valid(), b = best->best_valid();
        bool wins = false;
        if (a > b)
            wins = true;
        else if (a == b) {
            if (record.config.learning_rate < best->config.learning_rate)
                wins = true;
            else if (record.config.learning_rate == best->config.learning_rate) {
                if (record.config.batch_size < best->config.batch_size)
                    wins = true;
                else if (record.config.batch_size == best->config.batch_size &&
                         record.config.seed < best->config.seed)
                    wins = true;
                // otherwise the earlier record stands
            }
        }
        if (wins) best = &record;
    }
    if (!best) throw Error("every trial failed; nothing to select");
    return *best;
}

Journal::Journal(std::filesystem::path file) : file_(std::move(file)) {}

std::map<std::string, TrialRecord> Journal::completed_trials() const {
    std::map<std::string, TrialRecord> out;
    std::ifstream in(file_, std::ios::binary);
    if (!in) return out; // no journal yet
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError("invalid journal line in " + file_.string(), lineno);
        if (j.value("kind", "") != "trial") continue;
        try {
            TrialRecord record = trial_from_json(j);
            out.emplace(j.at("config_hash").get<std::string>(), std::move(record));
        } catch (const json::exception& e) {
            throw ParseError("invalid trial line in " + file_.string() + ": " + e.what(), lineno);
        }
    }
    if (in.bad()) throw IoError("read failed for " + file_.string());
    return out;
}

std::vector<Journal::Selection> Journal::selections() const {
    std::vector<Selection> out;
    std::ifstream in(file_, std::ios::binary);
    if (!in) return out;
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError("invalid journal line in " + file_.string(), lineno);
        if (j.value("kind", "") != "selection") continue;
        try {
            Selection sel;
            sel.task = task_from_string(j.at("task").get<std::string>());
            sel.config_hash = j.at("config_hash").get<std::string>();
            sel.best_valid = j.at("best_valid").get<double>();
            sel.test_score = j.at("test_score").get<double>();
            out.push_back(std::move(sel));
        } catch (const json::exception& e) {
            throw ParseError("invalid selection line in " + file_.string() + ": " + e.what(),
                             lineno);
        }
    }
    if (in.bad()) throw IoError("read failed for " + file_.string());
    return out;
}

void Journal::append_trial(const TrialRecord& record) {
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open journal " + file_.string());
    out << trial_to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failed for journal " + file_.string());
}

void Journal::append_selection(const Selection& selection) {
    json j = {
        {"kind", "selection"},
        {"task", to_string(selection.task)},
        {"config_hash", selection.config_hash},
        {"best_valid", selection.best_valid},
        {"test_score", selection.test_score},
    };
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open journal " + file_.string());
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failed for journal " + file_.string());
}

GridResult run_grid(Task task, const TaskData& data, Trainer& trainer, const GridOptions& options,
                    Journal* journal) {
    options.validate();

    std::vector<TrialConfig> base = enumerate_grid(options.batch_sizes, options.learning_rates,
                                                   task);
    int sequence_length = data.train_size() > 0 ? compute_sequence_length(data) : 0;
    std::vector<uint64_t> seeds = options.replicate_seeds;
    if (seeds.empty()) seeds.push_back(options.seed);

    struct Slot {
        TrialConfig config;
        std::string hash;
        std::optional<TrialRecord> record;
    };
    std::vector<Slot> slots;
    slots.reserve(base.size() * seeds.size());
    for (TrialConfig config : base) {
        config.max_epochs = options.max_epochs;
        config.patience = options.patience;
        config.warmup_fraction = options.warmup_fraction;
        config.sequence_length = sequence_length;
        for (uint64_t seed : seeds) {
            config.seed = seed;
            slots.push_back(Slot{config, config.config_hash(), std::nullopt});
        }
    }

    // resume: anything already journaled is taken as done, errors included
    if (journal) {
        std::map<std::string, TrialRecord> done = journal->completed_trials();
        for (Slot& slot : slots) {
            auto it = done.find(slot.hash);
            if (it != done.end()) slot.record = it->second;
        }
    }

    int workers = util::effective_workers(options.workers);
    if (!trainer.concurrent_safe()) workers = 1;

    std::vector<size_t> pending;
    for (size_t i = 0; i < slots.size(); ++i)
        if (!slots[i].record) pending.push_back(i);

    // waves of at most `workers` trials; journal lines land in enumeration
    // order so repeated runs produce identical files
    for (size_t start = 0; start < pending.size(); start += size_t(workers)) {
        size_t wave = std::min(size_t(workers), pending.size() - start);
        util::parallel_for_index(wave, int(wave), [&](size_t k) {
            Slot& slot = slots[pending[start + k]];
            slot.record = run_trial(slot.config, trainer, data);
        });
        if (journal)
            for (size_t k = 0; k < wave; ++k)
                journal->append_trial(*slots[pending[start + k]].record);
    }

    GridResult result;
    result.records.reserve(slots.size());
    for (Slot& slot : slots) {
        result.wall_ms_total += slot.record->wall_ms;
        result.records.push_back(std::move(*slot.record));
    }

    const TrialRecord& best = select_best(result.records);
    result.selected = best;
    result.selected.test_score = rerun_and_score_test(best, trainer, data);

    if (journal) {
        Journal::Selection sel;
        sel.task = task;
        sel.config_hash = best.config.config_hash();
        sel.best_valid = best.best_valid();
        sel.test_score = *result.selected.test_score;
        bool already = false;
        for (const Journal::Selection& existing : journal->selections())
            already = already || (existing.task == sel.task &&
                                  existing.config_hash == sel.config_hash &&
                                  existing.test_score == sel.test_score);
        if (!already) journal->append_selection(sel);
    }
    return result;
}

ModelResults results_from_journal(const Journal& journal, const std::string& model,
                                  const std::string& size_class) {
    ModelResults out;
    out.model = model;
    out.size_class = size_class;
    std::map<std::string, TrialRecord> trials = journal.completed_trials();
    for (const Journal::Selection& sel : journal.selections()) { // later lines override
        out.test_scores[sel.task] = sel.test_score;
        auto it = trials.find(sel.config_hash);
        if (it != trials.end())
            out.winners[sel.task] = {it->second.config.batch_size,
                                     it->second.config.learning_rate};
        else
            out.winners.erase(sel.task); // stale winners must not outlive their selection
    }
    return out;
}

WallTimeSummary track_wall_time(const std::vector<std::pair<Task, int64_t>>& trial_times) {
    WallTimeSummary summary;
    for (const auto& [task, ms] : trial_times) {
        summary.per_task_ms[task] += ms;
        summary.total_ms += ms;
    }
    return summary;
}

std::string format_hours_minutes(int64_t ms) {
    if (ms < 0) ms = 0;
    int64_t minutes = ms / 60000;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld:%02lld", (long long)(minutes / 60),
                  (long long)(minutes % 60));
    return buf;
}

} // namespace lmprep::tune
