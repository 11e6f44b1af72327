#include "lmprep/bpe/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "lmprep/bpe/alphabet.hpp"
#include "lmprep/bpe/pre_split.hpp"
#include "lmprep/error.hpp"
#include "lmprep/util/hash.hpp"
#include "lmprep/util/log.hpp"
#include "lmprep/util/parallel.hpp"
#include "lmprep/util/rng.hpp"
#include "lmprep/util/unicode.hpp"

namespace lmprep::bpe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

uint64_t pair_key(uint32_t left, uint32_t right) { return (uint64_t(left) << 32) | right; }
uint32_t pair_left(uint64_t key) { return uint32_t(key >> 32); }
uint32_t pair_right(uint64_t key) { return uint32_t(key & 0xFFFFFFFFu); }

struct Word {
    std::vector<uint32_t> syms;
    int64_t count = 0;
};

// Pre-token frequency counting: each distinct piece is counted once and
// weighted by its frequency, which makes the merge loop independent of
// corpus length. Documents are dealt to workers in fixed batches and the
// per-worker maps are reduced by summation, so counts are identical for
// any worker count.
struct CountResult {
    std::unordered_map<std::string, int64_t> pretoken_counts;
    uint64_t corpus_bytes = 0;
    uint64_t document_count = 0;
    util::Hash128 fingerprint;
};

void count_document(std::string_view text, std::unordered_map<std::string, int64_t>& counts) {
    for (const Piece& piece : pre_split(text)) {
        std::string_view part = text.substr(piece.begin, piece.end - piece.begin);
        ++counts[std::string(part)];
    }
}

CountResult count_pretokens(TextSource& source, int workers) {
    CountResult result;
    source.reset();

    constexpr size_t kBatch = 512;
    std::vector<std::string> batch;
    batch.reserve(kBatch);
    uint64_t fp_state = 0x9E3779B97F4A7C15ULL;

    workers = util::effective_workers(workers);
    std::vector<std::unordered_map<std::string, int64_t>> locals{size_t(workers)};

    auto flush_batch = [&] {
        if (batch.empty()) return;
        if (workers <= 1) {
            for (const auto& doc : batch) count_document(doc, locals[0]);
        } else {
            util::parallel_for_index(size_t(workers), workers, [&](size_t w) {
                for (size_t i = w; i < batch.size(); i += size_t(workers))
                    count_document(batch[i], locals[w]);
            });
        }
        batch.clear();
    };

    while (auto doc = source.next()) {
        if (!util::utf8_valid(*doc))
            throw ParseError("training corpus contains invalid UTF-8");
        result.corpus_bytes += doc->size();
        ++result.document_count;
        uint64_t h = util::murmur3_64(*doc);
        fp_state = util::mix_seed(fp_state, h);
        batch.push_back(std::move(*doc));
        if (batch.size() >= kBatch) flush_batch();
    }
    flush_batch();

    result.pretoken_counts = std::move(locals[0]);
    for (size_t w = 1; w < locals.size(); ++w)
        for (auto& [piece, count] : locals[w]) result.pretoken_counts[piece] += count;
    result.fingerprint = util::Hash128{fp_state, util::mix_seed(fp_state, result.corpus_bytes)};
    return result;
}

struct HeapEntry {
    int64_t count;
    uint32_t left;
    uint32_t right;
};

} // namespace

void TrainOptions::validate() const {
    if (vocab_size <= 256 + Specials::count)
        throw InvalidArgument("vocab_size must exceed " + std::to_string(256 + Specials::count) +
                              " (base symbols + specials)");
    if (min_pair_frequency < 1) throw InvalidArgument("min_pair_frequency must be >= 1");
}

TrainResult train(TextSource& source, const TrainOptions& options) {
    options.validate();
    const ByteAlphabet& alphabet = ByteAlphabet::instance();

    auto count_start = Clock::now();
    CountResult counted = count_pretokens(source, options.workers);
    if (counted.document_count == 0) throw InvalidArgument("training corpus is empty");

    TrainResult result;
    result.corpus_bytes = counted.corpus_bytes;
    result.document_count = counted.document_count;
    result.distinct_pretokens = counted.pretoken_counts.size();
    result.corpus_fingerprint = counted.fingerprint.hex();
    result.count_seconds = seconds_since(count_start);

    auto merge_start = Clock::now();

    // canonical word order: sorted pre-token byte strings
    std::vector<std::pair<std::string, int64_t>> sorted_pretokens(
        counted.pretoken_counts.begin(), counted.pretoken_counts.end());
    counted.pretoken_counts.clear();
    std::sort(sorted_pretokens.begin(), sorted_pretokens.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<Word> words;
    words.reserve(sorted_pretokens.size());
    for (auto& [piece, count] : sorted_pretokens) {
        Word w;
        w.count = count;
        w.syms.reserve(piece.size());
        for (char c : piece) w.syms.push_back(uint32_t(uint8_t(c)));
        words.push_back(std::move(w));
    }
    sorted_pretokens.clear();
    sorted_pretokens.shrink_to_fit();

    // growing symbol table; ids 0..255 are the base alphabet
    std::vector<std::string> symbol_str;
    symbol_str.reserve(4096);
    for (int b = 0; b < 256; ++b) symbol_str.push_back(alphabet.symbol_str(uint8_t(b)));
    std::unordered_set<std::string> symbol_set(symbol_str.begin(), symbol_str.end());

    std::unordered_map<uint64_t, int64_t> pair_counts;
    std::unordered_map<uint64_t, std::vector<uint32_t>> pair_words;
    for (uint32_t w = 0; w < words.size(); ++w) {
        const Word& word = words[w];
        for (size_t i = 0; i + 1 < word.syms.size(); ++i) {
            uint64_t key = pair_key(word.syms[i], word.syms[i + 1]);
            auto [it, inserted] = pair_counts.emplace(key, word.count);
            if (!inserted) it->second += word.count;
            auto& list = pair_words[key];
            if (list.empty() || list.back() != w) list.push_back(w);
        }
    }

    // lazy max-heap: highest count wins, ties go to the lexicographically
    // lowest (left, right) symbol strings
    auto lower_priority = [&symbol_str](const HeapEntry& a, const HeapEntry& b) {
        if (a.count != b.count) return a.count < b.count;
        int cmp_left = symbol_str[a.left].compare(symbol_str[b.left]);
        if (cmp_left != 0) return cmp_left > 0;
        return symbol_str[a.right].compare(symbol_str[b.right]) > 0;
    };
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(lower_priority)> heap(
        lower_priority);
    for (const auto& [key, count] : pair_counts)
        if (count >= options.min_pair_frequency)
            heap.push(HeapEntry{count, pair_left(key), pair_right(key)});

    const size_t target_merges = size_t(options.vocab_size) - 256 - Specials::count;
    std::unordered_set<uint64_t> skipped; // pairs whose token already exists

    std::vector<uint32_t> word_list;
    std::unordered_map<uint64_t, int64_t> before; // touched pair counts, per merge
    std::vector<uint32_t> new_syms;

    while (result.merges.merges.size() < target_merges && !heap.empty()) {
        HeapEntry top = heap.top();
        heap.pop();
        uint64_t key = pair_key(top.left, top.right);
        if (skipped.count(key)) continue;
        auto live_it = pair_counts.find(key);
        int64_t live = live_it == pair_counts.end() ? 0 : live_it->second;
        if (live != top.count) {
            if (live >= options.min_pair_frequency)
                heap.push(HeapEntry{live, top.left, top.right});
            continue;
        }
        if (live < options.min_pair_frequency) continue;

        const std::string& left_str = symbol_str[top.left];
        const std::string& right_str = symbol_str[top.right];
        std::string merged_str = left_str + right_str;
        if (symbol_set.count(merged_str)) {
            // joining would recreate an existing token; leave these
            // occurrences unmerged and take the next pair
            skipped.insert(key);
            continue;
        }

        uint32_t merged_sym = uint32_t(symbol_str.size());
        symbol_str.push_back(merged_str);
        symbol_set.insert(std::move(merged_str));
        result.merges.merges.emplace_back(left_str, right_str);

        auto pw = pair_words.find(key);
        word_list.clear();
        if (pw != pair_words.end()) {
            word_list = std::move(pw->second);
            pair_words.erase(pw);
        }
        std::sort(word_list.begin(), word_list.end());
        word_list.erase(std::unique(word_list.begin(), word_list.end()), word_list.end());

        before.clear();
        for (uint32_t w : word_list) {
            Word& word = words[w];
            auto& syms = word.syms;

            bool contains = false;
            for (size_t i = 0; i + 1 < syms.size(); ++i) {
                if (syms[i] == top.left && syms[i + 1] == top.right) {
                    contains = true;
                    break;
                }
            }
            if (!contains) continue; // stale reference

            for (size_t i = 0; i + 1 < syms.size(); ++i) {
                uint64_t k = pair_key(syms[i], syms[i + 1]);
                before.emplace(k, pair_counts[k]); // keeps the earliest snapshot
                pair_counts[k] -= word.count;
            }

            new_syms.clear();
            size_t i = 0;
            while (i < syms.size()) {
                if (i + 1 < syms.size() && syms[i] == top.left && syms[i + 1] == top.right) {
                    new_syms.push_back(merged_sym);
                    i += 2;
                } else {
                    new_syms.push_back(syms[i]);
                    ++i;
                }
            }
            syms.assign(new_syms.begin(), new_syms.end());

            for (size_t j = 0; j + 1 < syms.size(); ++j) {
                uint64_t k = pair_key(syms[j], syms[j + 1]);
                // pairs not involving the new symbol were already adjacent in
                // the old sequence, so the subtraction pass snapshotted them;
                // emplace only inserts for genuinely new pairs (count was 0)
                before.emplace(k, 0);
                pair_counts[k] += word.count;
                if (syms[j] == merged_sym || syms[j + 1] == merged_sym) {
                    auto& list = pair_words[k];
                    if (list.empty() || list.back() != w) list.push_back(w);
                }
            }
        }

        // re-queue pairs whose count grew; shrunk ones fix themselves
        // lazily on pop
        for (const auto& [k, old_count] : before) {
            auto it = pair_counts.find(k);
            int64_t now = it == pair_counts.end() ? 0 : it->second;
            if (now <= 0) {
                if (it != pair_counts.end()) pair_counts.erase(it);
                continue;
            }
            if (now > old_count && now >= options.min_pair_frequency)
                heap.push(HeapEntry{now, pair_left(k), pair_right(k)});
        }
        pair_counts.erase(key);

        if (result.merges.merges.size() % 10000 == 0)
            LMPREP_LOG_DEBUG("bpe train: %zu/%zu merges", result.merges.merges.size(),
                             target_merges);
    }

    result.reached_target = result.merges.merges.size() == target_merges;
    if (!result.reached_target)
        LMPREP_LOG_WARN(
            "bpe train: corpus exhausted after %zu merges (target %zu); returning smaller "
            "vocabulary",
            result.merges.merges.size(), target_merges);

    result.vocab = Vocabulary::build(result.merges);
    result.merge_seconds = seconds_since(merge_start);
    return result;
}

} // namespace lmprep::bpe
