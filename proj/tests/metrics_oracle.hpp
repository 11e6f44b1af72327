#pragma once

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lmprep/metrics/metrics.hpp"

namespace testutil {

// All syntactically valid BIO tag sequences of the given length over the
// given entity types, generated by walking the tag automaton.
inline std::vector<std::vector<std::string>> all_bio_sequences(
    int length, const std::vector<std::string>& types) {
    std::vector<std::vector<std::string>> done;
    std::vector<std::string> current;

    auto extend = [&](auto&& self) -> void {
        if (int(current.size()) == length) {
            done.push_back(current);
            return;
        }
        auto push = [&](const std::string& tag) {
            current.push_back(tag);
            self(self);
            current.pop_back();
        };
        push("O");
        for (const std::string& type : types) push("B-" + type);
        if (!current.empty()) {
            const std::string& prev = current.back();
            if (prev != "O") push("I-" + prev.substr(2));
        }
    };
    extend(extend);
    return done;
}

// Set-arithmetic span F1 for one gold/predicted pair of span lists,
// written independently of the library implementation.
struct OracleF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;
};

inline OracleF1 oracle_span_f1(const std::vector<lmprep::metrics::Span>& gold,
                               const std::vector<lmprep::metrics::Span>& predicted) {
    using Key = std::tuple<int, int, std::string>;
    std::set<Key> gold_set, pred_set;
    for (const auto& s : gold) gold_set.insert({s.start, s.end, s.type});
    for (const auto& s : predicted) pred_set.insert({s.start, s.end, s.type});

    size_t tp = 0;
    for (const Key& k : pred_set)
        if (gold_set.count(k)) ++tp;

    OracleF1 out;
    if (gold_set.empty() && pred_set.empty()) {
        out.precision = out.recall = out.f1 = 1.0;
        out.degenerate = true;
        return out;
    }
    out.precision = pred_set.empty() ? 0.0 : double(tp) / double(pred_set.size());
    out.recall = gold_set.empty() ? 0.0 : double(tp) / double(gold_set.size());
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

} // namespace testutil
