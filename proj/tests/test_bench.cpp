#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "lmprep/bench/bench.hpp"
#include "lmprep/error.hpp"

using namespace lmprep;
using bench::LabeledText;
using bench::Polarity;
using bench::TaggedSentence;

namespace {

LabeledText sample(const std::string& text, Polarity label) {
    LabeledText item;
    std::string word;
    for (char c : text + " ") {
        if (c == ' ') {
            if (!word.empty()) item.tokens.push_back(word);
            word.clear();
        } else {
            word += c;
        }
    }
    item.label = label;
    return item;
}

std::vector<LabeledText> numbered_samples(int n, const std::string& prefix) {
    std::vector<LabeledText> out;
    out.reserve(size_t(n));
    for (int i = 0; i < n; ++i)
        out.push_back(sample(prefix + " sentence number " + std::to_string(i),
                             Polarity(i % bench::kPolarityClasses)));
    return out;
}

} // namespace

TEST_SUITE("bench") {

TEST_CASE("polarity names round trip and bad names fail") {
    for (Polarity p : {Polarity::positive, Polarity::neutral, Polarity::negative})
        CHECK(bench::polarity_from_string(bench::to_string(p)) == p);
    CHECK_THROWS_AS(bench::polarity_from_string("meh"), InvalidArgument);
}

TEST_CASE("sentiment tsv loads rows and rejects broken ones") {
    testutil::TempDir dir("tsv");
    testutil::write_file(dir / "ok.tsv",
                         "a fine day\tpositive\n"
                         "nothing much\tneutral\n"
                         "awful stuff\tnegative\n");
    std::vector<LabeledText> rows = bench::load_sentiment_tsv(dir / "ok.tsv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].tokens == std::vector<std::string>{"a", "fine", "day"});
    CHECK(rows[0].label == Polarity::positive);
    CHECK(rows[2].label == Polarity::negative);

    testutil::write_file(dir / "bad_label.tsv", "text\tpositive\nmore text\tmaybe\n");
    try {
        bench::load_sentiment_tsv(dir / "bad_label.tsv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }

    testutil::write_file(dir / "no_tab.tsv", "just text no label\n");
    CHECK_THROWS_AS(bench::load_sentiment_tsv(dir / "no_tab.tsv"), ParseError);
    testutil::write_file(dir / "empty_text.tsv", "\tneutral\n");
    CHECK_THROWS_AS(bench::load_sentiment_tsv(dir / "empty_text.tsv"), ParseError);
    CHECK_THROWS_AS(bench::load_sentiment_tsv(dir / "missing.tsv"), IoError);
}

TEST_CASE("conll files parse sentences and report bio violations") {
    testutil::TempDir dir("conll");
    testutil::write_file(dir / "data.conll",
                         "John B-PER\n"
                         "Smith I-PER\n"
                         "visited O\n"
                         "Paris B-LOC\n"
                         "\n"
                         "strange I-ORG\n"
                         "case O\n");
    bench::ConllData data = bench::load_conll(dir / "data.conll");
    REQUIRE(data.sentences.size() == 2);
    CHECK(data.sentences[0].tokens ==
          std::vector<std::string>{"John", "Smith", "visited", "Paris"});
    CHECK(data.sentences[0].tags ==
          std::vector<std::string>{"B-PER", "I-PER", "O", "B-LOC"});
    REQUIRE(data.violations.size() == 1);
    CHECK(data.violations[0].sentence == 1);
    CHECK(data.violations[0].position == 0);
    CHECK(data.violations[0].tag == "I-ORG");
    CHECK_FALSE(data.repaired);
    CHECK(data.sentences[1].tags[0] == "I-ORG"); // untouched without repair

    bench::ConllData repaired = bench::load_conll(dir / "data.conll", true);
    CHECK(repaired.repaired);
    CHECK(repaired.sentences[1].tags[0] == "B-ORG");
    CHECK(repaired.violations.size() == 1); // still reported

    testutil::write_file(dir / "bad.conll", "token NOT-A-TAG\n");
    CHECK_THROWS_AS(bench::load_conll(dir / "bad.conll"), ParseError);
    testutil::write_file(dir / "onecol.conll", "loneword\n");
    CHECK_THROWS_AS(bench::load_conll(dir / "onecol.conll"), ParseError);
}

TEST_CASE("conll save and load round trip") {
    testutil::TempDir dir("conll_rt");
    std::vector<TaggedSentence> sentences = {
        {{"Tel", "Aviv", "is", "big"}, {"B-LOC", "I-LOC", "O", "O"}},
        {{"ok"}, {"O"}},
    };
    bench::save_conll(dir / "out.conll", sentences);
    bench::ConllData back = bench::load_conll(dir / "out.conll");
    CHECK(back.sentences == sentences);
    CHECK(back.violations.empty());
}

TEST_CASE("bio violation scan and repair") {
    std::vector<std::string> ok = {"O", "B-PER", "I-PER", "O", "B-LOC"};
    CHECK(bench::bio_violations(ok).empty());

    std::vector<std::string> unheaded = {"O", "I-PER"};
    CHECK(bench::bio_violations(unheaded) == std::vector<size_t>{1});
    bench::bio_repair(unheaded);
    CHECK(unheaded == std::vector<std::string>{"O", "B-PER"});

    // an I following a different entity type has no head either
    std::vector<std::string> switched = {"B-PER", "I-LOC", "I-LOC"};
    CHECK(bench::bio_violations(switched) == std::vector<size_t>{1});
    bench::bio_repair(switched);
    CHECK(switched == std::vector<std::string>{"B-PER", "B-LOC", "I-LOC"});
    CHECK(bench::bio_violations(switched).empty());

    std::vector<std::string> leading = {"I-ORG", "I-ORG"};
    CHECK(bench::bio_violations(leading) == std::vector<size_t>{0});
    bench::bio_repair(leading);
    CHECK(leading == std::vector<std::string>{"B-ORG", "I-ORG"});
}

TEST_CASE("labeled and tagged jsonl round trips") {
    testutil::TempDir dir("jsonl_rt");
    std::vector<LabeledText> labeled = numbered_samples(7, "jsonl");
    bench::save_labeled_jsonl(dir / "cls.jsonl", labeled);
    CHECK(bench::load_labeled_jsonl(dir / "cls.jsonl") == labeled);

    std::vector<TaggedSentence> tagged = {
        {{"a", "b"}, {"O", "B-PER"}},
        {{"\xD7\xA9\xD7\x9C\xD7\x95\xD7\x9D"}, {"B-LOC"}},
    };
    bench::save_tagged_jsonl(dir / "ner.jsonl", tagged);
    CHECK(bench::load_tagged_jsonl(dir / "ner.jsonl") == tagged);

    CHECK_THROWS_AS(bench::load_labeled_jsonl(dir / "missing.jsonl"), IoError);
}

TEST_CASE("three way split hits the 72/8/20 shares and keeps order") {
    std::vector<LabeledText> data = numbered_samples(500, "split");
    bench::SplitSpec spec;
    spec.seed = 11;
    bench::ThreeWaySplit<LabeledText> split = bench::split_three_way(data, spec);

    CHECK(split.train.size() == 360);
    CHECK(split.valid.size() == 40);
    CHECK(split.test.size() == 100);

    // each output preserves the input's relative order
    auto index_of = [&](const LabeledText& item) {
        return std::stoi(item.tokens.back());
    };
    for (const auto* part : {&split.train, &split.valid, &split.test})
        for (size_t i = 1; i < part->size(); ++i)
            CHECK(index_of((*part)[i - 1]) < index_of((*part)[i]));

    // disjoint and complete
    std::set<std::string> seen;
    for (const auto* part : {&split.train, &split.valid, &split.test})
        for (const auto& item : *part) seen.insert(item.tokens.back());
    CHECK(seen.size() == 500);

    // deterministic per seed
    bench::ThreeWaySplit<LabeledText> again = bench::split_three_way(data, spec);
    CHECK(again.train == split.train);
    CHECK(again.valid == split.valid);
    CHECK(again.test == split.test);

    spec.seed = 12;
    bench::ThreeWaySplit<LabeledText> other = bench::split_three_way(data, spec);
    CHECK(other.train != split.train);
}

TEST_CASE("carve_validation pulls the valid share from a test-free pool") {
    std::vector<LabeledText> pool = numbered_samples(400, "carve");
    bench::SplitSpec spec;
    spec.official_test = true;
    spec.seed = 3;
    auto [train, valid] = bench::carve_validation(pool, spec);
    // valid share of the pool is 0.08 / (0.72 + 0.08) = 10%
    CHECK(valid.size() == 40);
    CHECK(train.size() == 360);

    CHECK_THROWS_AS(bench::split_three_way(pool, spec), InvalidArgument);
}

TEST_CASE("split spec fractions must be sane") {
    bench::SplitSpec bad;
    bad.train_fraction = 0.9;
    bad.valid_fraction = 0.3;
    bad.test_fraction = 0.2;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bench::SplitSpec negative;
    negative.train_fraction = -0.1;
    negative.valid_fraction = 0.9;
    negative.test_fraction = 0.2;
    CHECK_THROWS_AS(negative.validate(), InvalidArgument);
}

TEST_CASE("leakage audit finds texts shared across splits") {
    std::vector<LabeledText> train = numbered_samples(50, "leak_train");
    std::vector<LabeledText> valid = numbered_samples(20, "leak_valid");
    std::vector<LabeledText> test = numbered_samples(30, "leak_test");

    bench::LeakageReport clean = bench::audit_leakage(
        {{"train", &train}, {"valid", &valid}, {"test", &test}});
    CHECK(clean.clean());

    // plant one train/test collision and one three-way collision
    test.push_back(train[7]);
    valid.push_back(train[9]);
    test.push_back(train[9]);
    bench::LeakageReport dirty = bench::audit_leakage(
        {{"train", &train}, {"valid", &valid}, {"test", &test}});
    REQUIRE(dirty.collisions.size() == 2);

    bool saw_two_way = false, saw_three_way = false;
    for (const auto& collision : dirty.collisions) {
        if (collision.text == "leak_train sentence number 7") {
            saw_two_way = true;
            CHECK(collision.occurrences.size() == 2);
        }
        if (collision.text == "leak_train sentence number 9") {
            saw_three_way = true;
            CHECK(collision.occurrences.size() == 3);
        }
    }
    CHECK(saw_two_way);
    CHECK(saw_three_way);
}

TEST_CASE("split manifest records the spec and counts") {
    testutil::TempDir dir("split_manifest");
    bench::SplitSpec spec;
    spec.seed = 21;
    bench::save_split_manifest(dir / "split-manifest.json", spec,
                               {{"train", 360}, {"valid", 40}, {"test", 100}});
    std::string text = testutil::read_file(dir / "split-manifest.json");
    CHECK(text.find("\"seed\"") != std::string::npos);
    CHECK(text.find("360") != std::string::npos);
    CHECK(text.find("0.72") != std::string::npos);
}

} // TEST_SUITE
