#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "citywell/affect.hpp"
#include "citywell/corpus.hpp"
#include "citywell/lexicon.hpp"
#include "citywell/rng.hpp"
#include "citywell/series.hpp"
#include "support/tmpdir.hpp"

using namespace citywell;

namespace {

DailySeries series_of(Day start, std::initializer_list<double> values) {
    DailySeries s;
    Day d = start;
    for (double v : values) s.push(d++, v);
    return s;
}

Record make_record(std::string id, std::string community, int64_t t, std::string body,
                   std::string author = "u1") {
    Record r;
    r.id = id;
    r.author = std::move(author);
    r.created_at = t;
    r.body = std::move(body);
    r.community = std::move(community);
    r.kind = RecordKind::submission;
    r.link_id = r.id;
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// DailySeries and z-normalization
// ---------------------------------------------------------------------------

TEST(Series, PushEnforcesOrder) {
    DailySeries s;
    s.push(5, 1.0);
    EXPECT_THROW(s.push(5, 2.0), InputError);
    EXPECT_THROW(s.push(4, 2.0), InputError);
    s.push(9, 2.0);
    EXPECT_EQ(s.find(9), 1);
    EXPECT_EQ(s.find(7), -1);
}

TEST(Series, SliceKeepsWindowOnly) {
    auto s = series_of(0, {10, 11, 12, 13, 14});
    auto w = s.slice({1, 3});
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w.days.front(), 1);
    EXPECT_DOUBLE_EQ(w.values.back(), 13);
}

TEST(Series, ZnormFitsOnWindowAppliesEverywhere) {
    auto s = series_of(0, {1, 2, 3, 4, 5});
    auto z = znorm(s, {0, 2});  // mu = 2, sample sd = 1
    ASSERT_EQ(z.size(), 5u);
    EXPECT_NEAR(z.values[0], -1.0, 1e-12);
    EXPECT_NEAR(z.values[1], 0.0, 1e-12);
    EXPECT_NEAR(z.values[2], 1.0, 1e-12);
    // days past the fit window use the same parameters
    EXPECT_NEAR(z.values[4], 3.0, 1e-12);
}

TEST(Series, ZnormUsesSampleStdev) {
    auto s = series_of(0, {0, 10});
    auto z = znorm(s, {0, 1});  // sample sd is 5*sqrt(2), population sd would be 5
    EXPECT_NEAR(z.values[1], std::sqrt(2.0) / 2.0, 1e-12);
    EXPECT_NEAR(z.values[0], -std::sqrt(2.0) / 2.0, 1e-12);
}

TEST(Series, ZnormRejectsDegenerateWindow) {
    auto s = series_of(0, {3, 3, 3, 4});
    EXPECT_THROW(znorm(s, {0, 2}), NumericError);  // constant in window
    auto one = series_of(0, {3});
    EXPECT_THROW(znorm(one, {0, 5}), NumericError);  // too few values
}

TEST(Series, WellbeingIntersectsDates) {
    auto pos = series_of(0, {1, 2, 3});        // days 0..2
    auto neg = series_of(1, {0.5, 0.5, 0.5});  // days 1..3
    auto w = wellbeing_series(pos, neg);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w.days[0], 1);
    EXPECT_DOUBLE_EQ(w.values[0], 1.5);
    EXPECT_DOUBLE_EQ(w.values[1], 2.5);
}

// ---------------------------------------------------------------------------
// prepare: interpolation + trailing smoothing
// ---------------------------------------------------------------------------

TEST(Prepare, IdentityWithoutGapsOrSmoothing) {
    auto s = series_of(10, {1, 2, 3, 4});
    auto p = prepare(s, {10, 13}, 1);
    EXPECT_EQ(p.start, 10);
    ASSERT_EQ(p.size(), 4u);
    for (size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(p.values[i], s.values[i]);
        EXPECT_TRUE(p.observed[i]);
    }
}

TEST(Prepare, InteriorGapsLinearlyInterpolated) {
    DailySeries s;
    s.push(0, 0.0);
    s.push(3, 3.0);
    s.push(5, 7.0);
    auto p = prepare(s, {0, 5}, 1);
    ASSERT_EQ(p.size(), 6u);
    EXPECT_DOUBLE_EQ(p.values[1], 1.0);
    EXPECT_DOUBLE_EQ(p.values[2], 2.0);
    EXPECT_DOUBLE_EQ(p.values[4], 5.0);
    EXPECT_TRUE(p.observed[0]);
    EXPECT_FALSE(p.observed[1]);
    EXPECT_FALSE(p.observed[2]);
    EXPECT_TRUE(p.observed[3]);
    EXPECT_FALSE(p.observed[4]);
    EXPECT_TRUE(p.observed[5]);
}

TEST(Prepare, TrailingMeanShorterAtStart) {
    auto s = series_of(0, {1, 2, 3, 4});
    auto p = prepare(s, {0, 3}, 3);
    EXPECT_DOUBLE_EQ(p.values[0], 1.0);          // window {1}
    EXPECT_DOUBLE_EQ(p.values[1], 1.5);          // {1,2}
    EXPECT_DOUBLE_EQ(p.values[2], 2.0);          // {1,2,3}
    EXPECT_DOUBLE_EQ(p.values[3], 3.0);          // {2,3,4}
}

TEST(Prepare, TrimsToObservedExtent) {
    DailySeries s;
    s.push(12, 1.0);
    s.push(18, 2.0);
    auto p = prepare(s, {10, 25}, 1);
    EXPECT_EQ(p.start, 12);
    EXPECT_EQ(p.last_day(), 18);
    EXPECT_EQ(p.size(), 7u);
}

TEST(Prepare, RequiresTwoObservations) {
    DailySeries s;
    s.push(0, 1.0);
    EXPECT_THROW(prepare(s, {0, 10}, 7), NumericError);
    DailySeries s2;
    s2.push(0, 1.0);
    s2.push(1, 2.0);
    s2.push(50, 3.0);
    EXPECT_THROW(prepare(s2, {40, 45}, 7), NumericError);  // window misses all
}

TEST(Prepare, SliceAndAccessors) {
    auto s = series_of(100, {1, 2, 3, 4, 5});
    auto p = prepare(s, {100, 104}, 1);
    EXPECT_TRUE(p.contains(102));
    EXPECT_FALSE(p.contains(99));
    EXPECT_DOUBLE_EQ(p.at(103), 4.0);
    auto sub = p.slice({101, 103});
    EXPECT_EQ(sub.start, 101);
    EXPECT_EQ(sub.size(), 3u);
    EXPECT_DOUBLE_EQ(sub.values[0], 2.0);
    EXPECT_THROW(p.slice({99, 101}), InputError);
    auto d = sub.to_daily();
    EXPECT_EQ(d.days[2], 103);
}

// ---------------------------------------------------------------------------
// lexicon
// ---------------------------------------------------------------------------

TEST(Lexicon, Tokenize) {
    auto t = tokenize("Hello, WORLD! don't stop");
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0], "hello");
    EXPECT_EQ(t[1], "world");
    EXPECT_EQ(t[2], "don't");
    EXPECT_EQ(t[3], "stop");

    EXPECT_TRUE(tokenize("").empty());
    EXPECT_TRUE(tokenize("  ... !!").empty());
    auto digits = tokenize("a1b2 3rd");
    ASSERT_EQ(digits.size(), 2u);
    EXPECT_EQ(digits[0], "a1b2");
}

TEST(Lexicon, TokenizeStripsUrls) {
    auto t = tokenize("see https://example.com/x?y=1 now");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0], "see");
    EXPECT_EQ(t[1], "now");

    auto t2 = tokenize("WWW.foo.com rest");
    ASSERT_EQ(t2.size(), 1u);
    EXPECT_EQ(t2[0], "rest");

    // mid-word "www." is not a link
    auto t3 = tokenize("awww.foo");
    ASSERT_EQ(t3.size(), 2u);
    EXPECT_EQ(t3[0], "awww");
    EXPECT_EQ(t3[1], "foo");
}

namespace {

Lexicon tiny_lexicon() {
    Lexicon lex;
    lex.add("posemo", "happy");
    lex.add("posemo", "joy*");
    lex.add("negemo", "sad");
    lex.add("negemo", "cry*");
    lex.add("leisure", "play*");
    lex.add("leisure", "joy");  // overlapping category
    lex.finalize();
    return lex;
}

}  // namespace

TEST(Lexicon, ExactAndWildcardMatching) {
    auto lex = tiny_lexicon();
    int pos = lex.category_index("posemo");
    ASSERT_GE(pos, 0);
    EXPECT_TRUE(lex.token_in_category("happy", pos));
    EXPECT_FALSE(lex.token_in_category("happyx", pos));
    EXPECT_TRUE(lex.token_in_category("joy", pos));
    EXPECT_TRUE(lex.token_in_category("joyful", pos));
    EXPECT_FALSE(lex.token_in_category("jo", pos));
    int leis = lex.category_index("leisure");
    EXPECT_TRUE(lex.token_in_category("playing", leis));
    EXPECT_TRUE(lex.token_in_category("joy", leis));
    EXPECT_FALSE(lex.token_in_category("joyful", leis));
    EXPECT_EQ(lex.category_index("missing"), -1);
}

TEST(Lexicon, ScorePercent) {
    auto lex = tiny_lexicon();
    std::vector<std::string> tokens{"happy", "sad", "joyful", "rock"};
    EXPECT_DOUBLE_EQ(score_text(tokens, lex, "posemo").percent, 50.0);
    EXPECT_DOUBLE_EQ(score_text(tokens, lex, "negemo").percent, 25.0);
    EXPECT_DOUBLE_EQ(score_text({}, lex, "posemo").percent, 0.0);
    EXPECT_THROW(score_text(tokens, lex, "missing"), InputError);
}

TEST(Lexicon, ScoreAllMatchesPerCategoryScan) {
    auto lex = tiny_lexicon();
    std::vector<std::string> pool{"happy", "joy",  "joyful", "sad",  "crying", "play",
                                  "played", "rock", "jo",     "sadx", "cries",  "x"};
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> tokens;
        size_t n = 1 + rng.uniform_index(30);
        for (size_t i = 0; i < n; ++i) tokens.push_back(pool[rng.uniform_index(pool.size())]);
        auto all = lex.score_all(tokens);
        ASSERT_EQ(all.size(), lex.categories().size());
        for (size_t c = 0; c < lex.categories().size(); ++c) {
            double expect = score_text(tokens, lex, lex.categories()[c]).percent;
            EXPECT_NEAR(all[c], expect, 1e-12);
        }
    }
    EXPECT_TRUE(lex.score_all({}).size() == lex.categories().size());
    for (double v : lex.score_all({})) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Lexicon, LoadValidation) {
    testsupport::TmpDir tmp;
    std::string path = tmp.file("lex.csv");
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "posemo,happy\n";
        out << "posemo,joy*\n";
        out << "negemo,sad\n";
    }
    auto lex = Lexicon::load(path);
    EXPECT_EQ(lex.categories().size(), 2u);
    EXPECT_TRUE(lex.token_in_category("joyous", lex.category_index("posemo")));

    std::string bad = tmp.file("bad.csv");
    {
        std::ofstream out(bad);
        out << "posemo\n";
    }
    EXPECT_THROW(Lexicon::load(bad), InputError);

    Lexicon lex2;
    EXPECT_THROW(lex2.add("c", "*"), InputError);
    EXPECT_THROW(lex2.add("c", "a*b"), InputError);
    EXPECT_THROW(lex2.add("c", ""), InputError);
    EXPECT_THROW(Lexicon::load(tmp.file("missing.csv")), InputError);
}

// ---------------------------------------------------------------------------
// affect series
// ---------------------------------------------------------------------------

TEST(Affect, DailyCategoryMeanAveragesRecords) {
    std::vector<Record> records;
    records.push_back(make_record("t3_a", "c", 100, "happy happy sad x"));  // pos 50, neg 25
    records.push_back(make_record("t3_b", "c", 200, "joy"));                // pos 100, neg 0
    CorpusIndex index(std::move(records), TzOffset{0});
    auto lex = tiny_lexicon();
    EXPECT_DOUBLE_EQ(daily_category_mean(index, lex, "posemo", "c", 0), 75.0);
    EXPECT_DOUBLE_EQ(daily_category_mean(index, lex, "negemo", "c", 0), 12.5);
    EXPECT_THROW(daily_category_mean(index, lex, "posemo", "c", 1), InputError);
    EXPECT_THROW(daily_category_mean(index, lex, "missing", "c", 0), InputError);
}

TEST(Affect, CommunitySeriesHandCase) {
    // day 0: pos 25, neg 50; day 1: pos 50, neg 25
    std::vector<Record> records;
    records.push_back(make_record("t3_a", "c", 100, "happy sad sad x"));
    records.push_back(make_record("t3_b", "c", 86400 + 100, "happy happy sad x"));
    CorpusIndex index(std::move(records), TzOffset{0});
    auto lex = tiny_lexicon();
    auto a = community_affect_series(index, lex, "c", "posemo", "negemo", {0, 1});
    ASSERT_EQ(a.pos_raw.size(), 2u);
    EXPECT_DOUBLE_EQ(a.pos_raw.values[0], 25.0);
    EXPECT_DOUBLE_EQ(a.neg_raw.values[0], 50.0);
    EXPECT_DOUBLE_EQ(a.pos_raw.values[1], 50.0);
    EXPECT_DOUBLE_EQ(a.neg_raw.values[1], 25.0);
    // z over two symmetric points: +-1/sqrt(2) each, difference doubles it
    double unit = std::sqrt(2.0) / 2.0;
    ASSERT_EQ(a.wellbeing.size(), 2u);
    EXPECT_NEAR(a.wellbeing.values[0], -2 * unit, 1e-12);
    EXPECT_NEAR(a.wellbeing.values[1], 2 * unit, 1e-12);
}

TEST(Affect, WellbeingMatchesComposedTransforms) {
    // a longer series: value = znorm(pos) - znorm(neg) recomputed independently
    std::vector<Record> records;
    const char* bodies[] = {"happy x y z", "happy happy sad x", "sad sad sad happy",
                            "joy x", "x y", "happy sad x y"};
    for (int day = 0; day < 6; ++day)
        records.push_back(
            make_record("t3_" + std::to_string(day), "c", int64_t{86400} * day + 50, bodies[day]));
    CorpusIndex index(std::move(records), TzOffset{0});
    auto lex = tiny_lexicon();
    DateRange fit{0, 3};
    auto a = community_affect_series(index, lex, "c", "posemo", "negemo", fit);
    auto expected = wellbeing_series(znorm(a.pos_raw, fit), znorm(a.neg_raw, fit));
    ASSERT_EQ(a.wellbeing.size(), expected.size());
    for (size_t i = 0; i < expected.size(); ++i)
        EXPECT_DOUBLE_EQ(a.wellbeing.values[i], expected.values[i]);
}
