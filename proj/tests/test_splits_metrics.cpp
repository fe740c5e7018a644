#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "crossclone/errors.hpp"
#include "crossclone/metrics.hpp"
#include "crossclone/splits.hpp"

using namespace crossclone;

namespace {

PairCorpus make_corpus(std::size_t n_functionalities, std::size_t clones, std::size_t nonclones) {
    PairCorpus c;
    c.name = "fixture";
    for (std::size_t k = 0; k < n_functionalities; ++k) {
        const std::string fn = "task" + std::to_string(k);
        for (std::size_t i = 0; i < clones + nonclones; ++i) {
            const std::string base = fn + "p" + std::to_string(i);
            c.snippets.push_back(CodeSnippet{base + "l", "code " + base + " l", fn, "c"});
            c.snippets.push_back(CodeSnippet{base + "r", "code " + base + " r", fn, "c"});
            c.pairs.push_back(LabeledPair{base + "l", base + "r", i < clones ? 1 : 0, fn});
        }
    }
    c.finalize();
    return c;
}

} // namespace

TEST_CASE("random split is stratified by label") {
    const PairCorpus c = make_corpus(1, 40, 60);
    const SplitPlan plan = split_random(c, 0.8, 5);
    CHECK(plan.kind == SplitKind::random_split);
    CHECK(plan.id == "random");
    CHECK(plan.train.size() + plan.test.size() == 100);

    std::size_t train_clones = 0, train_nonclones = 0;
    for (const std::size_t i : plan.train)
        (c.pairs[i].label == 1 ? train_clones : train_nonclones)++;
    CHECK(train_clones == 32);    // round(0.8 * 40)
    CHECK(train_nonclones == 48); // round(0.8 * 60)

    // Disjoint and exhaustive.
    std::set<std::size_t> seen(plan.train.begin(), plan.train.end());
    for (const std::size_t i : plan.test) CHECK(seen.insert(i).second);
    CHECK(seen.size() == 100);

    // Deterministic per seed, different across seeds.
    const SplitPlan again = split_random(c, 0.8, 5);
    CHECK(again.train == plan.train);
    const SplitPlan other = split_random(c, 0.8, 6);
    CHECK(other.train != plan.train);
}

TEST_CASE("random split rejects bad fractions and empty sides") {
    const PairCorpus c = make_corpus(1, 2, 2);
    CHECK_THROWS_AS((void)split_random(c, 0.0, 1), ValidationError);
    CHECK_THROWS_AS((void)split_random(c, 1.0, 1), ValidationError);
    CHECK_THROWS_AS((void)split_random(c, -0.3, 1), ValidationError);
    // round(0.999 * 2) = 2 leaves the test side of both classes empty.
    CHECK_THROWS_AS((void)split_random(c, 0.999, 1), ValidationError);
    const PairCorpus empty;
    CHECK_THROWS_AS((void)split_random(empty, 0.8, 1), DataError);
}

TEST_CASE("one-vs-rest holds each functionality out exactly once") {
    const PairCorpus c = make_corpus(4, 3, 3);
    const auto plans = split_one_vs_rest(c);
    REQUIRE(plans.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        const SplitPlan& plan = plans[k];
        CHECK(plan.kind == SplitKind::one_vs_rest);
        CHECK(plan.held_out_functionality == "task" + std::to_string(k)); // name order
        CHECK(plan.id == "holdout:task" + std::to_string(k));
        CHECK(plan.test.size() == 6);
        CHECK(plan.train.size() == 18);
        // The held-out functionality never leaks into training.
        for (const std::size_t i : plan.train)
            CHECK(c.pairs[i].functionality != plan.held_out_functionality);
        for (const std::size_t i : plan.test)
            CHECK(c.pairs[i].functionality == plan.held_out_functionality);
    }
}

TEST_CASE("one-vs-rest needs at least two functionalities") {
    const PairCorpus c = make_corpus(1, 3, 3);
    CHECK_THROWS_AS((void)split_one_vs_rest(c), DataError);
}

TEST_CASE("cross-dataset uses every pair on each side") {
    const PairCorpus a = make_corpus(2, 3, 3);
    PairCorpus b = make_corpus(1, 4, 4);
    b.name = "other";
    const SplitPlan plan = split_cross_dataset(a, b);
    CHECK(plan.kind == SplitKind::cross_dataset);
    CHECK(plan.train.size() == a.pairs.size());
    CHECK(plan.test.size() == b.pairs.size());
    CHECK(plan.id == "cross:fixture->other");
    const PairCorpus empty;
    CHECK_THROWS_AS((void)split_cross_dataset(empty, b), DataError);
    CHECK_THROWS_AS((void)split_cross_dataset(a, empty), DataError);
}

TEST_CASE("metrics match hand-computed confusion tables") {
    // predictions vs labels:
    //   tp = 2 (both 1), fp = 2, fn = 0, tn = 0 -> P = 0.5, R = 1, F1 = 2/3.
    const std::vector<int> pred{1, 1, 1, 1};
    const std::vector<int> label{1, 1, 0, 0};
    const MetricsTuple m = compute_metrics(pred, label);
    CHECK(m.accuracy == doctest::Approx(0.5));
    CHECK(m.precision == doctest::Approx(0.5));
    CHECK(m.recall == doctest::Approx(1.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));

    const MetricsTuple perfect = compute_metrics({1, 0, 1}, {1, 0, 1});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.f1 == 1.0);

    const MetricsTuple inverted = compute_metrics({0, 1}, {1, 0});
    CHECK(inverted.accuracy == 0.0);
    CHECK(inverted.f1 == 0.0);
}

TEST_CASE("metrics handle empty denominators without dividing by zero") {
    // No positive predictions: precision undefined -> 0; recall 0.
    const MetricsTuple no_pos = compute_metrics({0, 0, 0}, {1, 1, 0});
    CHECK(no_pos.precision == 0.0);
    CHECK(no_pos.recall == 0.0);
    CHECK(no_pos.f1 == 0.0);
    // No positive labels: recall undefined -> 0.
    const MetricsTuple no_true = compute_metrics({1, 0}, {0, 0});
    CHECK(no_true.recall == 0.0);
    CHECK(no_true.f1 == 0.0);
}

TEST_CASE("metrics validate their inputs") {
    CHECK_THROWS_AS((void)compute_metrics({}, {}), ValidationError);
    CHECK_THROWS_AS((void)compute_metrics({1, 0}, {1}), ValidationError);
    CHECK_THROWS_AS((void)compute_metrics({2, 0}, {1, 0}), ValidationError);
    CHECK_THROWS_AS((void)compute_metrics({1, 0}, {1, -1}), ValidationError);
}
