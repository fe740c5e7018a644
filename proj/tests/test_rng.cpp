#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "crossclone/rng.hpp"

using namespace crossclone;

TEST_CASE("fnv1a64 matches the published reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("splitmix64 matches the reference sequence from seed 0") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xe220a8397b1dcdafull);
    CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ull);
    CHECK(splitmix64(state) == 0x06c45d188009454full);
}

TEST_CASE("mix_seed is deterministic and salt-sensitive") {
    CHECK(mix_seed(0, 0) == 0x6e789e6aa1b965f4ull);
    CHECK(mix_seed(42, 7) == 0x134268759688c202ull);
    CHECK(mix_seed(42, 7) == mix_seed(42, 7));
    CHECK(mix_seed(42, 7) != mix_seed(42, 8));
    CHECK(mix_seed(42, 7) != mix_seed(43, 7));
}

TEST_CASE("raw generator matches the standard mt19937_64 checkpoint") {
    // The C++ standard fixes the 10000th output of a default-seeded
    // mt19937_64; Rng(5489) uses that same seed.
    Rng rng(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) x = rng.next_u64();
    CHECK(x == 9981545732273789042ull);
}

TEST_CASE("below stays in range and reaches every value") {
    Rng rng(1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const std::uint64_t v = rng.below(7);
        REQUIRE(v < 7);
        ++hits[static_cast<std::size_t>(v)];
    }
    for (int h : hits) CHECK(h > 0);
    // Rough uniformity: each bucket within 20% of the expected 1000.
    for (int h : hits) {
        CHECK(h > 800);
        CHECK(h < 1200);
    }
}

TEST_CASE("real01 lies in [0,1) with a sensible mean") {
    Rng rng(2);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = rng.real01();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(std::abs(sum / 20000.0 - 0.5) < 0.01);
}

TEST_CASE("normal draws have near-standard moments") {
    Rng rng(3);
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle permutes in place and is seed-deterministic") {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
    std::vector<int> a = v, b = v, c = v;
    Rng(9).shuffle(a);
    Rng(9).shuffle(b);
    Rng(10).shuffle(c);
    CHECK(a == b);
    CHECK(a != c); // 50! orderings; a collision would be astronomical
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == v);
}

TEST_CASE("sample_indices draws k distinct in-range indices") {
    Rng rng(4);
    const auto picks = rng.sample_indices(100, 30);
    REQUIRE(picks.size() == 30);
    std::set<std::size_t> uniq(picks.begin(), picks.end());
    CHECK(uniq.size() == 30);
    for (std::size_t p : picks) CHECK(p < 100);

    // Determinism across equal seeds.
    Rng r2(4);
    CHECK(r2.sample_indices(100, 30) == picks);

    // k >= n yields a full permutation.
    Rng r3(5);
    auto all = r3.sample_indices(10, 10);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
}
