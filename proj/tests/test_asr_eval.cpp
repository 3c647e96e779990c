#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "socsig/asr_eval.hpp"
#include "socsig/error.hpp"
#include "socsig/synth.hpp"

using namespace socsig;
using namespace socsig::asr;
using Tokens = std::vector<std::string>;

namespace {

std::vector<int> random_seq(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
    std::vector<int> v(rng() % (max_len + 1));
    for (auto& x : v) x = static_cast<int>(rng() % alphabet);
    return v;
}

}  // namespace

TEST_CASE("normalization rules") {
    CHECK(normalize_transcript("DR: Hello, there!") == Tokens{"hello", "there"});
    CHECK(normalize_transcript("[00:01:02] ok") == Tokens{"ok"});
    CHECK(normalize_transcript("Well—I mean… yes") == Tokens{"well", "i", "mean", "yes"});
    CHECK(normalize_transcript("[00:00:05] PATIENT: I don't know.\nPROVIDER: OK") == Tokens{"i", "dont", "know", "ok"});
    // Only a line-initial label is a speaker label; clock times stay.
    CHECK(normalize_transcript("we met at 10:30 today") == Tokens{"we", "met", "at", "10", "30", "today"});
    CHECK(normalize_transcript("ÉCOLE Straße") == Tokens{"école", "straße"});
    CHECK(normalize_transcript("  ").empty());
}

TEST_CASE("alignment examples") {
    CHECK(align(Tokens{"a", "b"}, Tokens{"a", "b"}) == EditOps{0, 0, 0, 2});
    CHECK(align(Tokens{"a", "b", "c"}, Tokens{"a", "x", "c"}) == EditOps{1, 0, 0, 3});
    const auto ops = align(Tokens{"um", "the", "cat", "sat"}, Tokens{"the", "cat", "sat", "down"});
    CHECK(ops == EditOps{0, 1, 1, 4});
    CHECK(ops.distance() == 2);
    CHECK(wer(Tokens{"um", "the", "cat", "sat"}, Tokens{"the", "cat", "sat", "down"}) == 0.5);
}

TEST_CASE("align matches the exhaustive recursion") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 400; ++trial) {
        const auto a = random_seq(rng, 7, 3);
        const auto b = random_seq(rng, 7, 3);
        const auto ops = align(a, b);
        CHECK(ops.distance() == oracle::edit_distance(a, b));
        CHECK(ops == oracle::best_ops(a, b));
        CHECK(ops.deletions - ops.insertions == static_cast<std::int64_t>(a.size()) - static_cast<std::int64_t>(b.size()));
    }
}

TEST_CASE("distance symmetry and triangle inequality") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = random_seq(rng, 12, 4);
        const auto b = random_seq(rng, 12, 4);
        const auto c = random_seq(rng, 12, 4);
        const auto ab = align(a, b);
        const auto ba = align(b, a);
        CHECK(ab.substitutions == ba.substitutions);
        CHECK(ab.deletions == ba.insertions);
        CHECK(ab.insertions == ba.deletions);
        CHECK(ab.distance() <= align(a, c).distance() + align(c, b).distance());
    }
}

TEST_CASE("bit-parallel distance equals the DP on long sequences") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = rng() % 300;
        const std::size_t m = rng() % 300;
        const int alphabet = 2 + static_cast<int>(rng() % 30);
        std::vector<char32_t> a(n);
        std::vector<char32_t> b(m);
        for (auto& x : a) x = U'a' + static_cast<char32_t>(rng() % alphabet);
        for (auto& x : b) x = U'a' + static_cast<char32_t>(rng() % alphabet);
        // Half the trials: b is a light edit of a, the realistic regime.
        if (trial % 2) {
            b = a;
            for (auto& x : b) {
                if (rng() % 10 == 0) x = U'#';
            }
        }
        CHECK(edit_distance(a, b) == align(a, b).distance());
    }
}

TEST_CASE("rates") {
    const Tokens ref{"the", "cat"};
    CHECK(wer(ref, ref) == 0.0);
    CHECK(cer(ref, ref) == 0.0);
    CHECK(wer(ref, Tokens{"the", "cat", "sat", "on", "a", "mat"}) == 2.0);
    // "the cat" vs "the bat": 1 of 7 characters, space included.
    CHECK(cer(ref, Tokens{"the", "bat"}) == doctest::Approx(1.0 / 7.0));
    CHECK(char_ops(ref, Tokens{"thecat"}).deletions == 1);
    CHECK_THROWS_AS(wer({}, ref), ValidationError);
    CHECK_THROWS_AS(cer({}, ref), ValidationError);
}

TEST_CASE("per-visit rates skip visits without references") {
    auto config = synth::default_config();
    config.n_coded_visits = 3;
    const auto out = synth::generate(config);
    auto refs = out.references;
    auto table = per_visit_wer(out.corpus, refs);
    CHECK(table.rows.size() == 3);
    for (const auto& r : table.rows) CHECK(r.wer == 0.0);
    refs.erase(refs.begin());
    table = per_visit_wer(out.corpus, refs);
    CHECK(table.rows.size() == 2);
    CHECK(table.skipped.size() == 1);
}

TEST_CASE("planted corruption is recovered") {
    auto config = synth::default_config();
    config.n_coded_visits = 40;
    config.corruption_rate = 0.10;
    const auto out = synth::generate(config);
    const auto table = per_visit_wer(out.corpus, out.references);
    double sum = 0.0;
    for (const auto& r : table.rows) sum += r.wer;
    CHECK(std::abs(sum / static_cast<double>(table.rows.size()) - 0.10) <= 0.02);
}
