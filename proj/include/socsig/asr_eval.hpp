#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "socsig/corpus.hpp"

namespace socsig::asr {

struct EditOps {
    std::int64_t substitutions = 0;
    std::int64_t deletions = 0;
    std::int64_t insertions = 0;
    std::int64_t reference_length = 0;

    std::int64_t distance() const { return substitutions + deletions + insertions; }
    bool operator==(const EditOps&) const = default;
};

// Per line: bracketed clock stamps such as "[00:01:02]" or
// "[00:01.5 --> 00:02.0]" are dropped, then a line-initial "token:" speaker
// label is dropped. The remainder is lowercased, punctuation becomes a word
// break (apostrophes between letters are deleted instead, "don't" -> "dont"),
// and the text is split on whitespace.
std::vector<std::string> normalize_transcript(std::string_view raw);

// Unit-cost Levenshtein alignment. Among the minimum-distance alignments it
// takes one with the most substitutions. Distance and D - I = |ref| - |hyp|
// are fixed, so S/D/I are then unique, and swapping the arguments keeps S and
// swaps D with I. Both objectives add along a path, so two DP rows of
// (cost, S, D, I) suffice.
template <typename T>
EditOps align(const std::vector<T>& ref, const std::vector<T>& hyp) {
    struct Cell {
        std::uint32_t cost = 0;
        std::uint32_t s = 0;
        std::uint32_t d = 0;
        std::uint32_t i = 0;

        bool better_than(const Cell& o) const { return cost < o.cost || (cost == o.cost && s > o.s); }
    };
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();
    std::vector<Cell> prev(m + 1);
    std::vector<Cell> cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        prev[j].cost = static_cast<std::uint32_t>(j);
        prev[j].i = static_cast<std::uint32_t>(j);
    }
    for (std::size_t r = 1; r <= n; ++r) {
        cur[0] = {static_cast<std::uint32_t>(r), 0, static_cast<std::uint32_t>(r), 0};
        const T& a = ref[r - 1];
        for (std::size_t j = 1; j <= m; ++j) {
            Cell c = prev[j - 1];
            if (!(a == hyp[j - 1])) {
                ++c.cost;
                ++c.s;
            }
            Cell del = prev[j];
            ++del.cost;
            ++del.d;
            if (del.better_than(c)) c = del;
            Cell ins = cur[j - 1];
            ++ins.cost;
            ++ins.i;
            if (ins.better_than(c)) c = ins;
            cur[j] = c;
        }
        std::swap(prev, cur);
    }
    EditOps ops;
    ops.reference_length = static_cast<std::int64_t>(n);
    ops.substitutions = prev[m].s;
    ops.deletions = prev[m].d;
    ops.insertions = prev[m].i;
    return ops;
}

// (S+D+I)/N over tokens. Throws ValidationError for an empty reference.
double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);
// Same rate over the characters of the single-space-joined tokens.
double cer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

EditOps word_ops(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);
// Unit-cost Levenshtein distance only, O(|ref| * |hyp| / 64); equals
// align(ref, hyp).distance().
std::int64_t edit_distance(const std::vector<char32_t>& ref, const std::vector<char32_t>& hyp);
EditOps char_ops(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

struct VisitErrorRate {
    std::string visit_id;
    Group group = Group::white;
    double wer = 0.0;
    double cer = 0.0;
};

struct VisitErrorTable {
    std::vector<VisitErrorRate> rows;
    // Visits without a reference transcript, or whose reference normalizes
    // to nothing.
    std::vector<std::string> skipped;
};

// Hypothesis per visit: all utterance texts of the corpus visit in order.
VisitErrorTable per_visit_wer(const Corpus& corpus, const std::map<std::string, std::string>& references);

// visit_id,group,wer,cer rows followed by mean/sd summary rows per group.
void write_error_csv(std::ostream& out, const VisitErrorTable& table);

}  // namespace socsig::asr
