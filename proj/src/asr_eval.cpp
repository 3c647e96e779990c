#include "socsig/asr_eval.hpp"

#include <cmath>
#include <ostream>

#include <unordered_map>

#include <fmt/format.h>

#include "socsig/csv.hpp"
#include "socsig/error.hpp"
#include "socsig/text.hpp"

namespace socsig::asr {

namespace {

bool is_clock_char(char32_t c) {
    return (c >= U'0' && c <= U'9') || c == U':' || c == U'.' || c == U',' || c == U' ' || c == U'-' ||
           c == U'>';
}

// True when the bracketed content looks like a time stamp: digits and colons,
// optionally an arrow range.
bool is_timestamp(std::u32string_view inside) {
    bool digit = false;
    bool colon = false;
    for (char32_t c : inside) {
        if (!is_clock_char(c)) return false;
        digit |= (c >= U'0' && c <= U'9');
        colon |= c == U':';
    }
    return digit && colon;
}

std::u32string strip_timestamps(std::u32string_view line) {
    std::u32string out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == U'[') {
            const auto close = line.find(U']', i + 1);
            if (close != std::u32string_view::npos && is_timestamp(line.substr(i + 1, close - i - 1))) {
                out.push_back(U' ');
                i = close + 1;
                continue;
            }
        }
        out.push_back(line[i++]);
    }
    return out;
}

std::u32string strip_speaker_label(std::u32string_view line) {
    std::size_t b = 0;
    while (b < line.size() && text::is_space(line[b])) ++b;
    std::size_t e = b;
    while (e < line.size() && !text::is_space(line[e])) ++e;
    if (e - b >= 2 && line[e - 1] == U':') {
        // The label must carry a letter and only one colon, so "10:30" style
        // tokens survive.
        const auto token = line.substr(b, e - b - 1);
        bool letter = false;
        for (char32_t c : token) {
            if (c == U':') return std::u32string(line);
            letter |= (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || c > 0x7F;
        }
        if (letter) return std::u32string(line.substr(e));
    }
    return std::u32string(line);
}

bool is_letter_like(char32_t c) { return !text::is_space(c) && !text::is_punctuation(c); }

}  // namespace

std::vector<std::string> normalize_transcript(std::string_view raw) {
    std::vector<std::string> tokens;
    for (const auto line_view : text::split_lines(raw)) {
        const auto decoded = text::decode_utf8(line_view);
        const auto line = strip_speaker_label(strip_timestamps(decoded));
        std::u32string current;
        const auto flush = [&] {
            if (!current.empty()) tokens.push_back(text::encode_utf8(current));
            current.clear();
        };
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char32_t c = line[i];
            if (text::is_space(c)) {
                flush();
            } else if (text::is_punctuation(c)) {
                const bool apostrophe = c == U'\'' || c == 0x2019;
                const bool inside_word = !current.empty() && i + 1 < line.size() && is_letter_like(line[i + 1]);
                if (!(apostrophe && inside_word)) flush();
            } else {
                current.push_back(text::to_lower(c));
            }
        }
        flush();
    }
    return tokens;
}

EditOps word_ops(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) { return align(ref, hyp); }

namespace {

std::vector<char32_t> joined_chars(const std::vector<std::string>& tokens) {
    std::vector<char32_t> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(U' ');
        const auto cps = text::decode_utf8(tokens[i]);
        out.insert(out.end(), cps.begin(), cps.end());
    }
    return out;
}

double rate(const EditOps& ops, const char* what) {
    if (ops.reference_length == 0) {
        throw ValidationError(std::string(what) + " is undefined for an empty reference");
    }
    return static_cast<double>(ops.distance()) / static_cast<double>(ops.reference_length);
}

}  // namespace

EditOps char_ops(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    return align(joined_chars(ref), joined_chars(hyp));
}

// Myers' bit-vector recurrence in Hyyrö's blocked form: the reference runs
// down 64-row blocks, each hypothesis symbol advances every block by one
// column, and the score of the reference's last row is tracked directly.
std::int64_t edit_distance(const std::vector<char32_t>& ref, const std::vector<char32_t>& hyp) {
    const std::size_t n = ref.size();
    if (n == 0) return static_cast<std::int64_t>(hyp.size());
    const std::size_t blocks = (n + 63) / 64;
    std::unordered_map<char32_t, std::vector<std::uint64_t>> peq;
    for (std::size_t i = 0; i < n; ++i) {
        auto& v = peq[ref[i]];
        if (v.empty()) v.assign(blocks, 0);
        v[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    const std::vector<std::uint64_t> none(blocks, 0);
    std::vector<std::uint64_t> pv(blocks, ~std::uint64_t{0});
    std::vector<std::uint64_t> mv(blocks, 0);
    const unsigned last_bit = static_cast<unsigned>((n - 1) % 64);
    auto score = static_cast<std::int64_t>(n);
    for (const char32_t c : hyp) {
        const auto it = peq.find(c);
        const auto& eq_col = it == peq.end() ? none : it->second;
        int hin = 1;  // the top row D(0, j) = j grows by one per column
        for (std::size_t b = 0; b < blocks; ++b) {
            std::uint64_t eq = eq_col[b];
            const std::uint64_t p = pv[b];
            const std::uint64_t m = mv[b];
            const std::uint64_t hin_neg = hin < 0 ? 1 : 0;
            const std::uint64_t xv = eq | m;
            eq |= hin_neg;
            const std::uint64_t xh = (((eq & p) + p) ^ p) | eq;
            std::uint64_t ph = m | ~(xh | p);
            std::uint64_t mh = p & xh;
            const unsigned bit = b + 1 == blocks ? last_bit : 63;
            const int hout = static_cast<int>((ph >> bit) & 1) - static_cast<int>((mh >> bit) & 1);
            ph = (ph << 1) | (hin > 0 ? 1 : 0);
            mh = (mh << 1) | hin_neg;
            pv[b] = mh | ~(xv | ph);
            mv[b] = ph & xv;
            hin = hout;
        }
        score += hin;
    }
    return score;
}

double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    return rate(word_ops(ref, hyp), "WER");
}

double cer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    const auto r = joined_chars(ref);
    if (r.empty()) throw ValidationError("CER is undefined for an empty reference");
    return static_cast<double>(edit_distance(r, joined_chars(hyp))) / static_cast<double>(r.size());
}

VisitErrorTable per_visit_wer(const Corpus& corpus, const std::map<std::string, std::string>& references) {
    VisitErrorTable table;
    for (const auto& visit : corpus.visits()) {
        const auto it = references.find(visit.visit_id);
        if (it == references.end()) {
            table.skipped.push_back(visit.visit_id);
            continue;
        }
        const auto ref = normalize_transcript(it->second);
        if (ref.empty()) {
            table.skipped.push_back(visit.visit_id);
            continue;
        }
        std::string hyp_text;
        for (const auto& u : visit.utterances) {
            hyp_text += u.text;
            hyp_text.push_back('\n');
        }
        const auto hyp = normalize_transcript(hyp_text);
        table.rows.push_back({visit.visit_id, visit.group, wer(ref, hyp), cer(ref, hyp)});
    }
    return table;
}

namespace {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

template <typename Get>
MeanSd summarize(const std::vector<VisitErrorRate>& rows, const std::string& group, Get get) {
    MeanSd s;
    double sum = 0.0;
    for (const auto& r : rows) {
        if (!group.empty() && to_string(r.group) != group) continue;
        sum += get(r);
        ++s.n;
    }
    if (s.n == 0) return s;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (const auto& r : rows) {
            if (!group.empty() && to_string(r.group) != group) continue;
            ss += (get(r) - s.mean) * (get(r) - s.mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

}  // namespace

void write_error_csv(std::ostream& out, const VisitErrorTable& table) {
    csv::write_row(out, {"visit_id", "group", "wer", "cer"});
    for (const auto& r : table.rows) {
        csv::write_row(out, {r.visit_id, std::string(to_string(r.group)), fmt::format("{:.6f}", r.wer),
                             fmt::format("{:.6f}", r.cer)});
    }
    for (const std::string group : {"white", "non_white", ""}) {
        const auto w = summarize(table.rows, group, [](const VisitErrorRate& r) { return r.wer; });
        const auto c = summarize(table.rows, group, [](const VisitErrorRate& r) { return r.cer; });
        const auto label = group.empty() ? std::string("all") : group;
        csv::write_row(out, {"#mean", label, fmt::format("{:.6f}", w.mean), fmt::format("{:.6f}", c.mean)});
        csv::write_row(out, {"#sd", label, fmt::format("{:.6f}", w.sd), fmt::format("{:.6f}", c.sd)});
    }
}

}  // namespace socsig::asr
