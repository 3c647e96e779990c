#include "socsig/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "socsig/csv.hpp"
#include "socsig/error.hpp"

namespace socsig {

std::string Segment::text(SpeakerRole role) const {
    std::string out;
    for (const auto& u : utterances) {
        if (u.speaker != role) continue;
        if (!out.empty()) out.push_back(' ');
        out += u.text;
    }
    return out;
}

std::string Segment::combined_text() const {
    auto provider = text(SpeakerRole::provider);
    auto patient = text(SpeakerRole::patient);
    if (provider.empty()) return patient;
    if (patient.empty()) return provider;
    return provider + " " + patient;
}

std::vector<Segment> segment_visit(const VisitRecord& visit, double window_s) {
    if (!(window_s > 0.0) || !std::isfinite(window_s)) {
        throw ValidationError("window length must be positive, got " + std::to_string(window_s));
    }
    if (visit.utterances.empty()) {
        throw ValidationError("visit '" + visit.visit_id + "' has no utterances to segment");
    }
    auto utts = visit.utterances;
    std::stable_sort(utts.begin(), utts.end(),
                     [](const Utterance& a, const Utterance& b) { return a.start_s < b.start_s; });
    const double t0 = utts.front().start_s;

    std::vector<Segment> segments;
    for (auto& u : utts) {
        const auto index = static_cast<int>(std::floor((u.start_s - t0) / window_s));
        while (static_cast<int>(segments.size()) <= index) {
            const auto k = static_cast<int>(segments.size());
            Segment s;
            s.visit_id = visit.visit_id;
            s.segment_index = k;
            s.window_start_s = t0 + k * window_s;
            s.window_end_s = t0 + (k + 1) * window_s;
            segments.push_back(std::move(s));
        }
        segments[index].utterances.push_back(std::move(u));
    }

    auto& last = segments.back();
    double speech_end = last.window_start_s;
    bool all_timed = true;
    for (const auto& u : last.utterances) {
        if (!u.end_s) all_timed = false;
        speech_end = std::max(speech_end, u.end_s.value_or(u.start_s));
    }
    if (all_timed && speech_end > last.utterances.back().start_s && speech_end < last.window_end_s) {
        last.window_end_s = speech_end;
    }
    return segments;
}

SegmentTable::SegmentTable(std::vector<Segment> rows) : rows_(std::move(rows)) {
    std::sort(rows_.begin(), rows_.end(), [](const Segment& a, const Segment& b) { return a.key() < b.key(); });
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (!index_.emplace(rows_[i].key(), i).second) {
            throw ValidationError(fmt::format("duplicate segment {}:{}", rows_[i].visit_id, rows_[i].segment_index));
        }
    }
}

const Segment* SegmentTable::find(const SegmentKey& key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? nullptr : &rows_[it->second];
}

SegmentTable segment_corpus(const Corpus& corpus, double window_s) {
    std::vector<Segment> rows;
    for (const auto& visit : corpus.visits()) {
        try {
            auto segs = segment_visit(visit, window_s);
            std::move(segs.begin(), segs.end(), std::back_inserter(rows));
        } catch (const ValidationError& e) {
            throw ValidationError("segmenting visit '" + visit.visit_id + "': " + e.what());
        }
    }
    return SegmentTable(std::move(rows));
}

namespace {

template <typename Records>
std::vector<SegmentKey> unknown_keys(const SegmentTable& table, const Records& records) {
    std::set<SegmentKey> missing;
    for (const auto& r : records) {
        auto key = r.key();
        if (!table.contains(key)) missing.insert(std::move(key));
    }
    return {missing.begin(), missing.end()};
}

}  // namespace

std::vector<SegmentKey> unknown_segments(const SegmentTable& table, const std::vector<SignalRating>& ratings) {
    return unknown_keys(table, ratings);
}

std::vector<SegmentKey> unknown_segments(const SegmentTable& table,
                                         const std::vector<PredictionRecord>& predictions) {
    return unknown_keys(table, predictions);
}

void write_segment_csv(std::ostream& out, const SegmentTable& table) {
    csv::write_row(out, {"visit_id", "segment_index", "window_start_s", "window_end_s", "n_utterances"});
    for (const auto& s : table.rows()) {
        csv::write_row(out, {s.visit_id, std::to_string(s.segment_index), fmt::format("{:.3f}", s.window_start_s),
                             fmt::format("{:.3f}", s.window_end_s), std::to_string(s.utterances.size())});
    }
}

}  // namespace socsig
