#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "socsig/corpus.hpp"

namespace socsig {

inline constexpr double kDefaultWindowSeconds = 180.0;

// A fixed-duration window of one visit, anchored at the visit's first
// utterance. Every contained utterance satisfies
// window_start_s <= start_s < window_end_s.
struct Segment {
    std::string visit_id;
    int segment_index = 0;
    double window_start_s = 0.0;
    double window_end_s = 0.0;
    std::vector<Utterance> utterances;

    SegmentKey key() const { return {visit_id, segment_index}; }

    // Texts of one role's utterances in order, joined by single spaces.
    std::string text(SpeakerRole role) const;
    // Provider text then patient text; "other" speakers are left out.
    std::string combined_text() const;
};

// Interior windows without utterances are emitted empty so that indices stay
// dense. The last window ends at the latest end_s of its utterances when that
// falls inside the window, otherwise at the full window boundary.
std::vector<Segment> segment_visit(const VisitRecord& visit, double window_s = kDefaultWindowSeconds);

class SegmentTable {
public:
    SegmentTable() = default;
    explicit SegmentTable(std::vector<Segment> rows);

    const std::vector<Segment>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    const Segment* find(const SegmentKey& key) const;
    bool contains(const SegmentKey& key) const { return find(key) != nullptr; }

private:
    std::vector<Segment> rows_;
    std::map<SegmentKey, std::size_t> index_;
};

// Rows ordered by (visit_id, segment_index).
SegmentTable segment_corpus(const Corpus& corpus, double window_s = kDefaultWindowSeconds);

// Keys that the segmenter never produced for this corpus.
std::vector<SegmentKey> unknown_segments(const SegmentTable& table, const std::vector<SignalRating>& ratings);
std::vector<SegmentKey> unknown_segments(const SegmentTable& table, const std::vector<PredictionRecord>& predictions);

// visit_id,segment_index,window_start_s,window_end_s,n_utterances
void write_segment_csv(std::ostream& out, const SegmentTable& table);

}  // namespace socsig
