#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace socsig {

enum class SpeakerRole { provider, patient, other };
enum class Group { white, non_white };
enum class Gender { f, m, other };

std::string_view to_string(SpeakerRole r);
std::string_view to_string(Group g);
std::string_view to_string(Gender g);
SpeakerRole parse_role(std::string_view s);
Group parse_group(std::string_view s);
Gender parse_gender(std::string_view s);

struct Utterance {
    SpeakerRole speaker = SpeakerRole::other;
    double start_s = 0.0;
    std::optional<double> end_s;
    std::string text;

    bool operator==(const Utterance&) const = default;
};

struct VisitRecord {
    std::string visit_id;
    Group group = Group::white;
    Gender gender = Gender::other;
    bool coded = false;
    std::vector<Utterance> utterances;

    bool operator==(const VisitRecord&) const = default;
};

// The twelve global affect signals, in catalog order.
enum class Signal {
    dominance,
    attentiveness,
    warmth,
    engagement,
    empathy,
    respect,
    interactivity,
    irritation,
    nervousness,
    hurriedness,
    sadness,
    distress,
};

inline constexpr std::size_t kSignalCount = 12;

std::string_view to_string(Signal s);
Signal parse_signal(std::string_view s);

// A ratable (signal, role) pair. Role is provider or patient, never other.
struct SignalId {
    Signal signal = Signal::dominance;
    SpeakerRole role = SpeakerRole::provider;

    auto operator<=>(const SignalId&) const = default;
    bool operator==(const SignalId&) const = default;

    // "provider_warmth"
    std::string key() const;
    // "provider warmth"
    std::string label() const;
};

// Hurriedness is provider-only; sadness and distress are patient-only.
bool is_ratable(Signal s, SpeakerRole role);

// The 21 ratable pairs, ordered by signal then provider before patient.
const std::vector<SignalId>& signal_catalog();

SignalId make_signal_id(std::string_view signal, std::string_view role);
SignalId parse_signal_key(std::string_view key);

struct SegmentKey {
    std::string visit_id;
    int segment_index = 0;

    auto operator<=>(const SegmentKey&) const = default;
    bool operator==(const SegmentKey&) const = default;
};

struct SignalRating {
    std::string visit_id;
    int segment_index = 0;
    SignalId signal;
    int value = 1;

    SegmentKey key() const { return {visit_id, segment_index}; }
    bool operator==(const SignalRating&) const = default;
};

struct PredictionRecord {
    std::string visit_id;
    int segment_index = 0;
    SignalId signal;
    double score = 0.0;

    SegmentKey key() const { return {visit_id, segment_index}; }
    bool operator==(const PredictionRecord&) const = default;
};

// Immutable collection of validated visits, in file order.
class Corpus {
public:
    Corpus() = default;
    // Validates every visit, sorts utterances by start time and rejects
    // duplicate ids.
    explicit Corpus(std::vector<VisitRecord> visits);

    const std::vector<VisitRecord>& visits() const { return visits_; }
    std::size_t size() const { return visits_.size(); }
    const VisitRecord* find(std::string_view visit_id) const;
    const VisitRecord& at(std::string_view visit_id) const;

    bool operator==(const Corpus& o) const { return visits_ == o.visits_; }

private:
    std::vector<VisitRecord> visits_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Throws ValidationError naming the problem; used by Corpus and the loaders.
void validate_visit(VisitRecord& visit);

Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);

std::vector<SignalRating> parse_ratings(std::string_view content, const Corpus* corpus = nullptr);
std::vector<SignalRating> load_ratings(const std::filesystem::path& path, const Corpus* corpus = nullptr);
void write_ratings(std::ostream& out, const std::vector<SignalRating>& ratings);

std::vector<PredictionRecord> parse_predictions(std::istream& in);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& predictions);

// Reference transcripts: <visit_id>.txt files in one directory.
std::map<std::string, std::string> load_references(const std::filesystem::path& dir);

// Gender-by-group counts, restricted to coded or uncoded visits.
struct GroupGenderCounts {
    // counts[group][gender], indices follow the enum order.
    std::array<std::array<std::int64_t, 3>, 2> counts{};

    std::int64_t at(Group g, Gender s) const {
        return counts[static_cast<std::size_t>(g)][static_cast<std::size_t>(s)];
    }
    std::int64_t group_total(Group g) const;
    std::int64_t total() const;
};

GroupGenderCounts count_group_gender(const Corpus& corpus, bool coded);

std::string read_file(const std::filesystem::path& path);

}  // namespace socsig
