#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socsig/corpus.hpp"
#include "socsig/stats.hpp"

namespace socsig::synth {

// Planted behaviour of one signal. A segment is "high" with probability
// base_rate + offset for the visit's group; ratings come from the low band
// {1,2,3} or the high band {4,5,6} with the given weights.
struct SignalPlan {
    SignalId signal;
    double base_rate = 0.3;
    double white_offset = 0.0;
    double non_white_offset = 0.0;
    std::array<double, 3> low_weights{0.0, 0.0, 1.0};
    std::array<double, 3> high_weights{0.6, 0.3, 0.1};
    // Cue tokens emitted in the role's utterances of high segments. Empty
    // means the signal has no lexical cue.
    std::vector<std::string> cues;

    double rate(Group g) const { return base_rate + (g == Group::white ? white_offset : non_white_offset); }
    bool null_disparity() const { return white_offset == non_white_offset; }
};

struct SynthConfig {
    int n_coded_visits = 91;
    int n_uncoded_visits = 0;
    double white_fraction = 0.8;
    double female_fraction = 0.5;
    // Visit speech duration ~ U[min, max] seconds.
    double min_duration_s = 420.0;
    double max_duration_s = 660.0;
    double window_s = 180.0;
    int min_words = 4;
    int max_words = 12;
    double other_speaker_rate = 0.03;
    // Probability that a role utterance in a high segment carries a cue.
    double cue_rate = 0.8;
    // Per reference token probability of a substitution, deletion or
    // insertion (one third each) in the corpus text.
    double corruption_rate = 0.0;
    std::uint64_t seed = 1;
    std::vector<SignalPlan> signals;
};

// Every catalog signal with its default cue lexicon and a base rate in
// [0.2, 0.4]; no disparities; no corruption.
SynthConfig default_config();

// Throws ValidationError when a probability or planted rate leaves [0,1], or
// when the expected mean rating would not fall between the two bands.
void validate(const SynthConfig& config);

const std::vector<std::string>& background_vocabulary();
std::vector<std::string> default_cues(SignalId id);

struct PlantedSignal {
    SignalId signal;
    double white_rate = 0.0;
    double non_white_rate = 0.0;
    std::size_t n_coded_segments = 0;
    std::size_t n_coded_high = 0;
    // Expected high fraction given the realized group mix of coded segments.
    double expected_high_fraction = 0.0;
    bool null_disparity = true;
};

struct Manifest {
    SynthConfig config;
    std::size_t n_visits = 0;
    std::size_t n_coded_visits = 0;
    std::size_t n_white = 0;
    std::size_t n_non_white = 0;
    std::size_t n_segments = 0;
    std::size_t n_coded_segments = 0;
    std::size_t reference_tokens = 0;
    std::size_t corrupted_tokens = 0;
    std::vector<PlantedSignal> signals;
};

struct SynthOutput {
    Corpus corpus;
    std::vector<SignalRating> ratings;
    std::map<std::string, std::string> references;
    // Ground-truth high/low state of every (segment, signal), coded or not.
    std::map<std::pair<SegmentKey, SignalId>, int> states;
    Manifest manifest;
};

SynthOutput generate(const SynthConfig& config);

// corpus.jsonl, ratings.csv, references/<visit_id>.txt and manifest.json.
void write_output(const std::filesystem::path& dir, const SynthOutput& out);

void write_manifest(std::ostream& out, const Manifest& manifest);
Manifest read_manifest(std::string_view content);
void write_config(std::ostream& out, const SynthConfig& config);
SynthConfig read_config(std::string_view content);

// Quantities recovered by the pipeline; absent fields are not checked.
struct Observations {
    std::optional<double> mean_wer;
    std::map<SignalId, double> high_fractions;
    std::map<SignalId, std::pair<double, double>> dpd_intervals;
    std::map<SignalId, double> disparity_p_two_sided;
};

struct CheckRow {
    std::string check;
    double planted = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

// Tolerances: WER +/- 0.02; high fraction +/- 2 binomial sd
// (2 * sqrt(p(1-p)/n), at least 0.005); planted-null dpd intervals must
// contain 0; planted disparities must reach p < 0.01, null ones must not.
std::vector<CheckRow> manifest_check(const Manifest& manifest, const Observations& observed);

void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows);

// Segment-level records with independent group and prediction draws and a
// common positive rate: the null stream for bootstrap calibration.
std::vector<stats::GroupedValue> null_prediction_stream(std::size_t n, double white_fraction, double rate,
                                                        std::uint64_t seed);

}  // namespace socsig::synth
