#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socsig/corpus.hpp"
#include "socsig/stats.hpp"

namespace socsig::audit {

// P(score > threshold | white) - P(score > threshold | non_white). Positive
// means the model predicts "high" more often for white patients.
double dpd(std::span<const double> scores, std::span<const Group> groups, double threshold = 0.5);

// Same difference over records whose values are already 0/1.
double dpd_statistic(std::span<const stats::GroupedValue> records);

struct FairnessRow {
    SignalId signal;
    std::size_t n_white = 0;
    std::size_t n_non_white = 0;
    stats::BootstrapResult bootstrap;

    bool ci_contains_zero() const { return bootstrap.ci_low <= 0.0 && 0.0 <= bootstrap.ci_high; }
};

struct GenderTest {
    bool coded = true;
    GroupGenderCounts counts;
    std::optional<stats::TestResult> result;
    std::string note;
};

struct WerTest {
    std::size_t n_white = 0;
    std::size_t n_non_white = 0;
    double mean_white = 0.0;
    double sd_white = 0.0;
    double mean_non_white = 0.0;
    double sd_non_white = 0.0;
    stats::TestResult result;
};

struct FairnessConfig {
    int n_boot = 1000;
    std::uint64_t seed = 42;
    double decision_threshold = 0.5;
    double level = 0.95;
};

struct FairnessReport {
    FairnessConfig config;
    std::vector<FairnessRow> rows;
    std::optional<WerTest> wer;
    GenderTest gender_coded;
    GenderTest gender_uncoded;
    std::vector<std::string> notices;
};

// Segment-level bootstrap of dpd per signal present in the predictions, a
// white vs non-white WER t-test when references are given, and gender-by-
// group chi-square tests over coded and uncoded visits.
FairnessReport fairness_audit(const std::vector<PredictionRecord>& predictions, const Corpus& corpus,
                              const std::map<std::string, std::string>* references, const FairnessConfig& config);

// Chi-square of group (rows) by gender f/m (columns). Visits with gender
// "other" are left out and mentioned in the note.
GenderTest gender_by_group(const Corpus& corpus, bool coded);

struct VisitScore {
    std::string visit_id;
    SignalId signal;
    double score = 0.0;
    std::size_t n_segments = 0;
};

struct VisitScores {
    std::vector<VisitScore> scores;
    std::vector<std::string> warnings;
};

// Mean over each visit's segments of (score > threshold), or of the raw
// probabilities when probability_mean is set. Visits listed in `visits` that
// lack predictions for a scored signal are excluded with a warning.
VisitScores aggregate_visit_scores(const std::vector<PredictionRecord>& predictions,
                                   const std::vector<std::string>& visits, double threshold = 0.5,
                                   bool probability_mean = false);

struct DisparityRow {
    SignalId signal;
    std::size_t n_white = 0;
    std::size_t n_non_white = 0;
    bool testable = false;
    std::string note;
    stats::TestResult result;
};

struct DisparityReport {
    std::vector<DisparityRow> rows;
    bool continuity = true;
};

DisparityReport disparity_scan(const std::vector<VisitScore>& visit_scores, const std::map<std::string, Group>& groups,
                               stats::MannWhitneyOptions options = {});

std::map<std::string, Group> group_map(const Corpus& corpus);

// signal,role,mean_dpd,ci_low,ci_high,ci_contains_zero,n_white,n_non_white,n_boot,n_degenerate
void write_fairness_csv(std::ostream& out, const FairnessReport& report);
void write_fairness_markdown(std::ostream& out, const FairnessReport& report);
// signal,role,n_white,n_non_white,u,z,p_one_sided,p_two_sided,testable,note
void write_disparity_csv(std::ostream& out, const DisparityReport& report);
void write_disparity_markdown(std::ostream& out, const DisparityReport& report, bool one_sided);

}  // namespace socsig::audit
