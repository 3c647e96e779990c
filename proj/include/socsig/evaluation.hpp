#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socsig/classifier.hpp"
#include "socsig/corpus.hpp"
#include "socsig/segmenter.hpp"

namespace socsig::evaluation {

// A score counts as a positive prediction when score > threshold.
struct ConfusionMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double weighted_f1 = 0.0;
};

ConfusionMetrics confusion_metrics(std::span<const int> labels, std::span<const double> scores,
                                   double threshold = 0.5);

// 2 * #{(pos, neg) : s_pos > s_neg} + #{ties}, computed by a sort sweep.
std::int64_t auroc_pair_count2(std::span<const int> labels, std::span<const double> scores);
double auroc(std::span<const int> labels, std::span<const double> scores);
// Average precision over a stable descending sort.
double auprc(std::span<const int> labels, std::span<const double> scores);

enum Metric { kAccuracy, kPrecision, kRecall, kWeightedF1, kAuroc, kAuprc, kMetricCount };
std::string_view metric_name(Metric m);

using MetricSet = std::array<double, kMetricCount>;

MetricSet all_metrics(std::span<const int> labels, std::span<const double> scores, double threshold = 0.5);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

struct FoldCell {
    SignalId signal;
    int fold = 0;
    bool applicable = false;
    std::string note;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_test_high = 0;
    double threshold = 0.0;
    MetricSet metrics{};
};

struct FoldSummary {
    int k = 0;
    std::map<std::string, int> fold_of_visit;
    std::vector<FoldCell> cells;
    std::map<SignalId, std::array<MeanSd, kMetricCount>> per_signal;
    // Mean and sd across signals of each signal's fold mean.
    std::array<MeanSd, kMetricCount> signal_mean{};
    // Mean and sd across every applicable (signal, fold) cell.
    std::array<MeanSd, kMetricCount> pooled{};
    std::size_t n_not_applicable = 0;
    // Held-out scores of every fold's model, one record per segment/signal.
    std::vector<PredictionRecord> out_of_fold;
};

struct CvConfig {
    int k = 5;
    std::uint64_t seed = 42;
    double min_high_fraction = 0.02;
    double decision_threshold = 0.5;
    classifier::TrainConfig train;
};

// Shuffles the sorted ids with the seed and deals them round-robin.
std::map<std::string, int> assign_folds(std::vector<std::string> visit_ids, int k, std::uint64_t seed);

// Folds partition rated visits. Per fold: thresholds, exclusions and class
// weights come from the training visits only; one baseline model per
// included signal is scored on the held-out visits.
FoldSummary cross_validate(const SegmentTable& segments, const std::vector<SignalRating>& ratings,
                           const CvConfig& config);

// Scores fixed predictions against threshold-binarized ratings as a single
// evaluation split (used for external prediction files).
FoldSummary evaluate_predictions(const std::vector<PredictionRecord>& predictions,
                                 const std::vector<SignalRating>& ratings, double min_high_fraction,
                                 double decision_threshold);

// metric,per_signal_mean,per_signal_sd,pooled_mean,pooled_sd,n_signals,n_cells
void write_summary_csv(std::ostream& out, const FoldSummary& summary);
void write_summary_markdown(std::ostream& out, const FoldSummary& summary, std::string_view model_name);
void write_cells_csv(std::ostream& out, const FoldSummary& summary);

}  // namespace socsig::evaluation
