#include "socsig/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "socsig/csv.hpp"
#include "socsig/error.hpp"
#include "socsig/labeling.hpp"
#include "socsig/stats.hpp"

namespace socsig::evaluation {

namespace {

void check_lengths(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) {
        throw ValidationError(fmt::format("{} labels but {} scores", labels.size(), scores.size()));
    }
    if (labels.empty()) throw ValidationError("metrics need at least one example");
}

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1(double precision, double recall) { return ratio(2.0 * precision * recall, precision + recall); }

}  // namespace

ConfusionMetrics confusion_metrics(std::span<const int> labels, std::span<const double> scores, double threshold) {
    check_lengths(labels, scores);
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = scores[i] > threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++tp;
        else if (predicted) ++fp;
        else if (actual) ++fn;
        else ++tn;
    }
    const double n = static_cast<double>(labels.size());
    ConfusionMetrics m;
    m.accuracy = (tp + tn) / n;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    const double f1_pos = f1(m.precision, m.recall);
    const double f1_neg = f1(ratio(tn, tn + fn), ratio(tn, tn + fp));
    m.weighted_f1 = ((tp + fn) / n) * f1_pos + ((tn + fp) / n) * f1_neg;
    return m;
}

std::int64_t auroc_pair_count2(std::span<const int> labels, std::span<const double> scores) {
    check_lengths(labels, scores);
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::int64_t neg_below = 0;
    std::int64_t u2 = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::int64_t pos = 0;
        std::int64_t neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? pos : neg) += 1;
            ++j;
        }
        u2 += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        i = j;
    }
    return u2;
}

double auroc(std::span<const int> labels, std::span<const double> scores) {
    check_lengths(labels, scores);
    const auto n_pos = std::count(labels.begin(), labels.end(), 1);
    const auto n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("AUROC needs both classes");
    return static_cast<double>(auroc_pair_count2(labels, scores)) / (2.0 * static_cast<double>(n_pos * n_neg));
}

double auprc(std::span<const int> labels, std::span<const double> scores) {
    check_lengths(labels, scores);
    const auto n_pos = std::count(labels.begin(), labels.end(), 1);
    if (n_pos == 0) throw ValidationError("AUPRC needs at least one positive");
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double tp = 0.0;
    double sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] != 1) continue;
        tp += 1.0;
        sum += tp / static_cast<double>(rank + 1);
    }
    return sum / static_cast<double>(n_pos);
}

std::string_view metric_name(Metric m) {
    static constexpr std::array<std::string_view, kMetricCount> names = {
        "accuracy", "precision", "recall", "weighted_f1", "auroc", "auprc"};
    return names[m];
}

MetricSet all_metrics(std::span<const int> labels, std::span<const double> scores, double threshold) {
    const auto c = confusion_metrics(labels, scores, threshold);
    return {c.accuracy, c.precision, c.recall, c.weighted_f1, auroc(labels, scores), auprc(labels, scores)};
}

std::map<std::string, int> assign_folds(std::vector<std::string> visit_ids, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation needs k >= 2");
    std::sort(visit_ids.begin(), visit_ids.end());
    visit_ids.erase(std::unique(visit_ids.begin(), visit_ids.end()), visit_ids.end());
    if (visit_ids.size() < static_cast<std::size_t>(k)) {
        throw ValidationError(fmt::format("{} rated visits cannot fill {} folds", visit_ids.size(), k));
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = visit_ids.size() - 1; i > 0; --i) std::swap(visit_ids[i], visit_ids[rng() % (i + 1)]);
    std::map<std::string, int> folds;
    for (std::size_t i = 0; i < visit_ids.size(); ++i) folds[visit_ids[i]] = static_cast<int>(i % k);
    return folds;
}

namespace {

MeanSd mean_sd(const std::vector<double>& v) {
    return {stats::mean(v), stats::sample_sd(v), v.size()};
}

void aggregate(FoldSummary& s) {
    std::map<SignalId, std::array<std::vector<double>, kMetricCount>> by_signal;
    std::array<std::vector<double>, kMetricCount> pooled;
    for (const auto& c : s.cells) {
        if (!c.applicable) {
            ++s.n_not_applicable;
            continue;
        }
        for (int m = 0; m < kMetricCount; ++m) {
            by_signal[c.signal][m].push_back(c.metrics[m]);
            pooled[m].push_back(c.metrics[m]);
        }
    }
    std::array<std::vector<double>, kMetricCount> signal_means;
    for (const auto& [id, values] : by_signal) {
        auto& row = s.per_signal[id];
        for (int m = 0; m < kMetricCount; ++m) {
            row[m] = mean_sd(values[m]);
            signal_means[m].push_back(row[m].mean);
        }
    }
    for (int m = 0; m < kMetricCount; ++m) {
        s.signal_mean[m] = mean_sd(signal_means[m]);
        s.pooled[m] = mean_sd(pooled[m]);
    }
}

struct FeatureCache {
    const classifier::TrainConfig& config;
    std::map<std::pair<SegmentKey, int>, classifier::FeatureVector> cache;

    const classifier::FeatureVector& get(const Segment& seg, SignalId id) {
        // Combined text is shared by every signal; role-only text by role.
        const int slot = config.text_source == classifier::TextSource::combined ? -1 : static_cast<int>(id.role);
        auto key = std::make_pair(seg.key(), slot);
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(std::move(key), classifier::featurize(segment_text(seg, id, config.text_source),
                                                                     config.dimension, config.hash_seed))
                     .first;
        }
        return it->second;
    }
};

}  // namespace

FoldSummary cross_validate(const SegmentTable& segments, const std::vector<SignalRating>& ratings,
                           const CvConfig& config) {
    if (const auto unknown = unknown_segments(segments, ratings); !unknown.empty()) {
        throw ValidationError(fmt::format("{} rating(s) reference segments the segmenter did not produce, first {}:{}",
                                          unknown.size(), unknown.front().visit_id, unknown.front().segment_index));
    }
    std::vector<std::string> rated;
    for (const auto& r : ratings) rated.push_back(r.visit_id);

    FoldSummary summary;
    summary.k = config.k;
    summary.fold_of_visit = assign_folds(rated, config.k, config.seed);
    FeatureCache features{config.train, {}};

    for (int fold = 0; fold < config.k; ++fold) {
        std::vector<SignalRating> train_ratings;
        std::vector<SignalRating> test_ratings;
        std::set<std::string> held_out;
        for (const auto& r : ratings) {
            (summary.fold_of_visit.at(r.visit_id) == fold ? test_ratings : train_ratings).push_back(r);
        }
        for (const auto& [visit, f] : summary.fold_of_visit) {
            if (f == fold) held_out.insert(visit);
        }
        const auto policy = labeling::fit_label_policy(train_ratings, config.min_high_fraction);
        policy.check_disjoint(held_out);

        const auto& catalog = signal_catalog();
        for (std::size_t s_idx = 0; s_idx < catalog.size(); ++s_idx) {
            const auto& id = catalog[s_idx];
            FoldCell cell;
            cell.signal = id;
            cell.fold = fold;
            const auto& status = policy.signals.at(id);
            if (status.n == 0) continue;  // signal never rated in this corpus split
            cell.threshold = status.threshold;
            if (!status.included) {
                cell.note = fmt::format("excluded in training fold: {}", labeling::to_string(status.reason));
                summary.cells.push_back(std::move(cell));
                continue;
            }

            std::vector<classifier::Example> train_set;
            for (const auto& r : train_ratings) {
                if (r.signal != id) continue;
                const auto& seg = *segments.find(r.key());
                if (segment_text(seg, id, config.train.text_source).empty()) continue;
                train_set.push_back({features.get(seg, id), policy.label(r)});
            }
            std::vector<int> train_labels;
            for (const auto& ex : train_set) train_labels.push_back(ex.label);
            cell.n_train = train_set.size();
            const auto positives = std::count(train_labels.begin(), train_labels.end(), 1);
            if (positives == 0 || positives == static_cast<std::ptrdiff_t>(train_labels.size())) {
                cell.note = "training examples with text contain a single class";
                summary.cells.push_back(std::move(cell));
                continue;
            }
            auto train_config = config.train;
            train_config.seed = stats::stream_seed(config.seed, static_cast<std::uint64_t>(fold) * 64 + s_idx);
            const auto model = classifier::train(train_set, labeling::class_weights(train_labels), train_config);

            std::map<SegmentKey, double> scored;
            for (const auto& seg : segments.rows()) {
                if (!held_out.count(seg.visit_id)) continue;
                const auto& x = features.get(seg, id);
                if (x.empty()) continue;
                const double p = classifier::predict(model, x);
                scored[seg.key()] = p;
                summary.out_of_fold.push_back({seg.visit_id, seg.segment_index, id, p});
            }
            std::vector<int> labels;
            std::vector<double> scores;
            for (const auto& r : test_ratings) {
                if (r.signal != id) continue;
                const auto it = scored.find(r.key());
                if (it == scored.end()) continue;
                labels.push_back(policy.label(r));
                scores.push_back(it->second);
            }
            cell.n_test = labels.size();
            cell.n_test_high = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
            if (cell.n_test_high == 0 || cell.n_test_high == cell.n_test) {
                cell.note = "held-out fold lacks one class";
            } else {
                cell.applicable = true;
                cell.metrics = all_metrics(labels, scores, config.decision_threshold);
            }
            summary.cells.push_back(std::move(cell));
        }
    }
    std::sort(summary.out_of_fold.begin(), summary.out_of_fold.end(),
              [](const PredictionRecord& a, const PredictionRecord& b) {
                  return std::tie(a.visit_id, a.segment_index, a.signal) <
                         std::tie(b.visit_id, b.segment_index, b.signal);
              });
    aggregate(summary);
    return summary;
}

FoldSummary evaluate_predictions(const std::vector<PredictionRecord>& predictions,
                                 const std::vector<SignalRating>& ratings, double min_high_fraction,
                                 double decision_threshold) {
    FoldSummary summary;
    summary.k = 1;
    const auto policy = labeling::fit_label_policy(ratings, min_high_fraction);
    std::map<std::pair<SegmentKey, SignalId>, double> scores_by_key;
    for (const auto& p : predictions) scores_by_key[{p.key(), p.signal}] = p.score;
    for (const auto& r : ratings) summary.fold_of_visit[r.visit_id] = 0;

    for (const auto& id : signal_catalog()) {
        const auto& status = policy.signals.at(id);
        if (status.n == 0) continue;
        FoldCell cell;
        cell.signal = id;
        cell.threshold = status.threshold;
        if (!status.included) {
            cell.note = fmt::format("excluded: {}", labeling::to_string(status.reason));
            summary.cells.push_back(std::move(cell));
            continue;
        }
        std::vector<int> labels;
        std::vector<double> scores;
        for (const auto& r : ratings) {
            if (r.signal != id) continue;
            const auto it = scores_by_key.find({r.key(), id});
            if (it == scores_by_key.end()) continue;
            labels.push_back(policy.label(r));
            scores.push_back(it->second);
        }
        cell.n_test = labels.size();
        cell.n_test_high = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
        if (cell.n_test == 0) {
            cell.note = "no predictions for this signal";
        } else if (cell.n_test_high == 0 || cell.n_test_high == cell.n_test) {
            cell.note = "evaluation split lacks one class";
        } else {
            cell.applicable = true;
            cell.metrics = all_metrics(labels, scores, decision_threshold);
        }
        summary.cells.push_back(std::move(cell));
    }
    summary.out_of_fold = predictions;
    aggregate(summary);
    return summary;
}

void write_summary_csv(std::ostream& out, const FoldSummary& s) {
    csv::write_row(out, {"metric", "per_signal_mean", "per_signal_sd", "pooled_mean", "pooled_sd", "n_signals",
                         "n_cells"});
    for (int m = 0; m < kMetricCount; ++m) {
        const auto& a = s.signal_mean[m];
        const auto& p = s.pooled[m];
        csv::write_row(out, {std::string(metric_name(static_cast<Metric>(m))), fmt::format("{:.6f}", a.mean),
                             fmt::format("{:.6f}", a.sd), fmt::format("{:.6f}", p.mean), fmt::format("{:.6f}", p.sd),
                             std::to_string(a.n), std::to_string(p.n)});
    }
}

void write_summary_markdown(std::ostream& out, const FoldSummary& s, std::string_view model_name) {
    static constexpr std::array<std::string_view, kMetricCount> labels = {
        "Accuracy", "Precision", "Recall", "Weighted F1", "AUROC", "AUPRC"};
    out << fmt::format("| Metric | {} per-signal mean of fold means (mean ± sd) | {} pooled (mean ± sd) |\n",
                       model_name, model_name);
    out << "|---|---|---|\n";
    for (int m = 0; m < kMetricCount; ++m) {
        out << fmt::format("| {} | {:.3f} ± {:.3f} | {:.3f} ± {:.3f} |\n", labels[m], s.signal_mean[m].mean,
                           s.signal_mean[m].sd, s.pooled[m].mean, s.pooled[m].sd);
    }
    out << fmt::format("\n{}-fold cross-validation over {} signal(s); {} (signal, fold) cell(s) not applicable.\n",
                       s.k, s.per_signal.size(), s.n_not_applicable);
}

void write_cells_csv(std::ostream& out, const FoldSummary& s) {
    csv::Row header = {"signal", "role", "fold", "applicable", "n_train", "n_test", "n_test_high", "threshold"};
    for (int m = 0; m < kMetricCount; ++m) header.emplace_back(metric_name(static_cast<Metric>(m)));
    header.emplace_back("note");
    csv::write_row(out, header);
    for (const auto& c : s.cells) {
        csv::Row row = {std::string(to_string(c.signal.signal)),
                        std::string(to_string(c.signal.role)),
                        std::to_string(c.fold),
                        c.applicable ? "true" : "false",
                        std::to_string(c.n_train),
                        std::to_string(c.n_test),
                        std::to_string(c.n_test_high),
                        fmt::format("{:.6f}", c.threshold)};
        for (int m = 0; m < kMetricCount; ++m) row.push_back(c.applicable ? fmt::format("{:.6f}", c.metrics[m]) : "");
        row.push_back(c.note);
        csv::write_row(out, row);
    }
}

}  // namespace socsig::evaluation
