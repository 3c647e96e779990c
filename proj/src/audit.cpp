#include "socsig/audit.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "socsig/asr_eval.hpp"
#include "socsig/csv.hpp"
#include "socsig/error.hpp"

namespace socsig::audit {

double dpd(std::span<const double> scores, std::span<const Group> groups, double threshold) {
    if (scores.size() != groups.size()) throw ValidationError("dpd: scores and groups differ in length");
    std::vector<stats::GroupedValue> records;
    records.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) records.push_back({groups[i], scores[i] > threshold ? 1.0 : 0.0});
    return dpd_statistic(records);
}

double dpd_statistic(std::span<const stats::GroupedValue> records) {
    double pos[2] = {0.0, 0.0};
    double n[2] = {0.0, 0.0};
    for (const auto& r : records) {
        const auto g = static_cast<std::size_t>(r.group);
        pos[g] += r.value;
        n[g] += 1.0;
    }
    if (n[0] == 0.0 || n[1] == 0.0) throw ValidationError("dpd needs both groups represented");
    return pos[0] / n[0] - pos[1] / n[1];
}

std::map<std::string, Group> group_map(const Corpus& corpus) {
    std::map<std::string, Group> groups;
    for (const auto& v : corpus.visits()) groups.emplace(v.visit_id, v.group);
    return groups;
}

GenderTest gender_by_group(const Corpus& corpus, bool coded) {
    GenderTest t;
    t.coded = coded;
    t.counts = count_group_gender(corpus, coded);
    const auto& c = t.counts;
    const auto others = c.at(Group::white, Gender::other) + c.at(Group::non_white, Gender::other);
    if (others > 0) t.note = fmt::format("{} visit(s) with gender 'other' left out of the 2x2 table", others);
    try {
        t.result = stats::chi_square_2x2(c.at(Group::white, Gender::f), c.at(Group::white, Gender::m),
                                         c.at(Group::non_white, Gender::f), c.at(Group::non_white, Gender::m));
    } catch (const ValidationError& e) {
        t.note += (t.note.empty() ? "" : "; ") + std::string("not testable: ") + e.what();
    }
    return t;
}

FairnessReport fairness_audit(const std::vector<PredictionRecord>& predictions, const Corpus& corpus,
                              const std::map<std::string, std::string>* references, const FairnessConfig& config) {
    FairnessReport report;
    report.config = config;
    const auto groups = group_map(corpus);

    std::map<SignalId, std::vector<stats::GroupedValue>> by_signal;
    for (const auto& p : predictions) {
        const auto it = groups.find(p.visit_id);
        if (it == groups.end()) throw ValidationError("prediction for unknown visit '" + p.visit_id + "'");
        by_signal[p.signal].push_back({it->second, p.score > config.decision_threshold ? 1.0 : 0.0});
    }
    const auto& catalog = signal_catalog();
    for (std::size_t s = 0; s < catalog.size(); ++s) {
        const auto it = by_signal.find(catalog[s]);
        if (it == by_signal.end()) continue;
        FairnessRow row;
        row.signal = catalog[s];
        for (const auto& r : it->second) ++(r.group == Group::white ? row.n_white : row.n_non_white);
        if (row.n_white == 0 || row.n_non_white == 0) {
            report.notices.push_back(row.signal.key() + ": predictions cover only one group; no interval");
            continue;
        }
        row.bootstrap = stats::bootstrap_percentile(it->second, dpd_statistic, config.n_boot,
                                                    stats::stream_seed(config.seed, 1000 + s), config.level);
        report.rows.push_back(row);
    }

    if (references) {
        const auto table = asr::per_visit_wer(corpus, *references);
        for (const auto& id : table.skipped) report.notices.push_back("no usable reference transcript for visit " + id);
        std::vector<double> white;
        std::vector<double> non_white;
        for (const auto& r : table.rows) (r.group == Group::white ? white : non_white).push_back(r.wer);
        if (white.size() < 2 || non_white.size() < 2) {
            report.notices.push_back("WER t-test omitted: fewer than two referenced visits in a group");
        } else {
            WerTest w;
            w.n_white = white.size();
            w.n_non_white = non_white.size();
            w.mean_white = stats::mean(white);
            w.sd_white = stats::sample_sd(white);
            w.mean_non_white = stats::mean(non_white);
            w.sd_non_white = stats::sample_sd(non_white);
            try {
                w.result = stats::student_t_test(white, non_white);
                report.wer = w;
            } catch (const NumericError& e) {
                report.notices.push_back(std::string("WER t-test omitted: ") + e.what());
            }
        }
    } else {
        report.notices.push_back("WER t-test omitted: no reference transcripts supplied");
    }

    report.gender_coded = gender_by_group(corpus, true);
    report.gender_uncoded = gender_by_group(corpus, false);
    return report;
}

VisitScores aggregate_visit_scores(const std::vector<PredictionRecord>& predictions,
                                   const std::vector<std::string>& visits, double threshold, bool probability_mean) {
    std::map<std::pair<SignalId, std::string>, std::pair<double, std::size_t>> sums;
    std::set<SignalId> signals;
    const std::set<std::string> wanted(visits.begin(), visits.end());
    for (const auto& p : predictions) {
        if (!wanted.count(p.visit_id)) continue;
        auto& [sum, n] = sums[{p.signal, p.visit_id}];
        sum += probability_mean ? p.score : (p.score > threshold ? 1.0 : 0.0);
        ++n;
        signals.insert(p.signal);
    }
    VisitScores out;
    for (const auto& id : signal_catalog()) {
        if (!signals.count(id)) continue;
        std::vector<std::string> missing;
        for (const auto& v : wanted) {
            const auto it = sums.find({id, v});
            if (it == sums.end()) {
                missing.push_back(v);
                continue;
            }
            const auto& [sum, n] = it->second;
            out.scores.push_back({v, id, sum / static_cast<double>(n), n});
        }
        if (!missing.empty()) {
            std::string list;
            for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? " " : "") + missing[i];
            out.warnings.push_back(
                fmt::format("{}: {} visit(s) without predictions excluded: {}", id.key(), missing.size(), list));
        }
    }
    return out;
}

DisparityReport disparity_scan(const std::vector<VisitScore>& visit_scores, const std::map<std::string, Group>& groups,
                               stats::MannWhitneyOptions options) {
    std::map<SignalId, std::pair<std::vector<double>, std::vector<double>>> by_signal;
    for (const auto& v : visit_scores) {
        const auto it = groups.find(v.visit_id);
        if (it == groups.end()) throw ValidationError("visit score for unknown visit '" + v.visit_id + "'");
        auto& [white, non_white] = by_signal[v.signal];
        (it->second == Group::white ? white : non_white).push_back(v.score);
    }
    DisparityReport report;
    report.continuity = options.continuity;
    for (const auto& id : signal_catalog()) {
        const auto it = by_signal.find(id);
        if (it == by_signal.end()) continue;
        const auto& [white, non_white] = it->second;
        DisparityRow row;
        row.signal = id;
        row.n_white = white.size();
        row.n_non_white = non_white.size();
        if (white.empty() || non_white.empty()) {
            row.note = "not testable: a group has no visits";
        } else {
            try {
                row.result = stats::mann_whitney_u(white, non_white, options);
                row.testable = true;
            } catch (const NumericError&) {
                row.note = "not testable: all visit scores tied";
            }
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

constexpr std::string_view kDpdNote =
    "Difference = rate of high predictions for white patients minus the rate for non-white patients. "
    "Positive: the model predicts high more often for white patients. Negative: less often.";
constexpr std::string_view kZNote =
    "z > 0: visits with white patients score higher on average than visits with non-white patients. "
    "z < 0: they score lower.";

std::string fmt_p(double p) { return fmt::format("{:.4f}", p); }


void write_gender(std::ostream& out, const GenderTest& g) {
    const auto& c = g.counts;
    out << fmt::format("- {} visits: white f={} m={}, non-white f={} m={}", g.coded ? "Coded" : "Uncoded",
                       c.at(Group::white, Gender::f), c.at(Group::white, Gender::m), c.at(Group::non_white, Gender::f),
                       c.at(Group::non_white, Gender::m));
    if (g.result) {
        const auto n = c.at(Group::white, Gender::f) + c.at(Group::white, Gender::m) +
                       c.at(Group::non_white, Gender::f) + c.at(Group::non_white, Gender::m);
        out << fmt::format("; chi2(1, N = {}) = {:.3f}, p = {}", n, g.result->statistic, fmt_p(g.result->p_two_sided));
    }
    if (!g.note.empty()) out << " (" << g.note << ")";
    out << "\n";
}

}  // namespace

void write_fairness_csv(std::ostream& out, const FairnessReport& report) {
    csv::write_row(out, {"signal", "role", "mean_dpd", "ci_low", "ci_high", "ci_contains_zero", "n_white",
                         "n_non_white", "n_boot", "n_degenerate"});
    for (const auto& r : report.rows) {
        csv::write_row(out, {std::string(to_string(r.signal.signal)), std::string(to_string(r.signal.role)),
                             fmt::format("{:.6f}", r.bootstrap.mean_stat), fmt::format("{:.6f}", r.bootstrap.ci_low),
                             fmt::format("{:.6f}", r.bootstrap.ci_high), r.ci_contains_zero() ? "true" : "false",
                             std::to_string(r.n_white), std::to_string(r.n_non_white),
                             std::to_string(r.bootstrap.n_boot), std::to_string(r.bootstrap.n_degenerate)});
    }
}

void write_fairness_markdown(std::ostream& out, const FairnessReport& report) {
    const int pct = static_cast<int>(report.config.level * 100.0 + 0.5);
    out << fmt::format("| Social Signal | Mean Demographic Parity Difference* | {}% Confidence Interval |\n", pct);
    out << "|---|---|---|\n";
    for (const auto& r : report.rows) {
        out << fmt::format("| {} | {:.3f} | ({:.3f}, {:.3f}) |\n", r.signal.label(), r.bootstrap.mean_stat,
                           r.bootstrap.ci_low, r.bootstrap.ci_high);
    }
    out << "\n*" << kDpdNote << " The mean column is the statistic on the original sample; intervals are "
        << fmt::format("{}-resample percentile bootstrap bounds at decision threshold {:g}.\n", report.config.n_boot,
                       report.config.decision_threshold);
    out << "\nASR word error rate by group:\n\n";
    if (report.wer) {
        const auto& w = *report.wer;
        out << fmt::format("- white: n = {}, M = {:.3f}, SD = {:.3f}\n", w.n_white, w.mean_white, w.sd_white);
        out << fmt::format("- non-white: n = {}, M = {:.3f}, SD = {:.3f}\n", w.n_non_white, w.mean_non_white,
                           w.sd_non_white);
        out << fmt::format("- t({:g}) = {:.2f}, p = {}\n", *w.result.df, w.result.statistic,
                           fmt_p(w.result.p_two_sided));
    } else {
        out << "- not available\n";
    }
    out << "\nGender by group (Pearson chi-square, no continuity correction):\n\n";
    write_gender(out, report.gender_coded);
    write_gender(out, report.gender_uncoded);
    if (!report.notices.empty()) {
        out << "\nNotices:\n\n";
        for (const auto& n : report.notices) out << "- " << n << "\n";
    }
}

void write_disparity_csv(std::ostream& out, const DisparityReport& report) {
    csv::write_row(out, {"signal", "role", "n_white", "n_non_white", "u", "z", "p_one_sided", "p_two_sided",
                         "testable", "note"});
    for (const auto& r : report.rows) {
        csv::Row row = {std::string(to_string(r.signal.signal)), std::string(to_string(r.signal.role)),
                        std::to_string(r.n_white), std::to_string(r.n_non_white)};
        if (r.testable) {
            row.push_back(fmt::format("{:.1f}", r.result.statistic));
            row.push_back(fmt::format("{:.6f}", *r.result.z));
            row.push_back(fmt::format("{:.6f}", r.result.p_one_sided));
            row.push_back(fmt::format("{:.6f}", r.result.p_two_sided));
        } else {
            row.insert(row.end(), {"", "", "", ""});
        }
        row.push_back(r.testable ? "true" : "false");
        row.push_back(r.note);
        csv::write_row(out, row);
    }
}

void write_disparity_markdown(std::ostream& out, const DisparityReport& report, bool one_sided) {
    out << fmt::format("| Social Signal | z-score* | p-value** ({}) |\n", one_sided ? "one-sided" : "two-sided");
    out << "|---|---|---|\n";
    for (const auto& r : report.rows) {
        if (!r.testable) {
            out << fmt::format("| {} | n/a | n/a |\n", r.signal.label());
            continue;
        }
        const double p = one_sided ? r.result.p_one_sided : r.result.p_two_sided;
        out << fmt::format("| {} | {:.2f} | {}{:.3f}{} |\n", r.signal.label(), *r.result.z, p < 0.05 ? "**" : "", p,
                           p < 0.05 ? "**" : "");
    }
    out << "\n*" << kZNote << "\n";
    out << fmt::format("\n**Mann-Whitney U, normal approximation with tie correction{}. Bold marks p < 0.05; "
                       "p-values are not adjusted for multiple comparisons.\n",
                       report.continuity ? " and continuity correction" : "");
}

}  // namespace socsig::audit
