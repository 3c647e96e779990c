#include "socsig/report.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "socsig/corpus.hpp"
#include "socsig/csv.hpp"
#include "socsig/error.hpp"

namespace socsig::report {

namespace {

// Header-keyed view of a CSV artifact.
struct Table {
    std::vector<std::string> header;
    std::vector<csv::Row> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw ValidationError(fmt::format("artifact lacks column '{}'", name));
    }
    const std::string& get(const csv::Row& row, std::string_view name) const {
        const auto c = column(name);
        if (c >= row.size()) throw ValidationError(fmt::format("artifact row lacks column '{}'", name));
        return row[c];
    }
};

std::optional<Table> load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    auto records = csv::parse(read_file(path));
    if (records.empty()) throw ValidationError("empty artifact '" + path.string() + "'");
    Table t;
    t.header = std::move(records.front().fields);
    for (std::size_t i = 1; i < records.size(); ++i) t.rows.push_back(std::move(records[i].fields));
    return t;
}

double num(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("non-numeric artifact cell '" + s + "'");
}

std::string f3(const std::string& s) { return fmt::format("{:.3f}", num(s)); }

void missing(std::ostream& out, std::string_view name) { out << "Artifact `" << name << "` not found.\n"; }

SignalId row_signal(const Table& t, const csv::Row& row) {
    return make_signal_id(t.get(row, "signal"), t.get(row, "role"));
}

void catalog_section(std::ostream& out, const std::filesystem::path& dir) {
    out << "## Table 1. Social signals and label status\n\n";
    const auto labels = load(dir / "labels.csv");
    std::map<SignalId, std::string> cell;
    std::size_t included = 0;
    if (labels) {
        for (const auto& row : labels->rows) {
            const auto id = row_signal(*labels, row);
            const bool inc = labels->get(row, "included") == "true";
            included += inc;
            const auto& reason = labels->get(row, "reason");
            cell[id] = fmt::format("{} high; {}", f3(labels->get(row, "high_fraction")),
                                   inc ? (reason.empty() ? std::string("included") : "included, " + reason)
                                       : "excluded, " + reason);
        }
    }
    out << "| Social Signal | Provider | Patient |\n|---|---|---|\n";
    for (std::size_t s = 0; s < kSignalCount; ++s) {
        const auto sig = static_cast<Signal>(s);
        out << "| " << to_string(sig);
        for (const auto role : {SpeakerRole::provider, SpeakerRole::patient}) {
            out << " | ";
            if (!is_ratable(sig, role)) {
                out << "not rated";
            } else if (const auto it = cell.find({sig, role}); it != cell.end()) {
                out << it->second;
            } else {
                out << "rated";
            }
        }
        out << " |\n";
    }
    out << "\n";
    if (labels) {
        out << fmt::format("{} of {} ratable signals included.\n", included, signal_catalog().size());
    } else {
        missing(out, "labels.csv");
    }
}

void performance_section(std::ostream& out, const std::filesystem::path& dir) {
    out << "\n## Table 2. Classifier performance (cross-validation)\n\n";
    const auto eval = load(dir / "evaluation.csv");
    if (!eval) {
        missing(out, "evaluation.csv");
        return;
    }
    static const std::map<std::string, std::string> labels = {
        {"accuracy", "Accuracy"}, {"precision", "Precision"}, {"recall", "Recall"},
        {"weighted_f1", "Weighted F1"}, {"auroc", "AUROC"}, {"auprc", "AUPRC"}};
    out << "| Metric | Per-signal mean of fold means (mean ± sd) | Pooled (mean ± sd) |\n|---|---|---|\n";
    std::string n_signals = "0";
    std::string n_cells = "0";
    for (const auto& row : eval->rows) {
        const auto& metric = eval->get(row, "metric");
        const auto it = labels.find(metric);
        out << fmt::format("| {} | {} ± {} | {} ± {} |\n", it == labels.end() ? metric : it->second,
                           f3(eval->get(row, "per_signal_mean")), f3(eval->get(row, "per_signal_sd")),
                           f3(eval->get(row, "pooled_mean")), f3(eval->get(row, "pooled_sd")));
        n_signals = eval->get(row, "n_signals");
        n_cells = eval->get(row, "n_cells");
    }
    out << fmt::format("\nSignals: {}; applicable (signal, fold) cells: {}.\n", n_signals, n_cells);
}

void transcript_section(std::ostream& out, const std::filesystem::path& dir) {
    out << "\n## Table 3. Transcript error rates by group\n\n";
    const auto asr = load(dir / "asr_eval.csv");
    if (!asr) {
        missing(out, "asr_eval.csv");
        return;
    }
    std::map<std::string, std::size_t> counts;
    std::map<std::pair<std::string, std::string>, csv::Row> summary;
    for (const auto& row : asr->rows) {
        const auto& id = asr->get(row, "visit_id");
        const auto& group = asr->get(row, "group");
        if (id == "#mean" || id == "#sd") {
            summary[{id, group}] = row;
        } else {
            ++counts[group];
            ++counts["all"];
        }
    }
    out << "| Group | Visits | WER (mean ± sd) | CER (mean ± sd) |\n|---|---|---|---|\n";
    for (const std::string group : {"white", "non_white", "all"}) {
        const auto m = summary.find({"#mean", group});
        const auto s = summary.find({"#sd", group});
        if (m == summary.end() || s == summary.end()) continue;
        out << fmt::format("| {} | {} | {} ± {} | {} ± {} |\n", group, counts[group], f3(asr->get(m->second, "wer")),
                           f3(asr->get(s->second, "wer")), f3(asr->get(m->second, "cer")),
                           f3(asr->get(s->second, "cer")));
    }
}

void fairness_section(std::ostream& out, const std::filesystem::path& dir) {
    out << "\n## Table 4. Demographic parity differences\n\n";
    const auto fair = load(dir / "fairness.csv");
    if (!fair) {
        missing(out, "fairness.csv");
        return;
    }
    out << "| Social Signal | Mean Demographic Parity Difference* | Confidence Interval | Contains 0 |\n"
           "|---|---|---|---|\n";
    std::string n_boot;
    for (const auto& row : fair->rows) {
        out << fmt::format("| {} | {} | ({}, {}) | {} |\n", row_signal(*fair, row).label(),
                           f3(fair->get(row, "mean_dpd")), f3(fair->get(row, "ci_low")),
                           f3(fair->get(row, "ci_high")), fair->get(row, "ci_contains_zero") == "true" ? "yes" : "no");
        n_boot = fair->get(row, "n_boot");
    }
    out << "\n*White minus non-white rate of high predictions; positive means more high predictions for white "
           "patients.";
    if (!n_boot.empty()) out << " Percentile bootstrap over " << n_boot << " resamples.";
    out << "\n";
}

void disparity_section(std::ostream& out, const std::filesystem::path& dir) {
    out << "\n## Table 5. Group differences in predicted signals\n\n";
    const auto disp = load(dir / "disparity.csv");
    if (!disp) {
        missing(out, "disparity.csv");
        return;
    }
    out << "| Social Signal | n (white/non-white) | z-score* | p (two-sided) | p (one-sided) |\n"
           "|---|---|---|---|---|\n";
    for (const auto& row : disp->rows) {
        const auto label = row_signal(*disp, row).label();
        const auto n = disp->get(row, "n_white") + "/" + disp->get(row, "n_non_white");
        if (disp->get(row, "testable") != "true") {
            out << fmt::format("| {} | {} | n/a | n/a | n/a |\n", label, n);
            continue;
        }
        const double p2 = num(disp->get(row, "p_two_sided"));
        const auto mark = p2 < 0.05 ? "**" : "";
        out << fmt::format("| {} | {} | {:.2f} | {}{:.3f}{} | {:.3f} |\n", label, n, num(disp->get(row, "z")), mark,
                           p2, mark, num(disp->get(row, "p_one_sided")));
    }
    out << "\n*Positive z: visits with white patients score higher. Mann-Whitney U on visit-level scores; bold marks "
           "two-sided p < 0.05, unadjusted for multiple comparisons.\n";
}

}  // namespace

void write_report(std::ostream& out, const std::filesystem::path& dir) {
    out << "# Social signal pipeline report\n\n";
    catalog_section(out, dir);
    performance_section(out, dir);
    transcript_section(out, dir);
    fairness_section(out, dir);
    disparity_section(out, dir);
}

}  // namespace socsig::report
