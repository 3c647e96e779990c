#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "socsig/audit.hpp"
#include "socsig/error.hpp"
#include "socsig/synth.hpp"

using namespace socsig;
using namespace socsig::audit;

namespace {

const SignalId kWarmth{Signal::warmth, SpeakerRole::provider};
const SignalId kEmpathy{Signal::empathy, SpeakerRole::provider};

VisitRecord visit(const std::string& id, Group g, Gender s, bool coded) {
    VisitRecord v;
    v.visit_id = id;
    v.group = g;
    v.gender = s;
    v.coded = coded;
    v.utterances.push_back({SpeakerRole::provider, 0.0, 2.0, "hello there friend"});
    return v;
}

}  // namespace

TEST_CASE("dpd sign and examples") {
    const std::vector<Group> g{Group::white, Group::white, Group::white, Group::white,
                               Group::non_white, Group::non_white, Group::non_white, Group::non_white};
    CHECK(dpd(std::vector<double>{0.9, 0.9, 0.9, 0.1, 0.9, 0.9, 0.1, 0.1}, g) == 0.25);
    CHECK(dpd(std::vector<double>{0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9, 0.1}, g) == 0.0);
    CHECK(dpd(std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0}, g) == 1.0);
    CHECK(dpd(std::vector<double>{0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0}, g) == 0.0);
    CHECK_THROWS_AS(dpd(std::vector<double>{1, 0}, std::vector<Group>{Group::white, Group::white}), ValidationError);
    CHECK_THROWS_AS(dpd(std::vector<double>{1}, g), ValidationError);
}

TEST_CASE("fair predictions give a small dpd") {
    const auto stream = synth::null_prediction_stream(2000, 0.7, 0.3, 17);
    CHECK(std::abs(dpd_statistic(stream)) < 0.05);
}

TEST_CASE("visit aggregation") {
    std::vector<PredictionRecord> p{{"a", 0, kWarmth, 0.9}, {"a", 1, kWarmth, 0.1}, {"a", 2, kWarmth, 0.8},
                                    {"a", 3, kWarmth, 0.7}, {"b", 0, kWarmth, 0.6}, {"b", 1, kWarmth, 0.4},
                                    {"b", 2, kWarmth, 0.9}, {"c", 0, kWarmth, 0.2}};
    auto s = aggregate_visit_scores(p, {"a", "b", "c"});
    REQUIRE(s.scores.size() == 3);
    CHECK(s.scores[0].score == 0.75);
    CHECK(s.scores[1].score == doctest::Approx(2.0 / 3.0));
    CHECK(s.scores[2].score == 0.0);
    CHECK(s.scores[1].n_segments == 3);
    CHECK(s.warnings.empty());

    s = aggregate_visit_scores(p, {"a", "b"}, 0.5, true);
    CHECK(s.scores[1].score == doctest::Approx((0.6 + 0.4 + 0.9) / 3.0));

    s = aggregate_visit_scores(p, {"a", "d"});
    CHECK(s.scores.size() == 1);
    REQUIRE(s.warnings.size() == 1);
    CHECK(s.warnings[0].find("d") != std::string::npos);
}

TEST_CASE("aggregation and scan ignore segment order") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u;
    std::vector<PredictionRecord> p;
    std::map<std::string, Group> groups;
    std::vector<std::string> ids;
    for (int v = 0; v < 30; ++v) {
        const auto id = "v" + std::to_string(v);
        ids.push_back(id);
        groups[id] = v % 3 ? Group::white : Group::non_white;
        for (int k = 0; k < 4; ++k) p.push_back({id, k, kWarmth, u(rng)});
    }
    const auto a = disparity_scan(aggregate_visit_scores(p, ids).scores, groups);
    std::shuffle(p.begin(), p.end(), rng);
    const auto b = disparity_scan(aggregate_visit_scores(p, ids).scores, groups);
    CHECK(a.rows[0].result.statistic == b.rows[0].result.statistic);
    CHECK(a.rows[0].result.p_two_sided == b.rows[0].result.p_two_sided);
}

TEST_CASE("disparity scan") {
    std::map<std::string, Group> groups;
    std::vector<VisitScore> scores;
    for (int v = 0; v < 40; ++v) {
        const auto id = "v" + std::to_string(v);
        groups[id] = v % 2 ? Group::white : Group::non_white;
        // Warmth: identical distributions. Empathy: white visits higher.
        scores.push_back({id, kWarmth, (v / 2) % 4 / 4.0, 4});
        scores.push_back({id, kEmpathy, (v % 2 ? 0.5 : 0.0) + (v / 2) % 3 / 10.0, 4});
    }
    scores.push_back({"v0", {Signal::sadness, SpeakerRole::patient}, 0.5, 1});
    scores.push_back({"v1", {Signal::sadness, SpeakerRole::patient}, 0.5, 1});
    scores.push_back({"v2", {Signal::distress, SpeakerRole::patient}, 0.5, 1});
    const auto report = disparity_scan(scores, groups);
    REQUIRE(report.rows.size() == 4);
    const auto& warm = report.rows[0];
    CHECK(warm.signal == kWarmth);
    CHECK(warm.testable);
    CHECK(*warm.result.z == 0.0);
    CHECK(warm.result.p_two_sided == 1.0);
    const auto& emp = report.rows[1];
    CHECK(emp.signal == kEmpathy);
    CHECK(*emp.result.z > 0.0);
    CHECK(emp.result.p_two_sided < 0.001);
    CHECK_FALSE(report.rows[2].testable);
    CHECK(report.rows[2].note == "not testable: all visit scores tied");
    CHECK_FALSE(report.rows[3].testable);
    CHECK(report.rows[3].note == "not testable: a group has no visits");

    scores.push_back({"zz", kWarmth, 0.1, 1});
    CHECK_THROWS_AS(disparity_scan(scores, groups), ValidationError);

    std::ostringstream csv;
    write_disparity_csv(csv, report);
    CHECK(csv.str().rfind("signal,role,n_white,n_non_white,u,z,p_one_sided,p_two_sided,testable,note\n", 0) == 0);
    std::ostringstream md;
    write_disparity_markdown(md, report, false);
    CHECK(md.str().find("z > 0") != std::string::npos);
}

TEST_CASE("gender by group") {
    std::vector<VisitRecord> v;
    int n = 0;
    const auto add = [&](Group g, Gender s, bool coded, int count) {
        for (int i = 0; i < count; ++i) v.push_back(visit("v" + std::to_string(n++), g, s, coded));
    };
    add(Group::white, Gender::f, true, 20);
    add(Group::white, Gender::m, true, 10);
    add(Group::non_white, Gender::f, true, 10);
    add(Group::non_white, Gender::m, true, 20);
    add(Group::white, Gender::other, true, 2);
    add(Group::white, Gender::f, false, 3);
    const Corpus corpus(v);
    const auto coded = gender_by_group(corpus, true);
    REQUIRE(coded.result);
    CHECK(std::abs(coded.result->statistic - 6.6667) <= 1e-4);
    CHECK(coded.note.find("2 visit(s)") != std::string::npos);
    const auto uncoded = gender_by_group(corpus, false);
    CHECK_FALSE(uncoded.result);
    CHECK(uncoded.note.find("not testable") != std::string::npos);
}

TEST_CASE("fairness audit") {
    std::vector<VisitRecord> v;
    std::map<std::string, std::string> refs;
    std::vector<PredictionRecord> preds;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u;
    for (int i = 0; i < 60; ++i) {
        const Group g = i % 3 ? Group::white : Group::non_white;
        auto rec = visit("v" + std::to_string(i), g, i % 2 ? Gender::f : Gender::m, true);
        v.push_back(rec);
        refs[rec.visit_id] = i % 4 ? "hello there friend" : "hello there my friend";
        for (int k = 0; k < 5; ++k) {
            // Warmth: fair. Empathy: group-dependent threshold planted.
            const double score = u(rng);
            preds.push_back({rec.visit_id, k, kWarmth, score});
            preds.push_back({rec.visit_id, k, kEmpathy, g == Group::white ? score + 0.3 : score});
        }
    }
    const Corpus corpus(v);
    FairnessConfig cfg;
    cfg.n_boot = 500;
    const auto report = fairness_audit(preds, corpus, &refs, cfg);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].signal == kWarmth);
    CHECK(report.rows[0].ci_contains_zero());
    CHECK(report.rows[1].signal == kEmpathy);
    CHECK_FALSE(report.rows[1].ci_contains_zero());
    CHECK(report.rows[1].bootstrap.ci_low > 0.0);
    CHECK(report.rows[0].n_white == 200);
    CHECK(report.rows[0].n_non_white == 100);
    REQUIRE(report.wer);
    CHECK(*report.wer->result.df == 58.0);
    CHECK(report.gender_coded.result);

    const auto no_refs = fairness_audit(preds, corpus, nullptr, cfg);
    CHECK_FALSE(no_refs.wer);
    CHECK(std::find(no_refs.notices.begin(), no_refs.notices.end(),
                    "WER t-test omitted: no reference transcripts supplied") != no_refs.notices.end());
    CHECK(no_refs.rows[1].bootstrap.ci_low == report.rows[1].bootstrap.ci_low);

    std::ostringstream csv;
    write_fairness_csv(csv, report);
    CHECK(csv.str().rfind(
              "signal,role,mean_dpd,ci_low,ci_high,ci_contains_zero,n_white,n_non_white,n_boot,n_degenerate\n", 0) ==
          0);
    std::ostringstream md;
    write_fairness_markdown(md, report);
    CHECK(md.str().find("Positive: the model predicts high more often for white patients.") != std::string::npos);

    preds.push_back({"ghost", 0, kWarmth, 0.5});
    CHECK_THROWS_AS(fairness_audit(preds, corpus, nullptr, cfg), ValidationError);
}

TEST_CASE("group permutation keeps the scan calibrated") {
    // Small version of the acceptance check: 200 permutations, one signal.
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u;
    std::vector<VisitScore> scores;
    std::vector<Group> labels;
    for (int v = 0; v < 120; ++v) {
        scores.push_back({"v" + std::to_string(v), kWarmth, std::floor(u(rng) * 4.0) / 4.0, 4});
        labels.push_back(v % 4 ? Group::white : Group::non_white);
    }
    int hits = 0;
    for (int perm = 0; perm < 200; ++perm) {
        std::shuffle(labels.begin(), labels.end(), rng);
        std::map<std::string, Group> groups;
        for (std::size_t v = 0; v < scores.size(); ++v) groups[scores[v].visit_id] = labels[v];
        hits += disparity_scan(scores, groups).rows[0].result.p_two_sided < 0.05;
    }
    // 10 expected; 4 sd of a binomial(200, 0.05) is about 12.
    CHECK(hits <= 22);
    CHECK(hits >= 1);
}
