#include "doctest.h"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "socsig/corpus.hpp"
#include "socsig/error.hpp"

using namespace socsig;

namespace {

const char* kTwoVisits =
    R"({"visit_id":"v1","group":"white","gender":"f","coded":true,"utterances":[{"speaker":"provider","start_s":0,"end_s":2.5,"text":"Hello there"},{"speaker":"patient","start_s":3,"end_s":null,"text":"Hi doctor"}]})"
    "\n"
    R"({"visit_id":"v2","group":"non_white","gender":"other","coded":false,"utterances":[{"speaker":"other","start_s":1.5,"end_s":2,"text":"Nurse here"}]})"
    "\n";

Corpus parse(const std::string& s) {
    std::istringstream in(s);
    return parse_corpus(in);
}

std::string what_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("two well-formed visits") {
    const auto c = parse(kTwoVisits);
    REQUIRE(c.size() == 2);
    const auto& v1 = c.at("v1");
    CHECK(v1.group == Group::white);
    CHECK(v1.gender == Gender::f);
    CHECK(v1.coded);
    REQUIRE(v1.utterances.size() == 2);
    CHECK(v1.utterances[0].end_s == 2.5);
    CHECK_FALSE(v1.utterances[1].end_s.has_value());
    CHECK(c.at("v2").utterances[0].speaker == SpeakerRole::other);
}

TEST_CASE("serialize then load gives an equal corpus") {
    const auto c = parse(kTwoVisits);
    std::ostringstream out;
    write_corpus(out, c);
    CHECK(parse(out.str()) == c);
}

TEST_CASE("duplicate visit id names the id") {
    const std::string line = std::string(kTwoVisits).substr(0, std::string(kTwoVisits).find('\n') + 1);
    CHECK(what_of([&] { parse(line + line); }).find("v1") != std::string::npos);
}

TEST_CASE("utterances are sorted by start time") {
    std::mt19937_64 rng(3);
    std::vector<double> starts;
    for (int i = 0; i < 30; ++i) starts.push_back(static_cast<double>(rng() % 1000) / 10.0);
    std::string utts;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        utts += fmt::format("{}{{\"speaker\":\"patient\",\"start_s\":{},\"end_s\":null,\"text\":\"w{}\"}}",
                            i ? "," : "", starts[i], i);
    }
    const auto c = parse(R"({"visit_id":"s","group":"white","gender":"m","coded":false,"utterances":[)" + utts + "]}\n");
    auto expected = starts;
    std::sort(expected.begin(), expected.end());
    std::vector<double> got;
    for (const auto& u : c.at("s").utterances) got.push_back(u.start_s);
    CHECK(got == expected);
}

TEST_CASE("load errors carry line numbers and reasons") {
    const std::string good = std::string(kTwoVisits).substr(0, std::string(kTwoVisits).find('\n') + 1);
    CHECK(what_of([&] { parse(good + "{not json\n"); }).find("line 2") != std::string::npos);
    CHECK(what_of([] {
              parse(R"({"visit_id":"x","group":"asian","gender":"f","coded":true,"utterances":[{"speaker":"provider","start_s":0,"end_s":null,"text":"a"}]})");
          }).find("asian") != std::string::npos);
    CHECK(what_of([] {
              parse(R"({"visit_id":"x","group":"white","gender":"f","coded":true,"utterances":[{"speaker":"nurse","start_s":0,"end_s":null,"text":"a"}]})");
          }).find("nurse") != std::string::npos);
    CHECK_FALSE(what_of([] {
                    parse(R"({"visit_id":"x","group":"white","gender":"f","coded":true,"utterances":[{"speaker":"provider","start_s":-1,"end_s":null,"text":"a"}]})");
                }).empty());
    CHECK_FALSE(what_of([] {
                    parse(R"({"visit_id":"x","group":"white","gender":"f","coded":true,"utterances":[]})");
                }).empty());
    CHECK_FALSE(what_of([] {
                    parse(R"({"visit_id":"x","group":"white","gender":"f","coded":true,"utterances":[{"speaker":"provider","start_s":5,"end_s":4,"text":"a"}]})");
                }).empty());
}

TEST_CASE("signal catalog") {
    const auto& cat = signal_catalog();
    CHECK(cat.size() == 21);
    CHECK(is_ratable(Signal::hurriedness, SpeakerRole::provider));
    CHECK_FALSE(is_ratable(Signal::hurriedness, SpeakerRole::patient));
    CHECK_FALSE(is_ratable(Signal::sadness, SpeakerRole::provider));
    CHECK_FALSE(is_ratable(Signal::distress, SpeakerRole::provider));
    CHECK(is_ratable(Signal::distress, SpeakerRole::patient));
    CHECK_FALSE(is_ratable(Signal::warmth, SpeakerRole::other));
    CHECK(cat.front().key() == "provider_dominance");
    CHECK(parse_signal_key("patient_emotional_distress") == SignalId{Signal::distress, SpeakerRole::patient});
    CHECK(make_signal_id("warmth", "provider").label() == "provider warmth");
    CHECK_THROWS_AS(make_signal_id("hurriedness", "patient"), ValidationError);
}

TEST_CASE("ratings parsing") {
    const std::string header = "visit_id,segment_index,signal,role,rating\n";
    const auto r = parse_ratings(header + "v1,0,warmth,provider,5\n");
    REQUIRE(r.size() == 1);
    CHECK(r[0] == SignalRating{"v1", 0, {Signal::warmth, SpeakerRole::provider}, 5});
    CHECK_THROWS_AS(parse_ratings(header + "v1,0,warmth,provider,7\n"), ValidationError);
    CHECK_THROWS_AS(parse_ratings(header + "v1,0,warmth,provider,0\n"), ValidationError);
    CHECK(what_of([&] { parse_ratings(header + "v1,0,hurriedness,patient,3\n"); }).find("hurriedness") !=
          std::string::npos);
    CHECK_THROWS_AS(parse_ratings("visit,segment,signal,role,value\n"), ValidationError);
    CHECK_THROWS_AS(parse_ratings(header + "v1,0,warmth,provider,5\nv1,0,warmth,provider,4\n"), ValidationError);
    const auto c = parse(kTwoVisits);
    CHECK_THROWS_AS(parse_ratings(header + "v9,0,warmth,provider,5\n", &c), ValidationError);
    CHECK(parse_ratings(header + "v1,0,warmth,provider,5\n", &c).size() == 1);
}

TEST_CASE("ratings write and parse round trip") {
    std::vector<SignalRating> ratings;
    for (const auto& id : signal_catalog()) ratings.push_back({"a,b", 2, id, 1 + static_cast<int>(id.signal) % 6});
    std::ostringstream out;
    write_ratings(out, ratings);
    CHECK(parse_ratings(out.str()) == ratings);
}

TEST_CASE("predictions parsing") {
    std::istringstream one(R"({"visit_id":"v1","segment_index":0,"signal":"warmth","role":"provider","score":0.83})");
    const auto p = parse_predictions(one);
    REQUIRE(p.size() == 1);
    CHECK(p[0].score == 0.83);
    std::istringstream bad(R"({"visit_id":"v1","segment_index":0,"signal":"warmth","role":"provider","score":1.2})");
    CHECK_THROWS_AS(parse_predictions(bad), ValidationError);
    std::istringstream missing(R"({"visit_id":"v1","segment_index":0,"role":"provider","score":0.2})");
    CHECK_THROWS_AS(parse_predictions(missing), ValidationError);

    std::vector<PredictionRecord> many;
    for (int i = 0; i < 1000; ++i) {
        many.push_back({fmt::format("v{}", 999 - i), i % 7, signal_catalog()[i % 21], (i % 101) / 100.0});
    }
    std::ostringstream out;
    write_predictions(out, many);
    std::istringstream in(out.str());
    CHECK(parse_predictions(in) == many);
}

TEST_CASE("group and gender counts") {
    const auto c = parse(kTwoVisits);
    const auto coded = count_group_gender(c, true);
    CHECK(coded.at(Group::white, Gender::f) == 1);
    CHECK(coded.total() == 1);
    const auto uncoded = count_group_gender(c, false);
    CHECK(uncoded.at(Group::non_white, Gender::other) == 1);
}
