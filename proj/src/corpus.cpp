#include "socsig/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "socsig/csv.hpp"
#include "socsig/error.hpp"
#include "socsig/text.hpp"

namespace socsig {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, kSignalCount> kSignalNames = {
    "dominance",  "attentiveness", "warmth",      "engagement", "empathy", "respect",
    "interactivity", "irritation", "nervousness", "hurriedness", "sadness", "distress",
};

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

}  // namespace

std::string_view to_string(SpeakerRole r) {
    switch (r) {
    case SpeakerRole::provider: return "provider";
    case SpeakerRole::patient: return "patient";
    case SpeakerRole::other: return "other";
    }
    return "?";
}

std::string_view to_string(Group g) { return g == Group::white ? "white" : "non_white"; }

std::string_view to_string(Gender g) {
    switch (g) {
    case Gender::f: return "f";
    case Gender::m: return "m";
    case Gender::other: return "other";
    }
    return "?";
}

SpeakerRole parse_role(std::string_view s) {
    if (s == "provider") return SpeakerRole::provider;
    if (s == "patient") return SpeakerRole::patient;
    if (s == "other") return SpeakerRole::other;
    fail("unknown speaker role '" + std::string(s) + "'");
}

Group parse_group(std::string_view s) {
    if (s == "white") return Group::white;
    if (s == "non_white") return Group::non_white;
    fail("unknown group '" + std::string(s) + "' (expected white or non_white)");
}

Gender parse_gender(std::string_view s) {
    if (s == "f") return Gender::f;
    if (s == "m") return Gender::m;
    if (s == "other") return Gender::other;
    fail("unknown gender '" + std::string(s) + "'");
}

std::string_view to_string(Signal s) { return kSignalNames[static_cast<std::size_t>(s)]; }

Signal parse_signal(std::string_view s) {
    for (std::size_t i = 0; i < kSignalNames.size(); ++i) {
        if (kSignalNames[i] == s) return static_cast<Signal>(i);
    }
    if (s == "emotional_distress") return Signal::distress;
    fail("unknown signal '" + std::string(s) + "'");
}

std::string SignalId::key() const { return std::string(to_string(role)) + "_" + std::string(to_string(signal)); }

std::string SignalId::label() const {
    return std::string(to_string(role)) + " " + std::string(to_string(signal));
}

bool is_ratable(Signal s, SpeakerRole role) {
    if (role == SpeakerRole::other) return false;
    if (s == Signal::hurriedness) return role == SpeakerRole::provider;
    if (s == Signal::sadness || s == Signal::distress) return role == SpeakerRole::patient;
    return true;
}

const std::vector<SignalId>& signal_catalog() {
    static const std::vector<SignalId> catalog = [] {
        std::vector<SignalId> c;
        for (std::size_t i = 0; i < kSignalCount; ++i) {
            for (auto role : {SpeakerRole::provider, SpeakerRole::patient}) {
                const auto s = static_cast<Signal>(i);
                if (is_ratable(s, role)) c.push_back({s, role});
            }
        }
        return c;
    }();
    return catalog;
}

SignalId make_signal_id(std::string_view signal, std::string_view role) {
    const auto s = parse_signal(signal);
    const auto r = parse_role(role);
    if (!is_ratable(s, r)) {
        fail("signal '" + std::string(signal) + "' is not rated for role '" + std::string(role) + "'");
    }
    return {s, r};
}

SignalId parse_signal_key(std::string_view key) {
    const auto us = key.find('_');
    if (us == std::string_view::npos) fail("malformed signal key '" + std::string(key) + "'");
    return make_signal_id(key.substr(us + 1), key.substr(0, us));
}

void validate_visit(VisitRecord& visit) {
    if (visit.visit_id.empty()) fail("visit with empty visit_id");
    if (visit.utterances.empty()) fail("visit '" + visit.visit_id + "' has no utterances");
    for (std::size_t i = 0; i < visit.utterances.size(); ++i) {
        const auto& u = visit.utterances[i];
        const auto where = "visit '" + visit.visit_id + "' utterance " + std::to_string(i);
        if (!std::isfinite(u.start_s) || u.start_s < 0.0) fail(where + ": start_s must be finite and >= 0");
        if (u.end_s && (!std::isfinite(*u.end_s) || *u.end_s < u.start_s)) {
            fail(where + ": end_s must be >= start_s");
        }
        if (text::trim(u.text).empty()) fail(where + ": empty text");
    }
    std::stable_sort(visit.utterances.begin(), visit.utterances.end(),
                     [](const Utterance& a, const Utterance& b) { return a.start_s < b.start_s; });
}

Corpus::Corpus(std::vector<VisitRecord> visits) : visits_(std::move(visits)) {
    for (std::size_t i = 0; i < visits_.size(); ++i) {
        validate_visit(visits_[i]);
        if (!index_.emplace(visits_[i].visit_id, i).second) {
            fail("duplicate visit_id '" + visits_[i].visit_id + "'");
        }
    }
}

const VisitRecord* Corpus::find(std::string_view visit_id) const {
    const auto it = index_.find(std::string(visit_id));
    return it == index_.end() ? nullptr : &visits_[it->second];
}

const VisitRecord& Corpus::at(std::string_view visit_id) const {
    const auto* v = find(visit_id);
    if (!v) fail("unknown visit_id '" + std::string(visit_id) + "'");
    return *v;
}

namespace {

const json& require(const json& obj, const char* field) {
    const auto it = obj.find(field);
    if (it == obj.end()) fail(std::string("missing field '") + field + "'");
    return *it;
}

std::string require_string(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_string()) fail(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

double require_number(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_number()) fail(std::string("field '") + field + "' must be a number");
    return v.get<double>();
}

VisitRecord visit_from_json(const json& j) {
    if (!j.is_object()) fail("visit must be a JSON object");
    VisitRecord v;
    v.visit_id = require_string(j, "visit_id");
    v.group = parse_group(require_string(j, "group"));
    v.gender = parse_gender(require_string(j, "gender"));
    const auto& coded = require(j, "coded");
    if (!coded.is_boolean()) fail("field 'coded' must be a boolean");
    v.coded = coded.get<bool>();
    const auto& utts = require(j, "utterances");
    if (!utts.is_array()) fail("field 'utterances' must be an array");
    for (const auto& uj : utts) {
        if (!uj.is_object()) fail("utterance must be a JSON object");
        Utterance u;
        u.speaker = parse_role(require_string(uj, "speaker"));
        u.start_s = require_number(uj, "start_s");
        if (const auto it = uj.find("end_s"); it != uj.end() && !it->is_null()) {
            if (!it->is_number()) fail("field 'end_s' must be a number or null");
            u.end_s = it->get<double>();
        }
        u.text = require_string(uj, "text");
        v.utterances.push_back(std::move(u));
    }
    return v;
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
    std::vector<VisitRecord> visits;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto v = visit_from_json(json::parse(line));
            validate_visit(v);
            if (!seen.insert(v.visit_id).second) fail("duplicate visit_id '" + v.visit_id + "'");
            visits.push_back(std::move(v));
        } catch (const json::exception& e) {
            fail("corpus line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
        } catch (const ValidationError& e) {
            fail("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return Corpus(std::move(visits));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open corpus '" + path.string() + "'");
    return parse_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& v : corpus.visits()) {
        ordered_json j;
        j["visit_id"] = v.visit_id;
        j["group"] = to_string(v.group);
        j["gender"] = to_string(v.gender);
        j["coded"] = v.coded;
        auto utts = ordered_json::array();
        for (const auto& u : v.utterances) {
            ordered_json uj;
            uj["speaker"] = to_string(u.speaker);
            uj["start_s"] = u.start_s;
            uj["end_s"] = u.end_s ? ordered_json(*u.end_s) : ordered_json(nullptr);
            uj["text"] = u.text;
            utts.push_back(std::move(uj));
        }
        j["utterances"] = std::move(utts);
        out << j.dump() << '\n';
    }
}

namespace {

int parse_int(const std::string& s, const char* what) {
    int value = 0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) fail(std::string(what) + " '" + s + "' is not an integer");
    return value;
}

}  // namespace

std::vector<SignalRating> parse_ratings(std::string_view content, const Corpus* corpus) {
    const auto records = csv::parse(content);
    if (records.empty()) fail("ratings file is empty");
    const csv::Row expected = {"visit_id", "segment_index", "signal", "role", "rating"};
    if (records.front().fields != expected) {
        fail("ratings header must be 'visit_id,segment_index,signal,role,rating'");
    }
    std::vector<SignalRating> out;
    std::set<std::tuple<std::string, int, SignalId>> seen;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const auto where = "ratings line " + std::to_string(rec.line) + ": ";
        try {
            if (rec.fields.size() != expected.size()) fail("expected 5 fields");
            SignalRating rating;
            rating.visit_id = rec.fields[0];
            rating.segment_index = parse_int(rec.fields[1], "segment_index");
            if (rating.segment_index < 0) fail("segment_index must be >= 0");
            rating.signal = make_signal_id(rec.fields[2], rec.fields[3]);
            rating.value = parse_int(rec.fields[4], "rating");
            if (rating.value < 1 || rating.value > 6) {
                fail("rating " + std::to_string(rating.value) + " outside [1,6]");
            }
            if (corpus && !corpus->find(rating.visit_id)) fail("unknown visit_id '" + rating.visit_id + "'");
            if (!seen.emplace(rating.visit_id, rating.segment_index, rating.signal).second) {
                fail("duplicate rating for " + rating.visit_id + ":" + std::to_string(rating.segment_index) + " " +
                     rating.signal.key());
            }
            out.push_back(std::move(rating));
        } catch (const ValidationError& e) {
            fail(where + e.what());
        }
    }
    return out;
}

std::vector<SignalRating> load_ratings(const std::filesystem::path& path, const Corpus* corpus) {
    return parse_ratings(read_file(path), corpus);
}

void write_ratings(std::ostream& out, const std::vector<SignalRating>& ratings) {
    csv::write_row(out, {"visit_id", "segment_index", "signal", "role", "rating"});
    for (const auto& r : ratings) {
        csv::write_row(out, {r.visit_id, std::to_string(r.segment_index), std::string(to_string(r.signal.signal)),
                             std::string(to_string(r.signal.role)), std::to_string(r.value)});
    }
}

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
    std::vector<PredictionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            if (!j.is_object()) fail("prediction must be a JSON object");
            PredictionRecord p;
            p.visit_id = require_string(j, "visit_id");
            const auto& idx = require(j, "segment_index");
            if (!idx.is_number_integer() || idx.get<long long>() < 0) {
                fail("segment_index must be a non-negative integer");
            }
            p.segment_index = idx.get<int>();
            p.signal = make_signal_id(require_string(j, "signal"), require_string(j, "role"));
            p.score = require_number(j, "score");
            if (!(p.score >= 0.0 && p.score <= 1.0)) fail("score outside [0,1]");
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            fail("predictions line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
        } catch (const ValidationError& e) {
            fail("predictions line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open predictions '" + path.string() + "'");
    return parse_predictions(in);
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& predictions) {
    for (const auto& p : predictions) {
        ordered_json j;
        j["visit_id"] = p.visit_id;
        j["segment_index"] = p.segment_index;
        j["signal"] = to_string(p.signal.signal);
        j["role"] = to_string(p.signal.role);
        j["score"] = p.score;
        out << j.dump() << '\n';
    }
}

std::map<std::string, std::string> load_references(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) fail("references directory '" + dir.string() + "' not found");
    std::map<std::string, std::string> refs;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        refs.emplace(entry.path().stem().string(), read_file(entry.path()));
    }
    return refs;
}

std::int64_t GroupGenderCounts::group_total(Group g) const {
    const auto& row = counts[static_cast<std::size_t>(g)];
    return row[0] + row[1] + row[2];
}

std::int64_t GroupGenderCounts::total() const { return group_total(Group::white) + group_total(Group::non_white); }

GroupGenderCounts count_group_gender(const Corpus& corpus, bool coded) {
    GroupGenderCounts c;
    for (const auto& v : corpus.visits()) {
        if (v.coded != coded) continue;
        ++c.counts[static_cast<std::size_t>(v.group)][static_cast<std::size_t>(v.gender)];
    }
    return c;
}

}  // namespace socsig
