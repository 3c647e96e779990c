#include "socsig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "json.hpp"

#include "socsig/csv.hpp"
#include "socsig/error.hpp"

namespace socsig::synth {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

bool bernoulli(std::mt19937_64& rng, double p) { return uniform01(rng) < p; }

int draw_band(std::mt19937_64& rng, const std::array<double, 3>& weights, int first_value) {
    const double total = weights[0] + weights[1] + weights[2];
    double u = uniform01(rng) * total;
    for (int i = 0; i < 3; ++i) {
        if (u < weights[i]) return first_value + i;
        u -= weights[i];
    }
    for (int i = 2; i >= 0; --i) {
        if (weights[i] > 0) return first_value + i;
    }
    return first_value;
}

double band_mean(const std::array<double, 3>& w, int first_value) {
    const double total = w[0] + w[1] + w[2];
    return (w[0] * first_value + w[1] * (first_value + 1) + w[2] * (first_value + 2)) / total;
}

const std::map<std::string, std::vector<std::string>>& cue_table() {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"provider_dominance", {"insist", "mandatory", "orders"}},
        {"patient_dominance", {"demand", "refuse", "adamant"}},
        {"provider_attentiveness", {"noticed", "listening", "elaborate"}},
        {"patient_attentiveness", {"curious", "wondering", "clarify"}},
        {"provider_warmth", {"wonderful", "glad", "lovely"}},
        {"patient_warmth", {"thanks", "appreciate", "grateful"}},
        {"provider_engagement", {"absolutely", "exactly", "definitely"}},
        {"patient_engagement", {"agreed", "sure", "okay"}},
        {"provider_empathy", {"understandable", "sorry", "tough"}},
        {"patient_empathy", {"sympathize", "poor", "bless"}},
        {"provider_respect", {"please", "sir", "maam"}},
        {"patient_respect", {"pardon", "kindly", "respectfully"}},
        {"provider_interactivity", {"together", "shall", "lets"}},
        {"patient_interactivity", {"besides", "another", "also"}},
        {"provider_irritation", {"ridiculous", "already", "obviously"}},
        {"patient_irritation", {"annoyed", "frustrated", "waited"}},
        {"provider_nervousness", {"um", "uh", "sorta"}},
        {"patient_nervousness", {"worried", "nervous", "scared"}},
        {"provider_hurriedness", {"quickly", "hurry", "moving"}},
        {"patient_sadness", {"sad", "lonely", "crying"}},
        {"patient_distress", {"unbearable", "terrible", "awful"}},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& background_vocabulary() {
    static const std::vector<std::string> words = {
        "the",     "a",        "and",       "to",       "of",        "i",        "you",      "it",
        "is",      "that",     "in",        "have",     "with",      "for",      "this",     "was",
        "on",      "my",       "your",      "we",       "be",        "what",     "so",       "but",
        "not",     "at",       "do",        "can",      "if",        "about",    "get",      "just",
        "like",    "one",      "when",      "there",    "how",       "some",     "time",     "been",
        "take",    "going",    "know",      "think",    "little",    "day",      "week",     "pain",
        "back",    "blood",    "pressure",  "medicine", "pills",     "test",     "results",  "sleep",
        "eat",     "walk",     "work",      "home",     "family",    "mother",   "knee",     "shoulder",
        "headache", "cough",   "weight",    "diet",     "exercise",  "morning",  "night",    "year",
        "months",  "ago",      "left",      "right",    "side",      "chest",    "breathing", "heart",
        "sugar",   "dose",     "refill",    "pharmacy", "insurance", "appointment", "follow", "up",
        "check",   "scan",     "xray",     "stomach",  "feet",      "hands",    "eyes",     "water",
        "coffee",  "food",     "lunch",     "dinner",   "hours",     "minutes",  "started",  "stopped",
        "usually", "sometimes", "often",    "never",    "last",      "first",    "still",    "well",
    };
    return words;
}

std::vector<std::string> default_cues(SignalId id) {
    const auto it = cue_table().find(id.key());
    return it == cue_table().end() ? std::vector<std::string>{} : it->second;
}

SynthConfig default_config() {
    SynthConfig c;
    const auto& catalog = signal_catalog();
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        SignalPlan p;
        p.signal = catalog[i];
        p.base_rate = 0.2 + 0.01 * static_cast<double>(i % 21);
        p.cues = default_cues(catalog[i]);
        c.signals.push_back(p);
    }
    return c;
}

void validate(const SynthConfig& c) {
    const auto prob = [](double p, const std::string& what) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(what + " must lie in [0,1]");
    };
    if (c.n_coded_visits < 0 || c.n_uncoded_visits < 0 || c.n_coded_visits + c.n_uncoded_visits == 0) {
        throw ValidationError("synthetic corpus needs at least one visit");
    }
    if (!(c.white_fraction > 0.0 && c.white_fraction < 1.0)) throw ValidationError("white_fraction must lie in (0,1)");
    prob(c.female_fraction, "female_fraction");
    prob(c.other_speaker_rate, "other_speaker_rate");
    prob(c.cue_rate, "cue_rate");
    prob(c.corruption_rate, "corruption_rate");
    if (!(c.min_duration_s > 0.0) || c.max_duration_s < c.min_duration_s) {
        throw ValidationError("visit duration range is invalid");
    }
    if (!(c.window_s > 0.0)) throw ValidationError("window_s must be positive");
    if (c.min_words < 1 || c.max_words < c.min_words) throw ValidationError("word count range is invalid");

    std::set<SignalId> seen;
    std::set<std::string> background(background_vocabulary().begin(), background_vocabulary().end());
    for (const auto& p : c.signals) {
        const auto name = p.signal.key();
        if (!seen.insert(p.signal).second) throw ValidationError("signal planned twice: " + name);
        prob(p.base_rate, name + " base_rate");
        prob(p.rate(Group::white), name + " white rate (base + offset)");
        prob(p.rate(Group::non_white), name + " non-white rate (base + offset)");
        for (const auto* band : {&p.low_weights, &p.high_weights}) {
            if (std::any_of(band->begin(), band->end(), [](double w) { return !(w >= 0.0); }) ||
                (*band)[0] + (*band)[1] + (*band)[2] <= 0.0) {
                throw ValidationError(name + " rating band weights must be >= 0 with a positive sum");
            }
        }
        for (const auto& cue : p.cues) {
            if (background.count(cue)) throw ValidationError(name + " cue '" + cue + "' is a background word");
        }
        // The mean rating has to separate the bands: every low value at or
        // below it, every high value above it.
        const double mean_rate = c.white_fraction * p.rate(Group::white) +
                                 (1.0 - c.white_fraction) * p.rate(Group::non_white);
        const double expected = (1.0 - mean_rate) * band_mean(p.low_weights, 1) + mean_rate * band_mean(p.high_weights, 4);
        int max_low = 1;
        for (int i = 0; i < 3; ++i) if (p.low_weights[i] > 0) max_low = 1 + i;
        int min_high = 6;
        for (int i = 2; i >= 0; --i) if (p.high_weights[i] > 0) min_high = 4 + i;
        if (mean_rate > 0.0 && !(expected >= max_low && expected < min_high)) {
            throw ValidationError(fmt::format("{}: expected mean rating {:.3f} does not separate the bands "
                                              "(low values up to {}, high values from {})",
                                              name, expected, max_low, min_high));
        }
    }
}

namespace {

struct DraftUtterance {
    SpeakerRole speaker;
    double start_s;
    double end_s;
    int segment;
    std::vector<std::string> words;
};

std::string capitalize_sentence(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
    out.push_back('.');
    return out;
}

std::string clock(double seconds) {
    const auto total = static_cast<long>(seconds);
    return fmt::format("[{:02}:{:02}:{:02}]", total / 3600, (total / 60) % 60, total % 60);
}

}  // namespace

SynthOutput generate(const SynthConfig& config) {
    validate(config);
    const auto& vocab = background_vocabulary();
    SynthOutput out;
    auto& m = out.manifest;
    m.config = config;

    std::map<SignalId, std::size_t> white_segments;
    std::map<SignalId, std::size_t> non_white_segments;
    std::map<SignalId, std::size_t> coded_high;

    std::vector<VisitRecord> visits;
    const int n_visits = config.n_coded_visits + config.n_uncoded_visits;
    for (int vi = 0; vi < n_visits; ++vi) {
        std::mt19937_64 rng(stats::stream_seed(config.seed, static_cast<std::uint64_t>(vi)));
        VisitRecord visit;
        visit.coded = vi < config.n_coded_visits;
        visit.visit_id = fmt::format("{}{:04}", visit.coded ? "c" : "u", visit.coded ? vi + 1 : vi - config.n_coded_visits + 1);
        visit.group = bernoulli(rng, config.white_fraction) ? Group::white : Group::non_white;
        visit.gender = bernoulli(rng, config.female_fraction) ? Gender::f : Gender::m;
        const double duration = config.min_duration_s + uniform01(rng) * (config.max_duration_s - config.min_duration_s);
        const double t0 = std::floor(uniform01(rng) * 30.0 * 10.0) / 10.0;

        // Timing and speakers first, so segment membership is known before
        // any text is written.
        std::vector<DraftUtterance> drafts;
        double t = t0;
        bool provider_turn = true;
        while (t < t0 + duration) {
            DraftUtterance d;
            d.speaker = bernoulli(rng, config.other_speaker_rate)
                            ? SpeakerRole::other
                            : (provider_turn ? SpeakerRole::provider : SpeakerRole::patient);
            if (d.speaker != SpeakerRole::other) provider_turn = !provider_turn;
            const int n_words = config.min_words + static_cast<int>(pick(rng, config.max_words - config.min_words + 1));
            d.start_s = std::round(t * 10.0) / 10.0;
            d.end_s = std::round((t + 0.4 * n_words) * 10.0) / 10.0;
            d.segment = static_cast<int>(std::floor((d.start_s - t0) / config.window_s));
            for (int w = 0; w < n_words; ++w) d.words.push_back(vocab[pick(rng, vocab.size())]);
            drafts.push_back(std::move(d));
            t = drafts.back().end_s + 0.5 + uniform01(rng) * 2.5;
        }
        const int n_segments = drafts.back().segment + 1;

        // High/low state per segment and signal, then cue injection.
        for (int s = 0; s < n_segments; ++s) {
            for (const auto& plan : config.signals) {
                const int high = bernoulli(rng, plan.rate(visit.group)) ? 1 : 0;
                out.states[{SegmentKey{visit.visit_id, s}, plan.signal}] = high;
                if (visit.coded) {
                    ++(visit.group == Group::white ? white_segments : non_white_segments)[plan.signal];
                    coded_high[plan.signal] += high;
                    const int value = high ? draw_band(rng, plan.high_weights, 4) : draw_band(rng, plan.low_weights, 1);
                    out.ratings.push_back({visit.visit_id, s, plan.signal, value});
                }
                if (!high || plan.cues.empty()) continue;
                for (auto& d : drafts) {
                    if (d.segment != s || d.speaker != plan.signal.role) continue;
                    if (!bernoulli(rng, config.cue_rate)) continue;
                    const auto pos = pick(rng, d.words.size() + 1);
                    d.words.insert(d.words.begin() + static_cast<std::ptrdiff_t>(pos), plan.cues[pick(rng, plan.cues.size())]);
                }
            }
        }

        std::string reference;
        for (auto& d : drafts) {
            reference += fmt::format("{} {}: {}\n", clock(d.start_s),
                                     d.speaker == SpeakerRole::provider  ? "PROVIDER"
                                     : d.speaker == SpeakerRole::patient ? "PATIENT"
                                                                         : "OTHER",
                                     capitalize_sentence(d.words));
            m.reference_tokens += d.words.size();
            std::vector<std::string> hyp;
            for (const auto& w : d.words) {
                if (!bernoulli(rng, config.corruption_rate)) {
                    hyp.push_back(w);
                    continue;
                }
                ++m.corrupted_tokens;
                switch (pick(rng, 3)) {
                case 0: {
                    std::string sub;
                    do sub = vocab[pick(rng, vocab.size())];
                    while (sub == w);
                    hyp.push_back(sub);
                    break;
                }
                case 1:
                    break;
                default:
                    hyp.push_back(w);
                    hyp.push_back(vocab[pick(rng, vocab.size())]);
                }
            }
            if (hyp.empty()) hyp.push_back(vocab[pick(rng, vocab.size())]);
            std::string text;
            for (std::size_t i = 0; i < hyp.size(); ++i) text += (i ? " " : "") + hyp[i];
            visit.utterances.push_back({d.speaker, d.start_s, d.end_s, std::move(text)});
        }
        out.references.emplace(visit.visit_id, std::move(reference));
        ++(visit.group == Group::white ? m.n_white : m.n_non_white);
        m.n_segments += static_cast<std::size_t>(n_segments);
        if (visit.coded) {
            ++m.n_coded_visits;
            m.n_coded_segments += static_cast<std::size_t>(n_segments);
        }
        visits.push_back(std::move(visit));
    }
    m.n_visits = visits.size();
    out.corpus = Corpus(std::move(visits));

    for (const auto& plan : config.signals) {
        PlantedSignal ps;
        ps.signal = plan.signal;
        ps.white_rate = plan.rate(Group::white);
        ps.non_white_rate = plan.rate(Group::non_white);
        ps.null_disparity = plan.null_disparity();
        const auto nw = white_segments[plan.signal];
        const auto nn = non_white_segments[plan.signal];
        ps.n_coded_segments = nw + nn;
        ps.n_coded_high = coded_high[plan.signal];
        if (ps.n_coded_segments > 0) {
            ps.expected_high_fraction = (static_cast<double>(nw) * ps.white_rate + static_cast<double>(nn) * ps.non_white_rate) /
                                        static_cast<double>(ps.n_coded_segments);
        }
        m.signals.push_back(ps);
    }
    return out;
}

namespace {

ordered_json config_json(const SynthConfig& c) {
    ordered_json j;
    j["n_coded_visits"] = c.n_coded_visits;
    j["n_uncoded_visits"] = c.n_uncoded_visits;
    j["white_fraction"] = c.white_fraction;
    j["female_fraction"] = c.female_fraction;
    j["min_duration_s"] = c.min_duration_s;
    j["max_duration_s"] = c.max_duration_s;
    j["window_s"] = c.window_s;
    j["min_words"] = c.min_words;
    j["max_words"] = c.max_words;
    j["other_speaker_rate"] = c.other_speaker_rate;
    j["cue_rate"] = c.cue_rate;
    j["corruption_rate"] = c.corruption_rate;
    j["seed"] = c.seed;
    auto sigs = ordered_json::array();
    for (const auto& p : c.signals) {
        ordered_json s;
        s["signal"] = to_string(p.signal.signal);
        s["role"] = to_string(p.signal.role);
        s["base_rate"] = p.base_rate;
        s["white_offset"] = p.white_offset;
        s["non_white_offset"] = p.non_white_offset;
        s["low_weights"] = p.low_weights;
        s["high_weights"] = p.high_weights;
        s["cues"] = p.cues;
        sigs.push_back(std::move(s));
    }
    j["signals"] = std::move(sigs);
    return j;
}

template <typename T>
void read_opt(const json& j, const char* key, T& into) {
    if (const auto it = j.find(key); it != j.end()) into = it->get<T>();
}

SynthConfig config_from_json(const json& j) {
    SynthConfig c;
    read_opt(j, "n_coded_visits", c.n_coded_visits);
    read_opt(j, "n_uncoded_visits", c.n_uncoded_visits);
    read_opt(j, "white_fraction", c.white_fraction);
    read_opt(j, "female_fraction", c.female_fraction);
    read_opt(j, "min_duration_s", c.min_duration_s);
    read_opt(j, "max_duration_s", c.max_duration_s);
    read_opt(j, "window_s", c.window_s);
    read_opt(j, "min_words", c.min_words);
    read_opt(j, "max_words", c.max_words);
    read_opt(j, "other_speaker_rate", c.other_speaker_rate);
    read_opt(j, "cue_rate", c.cue_rate);
    read_opt(j, "corruption_rate", c.corruption_rate);
    read_opt(j, "seed", c.seed);
    if (const auto it = j.find("signals"); it != j.end()) {
        for (const auto& s : *it) {
            SignalPlan p;
            p.signal = make_signal_id(s.at("signal").get<std::string>(), s.at("role").get<std::string>());
            p.cues = default_cues(p.signal);
            read_opt(s, "base_rate", p.base_rate);
            read_opt(s, "white_offset", p.white_offset);
            read_opt(s, "non_white_offset", p.non_white_offset);
            read_opt(s, "low_weights", p.low_weights);
            read_opt(s, "high_weights", p.high_weights);
            read_opt(s, "cues", p.cues);
            c.signals.push_back(std::move(p));
        }
    } else {
        c.signals = default_config().signals;
    }
    return c;
}

}  // namespace

void write_config(std::ostream& out, const SynthConfig& config) { out << config_json(config).dump(2) << '\n'; }

SynthConfig read_config(std::string_view content) {
    try {
        return config_from_json(json::parse(content));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed synth config: ") + e.what());
    }
}

void write_manifest(std::ostream& out, const Manifest& m) {
    ordered_json j;
    j["config"] = config_json(m.config);
    j["n_visits"] = m.n_visits;
    j["n_coded_visits"] = m.n_coded_visits;
    j["n_white"] = m.n_white;
    j["n_non_white"] = m.n_non_white;
    j["n_segments"] = m.n_segments;
    j["n_coded_segments"] = m.n_coded_segments;
    j["reference_tokens"] = m.reference_tokens;
    j["corrupted_tokens"] = m.corrupted_tokens;
    auto sigs = ordered_json::array();
    for (const auto& s : m.signals) {
        ordered_json o;
        o["signal"] = to_string(s.signal.signal);
        o["role"] = to_string(s.signal.role);
        o["white_rate"] = s.white_rate;
        o["non_white_rate"] = s.non_white_rate;
        o["null_disparity"] = s.null_disparity;
        o["n_coded_segments"] = s.n_coded_segments;
        o["n_coded_high"] = s.n_coded_high;
        o["expected_high_fraction"] = s.expected_high_fraction;
        sigs.push_back(std::move(o));
    }
    j["signals"] = std::move(sigs);
    out << j.dump(2) << '\n';
}

Manifest read_manifest(std::string_view content) {
    try {
        const auto j = json::parse(content);
        Manifest m;
        m.config = config_from_json(j.at("config"));
        m.n_visits = j.at("n_visits").get<std::size_t>();
        m.n_coded_visits = j.at("n_coded_visits").get<std::size_t>();
        m.n_white = j.at("n_white").get<std::size_t>();
        m.n_non_white = j.at("n_non_white").get<std::size_t>();
        m.n_segments = j.at("n_segments").get<std::size_t>();
        m.n_coded_segments = j.at("n_coded_segments").get<std::size_t>();
        m.reference_tokens = j.at("reference_tokens").get<std::size_t>();
        m.corrupted_tokens = j.at("corrupted_tokens").get<std::size_t>();
        for (const auto& o : j.at("signals")) {
            PlantedSignal s;
            s.signal = make_signal_id(o.at("signal").get<std::string>(), o.at("role").get<std::string>());
            s.white_rate = o.at("white_rate").get<double>();
            s.non_white_rate = o.at("non_white_rate").get<double>();
            s.null_disparity = o.at("null_disparity").get<bool>();
            s.n_coded_segments = o.at("n_coded_segments").get<std::size_t>();
            s.n_coded_high = o.at("n_coded_high").get<std::size_t>();
            s.expected_high_fraction = o.at("expected_high_fraction").get<double>();
            m.signals.push_back(s);
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
}

void write_output(const std::filesystem::path& dir, const SynthOutput& out) {
    std::filesystem::create_directories(dir / "references");
    const auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ValidationError("cannot write '" + p.string() + "'");
        return f;
    };
    {
        auto f = open(dir / "corpus.jsonl");
        write_corpus(f, out.corpus);
    }
    {
        auto f = open(dir / "ratings.csv");
        write_ratings(f, out.ratings);
    }
    for (const auto& [id, text] : out.references) {
        auto f = open(dir / "references" / (id + ".txt"));
        f << text;
    }
    auto f = open(dir / "manifest.json");
    write_manifest(f, out.manifest);
}

std::vector<CheckRow> manifest_check(const Manifest& manifest, const Observations& observed) {
    std::vector<CheckRow> rows;
    if (observed.mean_wer) {
        CheckRow r;
        r.check = "mean_wer";
        r.planted = manifest.config.corruption_rate;
        r.measured = *observed.mean_wer;
        r.tolerance = 0.02;
        r.pass = std::abs(r.measured - r.planted) <= r.tolerance;
        rows.push_back(r);
    }
    for (const auto& s : manifest.signals) {
        if (const auto it = observed.high_fractions.find(s.signal); it != observed.high_fractions.end()) {
            CheckRow r;
            r.check = "high_fraction:" + s.signal.key();
            r.planted = s.expected_high_fraction;
            r.measured = it->second;
            const double n = std::max<double>(1.0, static_cast<double>(s.n_coded_segments));
            r.tolerance = std::max(0.005, 2.0 * std::sqrt(r.planted * (1.0 - r.planted) / n));
            r.pass = std::abs(r.measured - r.planted) <= r.tolerance;
            rows.push_back(r);
        }
        if (const auto it = observed.dpd_intervals.find(s.signal); it != observed.dpd_intervals.end()) {
            CheckRow r;
            r.check = "dpd_interval:" + s.signal.key();
            r.planted = s.white_rate - s.non_white_rate;
            r.measured = 0.5 * (it->second.first + it->second.second);
            const bool contains_zero = it->second.first <= 0.0 && 0.0 <= it->second.second;
            r.pass = s.null_disparity ? contains_zero : !contains_zero;
            r.note = fmt::format("interval ({:.4f}, {:.4f})", it->second.first, it->second.second);
            rows.push_back(r);
        }
        if (const auto it = observed.disparity_p_two_sided.find(s.signal); it != observed.disparity_p_two_sided.end()) {
            CheckRow r;
            r.check = "disparity:" + s.signal.key();
            r.planted = s.white_rate - s.non_white_rate;
            r.measured = it->second;
            r.tolerance = 0.01;
            r.pass = s.null_disparity ? it->second >= 0.01 : it->second < 0.01;
            r.note = s.null_disparity ? "null: p >= 0.01 expected (1% false positives)" : "planted: p < 0.01 expected";
            rows.push_back(r);
        }
    }
    return rows;
}

void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows) {
    csv::write_row(out, {"check", "planted", "measured", "tolerance", "pass", "note"});
    for (const auto& r : rows) {
        csv::write_row(out, {r.check, fmt::format("{:.6f}", r.planted), fmt::format("{:.6f}", r.measured),
                             fmt::format("{:.6f}", r.tolerance), r.pass ? "true" : "false", r.note});
    }
}

std::vector<stats::GroupedValue> null_prediction_stream(std::size_t n, double white_fraction, double rate,
                                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<stats::GroupedValue> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto g = bernoulli(rng, white_fraction) ? Group::white : Group::non_white;
        out.push_back({g, bernoulli(rng, rate) ? 1.0 : 0.0});
    }
    return out;
}

}  // namespace socsig::synth
