#include "socsig/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "socsig/asr_eval.hpp"
#include "socsig/audit.hpp"
#include "socsig/classifier.hpp"
#include "socsig/corpus.hpp"
#include "socsig/error.hpp"
#include "socsig/evaluation.hpp"
#include "socsig/labeling.hpp"
#include "socsig/report.hpp"
#include "socsig/segmenter.hpp"
#include "socsig/stats.hpp"
#include "socsig/synth.hpp"

namespace socsig::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string digest(const fs::path& path) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init");
    const auto feed = [&](std::string_view bytes) {
        if (EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1) throw std::runtime_error("sha256 update");
    };
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(path)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const auto name = fs::relative(f, path).generic_string();
            feed(name);
            feed(std::string_view("\0", 1));
            const auto body = read_file(f);
            feed(fmt::format("{}:", body.size()));
            feed(body);
        }
    } else {
        feed(read_file(path));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) throw std::runtime_error("sha256 final");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

namespace {

struct Context {
    RunConfig cfg;
    std::string command;
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> written;
};

const fs::path& require(const std::optional<fs::path>& p, const char* flag) {
    if (!p) throw ValidationError(fmt::format("missing required path {}", flag));
    return *p;
}

void write_artifact(Context& ctx, const std::string& name, const std::function<void(std::ostream&)>& body) {
    const auto path = ctx.cfg.out / name;
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + path.string() + "'");
    body(f);
    f.close();
    if (!f) throw ValidationError("write failed for '" + path.string() + "'");
    ctx.written.push_back(name);
}

void warn(Context& ctx, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) ctx.err << "warning: " << w << "\n";
}

void write_run_manifest(Context& ctx) {
    const auto& c = ctx.cfg;
    ordered_json j;
    j["command"] = ctx.command;
    j["version"] = kVersion;
    j["seed"] = c.seed;
    ordered_json config;
    config["window_s"] = c.window_s;
    config["k"] = c.k;
    config["n_boot"] = c.n_boot;
    config["min_high_fraction"] = c.min_high_fraction;
    config["threshold"] = c.threshold;
    config["continuity"] = c.continuity;
    config["one_sided"] = c.one_sided;
    config["prob_mean"] = c.prob_mean;
    const classifier::TrainConfig train;
    config["train"] = {{"learning_rate", train.learning_rate}, {"epochs", train.epochs},
                       {"batch_size", train.batch_size},       {"l2", train.l2},
                       {"dimension", train.dimension},         {"hash_seed", train.hash_seed},
                       {"class_weighted", train.class_weighted},
                       {"text_source", std::string(classifier::to_string(train.text_source))}};
    j["config"] = std::move(config);
    ordered_json inputs = ordered_json::object();
    const std::pair<const char*, const std::optional<fs::path>*> paths[] = {
        {"corpus", &c.corpus},       {"ratings", &c.ratings}, {"references", &c.references},
        {"predictions", &c.predictions}, {"models", &c.models}, {"synth_config", &c.synth_config}};
    for (const auto& [name, p] : paths) {
        if (*p && fs::exists(**p)) inputs[name] = {{"path", (*p)->generic_string()}, {"sha256", digest(**p)}};
    }
    j["inputs"] = std::move(inputs);
    ordered_json outputs = ordered_json::object();
    std::set<std::string> names(ctx.written.begin(), ctx.written.end());
    for (const auto& name : names) outputs[name] = digest(ctx.cfg.out / name);
    j["outputs"] = std::move(outputs);
    const auto name = "run_manifest_" + ctx.command + ".json";
    std::ofstream f(ctx.cfg.out / name, std::ios::binary);
    f << j.dump(2) << '\n';
}

// Pipeline stages. Each writes its artifacts and returns what later stages
// need.

SegmentTable stage_segment(Context& ctx, const Corpus& corpus) {
    auto table = segment_corpus(corpus, ctx.cfg.window_s);
    write_artifact(ctx, "segments.csv", [&](std::ostream& o) { write_segment_csv(o, table); });
    return table;
}

void stage_asr(Context& ctx, const Corpus& corpus) {
    const auto refs = load_references(require(ctx.cfg.references, "--references"));
    const auto table = asr::per_visit_wer(corpus, refs);
    for (const auto& id : table.skipped) ctx.err << "warning: no usable reference for visit " << id << "\n";
    write_artifact(ctx, "asr_eval.csv", [&](std::ostream& o) { asr::write_error_csv(o, table); });
}

labeling::LabelPolicy stage_label(Context& ctx, const std::vector<SignalRating>& ratings) {
    auto policy = labeling::fit_label_policy(ratings, ctx.cfg.min_high_fraction);
    write_artifact(ctx, "labels.csv", [&](std::ostream& o) { labeling::write_label_csv(o, policy); });
    write_artifact(ctx, "label_policy.json", [&](std::ostream& o) { labeling::write_policy_json(o, policy); });
    std::size_t skewed = 0;
    for (const auto& [id, st] : policy.signals) skewed += st.included && st.skewed;
    ctx.out << fmt::format("labels: {} of {} signals included ({} with under 10% high)\n",
                           policy.included_signals().size(), policy.signals.size(), skewed);
    return policy;
}

std::map<SignalId, classifier::Model> stage_train(Context& ctx, const SegmentTable& segments,
                                                  const std::vector<SignalRating>& ratings,
                                                  const labeling::LabelPolicy& policy) {
    if (const auto unknown = unknown_segments(segments, ratings); !unknown.empty()) {
        throw ValidationError(fmt::format("rating for unknown segment {}:{}", unknown.front().visit_id,
                                          unknown.front().segment_index));
    }
    std::map<SignalId, classifier::Model> models;
    const auto& catalog = signal_catalog();
    for (std::size_t s = 0; s < catalog.size(); ++s) {
        const auto id = catalog[s];
        if (!policy.included(id)) continue;
        classifier::TrainConfig tc;
        tc.seed = stats::stream_seed(ctx.cfg.seed, 4096 + s);
        std::vector<classifier::Example> examples;
        std::vector<int> labels;
        for (const auto& r : ratings) {
            if (r.signal != id) continue;
            const auto text = classifier::segment_text(*segments.find(r.key()), id, tc.text_source);
            if (text.empty()) continue;
            const int y = policy.label(r);
            examples.push_back({classifier::featurize(text, tc.dimension, tc.hash_seed), y});
            labels.push_back(y);
        }
        const auto positives = std::count(labels.begin(), labels.end(), 1);
        if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
            ctx.err << "warning: " << id.key() << ": rated segments with text contain a single class; no model\n";
            continue;
        }
        models.emplace(id, classifier::train(examples, labeling::class_weights(labels), tc));
    }
    const auto dir = ctx.cfg.out / "models";
    fs::remove_all(dir);
    classifier::save_models(dir, models);
    for (const auto& [id, m] : models) ctx.written.push_back("models/" + id.key() + ".model");
    return models;
}

std::vector<PredictionRecord> stage_predict(Context& ctx, const SegmentTable& segments,
                                            const classifier::ScoreSource& source) {
    auto result = source.score(segments);
    warn(ctx, result.warnings);
    write_artifact(ctx, "predictions.jsonl", [&](std::ostream& o) { write_predictions(o, result.records); });
    return std::move(result.records);
}

void write_evaluation(Context& ctx, const evaluation::FoldSummary& summary, std::string_view model_name) {
    write_artifact(ctx, "evaluation.csv", [&](std::ostream& o) { evaluation::write_summary_csv(o, summary); });
    write_artifact(ctx, "evaluation.md",
                   [&](std::ostream& o) { evaluation::write_summary_markdown(o, summary, model_name); });
    write_artifact(ctx, "evaluation_cells.csv", [&](std::ostream& o) { evaluation::write_cells_csv(o, summary); });
}

evaluation::FoldSummary stage_cross_validate(Context& ctx, const SegmentTable& segments,
                                             const std::vector<SignalRating>& ratings) {
    evaluation::CvConfig cv;
    cv.k = ctx.cfg.k;
    cv.seed = ctx.cfg.seed;
    cv.min_high_fraction = ctx.cfg.min_high_fraction;
    cv.decision_threshold = ctx.cfg.threshold;
    auto summary = evaluation::cross_validate(segments, ratings, cv);
    write_evaluation(ctx, summary, "Baseline");
    write_artifact(ctx, "oof_predictions.jsonl", [&](std::ostream& o) { write_predictions(o, summary.out_of_fold); });
    ctx.out << fmt::format("evaluate: {}-fold, {} signal(s), {} cell(s) not applicable\n", summary.k,
                           summary.per_signal.size(), summary.n_not_applicable);
    return summary;
}

std::vector<PredictionRecord> restrict(const std::vector<PredictionRecord>& preds, const std::set<std::string>& visits) {
    std::vector<PredictionRecord> out;
    std::copy_if(preds.begin(), preds.end(), std::back_inserter(out),
                 [&](const PredictionRecord& r) { return visits.count(r.visit_id) > 0; });
    return out;
}

std::set<std::string> visits_where(const Corpus& corpus, bool coded) {
    std::set<std::string> ids;
    for (const auto& v : corpus.visits()) {
        if (v.coded == coded) ids.insert(v.visit_id);
    }
    return ids;
}

void check_known(const Corpus& corpus, const std::vector<PredictionRecord>& preds) {
    for (const auto& p : preds) {
        if (!corpus.find(p.visit_id)) throw ValidationError("prediction for unknown visit '" + p.visit_id + "'");
    }
}

void stage_fairness(Context& ctx, const Corpus& corpus, const std::vector<PredictionRecord>& preds) {
    check_known(corpus, preds);
    std::optional<std::map<std::string, std::string>> refs;
    if (ctx.cfg.references) refs = load_references(*ctx.cfg.references);
    audit::FairnessConfig fc;
    fc.n_boot = ctx.cfg.n_boot;
    fc.seed = ctx.cfg.seed;
    fc.decision_threshold = ctx.cfg.threshold;
    const auto report = audit::fairness_audit(preds, corpus, refs ? &*refs : nullptr, fc);
    warn(ctx, report.notices);
    write_artifact(ctx, "fairness.csv", [&](std::ostream& o) { audit::write_fairness_csv(o, report); });
    write_artifact(ctx, "fairness.md", [&](std::ostream& o) { audit::write_fairness_markdown(o, report); });
    std::size_t excluding_zero = 0;
    for (const auto& r : report.rows) excluding_zero += !r.ci_contains_zero();
    ctx.out << fmt::format("fairness: {} signal(s), {} interval(s) exclude 0\n", report.rows.size(), excluding_zero);
}

void stage_disparity(Context& ctx, const Corpus& corpus, const std::vector<PredictionRecord>& all_preds) {
    check_known(corpus, all_preds);
    auto visits = visits_where(corpus, false);
    if (visits.empty()) {
        ctx.err << "notice: corpus has no uncoded visits; disparity scan uses every visit\n";
        for (const auto& v : corpus.visits()) visits.insert(v.visit_id);
    }
    const auto preds = restrict(all_preds, visits);
    auto scores = audit::aggregate_visit_scores(preds, {visits.begin(), visits.end()}, ctx.cfg.threshold,
                                                ctx.cfg.prob_mean);
    warn(ctx, scores.warnings);
    const auto report = audit::disparity_scan(scores.scores, audit::group_map(corpus), {ctx.cfg.continuity});
    write_artifact(ctx, "disparity.csv", [&](std::ostream& o) { audit::write_disparity_csv(o, report); });
    write_artifact(ctx, "disparity.md",
                   [&](std::ostream& o) { audit::write_disparity_markdown(o, report, ctx.cfg.one_sided); });
    std::size_t flagged = 0;
    for (const auto& r : report.rows) {
        flagged += r.testable && (ctx.cfg.one_sided ? r.result.p_one_sided : r.result.p_two_sided) < 0.05;
    }
    ctx.out << fmt::format("disparity: {} signal(s), {} with p < 0.05\n", report.rows.size(), flagged);
}

void stage_report(Context& ctx) {
    write_artifact(ctx, "report.md", [&](std::ostream& o) { report::write_report(o, ctx.cfg.out); });
}

std::vector<PredictionRecord> load_external(Context& ctx, const SegmentTable& segments) {
    auto source = classifier::ScoreSource::external(load_predictions(*ctx.cfg.predictions));
    auto result = source.score(segments);
    warn(ctx, result.warnings);
    return std::move(result.records);
}

// Subcommands.

void cmd_segment(Context& ctx) { stage_segment(ctx, load_corpus(require(ctx.cfg.corpus, "--corpus"))); }

void cmd_asr_eval(Context& ctx) { stage_asr(ctx, load_corpus(require(ctx.cfg.corpus, "--corpus"))); }

void cmd_label(Context& ctx) {
    std::optional<Corpus> corpus;
    if (ctx.cfg.corpus) corpus = load_corpus(*ctx.cfg.corpus);
    stage_label(ctx, load_ratings(require(ctx.cfg.ratings, "--ratings"), corpus ? &*corpus : nullptr));
}

void cmd_train(Context& ctx) {
    const auto corpus = load_corpus(require(ctx.cfg.corpus, "--corpus"));
    const auto ratings = load_ratings(require(ctx.cfg.ratings, "--ratings"), &corpus);
    const auto segments = segment_corpus(corpus, ctx.cfg.window_s);
    stage_train(ctx, segments, ratings, stage_label(ctx, ratings));
}

void cmd_predict(Context& ctx) {
    const auto corpus = load_corpus(require(ctx.cfg.corpus, "--corpus"));
    const auto segments = segment_corpus(corpus, ctx.cfg.window_s);
    stage_predict(ctx, segments, classifier::select_score_source(ctx.cfg.models, ctx.cfg.predictions));
}

void cmd_evaluate(Context& ctx) {
    const auto corpus = load_corpus(require(ctx.cfg.corpus, "--corpus"));
    const auto ratings = load_ratings(require(ctx.cfg.ratings, "--ratings"), &corpus);
    const auto segments = segment_corpus(corpus, ctx.cfg.window_s);
    if (ctx.cfg.predictions) {
        const auto preds = load_external(ctx, segments);
        write_evaluation(ctx,
                         evaluation::evaluate_predictions(preds, ratings, ctx.cfg.min_high_fraction, ctx.cfg.threshold),
                         "External");
    } else {
        stage_cross_validate(ctx, segments, ratings);
    }
}

void cmd_fairness(Context& ctx) {
    const auto corpus = load_corpus(require(ctx.cfg.corpus, "--corpus"));
    stage_fairness(ctx, corpus, load_predictions(require(ctx.cfg.predictions, "--predictions")));
}

void cmd_disparity(Context& ctx) {
    const auto corpus = load_corpus(require(ctx.cfg.corpus, "--corpus"));
    stage_disparity(ctx, corpus, load_predictions(require(ctx.cfg.predictions, "--predictions")));
}

void cmd_report(Context& ctx) { stage_report(ctx); }

void cmd_synth(Context& ctx) {
    auto config = ctx.cfg.synth_config ? synth::read_config(read_file(*ctx.cfg.synth_config)) : synth::default_config();
    config.seed = ctx.cfg.seed;
    config.window_s = ctx.cfg.window_s;
    if (ctx.cfg.n_coded) config.n_coded_visits = *ctx.cfg.n_coded;
    if (ctx.cfg.n_uncoded) config.n_uncoded_visits = *ctx.cfg.n_uncoded;
    if (ctx.cfg.corruption_rate) config.corruption_rate = *ctx.cfg.corruption_rate;
    for (const auto& plant : ctx.cfg.plants) {
        const auto eq = plant.find('=');
        if (eq == std::string::npos) throw ValidationError("--plant expects <role>_<signal>=<offset>: " + plant);
        const auto id = parse_signal_key(plant.substr(0, eq));
        double offset = 0.0;
        try {
            offset = std::stod(plant.substr(eq + 1));
        } catch (const std::exception&) {
            throw ValidationError("--plant offset is not a number: " + plant);
        }
        const auto it = std::find_if(config.signals.begin(), config.signals.end(),
                                     [&](const synth::SignalPlan& p) { return p.signal == id; });
        if (it == config.signals.end()) throw ValidationError("--plant names an unplanned signal: " + id.key());
        it->white_offset = offset;
    }
    const auto output = synth::generate(config);
    synth::write_output(ctx.cfg.out, output);
    for (const auto* name : {"corpus.jsonl", "ratings.csv", "manifest.json"}) ctx.written.push_back(name);
    for (const auto& [id, text] : output.references) ctx.written.push_back("references/" + id + ".txt");
    ctx.out << fmt::format("synth: {} visits ({} coded), {} segments\n", output.manifest.n_visits,
                           output.manifest.n_coded_visits, output.manifest.n_segments);
}

void cmd_pipeline(Context& ctx) {
    const auto corpus = load_corpus(require(ctx.cfg.corpus, "--corpus"));
    const auto ratings = load_ratings(require(ctx.cfg.ratings, "--ratings"), &corpus);
    const auto segments = stage_segment(ctx, corpus);
    if (ctx.cfg.references) stage_asr(ctx, corpus);
    const auto policy = stage_label(ctx, ratings);
    std::vector<PredictionRecord> preds;
    std::vector<PredictionRecord> audit_preds;
    if (ctx.cfg.predictions) {
        ctx.err << "notice: external predictions given; training is skipped\n";
        preds = load_external(ctx, segments);
        write_artifact(ctx, "predictions.jsonl", [&](std::ostream& o) { write_predictions(o, preds); });
        write_evaluation(ctx,
                         evaluation::evaluate_predictions(preds, ratings, ctx.cfg.min_high_fraction, ctx.cfg.threshold),
                         "External");
        audit_preds = restrict(preds, visits_where(corpus, true));
    } else {
        const auto models = stage_train(ctx, segments, ratings, policy);
        preds = stage_predict(ctx, segments, classifier::ScoreSource::baseline(models));
        // Coded segments are audited on held-out scores, never on the
        // models' own training data.
        audit_preds = stage_cross_validate(ctx, segments, ratings).out_of_fold;
    }
    stage_fairness(ctx, corpus, audit_preds);
    stage_disparity(ctx, corpus, preds);
    stage_report(ctx);
}

using Handler = void (*)(Context&);

enum Flags : unsigned {
    kCorpus = 1u << 0,
    kRatings = 1u << 1,
    kReferences = 1u << 2,
    kPredictions = 1u << 3,
    kModels = 1u << 4,
    kWindow = 1u << 5,
    kFolds = 1u << 6,
    kBoot = 1u << 7,
    kMinHigh = 1u << 8,
    kThreshold = 1u << 9,
    kSeed = 1u << 10,
    kSided = 1u << 11,
    kSynth = 1u << 12,
};

struct Command {
    const char* name;
    const char* help;
    unsigned flags;
    Handler handler;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> table = {
        {"segment", "Split visits into fixed windows", kCorpus | kWindow, cmd_segment},
        {"asr-eval", "Word and character error rates against references", kCorpus | kReferences, cmd_asr_eval},
        {"label", "Binarize ratings and report signal inclusion", kCorpus | kRatings | kMinHigh, cmd_label},
        {"train", "Train one baseline classifier per included signal",
         kCorpus | kRatings | kWindow | kMinHigh | kSeed, cmd_train},
        {"predict", "Score every segment with trained models or an external file",
         kCorpus | kPredictions | kModels | kWindow, cmd_predict},
        {"evaluate", "Grouped k-fold evaluation, or scoring of external predictions",
         kCorpus | kRatings | kPredictions | kWindow | kFolds | kMinHigh | kThreshold | kSeed, cmd_evaluate},
        {"fairness", "Demographic parity bootstrap, WER and gender tests",
         kCorpus | kPredictions | kReferences | kBoot | kThreshold | kSeed, cmd_fairness},
        {"disparity", "Mann-Whitney scan of visit-level scores by group",
         kCorpus | kPredictions | kThreshold | kSided, cmd_disparity},
        {"synth", "Generate a seeded synthetic corpus", kWindow | kSeed | kSynth, cmd_synth},
        {"report", "Combine artifacts in the output directory into report.md", 0, cmd_report},
        {"pipeline", "segment, label, train, predict, evaluate, fairness, disparity, report",
         kCorpus | kRatings | kReferences | kPredictions | kWindow | kFolds | kBoot | kMinHigh | kThreshold | kSeed |
             kSided,
         cmd_pipeline},
    };
    return table;
}

void add_options(CLI::App& sub, unsigned flags, RunConfig& c) {
    const auto path = [&](const char* name, std::optional<fs::path>& into, const char* help) {
        sub.add_option_function<std::string>(name, [&into](const std::string& s) { into = fs::path(s); }, help);
    };
    if (flags & kCorpus) path("--corpus", c.corpus, "Corpus JSONL, one visit per line");
    if (flags & kRatings) path("--ratings", c.ratings, "Ratings CSV");
    if (flags & kReferences) path("--references", c.references, "Directory of <visit_id>.txt references");
    if (flags & kPredictions) path("--predictions", c.predictions, "Predictions JSONL");
    if (flags & kModels) path("--models", c.models, "Directory of trained models");
    sub.add_option("--out", c.out, "Output directory");
    if (flags & kWindow) sub.add_option("--window-s", c.window_s, "Segment window in seconds")->check(CLI::PositiveNumber);
    if (flags & kFolds) sub.add_option("--k", c.k, "Cross-validation folds")->check(CLI::Range(2, 1000));
    if (flags & kBoot) sub.add_option("--n-boot", c.n_boot, "Bootstrap resamples")->check(CLI::Range(1, 10000000));
    if (flags & kMinHigh) {
        sub.add_option("--min-high-fraction", c.min_high_fraction, "Exclude signals with fewer high labels")
            ->check(CLI::Range(0.0, 1.0));
    }
    if (flags & kThreshold) {
        sub.add_option("--threshold", c.threshold, "Decision threshold on scores")->check(CLI::Range(0.0, 1.0));
        sub.add_flag("--prob-mean", c.prob_mean, "Aggregate visits by mean probability");
    }
    if (flags & kSeed) sub.add_option("--seed", c.seed, "Master seed");
    if (flags & kSided) {
        sub.add_flag("--one-sided", c.one_sided, "Report one-sided p-values in Markdown");
        sub.add_flag("!--no-continuity", c.continuity, "Disable the continuity correction");
    }
    if (flags & kSynth) {
        path("--config", c.synth_config, "Synth config JSON");
        sub.add_option("--n-coded", c.n_coded, "Coded visits")->check(CLI::NonNegativeNumber);
        sub.add_option("--n-uncoded", c.n_uncoded, "Uncoded visits")->check(CLI::NonNegativeNumber);
        sub.add_option("--corruption-rate", c.corruption_rate, "Per-token corruption probability")
            ->check(CLI::Range(0.0, 1.0));
        sub.add_option("--plant", c.plants, "White high-rate offset, e.g. provider_warmth=0.3");
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app("Social signal analysis for clinical conversations", "socsig");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    RunConfig cfg;
    if (const char* env = std::getenv(kOutEnv); env && *env) cfg.out = env;
    std::map<std::string, Handler> handlers;
    for (const auto& c : commands()) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_options(*sub, c.flags, cfg);
        handlers[c.name] = c.handler;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kValidation;
    }
    Context ctx{cfg, app.get_subcommands().front()->get_name(), out, err, {}};
    try {
        fs::create_directories(ctx.cfg.out);
        handlers.at(ctx.command)(ctx);
        write_run_manifest(ctx);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kOk;
}

}  // namespace socsig::cli
