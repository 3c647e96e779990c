#include "socsig/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "socsig/asr_eval.hpp"
#include "socsig/error.hpp"

namespace socsig::classifier {

double FeatureVector::norm() const {
    double ss = 0.0;
    for (const auto& [i, v] : entries) ss += v * v;
    return std::sqrt(ss);
}

std::uint64_t hash_token(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
    for (unsigned char c : token) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

FeatureVector featurize(std::string_view text, std::uint32_t dimension, std::uint64_t hash_seed) {
    if (dimension == 0) throw ValidationError("feature dimension must be positive");
    FeatureVector fv;
    fv.dimension = dimension;
    std::map<std::uint32_t, double> counts;
    for (const auto& tok : asr::normalize_transcript(text)) {
        counts[static_cast<std::uint32_t>(hash_token(tok, hash_seed) % dimension)] += 1.0;
    }
    double ss = 0.0;
    for (const auto& [i, c] : counts) ss += c * c;
    if (ss == 0.0) return fv;
    const double inv = 1.0 / std::sqrt(ss);
    fv.entries.reserve(counts.size());
    for (const auto& [i, c] : counts) fv.entries.emplace_back(i, c * inv);
    return fv;
}

std::string_view to_string(TextSource t) { return t == TextSource::combined ? "combined" : "signal_role"; }

TextSource parse_text_source(std::string_view s) {
    if (s == "combined") return TextSource::combined;
    if (s == "signal_role") return TextSource::signal_role;
    throw ValidationError("unknown text source '" + std::string(s) + "'");
}

std::string segment_text(const Segment& segment, SignalId signal, TextSource source) {
    return source == TextSource::combined ? segment.combined_text() : segment.text(signal.role);
}

Model Model::zero(const TrainConfig& config) {
    Model m;
    m.config = config;
    m.weights.assign(config.dimension, 0.0);
    return m;
}

double logistic(double z) {
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(p, lo, hi);
}

namespace {

double margin(std::span<const double> weights, double scale, double bias, const FeatureVector& x) {
    double z = bias;
    for (const auto& [i, v] : x.entries) z += scale * weights[i] * v;
    return z;
}

// Weighted data term of the loss and its sparse gradient for parameters
// scale * weights and bias.
Gradient data_term(std::span<const double> weights, double scale, double bias, std::span<const Example> batch,
                   labeling::ClassWeights cw) {
    if (batch.empty()) throw ValidationError("loss of an empty batch is undefined");
    if (!(cw.low > 0.0) || !(cw.high > 0.0)) throw ValidationError("class weights must be positive");
    double weight_sum = 0.0;
    for (const auto& ex : batch) weight_sum += ex.label ? cw.high : cw.low;

    Gradient g;
    std::map<std::uint32_t, double> grad;
    double loss = 0.0;
    for (const auto& ex : batch) {
        const double w = (ex.label ? cw.high : cw.low) / weight_sum;
        const double p = logistic(margin(weights, scale, bias, ex.x));
        const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
        loss += w * (ex.label ? -std::log(pc) : -std::log(1.0 - pc));
        const double residual = w * (p - ex.label);
        for (const auto& [i, v] : ex.x.entries) grad[i] += residual * v;
        g.bias += residual;
    }
    g.loss = loss;
    g.data.assign(grad.begin(), grad.end());
    if (!std::isfinite(g.loss) || !std::isfinite(g.bias)) {
        throw NumericError("non-finite loss or gradient");
    }
    return g;
}

double squared_norm(std::span<const double> w) {
    return std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
}

void check_dimensions(const Model& model, std::span<const Example> examples) {
    for (const auto& ex : examples) {
        if (ex.x.dimension != model.weights.size()) {
            throw ValidationError(fmt::format("feature dimension {} does not match model dimension {}",
                                              ex.x.dimension, model.weights.size()));
        }
    }
}

}  // namespace

Gradient loss_and_gradient(const Model& model, std::span<const Example> batch, labeling::ClassWeights weights,
                           double l2) {
    check_dimensions(model, batch);
    auto g = data_term(model.weights, 1.0, model.bias, batch, weights);
    g.loss += 0.5 * l2 * squared_norm(model.weights);
    if (!std::isfinite(g.loss)) throw NumericError("non-finite loss");
    return g;
}

std::vector<double> dense_gradient(const Gradient& g, const Model& model, double l2) {
    std::vector<double> out(model.weights.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = l2 * model.weights[j];
    for (const auto& [i, v] : g.data) out[i] += v;
    return out;
}

double total_loss(const Model& model, std::span<const Example> examples, labeling::ClassWeights weights, double l2) {
    return loss_and_gradient(model, examples, weights, l2).loss;
}

Model train(std::span<const Example> examples, labeling::ClassWeights weights, const TrainConfig& config) {
    return train(examples, weights, config, nullptr);
}

Model train(std::span<const Example> examples, labeling::ClassWeights weights, const TrainConfig& config,
            std::vector<double>* epoch_losses) {
    if (examples.size() < 2) throw ValidationError("training needs at least two examples");
    const auto positives = std::count_if(examples.begin(), examples.end(), [](const Example& e) { return e.label == 1; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(examples.size())) {
        throw ValidationError("training data contains a single class");
    }
    if (config.batch_size < 1 || config.epochs < 0 || !(config.learning_rate > 0.0) || config.l2 < 0.0) {
        throw ValidationError("invalid training configuration");
    }
    const auto cw = config.class_weighted ? weights : labeling::ClassWeights{1.0, 1.0};

    Model model = Model::zero(config);
    check_dimensions(model, examples);

    // Parameters are scale * v; the L2 shrink step only touches scale so that
    // each update costs O(nonzeros in the batch).
    std::vector<double> v(config.dimension, 0.0);
    double scale = 1.0;
    double bias = 0.0;
    const double shrink = 1.0 - config.learning_rate * config.l2;
    if (!(shrink > 0.0)) throw ValidationError("learning_rate * l2 must be below 1");

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed);
    std::vector<Example> batch;
    const auto materialize = [&] {
        model.weights = v;
        for (auto& w : model.weights) w *= scale;
        model.bias = bias;
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng() % (i + 1)]);
        }
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t k = start; k < stop; ++k) batch.push_back(examples[order[k]]);
            const auto g = data_term(v, scale, bias, batch, cw);
            scale *= shrink;
            const double step = config.learning_rate / scale;
            for (const auto& [j, gj] : g.data) v[j] -= step * gj;
            bias -= config.learning_rate * g.bias;
            if (scale < 1e-8) {
                for (auto& x : v) x *= scale;
                scale = 1.0;
            }
        }
        if (epoch_losses) {
            materialize();
            epoch_losses->push_back(total_loss(model, examples, cw, config.l2));
        }
    }
    materialize();
    for (double w : model.weights) {
        if (!std::isfinite(w)) throw NumericError("training diverged to non-finite weights");
    }
    model.final_loss = total_loss(model, examples, cw, config.l2);
    return model;
}

double predict(const Model& model, const FeatureVector& x) {
    if (x.dimension != model.weights.size()) {
        throw ValidationError("feature dimension does not match model dimension");
    }
    return logistic(margin(model.weights, 1.0, model.bias, x));
}

double predict_text(const Model& model, std::string_view text) {
    return predict(model, featurize(text, model.config.dimension, model.config.hash_seed));
}

namespace {

constexpr std::string_view kModelMagic = "socsig-baseline-model 1";

}  // namespace

void save_model(std::ostream& out, const Model& model) {
    const auto& c = model.config;
    out << kModelMagic << '\n';
    out << fmt::format("dimension {}\n", c.dimension);
    out << fmt::format("hash_seed {}\n", c.hash_seed);
    out << fmt::format("learning_rate {}\n", c.learning_rate);
    out << fmt::format("epochs {}\n", c.epochs);
    out << fmt::format("batch_size {}\n", c.batch_size);
    out << fmt::format("l2 {}\n", c.l2);
    out << fmt::format("seed {}\n", c.seed);
    out << fmt::format("class_weighted {}\n", c.class_weighted ? 1 : 0);
    out << fmt::format("text_source {}\n", to_string(c.text_source));
    out << fmt::format("final_loss {}\n", model.final_loss);
    out << fmt::format("bias {}\n", model.bias);
    std::size_t nonzero = 0;
    for (double w : model.weights) nonzero += (w != 0.0);
    out << fmt::format("nonzero {}\n", nonzero);
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        if (model.weights[i] != 0.0) out << fmt::format("{}:{}\n", i, model.weights[i]);
    }
}

Model load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kModelMagic) throw ValidationError("not a baseline model file");
    Model m;
    auto& c = m.config;
    const auto field = [&](const char* name) {
        if (!std::getline(in, line)) throw ValidationError(std::string("model file truncated before ") + name);
        const auto sp = line.find(' ');
        if (sp == std::string::npos || line.substr(0, sp) != name) {
            throw ValidationError(std::string("model file: expected field ") + name);
        }
        return line.substr(sp + 1);
    };
    try {
        c.dimension = static_cast<std::uint32_t>(std::stoul(field("dimension")));
        c.hash_seed = std::stoull(field("hash_seed"));
        c.learning_rate = std::stod(field("learning_rate"));
        c.epochs = std::stoi(field("epochs"));
        c.batch_size = std::stoi(field("batch_size"));
        c.l2 = std::stod(field("l2"));
        c.seed = std::stoull(field("seed"));
        c.class_weighted = field("class_weighted") == "1";
        c.text_source = parse_text_source(field("text_source"));
        m.final_loss = std::stod(field("final_loss"));
        m.bias = std::stod(field("bias"));
        const auto nonzero = std::stoull(field("nonzero"));
        if (c.dimension == 0) throw ValidationError("model dimension must be positive");
        m.weights.assign(c.dimension, 0.0);
        for (std::size_t k = 0; k < nonzero; ++k) {
            if (!std::getline(in, line)) throw ValidationError("model file truncated in weights");
            const auto colon = line.find(':');
            if (colon == std::string::npos) throw ValidationError("model file: malformed weight line");
            const auto idx = std::stoull(line.substr(0, colon));
            if (idx >= c.dimension) throw ValidationError("model file: weight index out of range");
            m.weights[idx] = std::stod(line.substr(colon + 1));
        }
    } catch (const std::logic_error& e) {
        throw ValidationError(std::string("model file: bad number: ") + e.what());
    }
    if (!std::isfinite(m.bias)) throw ValidationError("model file: non-finite bias");
    return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write model '" + path.string() + "'");
    save_model(out, model);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model '" + path.string() + "'");
    return load_model(in);
}

ScoreSource ScoreSource::baseline(std::map<SignalId, Model> models) {
    ScoreSource s;
    s.models_ = std::move(models);
    return s;
}

ScoreSource ScoreSource::external(std::vector<PredictionRecord> records) {
    ScoreSource s;
    s.external_ = true;
    s.records_ = std::move(records);
    return s;
}

std::vector<SignalId> ScoreSource::signals() const {
    std::set<SignalId> present;
    if (external_) {
        for (const auto& r : records_) present.insert(r.signal);
    } else {
        for (const auto& [id, m] : models_) present.insert(id);
    }
    std::vector<SignalId> out;
    for (const auto& id : signal_catalog()) {
        if (present.count(id)) out.push_back(id);
    }
    return out;
}

namespace {

std::size_t catalog_position(SignalId id) {
    const auto& cat = signal_catalog();
    return static_cast<std::size_t>(std::find(cat.begin(), cat.end(), id) - cat.begin());
}

}  // namespace

ScoringResult ScoreSource::score(const SegmentTable& segments) const {
    ScoringResult result;
    const auto sigs = signals();
    if (!external_) {
        for (const auto& seg : segments.rows()) {
            for (const auto& id : sigs) {
                const auto& model = models_.at(id);
                const auto text = segment_text(seg, id, model.config.text_source);
                if (text.empty()) continue;
                result.records.push_back({seg.visit_id, seg.segment_index, id, predict_text(model, text)});
            }
        }
        return result;
    }

    std::map<std::pair<SegmentKey, std::size_t>, const PredictionRecord*> by_key;
    std::set<SegmentKey> unknown;
    for (const auto& r : records_) {
        if (!segments.contains(r.key())) {
            unknown.insert(r.key());
            continue;
        }
        if (!by_key.emplace(std::make_pair(r.key(), catalog_position(r.signal)), &r).second) {
            throw ValidationError(fmt::format("duplicate external prediction for {}:{} {}", r.visit_id,
                                              r.segment_index, r.signal.key()));
        }
    }
    for (const auto& key : unknown) {
        result.warnings.push_back(
            fmt::format("external prediction for unknown segment {}:{} ignored", key.visit_id, key.segment_index));
    }
    for (const auto& id : sigs) {
        std::vector<std::string> missing;
        for (const auto& seg : segments.rows()) {
            if (seg.combined_text().empty()) continue;
            if (!by_key.count({seg.key(), catalog_position(id)})) {
                missing.push_back(fmt::format("{}:{}", seg.visit_id, seg.segment_index));
            }
        }
        if (!missing.empty()) {
            std::string list;
            for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? " " : "") + missing[i];
            result.warnings.push_back(fmt::format("external predictions for {} missing {} segment(s): {}", id.key(),
                                                  missing.size(), list));
        }
    }
    for (const auto& [key, rec] : by_key) result.records.push_back(*rec);
    return result;
}

std::map<SignalId, Model> load_models(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ValidationError("model directory '" + dir.string() + "' not found");
    std::map<SignalId, Model> models;
    for (const auto& id : signal_catalog()) {
        const auto path = dir / (id.key() + ".model");
        if (std::filesystem::exists(path)) models.emplace(id, load_model(path));
    }
    if (models.empty()) throw ValidationError("no models found in '" + dir.string() + "'");
    return models;
}

void save_models(const std::filesystem::path& dir, const std::map<SignalId, Model>& models) {
    std::filesystem::create_directories(dir);
    for (const auto& [id, m] : models) save_model(dir / (id.key() + ".model"), m);
}

ScoreSource select_score_source(const std::optional<std::filesystem::path>& models_dir,
                                const std::optional<std::filesystem::path>& predictions_file) {
    if (models_dir && predictions_file) {
        throw ValidationError("baseline models and external predictions cannot be mixed in one run");
    }
    if (predictions_file) return ScoreSource::external(load_predictions(*predictions_file));
    if (models_dir) return ScoreSource::baseline(load_models(*models_dir));
    throw ValidationError("a score source is required: give a model directory or a predictions file");
}

}  // namespace socsig::classifier
