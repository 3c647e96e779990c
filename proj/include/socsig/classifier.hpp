#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "socsig/corpus.hpp"
#include "socsig/labeling.hpp"
#include "socsig/segmenter.hpp"

namespace socsig::classifier {

inline constexpr std::uint32_t kDefaultDimension = 1u << 18;
inline constexpr std::uint64_t kDefaultHashSeed = 0x9E3779B97F4A7C15ull;
// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] inside the loss.
inline constexpr double kProbClamp = 1e-12;

// Sparse L2-normalized term counts. Entries are sorted by index and unique.
struct FeatureVector {
    std::uint32_t dimension = kDefaultDimension;
    std::vector<std::pair<std::uint32_t, double>> entries;

    double norm() const;
    bool empty() const { return entries.empty(); }
};

// 64-bit FNV-1a over the token's UTF-8 bytes, offset basis xor seed.
std::uint64_t hash_token(std::string_view token, std::uint64_t seed = kDefaultHashSeed);

// Tokens come from asr::normalize_transcript; each maps to hash % dimension.
FeatureVector featurize(std::string_view text, std::uint32_t dimension = kDefaultDimension,
                        std::uint64_t hash_seed = kDefaultHashSeed);

// Which part of a segment feeds the classifier.
enum class TextSource {
    combined,     // provider text then patient text
    signal_role,  // only the rated role's utterances
};

std::string_view to_string(TextSource t);
TextSource parse_text_source(std::string_view s);

std::string segment_text(const Segment& segment, SignalId signal, TextSource source);

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 50;
    int batch_size = 32;
    double l2 = 1e-4;
    std::uint64_t seed = 42;
    std::uint32_t dimension = kDefaultDimension;
    std::uint64_t hash_seed = kDefaultHashSeed;
    bool class_weighted = true;
    TextSource text_source = TextSource::combined;
};

struct Example {
    FeatureVector x;
    int label = 0;
};

struct Model {
    TrainConfig config;
    std::vector<double> weights;
    double bias = 0.0;
    double final_loss = 0.0;

    // All-zero parameters of the configured dimension.
    static Model zero(const TrainConfig& config);
};

// Class-weighted binary cross entropy over a batch:
//   L = sum_i w_i * bce(y_i, p_i) / sum_i w_i + (l2 / 2) * |weights|^2
// The gradient keeps the data term sparse; the dense L2 part is l2 * weights.
struct Gradient {
    double loss = 0.0;
    std::vector<std::pair<std::uint32_t, double>> data;  // sorted, unique
    double bias = 0.0;
};

Gradient loss_and_gradient(const Model& model, std::span<const Example> batch, labeling::ClassWeights weights,
                           double l2);

// data term + l2 * weights, materialized over all dimensions.
std::vector<double> dense_gradient(const Gradient& g, const Model& model, double l2);

// Full-dataset loss of the current parameters.
double total_loss(const Model& model, std::span<const Example> examples, labeling::ClassWeights weights, double l2);

// Mini-batch gradient descent over a fixed per-epoch shuffle derived from
// config.seed. Requires at least two examples and both classes.
Model train(std::span<const Example> examples, labeling::ClassWeights weights, const TrainConfig& config);

// Per-epoch full-data losses, for convergence diagnostics.
Model train(std::span<const Example> examples, labeling::ClassWeights weights, const TrainConfig& config,
            std::vector<double>* epoch_losses);

double logistic(double z);
double predict(const Model& model, const FeatureVector& x);
double predict_text(const Model& model, std::string_view text);

void save_model(std::ostream& out, const Model& model);
Model load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

// Uniform stream of prediction records from either trained baseline models
// or an external prediction file.
struct ScoringResult {
    std::vector<PredictionRecord> records;
    std::vector<std::string> warnings;
};

class ScoreSource {
public:
    static ScoreSource baseline(std::map<SignalId, Model> models);
    static ScoreSource external(std::vector<PredictionRecord> records);

    bool is_external() const { return external_; }
    std::vector<SignalId> signals() const;

    // Records ordered by (visit_id, segment_index, catalog signal order).
    // Baseline skips segments whose classifier text is empty.
    ScoringResult score(const SegmentTable& segments) const;

private:
    bool external_ = false;
    std::map<SignalId, Model> models_;
    std::vector<PredictionRecord> records_;
};

// Exactly one of the two may be given; both or neither is a ValidationError.
ScoreSource select_score_source(const std::optional<std::filesystem::path>& models_dir,
                                const std::optional<std::filesystem::path>& predictions_file);

std::map<SignalId, Model> load_models(const std::filesystem::path& dir);
void save_models(const std::filesystem::path& dir, const std::map<SignalId, Model>& models);

}  // namespace socsig::classifier
