#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socsig/corpus.hpp"

namespace socsig::labeling {

inline constexpr double kDefaultMinHighFraction = 0.02;
inline constexpr double kSkewWarningFraction = 0.10;

// Mean rating. Throws ValidationError when empty.
double compute_threshold(std::span<const int> values);

// 1 iff value > threshold (strict: a value equal to the mean is low).
std::vector<int> binarize(std::span<const int> values, double threshold);

double high_fraction(std::span<const int> labels);

struct ClassWeights {
    double low = 1.0;
    double high = 1.0;
};

// w_c = N / N_c. Throws ValidationError when a class is missing.
ClassWeights class_weights(std::span<const int> labels);

enum class ExclusionReason { none, no_ratings, single_class, below_min_high_fraction };
std::string_view to_string(ExclusionReason r);
ExclusionReason parse_exclusion_reason(std::string_view s);

struct SignalStatus {
    SignalId signal;
    std::size_t n = 0;
    std::size_t n_high = 0;
    double threshold = 0.0;
    double high_fraction = 0.0;
    bool included = false;
    ExclusionReason reason = ExclusionReason::no_ratings;
    // Included but below the 10% skew tier.
    bool skewed = false;
};

// Inclusion decision for one signal's training labels.
SignalStatus assess_signal(SignalId signal, std::span<const int> labels, double min_high_fraction);

// Thresholds and inclusion for every catalog signal, fitted on one training
// split. Records the visits it saw so evaluation can assert that no held-out
// visit contributed to a threshold.
class LabelPolicy {
public:
    double min_high_fraction = kDefaultMinHighFraction;
    std::map<SignalId, SignalStatus> signals;
    std::set<std::string> fitted_visits;

    bool included(SignalId s) const;
    double threshold(SignalId s) const;
    int label(const SignalRating& r) const;
    std::vector<SignalId> included_signals() const;

    // Throws ValidationError if any of the given visits was used for fitting.
    void check_disjoint(const std::set<std::string>& held_out) const;
};

LabelPolicy fit_label_policy(const std::vector<SignalRating>& train_ratings,
                             double min_high_fraction = kDefaultMinHighFraction);

// signal,role,high_fraction,included,reason in catalog order.
void write_label_csv(std::ostream& out, const LabelPolicy& policy);

void write_policy_json(std::ostream& out, const LabelPolicy& policy);
LabelPolicy read_policy_json(std::string_view content);

}  // namespace socsig::labeling
