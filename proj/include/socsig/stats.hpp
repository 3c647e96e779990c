#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socsig/corpus.hpp"

namespace socsig::stats {

double normal_cdf(double x);
// Upper tail of chi-square with one degree of freedom: erfc(sqrt(x / 2)).
double chi2_sf_df1(double x);
// Student t CDF, df >= 1 (real df allowed).
double t_cdf(double x, double df);

struct TestResult {
    double statistic = 0.0;
    std::optional<double> df;
    std::optional<double> z;
    double p_two_sided = 1.0;
    // Upper-tail p: evidence that the first sample is larger.
    double p_one_sided = 0.5;
    std::string direction;
};

// Pooled-variance Student t, df = n_x + n_y - 2. Zero pooled variance with
// equal means gives t = 0, p = 1; with unequal means it is a NumericError.
TestResult student_t_test(std::span<const double> x, std::span<const double> y);

// Pearson chi-square on [[a, b], [c, d]] without continuity correction.
TestResult chi_square_2x2(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);

struct MannWhitneyOptions {
    bool continuity = true;
};

// Twice U_x: 2 * #{x_i > y_j} + #{x_i == y_j}. Exact integer.
std::int64_t mann_whitney_u2(std::span<const double> x, std::span<const double> y);

// Normal approximation with tie-corrected variance; statistic holds U_x and
// z > 0 means x ranks higher. Throws NumericError when every value is tied.
TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y, MannWhitneyOptions opts = {});

// One bootstrap record: a group label and a value (0/1 prediction or score).
struct GroupedValue {
    Group group = Group::white;
    double value = 0.0;
};

using GroupStatistic = std::function<double(std::span<const GroupedValue>)>;

struct BootstrapResult {
    double mean_stat = 0.0;  // statistic on the original sample
    double resample_mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_boot = 0;
    int n_degenerate = 0;
    double level = 0.95;
};

// Derives the RNG seed of resample `index` from the master seed (SplitMix64
// of master + index), so resamples are independent of evaluation order.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

// Percentile bootstrap: resample the pooled records with replacement; a
// resample missing either group is redrawn and counted in n_degenerate.
// Bounds are linear-interpolated empirical quantiles at (1 -/+ level) / 2.
BootstrapResult bootstrap_percentile(std::span<const GroupedValue> records, const GroupStatistic& statistic,
                                     int n_boot = 1000, std::uint64_t seed = 0, double level = 0.95);

// Linear interpolation between order statistics (position q * (n - 1)).
double quantile_sorted(std::span<const double> sorted, double q);

double mean(std::span<const double> v);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> v);

}  // namespace socsig::stats
