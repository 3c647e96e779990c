#include "socsig/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "socsig/error.hpp"

namespace socsig::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi2_sf_df1(double x) {
    if (!(x >= 0.0)) throw ValidationError("chi-square statistic must be >= 0");
    return std::erfc(std::sqrt(x / 2.0));
}

double t_cdf(double x, double df) {
    if (!(df >= 1.0) || !std::isfinite(df)) throw ValidationError("t distribution needs df >= 1");
    if (x == 0.0) return 0.5;
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

void fill_from_upper_tail(TestResult& r, double p_upper) {
    r.p_one_sided = clamp01(p_upper);
    r.p_two_sided = clamp01(2.0 * std::min(r.p_one_sided, 1.0 - r.p_one_sided));
}

}  // namespace

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TestResult student_t_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2) throw ValidationError("t-test needs at least two values per sample");
    const auto nx = static_cast<double>(x.size());
    const auto ny = static_cast<double>(y.size());
    const double mx = mean(x);
    const double my = mean(y);
    double ssx = 0.0;
    double ssy = 0.0;
    for (double v : x) ssx += (v - mx) * (v - mx);
    for (double v : y) ssy += (v - my) * (v - my);
    const double df = nx + ny - 2.0;
    const double pooled = (ssx + ssy) / df;

    TestResult r;
    r.df = df;
    r.direction = "t > 0: first sample has the larger mean";
    if (pooled == 0.0) {
        if (mx != my) throw NumericError("t-test undefined: zero variance with unequal means");
        r.statistic = 0.0;
        r.p_one_sided = 0.5;
        r.p_two_sided = 1.0;
        return r;
    }
    r.statistic = (mx - my) / std::sqrt(pooled * (1.0 / nx + 1.0 / ny));
    // Upper tail from the symmetric lower tail to keep precision for large t.
    fill_from_upper_tail(r, t_cdf(-r.statistic, df));
    return r;
}

TestResult chi_square_2x2(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    if (a < 0 || b < 0 || c < 0 || d < 0) throw ValidationError("contingency cells must be >= 0");
    const auto r1 = static_cast<double>(a + b);
    const auto r2 = static_cast<double>(c + d);
    const auto c1 = static_cast<double>(a + c);
    const auto c2 = static_cast<double>(b + d);
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) throw ValidationError("contingency table has a zero margin");
    const double n = r1 + r2;
    const double diff = static_cast<double>(a) * static_cast<double>(d) - static_cast<double>(b) * static_cast<double>(c);
    TestResult r;
    r.statistic = n * diff * diff / (r1 * r2 * c1 * c2);
    r.df = 1.0;
    r.p_two_sided = clamp01(chi2_sf_df1(r.statistic));
    r.p_one_sided = r.p_two_sided;
    r.direction = "chi-square upper tail; p_one_sided equals p_two_sided";
    return r;
}

std::int64_t mann_whitney_u2(std::span<const double> x, std::span<const double> y) {
    // Sort y once; for each x count strictly smaller and equal values.
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    std::int64_t u2 = 0;
    for (double v : x) {
        const auto lo = std::lower_bound(ys.begin(), ys.end(), v);
        const auto hi = std::upper_bound(lo, ys.end(), v);
        u2 += 2 * (lo - ys.begin()) + (hi - lo);
    }
    return u2;
}

TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y, MannWhitneyOptions opts) {
    if (x.empty() || y.empty()) throw ValidationError("Mann-Whitney U needs both samples non-empty");
    const auto nx = static_cast<double>(x.size());
    const auto ny = static_cast<double>(y.size());
    const double n = nx + ny;

    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const auto t = static_cast<double>(j - i);
        tie_sum += t * t * t - t;
        i = j;
    }

    TestResult r;
    r.statistic = static_cast<double>(mann_whitney_u2(x, y)) / 2.0;
    const double mu = nx * ny / 2.0;
    const double var = (nx * ny / 12.0) * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    if (!(var > 0.0)) throw NumericError("Mann-Whitney U undefined: all values tied");
    const double sigma = std::sqrt(var);
    double diff = r.statistic - mu;
    if (opts.continuity) {
        diff = std::copysign(std::max(std::abs(diff) - 0.5, 0.0), diff);
    }
    r.z = diff / sigma;
    fill_from_upper_tail(r, normal_cdf(-*r.z));
    r.direction = "z > 0: first sample (white) ranks higher";
    return r;
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ValidationError("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_percentile(std::span<const GroupedValue> records, const GroupStatistic& statistic,
                                     int n_boot, std::uint64_t seed, double level) {
    const auto has = [](std::span<const GroupedValue> rs, Group g) {
        return std::any_of(rs.begin(), rs.end(), [g](const GroupedValue& r) { return r.group == g; });
    };
    if (!has(records, Group::white) || !has(records, Group::non_white)) {
        throw ValidationError("bootstrap needs both groups present in the original data");
    }
    if (n_boot < 1) throw ValidationError("n_boot must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0,1)");

    BootstrapResult out;
    out.n_boot = n_boot;
    out.level = level;
    out.mean_stat = statistic(records);

    const std::size_t n = records.size();
    std::vector<double> stats(static_cast<std::size_t>(n_boot));
    std::vector<GroupedValue> sample(n);
    constexpr int kMaxRedraws = 10000;
    for (int b = 0; b < n_boot; ++b) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(b)));
        for (int attempt = 0;; ++attempt) {
            bool white = false;
            bool non_white = false;
            for (std::size_t i = 0; i < n; ++i) {
                sample[i] = records[rng() % n];
                (sample[i].group == Group::white ? white : non_white) = true;
            }
            if (white && non_white) break;
            ++out.n_degenerate;
            if (attempt >= kMaxRedraws) throw NumericError("bootstrap could not draw a resample with both groups");
        }
        stats[static_cast<std::size_t>(b)] = statistic(sample);
    }
    out.resample_mean = mean(stats);
    std::sort(stats.begin(), stats.end());
    const double alpha = 1.0 - level;
    out.ci_low = quantile_sorted(stats, alpha / 2.0);
    out.ci_high = quantile_sorted(stats, 1.0 - alpha / 2.0);
    return out;
}

}  // namespace socsig::stats
