#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "socsig/audit.hpp"
#include "socsig/error.hpp"
#include "socsig/stats.hpp"
#include "socsig/synth.hpp"

using namespace socsig;
using namespace socsig::stats;
using Vec = std::vector<double>;

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(std::abs(normal_cdf(1.96) - 0.9750) <= 1e-4);
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        CHECK(std::abs(normal_cdf(x) - oracle::normal_cdf(x)) <= 1e-10);
        CHECK(std::abs(normal_cdf(x) + normal_cdf(-x) - 1.0) <= 1e-12);
    }
}

TEST_CASE("chi-square upper tail") {
    CHECK(std::abs(chi2_sf_df1(6.6667) - 0.0098) <= 1e-4);
    CHECK(chi2_sf_df1(0.0) == 1.0);
    for (double x = 0.05; x <= 30.0; x *= 1.7) CHECK(std::abs(chi2_sf_df1(x) - oracle::chi2_sf_df1(x)) <= 1e-10);
    CHECK_THROWS(chi2_sf_df1(-1.0));
}

TEST_CASE("student t cdf") {
    for (double df : {1.0, 2.0, 3.5, 4.0, 10.0, 89.0, 300.0}) {
        CHECK(t_cdf(0.0, df) == 0.5);
        for (double x = -6.0; x <= 6.0; x += 0.45) CHECK(std::abs(t_cdf(x, df) - oracle::t_cdf(x, df)) <= 1e-8);
    }
    // df = 1 is Cauchy.
    CHECK(t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK_THROWS(t_cdf(0.3, 0.5));
}

TEST_CASE("student t test") {
    const auto r = student_t_test(Vec{1, 2, 3}, Vec{2, 3, 4});
    CHECK(std::abs(r.statistic + 1.2247) <= 1e-4);
    CHECK(*r.df == 4.0);
    CHECK(r.p_two_sided == doctest::Approx(2.0 * oracle::t_cdf(-std::sqrt(1.5), 4.0)).epsilon(1e-8));
    CHECK(r.p_two_sided == doctest::Approx(0.288).epsilon(0.002));

    const auto same = student_t_test(Vec{1, 2, 3}, Vec{1, 2, 3});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_two_sided == 1.0);
    const auto flat = student_t_test(Vec{2, 2}, Vec{2, 2, 2});
    CHECK(flat.statistic == 0.0);
    CHECK(flat.p_two_sided == 1.0);
    CHECK_THROWS_AS(student_t_test(Vec{2, 2}, Vec{3, 3}), NumericError);
    CHECK_THROWS_AS(student_t_test(Vec{2}, Vec{3, 3}), ValidationError);

    Vec a(75), b(16);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (auto& v : a) v = nd(rng);
    for (auto& v : b) v = nd(rng);
    CHECK(*student_t_test(a, b).df == 89.0);
    CHECK(student_t_test(a, b).statistic == doctest::Approx(-student_t_test(b, a).statistic).epsilon(1e-14));
}

TEST_CASE("chi-square 2x2") {
    auto r = chi_square_2x2(10, 10, 10, 10);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_two_sided == 1.0);
    r = chi_square_2x2(20, 10, 10, 20);
    CHECK(std::abs(r.statistic - 6.6667) <= 1e-4);
    CHECK(std::abs(r.p_two_sided - 0.0098) <= 1e-4);
    CHECK(*r.df == 1.0);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t a = 1 + rng() % 30, b = 1 + rng() % 30, c = 1 + rng() % 30, d = 1 + rng() % 30;
        const double s = chi_square_2x2(a, b, c, d).statistic;
        CHECK(chi_square_2x2(c, d, a, b).statistic == doctest::Approx(s).epsilon(1e-12));
        CHECK(chi_square_2x2(b, a, d, c).statistic == doctest::Approx(s).epsilon(1e-12));
    }
    CHECK_THROWS_AS(chi_square_2x2(0, 0, 3, 4), ValidationError);
    CHECK_THROWS_AS(chi_square_2x2(-1, 2, 3, 4), ValidationError);
}

TEST_CASE("Mann-Whitney examples") {
    auto r = mann_whitney_u(Vec{1, 2}, Vec{1, 2});
    CHECK(r.statistic == 2.0);
    CHECK(*r.z == 0.0);
    CHECK(r.p_two_sided == 1.0);
    r = mann_whitney_u(Vec{3, 4}, Vec{1, 2});
    CHECK(r.statistic == 4.0);
    CHECK(*r.z > 0.0);
    CHECK(r.p_one_sided < 0.5);
    CHECK_THROWS_AS(mann_whitney_u(Vec{1, 1}, Vec{1}), NumericError);
    CHECK_THROWS_AS(mann_whitney_u(Vec{}, Vec{1}), ValidationError);
}

TEST_CASE("Mann-Whitney against enumeration") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        Vec x(1 + rng() % 10), y(1 + rng() % 10);
        for (auto& v : x) v = static_cast<double>(rng() % 5);
        for (auto& v : y) v = static_cast<double>(rng() % 5);
        const auto u2 = mann_whitney_u2(x, y);
        CHECK(u2 == oracle::u2_pairs(x, y));
        CHECK(u2 + mann_whitney_u2(y, x) == 2 * static_cast<std::int64_t>(x.size() * y.size()));
        bool all_tied = true;
        for (double v : x) all_tied &= v == x[0];
        for (double v : y) all_tied &= v == x[0];
        if (all_tied) continue;
        for (bool cc : {true, false}) {
            const auto r = mann_whitney_u(x, y, {cc});
            CHECK(r.p_two_sided == 2.0 * std::min(r.p_one_sided, 1.0 - r.p_one_sided));
            CHECK(r.p_two_sided >= 0.0);
            CHECK(r.p_two_sided <= 1.0);
        }
    }
}

TEST_CASE("Mann-Whitney tie-corrected variance") {
    // x = [1,1,2], y = [2,3]: U_x = 0.5, one tie group of 2 at each of 1 and 2.
    const auto r = mann_whitney_u(Vec{1, 1, 2}, Vec{2, 3}, {false});
    CHECK(r.statistic == 0.5);
    const double var = (6.0 / 12.0) * (6.0 - 12.0 / 20.0);
    CHECK(*r.z == doctest::Approx((0.5 - 3.0) / std::sqrt(var)));
    const auto c = mann_whitney_u(Vec{1, 1, 2}, Vec{2, 3}, {true});
    CHECK(*c.z == doctest::Approx((0.5 - 3.0 + 0.5) / std::sqrt(var)));
}

TEST_CASE("quantiles and moments") {
    CHECK(quantile_sorted(Vec{1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile_sorted(Vec{1, 2, 3, 4}, 0.0) == 1.0);
    CHECK(quantile_sorted(Vec{1, 2, 3, 4}, 1.0) == 4.0);
    CHECK(mean(Vec{1, 2, 3}) == 2.0);
    CHECK(sample_sd(Vec{1, 2, 3}) == 1.0);
    CHECK(sample_sd(Vec{5}) == 0.0);
}

TEST_CASE("seed streams") {
    CHECK(stream_seed(1, 0) != stream_seed(1, 1));
    CHECK(stream_seed(1, 0) != stream_seed(2, 0));
    CHECK(stream_seed(7, 3) == stream_seed(7, 3));
}

TEST_CASE("bootstrap") {
    std::vector<GroupedValue> constant;
    for (int i = 0; i < 40; ++i) constant.push_back({i % 3 ? Group::white : Group::non_white, 1.0});
    auto r = bootstrap_percentile(constant, audit::dpd_statistic, 500, 1);
    CHECK(r.mean_stat == 0.0);
    CHECK(r.ci_low == 0.0);
    CHECK(r.ci_high == 0.0);
    CHECK(r.n_boot == 500);

    // Planted gap of 0.3 on 400 segments.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u;
    std::vector<GroupedValue> gap;
    for (int i = 0; i < 400; ++i) {
        const Group g = i % 2 ? Group::white : Group::non_white;
        gap.push_back({g, u(rng) < (g == Group::white ? 0.6 : 0.3) ? 1.0 : 0.0});
    }
    r = bootstrap_percentile(gap, audit::dpd_statistic, 1000, 9);
    CHECK(r.ci_low > 0.0);
    CHECK(r.ci_low <= r.resample_mean);
    CHECK(r.resample_mean <= r.ci_high);
    const auto again = bootstrap_percentile(gap, audit::dpd_statistic, 1000, 9);
    CHECK(again.ci_low == r.ci_low);
    CHECK(again.ci_high == r.ci_high);

    // Tiny minority group: redraws happen and are counted.
    std::vector<GroupedValue> lopsided(30, {Group::white, 1.0});
    lopsided.push_back({Group::non_white, 0.0});
    r = bootstrap_percentile(lopsided, audit::dpd_statistic, 200, 2);
    CHECK(r.n_degenerate > 0);
    CHECK(r.n_boot == 200);

    std::vector<GroupedValue> one_group(5, {Group::white, 1.0});
    CHECK_THROWS_AS(bootstrap_percentile(one_group, audit::dpd_statistic, 10, 1), ValidationError);
}

TEST_CASE("bootstrap coverage on a small null sample") {
    int covered = 0;
    for (int run = 0; run < 100; ++run) {
        const auto stream = synth::null_prediction_stream(300, 0.7, 0.3, 1000 + run);
        const auto r = bootstrap_percentile(stream, audit::dpd_statistic, 400, run);
        covered += r.ci_low <= 0.0 && 0.0 <= r.ci_high;
    }
    // Nominal 95; 87 is about 3.7 binomial sd below.
    CHECK(covered >= 87);
}
