#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "meshtrace/rng.hpp"
#include "meshtrace/stats.hpp"

using namespace meshtrace;

namespace {

// Independent quantile route: floor/ceil rank weighting on a sorted copy.
double oracle_quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double idx = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(idx));
    const auto hi = static_cast<size_t>(std::ceil(idx));
    const double w = idx - std::floor(idx);
    return values[lo] * (1.0 - w) + values[hi] * w;
}

stats::ContingencyTable make_table(std::vector<std::vector<long>> counts) {
    stats::ContingencyTable t;
    t.counts = std::move(counts);
    for (size_t i = 0; i < t.counts.size(); ++i)
        t.row_labels.push_back("r" + std::to_string(i));
    for (size_t j = 0; j < t.counts[0].size(); ++j)
        t.col_labels.push_back("c" + std::to_string(j));
    return t;
}

stats::ContingencyTable random_table(Rng& rng) {
    const size_t r = 2 + rng.below(4);
    const size_t c = 2 + rng.below(4);
    std::vector<std::vector<long>> counts(r, std::vector<long>(c));
    for (auto& row : counts)
        for (auto& cell : row)
            cell = 1 + static_cast<long>(rng.below(30));
    return make_table(std::move(counts));
}

}  // namespace

TEST_CASE("describe handles singleton and even-length input") {
    const auto single = stats::describe({5});
    CHECK(single.mean == 5);
    CHECK(single.min == 5);
    CHECK(single.q1 == 5);
    CHECK(single.median == 5);
    CHECK(single.q3 == 5);
    CHECK(single.max == 5);

    const auto even = stats::describe({1, 2, 3, 4});
    CHECK(even.median == doctest::Approx(2.5));
    CHECK(even.q1 == doctest::Approx(1.75));
    CHECK(even.q3 == doctest::Approx(3.25));
    CHECK(even.mean == doctest::Approx(2.5));

    CHECK_THROWS_AS(stats::describe({}), std::invalid_argument);
}

TEST_CASE("describe matches the interpolation oracle on random lists") {
    Rng rng(20240601);
    for (int trial = 0; trial < 1000; ++trial) {
        const size_t n = 1 + rng.below(40);
        std::vector<double> values(n);
        for (auto& v : values)
            v = std::floor(rng.uniform01() * 200.0) / 2.0;  // plenty of ties
        const auto s = stats::describe(values);
        CHECK(s.q1 == doctest::Approx(oracle_quantile(values, 0.25)).epsilon(1e-12));
        CHECK(s.median == doctest::Approx(oracle_quantile(values, 0.5)).epsilon(1e-12));
        CHECK(s.q3 == doctest::Approx(oracle_quantile(values, 0.75)).epsilon(1e-12));
        CHECK(s.min <= s.q1);
        CHECK(s.q1 <= s.median);
        CHECK(s.median <= s.q3);
        CHECK(s.q3 <= s.max);
    }
}

TEST_CASE("chi-square on a perfectly independent table is zero") {
    const auto r = stats::chi_square_independence(make_table({{10, 10}, {10, 10}}));
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.df == 1);
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("chi-square hand-computed 2x2 value") {
    // Expected counts are all 12.5; statistic = 4 * 7.5^2 / 12.5 = 18.
    const auto r = stats::chi_square_independence(make_table({{20, 5}, {5, 20}}));
    CHECK(r.statistic == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(r.df == 1);
    CHECK(r.p_value < 0.01);
}

TEST_CASE("chi-square df for a 5x4 table is 12") {
    std::vector<std::vector<long>> counts(5, std::vector<long>(4, 3));
    counts[0][0] = 9;
    const auto r = stats::chi_square_independence(make_table(counts));
    CHECK(r.df == 12);
}

TEST_CASE("chi-square rejects degenerate tables") {
    CHECK_THROWS_AS(stats::chi_square_independence(make_table({{1, 2}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(stats::chi_square_independence(make_table({{0, 0}, {3, 4}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(stats::chi_square_independence(make_table({{0, 2}, {0, 4}})),
                    std::invalid_argument);
}

TEST_CASE("pearson residuals: values, signs and the sum-of-squares identity") {
    const auto table = make_table({{20, 5}, {5, 20}});
    const auto res = stats::pearson_residuals(table);
    const double expected = 7.5 / std::sqrt(12.5);
    CHECK(res[0][0] == doctest::Approx(expected));
    CHECK(res[0][1] == doctest::Approx(-expected));
    CHECK(res[1][0] == doctest::Approx(-expected));
    CHECK(res[1][1] == doctest::Approx(expected));

    const auto indep = stats::pearson_residuals(make_table({{10, 10}, {10, 10}}));
    for (const auto& row : indep)
        for (double r : row)
            CHECK(r == doctest::Approx(0.0));
}

TEST_CASE("residual squares sum to the statistic on random tables") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto table = random_table(rng);
        const auto result = stats::chi_square_independence(table);
        const auto res = stats::pearson_residuals(table);
        double sum = 0;
        for (const auto& row : res)
            for (double r : row)
                sum += r * r;
        CHECK(sum == doctest::Approx(result.statistic).epsilon(1e-9));
    }
}

TEST_CASE("scaling a table scales the statistic but not the residual signs") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto table = random_table(rng);
        auto scaled = table;
        const long k = 2 + static_cast<long>(rng.below(5));
        for (auto& row : scaled.counts)
            for (auto& cell : row)
                cell *= k;
        const auto r1 = stats::chi_square_independence(table);
        const auto r2 = stats::chi_square_independence(scaled);
        CHECK(r2.statistic == doctest::Approx(k * r1.statistic).epsilon(1e-9));

        const auto res1 = stats::pearson_residuals(table);
        const auto res2 = stats::pearson_residuals(scaled);
        for (size_t i = 0; i < res1.size(); ++i)
            for (size_t j = 0; j < res1[i].size(); ++j) {
                const int s1 = res1[i][j] > 1e-12 ? 1 : res1[i][j] < -1e-12 ? -1 : 0;
                const int s2 = res2[i][j] > 1e-12 ? 1 : res2[i][j] < -1e-12 ? -1 : 0;
                CHECK(s1 == s2);
            }
    }
}

TEST_CASE("kruskal-wallis hand-computed value without ties") {
    // Rank sums 6 and 15: H = 12/(6*7) * (36/3 + 225/3) - 3*7 = 27/7.
    const auto r = stats::kruskal_wallis({{1, 2, 3}, {4, 5, 6}});
    CHECK(r.statistic == doctest::Approx(3.857).epsilon(1e-3));
    CHECK(r.df == 1);
}

TEST_CASE("kruskal-wallis on identical groups accepts the null") {
    const auto r = stats::kruskal_wallis({{1, 2, 3}, {1, 2, 3}});
    CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("kruskal-wallis is invariant under strictly increasing transforms") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> groups(2 + rng.below(3));
        for (auto& g : groups) {
            const size_t n = 2 + rng.below(8);
            for (size_t i = 0; i < n; ++i)
                g.push_back(std::floor(rng.uniform01() * 20.0));
        }
        auto transformed = groups;
        for (auto& g : transformed)
            for (double& v : g)
                v = std::exp(v / 4.0);  // strictly increasing
        const auto r1 = stats::kruskal_wallis(groups);
        const auto r2 = stats::kruskal_wallis(transformed);
        CHECK(r1.statistic == doctest::Approx(r2.statistic).epsilon(1e-9));
        CHECK(r1.df == r2.df);
    }
}

TEST_CASE("kruskal-wallis degenerate cases") {
    CHECK_THROWS_AS(stats::kruskal_wallis({{1, 2, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(stats::kruskal_wallis({{1, 2}, {}}), std::invalid_argument);
    // All values tied across groups: H defined as 0.
    const auto r = stats::kruskal_wallis({{2, 2}, {2, 2}});
    CHECK(r.statistic == doctest::Approx(0.0));
}

TEST_CASE("kruskal-wallis df follows the group count") {
    const auto r = stats::kruskal_wallis({{1, 9}, {2, 8}, {3, 7}, {4, 6}});
    CHECK(r.df == 3);
}

TEST_CASE("chi-square CDF reference values") {
    CHECK(stats::chi_square_cdf(0, 1) == doctest::Approx(0.0));
    CHECK(stats::chi_square_cdf(0, 7) == doctest::Approx(0.0));
    // P(chi2_1 <= 1) = P(|Z| <= 1).
    CHECK(stats::chi_square_cdf(1, 1) == doctest::Approx(0.682689).epsilon(1e-6));
    CHECK(stats::std_normal_cdf(0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(stats::chi_square_cdf(-1, 1), std::invalid_argument);
    CHECK_THROWS_AS(stats::chi_square_cdf(1, 0), std::invalid_argument);
}

TEST_CASE("chi-square CDF with one df matches the folded normal on a grid") {
    for (double z = 0.1; z <= 6.0; z += 0.1) {
        const double via_normal = 2.0 * stats::std_normal_cdf(z) - 1.0;
        CHECK(stats::chi_square_cdf(z * z, 1) ==
              doctest::Approx(via_normal).epsilon(1e-10));
    }
}

TEST_CASE("CDFs are monotone with limits zero and one") {
    for (int df : {1, 2, 5, 12}) {
        double prev = 0;
        for (double x = 0; x <= 80; x += 0.5) {
            const double v = stats::chi_square_cdf(x, df);
            CHECK(v >= prev);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
        CHECK(stats::chi_square_cdf(1000, df) == doctest::Approx(1.0).epsilon(1e-12));
    }
    double prev = 0;
    for (double z = -9; z <= 9; z += 0.25) {
        const double v = stats::std_normal_cdf(z);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(stats::std_normal_cdf(-40) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(stats::std_normal_cdf(40) == doctest::Approx(1.0).epsilon(1e-12));
}
