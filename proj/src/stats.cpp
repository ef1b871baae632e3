#include "meshtrace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace meshtrace::stats {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty())
        throw std::invalid_argument("quantile of empty list");
    if (p < 0 || p > 1)
        throw std::invalid_argument("quantile fraction outside [0,1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const size_t lo = static_cast<size_t>(h);
    if (lo + 1 >= sorted.size())
        return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

FiveNumberSummary describe(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("describe: empty input");
    std::sort(values.begin(), values.end());
    FiveNumberSummary s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    s.min = values.front();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    s.max = values.back();
    return s;
}

long ContingencyTable::grand_total() const {
    long total = 0;
    for (const auto& row : counts)
        for (long c : row)
            total += c;
    return total;
}

std::vector<long> ContingencyTable::row_totals() const {
    std::vector<long> totals(rows(), 0);
    for (size_t i = 0; i < rows(); ++i)
        for (long c : counts[i])
            totals[i] += c;
    return totals;
}

std::vector<long> ContingencyTable::col_totals() const {
    std::vector<long> totals(cols(), 0);
    for (const auto& row : counts)
        for (size_t j = 0; j < row.size(); ++j)
            totals[j] += row[j];
    return totals;
}

namespace {

void check_table(const ContingencyTable& table) {
    if (table.rows() < 2 || table.cols() < 2)
        throw std::invalid_argument("contingency table must be at least 2x2");
    for (const auto& row : table.counts) {
        if (row.size() != table.cols())
            throw std::invalid_argument("ragged contingency table");
        for (long c : row)
            if (c < 0)
                throw std::invalid_argument("negative cell count");
    }
    for (long t : table.row_totals())
        if (t == 0)
            throw std::invalid_argument("zero row total");
    for (long t : table.col_totals())
        if (t == 0)
            throw std::invalid_argument("zero column total");
}

}  // namespace

TestResult chi_square_independence(const ContingencyTable& table) {
    check_table(table);
    const auto row_totals = table.row_totals();
    const auto col_totals = table.col_totals();
    const double grand = static_cast<double>(table.grand_total());

    double statistic = 0;
    for (size_t i = 0; i < table.rows(); ++i) {
        for (size_t j = 0; j < table.cols(); ++j) {
            const double expected = row_totals[i] * col_totals[j] / grand;
            const double diff = table.counts[i][j] - expected;
            statistic += diff * diff / expected;
        }
    }
    TestResult r;
    r.statistic = statistic;
    r.df = static_cast<int>((table.rows() - 1) * (table.cols() - 1));
    r.p_value = 1.0 - chi_square_cdf(statistic, r.df);
    return r;
}

std::vector<std::vector<double>> pearson_residuals(const ContingencyTable& table) {
    check_table(table);
    const auto row_totals = table.row_totals();
    const auto col_totals = table.col_totals();
    const double grand = static_cast<double>(table.grand_total());

    std::vector<std::vector<double>> residuals(table.rows(),
                                               std::vector<double>(table.cols(), 0.0));
    for (size_t i = 0; i < table.rows(); ++i) {
        for (size_t j = 0; j < table.cols(); ++j) {
            const double expected = row_totals[i] * col_totals[j] / grand;
            residuals[i][j] = (table.counts[i][j] - expected) / std::sqrt(expected);
        }
    }
    return residuals;
}

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2)
        throw std::invalid_argument("kruskal_wallis: need at least two groups");
    size_t n = 0;
    for (const auto& g : groups) {
        if (g.empty())
            throw std::invalid_argument("kruskal_wallis: empty group");
        n += g.size();
    }
    if (n < 3)
        throw std::invalid_argument("kruskal_wallis: need at least three values in total");

    // Pool, sort, assign average ranks to ties.
    std::vector<std::pair<double, size_t>> pooled;  // (value, group)
    pooled.reserve(n);
    for (size_t g = 0; g < groups.size(); ++g)
        for (double v : groups[g])
            pooled.emplace_back(v, g);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<double> rank_sums(groups.size(), 0.0);
    double tie_term = 0;  // sum of t^3 - t over tie groups
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first)
            ++j;
        const double t = static_cast<double>(j - i);
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k)
            rank_sums[pooled[k].second] += avg_rank;
        if (t > 1)
            tie_term += t * t * t - t;
        i = j;
    }

    const double dn = static_cast<double>(n);
    double h = 0;
    for (size_t g = 0; g < groups.size(); ++g)
        h += rank_sums[g] * rank_sums[g] / static_cast<double>(groups[g].size());
    h = 12.0 / (dn * (dn + 1.0)) * h - 3.0 * (dn + 1.0);

    const double correction = 1.0 - tie_term / (dn * dn * dn - dn);
    // All values tied: no rank information, H is 0 by convention.
    h = correction > 0 ? h / correction : 0.0;

    TestResult r;
    r.statistic = h;
    r.df = static_cast<int>(groups.size()) - 1;
    r.p_value = 1.0 - chi_square_cdf(std::max(h, 0.0), r.df);
    return r;
}

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEpsilon = 1e-15;

// Series expansion of P(a, x), effective for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEpsilon)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) by the modified Lentz method, for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double frac = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny)
            d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        frac *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon)
            break;
    }
    return frac * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (a <= 0)
        throw std::invalid_argument("regularized_gamma_p: a must be positive");
    if (x < 0)
        throw std::invalid_argument("regularized_gamma_p: x must be non-negative");
    if (x == 0)
        return 0.0;
    if (x < a + 1.0)
        return gamma_p_series(a, x);
    return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi_square_cdf(double x, int df) {
    if (df < 1)
        throw std::invalid_argument("chi_square_cdf: df must be >= 1");
    if (x < 0)
        throw std::invalid_argument("chi_square_cdf: x must be non-negative");
    return regularized_gamma_p(df / 2.0, x / 2.0);
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace meshtrace::stats
