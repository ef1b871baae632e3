#pragma once

#include <string>
#include <vector>

namespace meshtrace::stats {

struct FiveNumberSummary {
    double mean = 0;
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double max = 0;
};

// Quartiles by linear interpolation between closest ranks. Throws on empty
// input.
FiveNumberSummary describe(std::vector<double> values);

// p-th quantile of already sorted values, same interpolation convention.
double quantile_sorted(const std::vector<double>& sorted, double p);

struct ContingencyTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<long>> counts;

    size_t rows() const { return counts.size(); }
    size_t cols() const { return counts.empty() ? 0 : counts[0].size(); }
    long grand_total() const;
    std::vector<long> row_totals() const;
    std::vector<long> col_totals() const;
};

struct TestResult {
    double statistic = 0;
    int df = 0;
    double p_value = 1;
};

// Pearson chi-square test of independence. Requires at least a 2x2 table
// with no zero row or column total.
TestResult chi_square_independence(const ContingencyTable& table);

// (observed - expected) / sqrt(expected); the squares sum to the chi-square
// statistic.
std::vector<std::vector<double>> pearson_residuals(const ContingencyTable& table);

// Kruskal-Wallis H with average ranks for ties and the usual tie-correction
// divisor 1 - sum(t^3 - t) / (n^3 - n). p-value from the chi-square
// approximation with df = groups - 1.
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Regularized lower incomplete gamma P(a, x), series/continued-fraction
// evaluation.
double regularized_gamma_p(double a, double x);

double chi_square_cdf(double x, int df);
double std_normal_cdf(double z);

}  // namespace meshtrace::stats
