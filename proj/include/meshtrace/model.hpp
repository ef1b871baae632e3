#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshtrace/profile.hpp"
#include "meshtrace/rng.hpp"

namespace meshtrace::model {

struct SeparationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularDesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FeatureConfig {
    std::vector<char> dummy_categories{'B', 'C', 'D'};  // reference = everything else
    bool per_occurrence_rows = true;  // one row per (term, category) occurrence
};

struct FeatureVector {
    int clinical = 0;
    int narrower = 0;
    std::vector<int> category_dummies;  // aligned with FeatureConfig::dummy_categories
};

// Column names matching the row layout of build_dataset (intercept excluded).
std::vector<std::string> feature_names(const FeatureConfig& config);

// Inclusion-time facts plus clinical evidence visible by the M-th year,
// i.e. clinical_first_year <= year_added + M - 1.
FeatureVector encode_features(const profile::TopicProfile& p, int forecast_year,
                              const FeatureConfig& config = {});

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;  // no intercept column
    std::vector<int> labels;                // 0/1
    std::vector<std::string> row_uis;
};

// forecast_year = nullopt uses the full-horizon clinical flag. In
// per-occurrence mode a term contributes one row per subject category, each
// with a single category dummy.
Dataset build_dataset(const std::vector<profile::TopicProfile>& profiles,
                      const std::map<std::string, bool>& labels_by_ui,
                      std::optional<int> forecast_year, const FeatureConfig& config = {});

struct LogisticModel {
    std::vector<double> coefficients;  // intercept first
    std::vector<double> std_errors;
    std::vector<double> z_values;
    std::vector<double> p_values;
    double log_likelihood = 0;
    bool converged = false;
    int iterations = 0;
};

// Maximum-likelihood fit by iteratively reweighted least squares. X carries
// the feature columns only; the intercept is added internally. Throws
// SingularDesignError on rank-deficient designs and SeparationError when
// coefficients run away while the gradient stays large.
LogisticModel fit_logistic(const std::vector<std::vector<double>>& X,
                           const std::vector<int>& y);

double predict_prob(const LogisticModel& model, const std::vector<double>& x);

// Log-likelihood and its gradient for external checks (gradient excludes no
// terms; first component is the intercept).
double log_likelihood(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                      const std::vector<double>& beta);
std::vector<double> log_likelihood_gradient(const std::vector<std::vector<double>>& X,
                                            const std::vector<int>& y,
                                            const std::vector<double>& beta);

struct Metrics {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f_measure;
    std::optional<double> csi;  // tp / (tp + fp + fn)
};

Metrics evaluate(const std::vector<double>& preds, const std::vector<int>& labels,
                 double threshold = 0.5);

// Keeps every positive and exactly as many negatives, drawn uniformly
// without replacement; when negatives are scarcer, keeps them all. Returned
// indices are ascending, so relative order is preserved.
std::vector<std::size_t> downsample_indices(const std::vector<int>& labels, std::uint64_t seed);

template <typename T, typename LabelFn>
std::vector<T> downsample(const std::vector<T>& examples, LabelFn&& label_fn,
                          std::uint64_t seed) {
    std::vector<int> labels;
    labels.reserve(examples.size());
    for (const T& e : examples)
        labels.push_back(label_fn(e) ? 1 : 0);
    std::vector<T> kept;
    for (std::size_t i : downsample_indices(labels, seed))
        kept.push_back(examples[i]);
    return kept;
}

// Fold id in [0, k) per example; each class is spread evenly over folds.
std::vector<int> stratified_fold_ids(const std::vector<int>& labels, int k, std::uint64_t seed);

// Stratified k-fold CV: training folds are downsampled, test folds are left
// untouched, and the pooled confusion counts yield one Metrics.
Metrics cross_validate(const Dataset& dataset, int k, std::uint64_t seed);

struct SweepRow {
    int forecast_year = 0;
    Metrics metrics;
};

std::vector<SweepRow> sweep_forecast(const std::vector<profile::TopicProfile>& profiles,
                                     const std::map<std::string, bool>& labels_by_ui,
                                     int m_lo, int m_hi, int k, std::uint64_t seed,
                                     const FeatureConfig& config = {});

struct FullFit {
    std::vector<std::string> names;  // "(Intercept)" first
    LogisticModel model;
};

// Single fit on the entire dataset at the full horizon, no CV and no
// down-sampling.
FullFit fit_full(const std::vector<profile::TopicProfile>& profiles,
                 const std::map<std::string, bool>& labels_by_ui,
                 const FeatureConfig& config = {});

// R-style significance marker for a p-value ("***", "**", "*" or "").
std::string significance_code(double p);

}  // namespace meshtrace::model
