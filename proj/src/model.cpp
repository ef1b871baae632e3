#include "meshtrace/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "meshtrace/stats.hpp"

namespace meshtrace::model {

std::vector<std::string> feature_names(const FeatureConfig& config) {
    std::vector<std::string> names;
    names.push_back("NarrowerTerm");
    for (char c : config.dummy_categories)
        names.push_back(std::string("Category_") + c);
    names.push_back("ClinicalSignificance");
    return names;
}

namespace {

bool clinical_visible(const profile::TopicProfile& p, std::optional<int> forecast_year) {
    if (!p.clinical_first_year)
        return false;
    if (!forecast_year)
        return true;  // full horizon; clinical_first_year is already clamped
    return *p.clinical_first_year <= p.year_added + *forecast_year - 1;
}

std::vector<double> feature_row(const FeatureVector& f) {
    std::vector<double> row;
    row.reserve(f.category_dummies.size() + 2);
    row.push_back(f.narrower);
    for (int d : f.category_dummies)
        row.push_back(d);
    row.push_back(f.clinical);
    return row;
}

}  // namespace

FeatureVector encode_features(const profile::TopicProfile& p, int forecast_year,
                              const FeatureConfig& config) {
    if (forecast_year < 1)
        throw std::invalid_argument("encode_features: forecast year must be >= 1");
    FeatureVector f;
    f.clinical = clinical_visible(p, forecast_year) ? 1 : 0;
    f.narrower = p.has_narrower ? 1 : 0;
    for (char c : config.dummy_categories)
        f.category_dummies.push_back(p.categories.count(c) ? 1 : 0);
    return f;
}

Dataset build_dataset(const std::vector<profile::TopicProfile>& profiles,
                      const std::map<std::string, bool>& labels_by_ui,
                      std::optional<int> forecast_year, const FeatureConfig& config) {
    if (forecast_year && *forecast_year < 1)
        throw std::invalid_argument("build_dataset: forecast year must be >= 1");
    Dataset ds;
    ds.feature_names = feature_names(config);
    for (const auto& p : profiles) {
        auto lit = labels_by_ui.find(p.ui);
        if (lit == labels_by_ui.end())
            throw std::invalid_argument("build_dataset: no label for " + p.ui);
        const int label = lit->second ? 1 : 0;
        const int clinical = clinical_visible(p, forecast_year) ? 1 : 0;
        const int narrower = p.has_narrower ? 1 : 0;

        auto push_row = [&](const std::set<char>& row_categories) {
            std::vector<double> row;
            row.push_back(narrower);
            for (char c : config.dummy_categories)
                row.push_back(row_categories.count(c) ? 1.0 : 0.0);
            row.push_back(clinical);
            ds.rows.push_back(std::move(row));
            ds.labels.push_back(label);
            ds.row_uis.push_back(p.ui);
        };

        if (config.per_occurrence_rows) {
            for (char c : p.categories)
                push_row({c});
        } else {
            push_row(p.categories);
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Dense symmetric solves for the IRLS normal equations (p is tiny).

namespace {

using Matrix = std::vector<std::vector<double>>;

// Lower-triangular Cholesky factor; reports the first non-positive pivot.
struct CholeskyResult {
    Matrix l;
    int failed_pivot = -1;

    bool ok() const { return failed_pivot < 0; }
};

CholeskyResult cholesky(const Matrix& a) {
    const size_t p = a.size();
    CholeskyResult r;
    r.l.assign(p, std::vector<double>(p, 0.0));
    for (size_t i = 0; i < p; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            double sum = a[i][j];
            for (size_t k = 0; k < j; ++k)
                sum -= r.l[i][k] * r.l[j][k];
            if (i == j) {
                if (!(sum > 0.0) || !std::isfinite(sum)) {
                    r.failed_pivot = static_cast<int>(i);
                    return r;
                }
                r.l[i][i] = std::sqrt(sum);
            } else {
                r.l[i][j] = sum / r.l[j][j];
            }
        }
    }
    return r;
}

std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
    const size_t p = l.size();
    std::vector<double> y(p, 0.0);
    for (size_t i = 0; i < p; ++i) {
        double sum = b[i];
        for (size_t k = 0; k < i; ++k)
            sum -= l[i][k] * y[k];
        y[i] = sum / l[i][i];
    }
    std::vector<double> x(p, 0.0);
    for (size_t ii = p; ii-- > 0;) {
        double sum = y[ii];
        for (size_t k = ii + 1; k < p; ++k)
            sum -= l[k][ii] * x[k];
        x[ii] = sum / l[ii][ii];
    }
    return x;
}

Matrix cholesky_inverse(const Matrix& l) {
    const size_t p = l.size();
    Matrix inv(p, std::vector<double>(p, 0.0));
    for (size_t j = 0; j < p; ++j) {
        std::vector<double> e(p, 0.0);
        e[j] = 1.0;
        std::vector<double> col = cholesky_solve(l, e);
        for (size_t i = 0; i < p; ++i)
            inv[i][j] = col[i];
    }
    return inv;
}

double sigmoid(double z) {
    if (z >= 0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log1p_exp(double z) {  // log(1 + e^z) without overflow
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double dot_with_intercept(const std::vector<double>& beta, const std::vector<double>& x) {
    double z = beta[0];
    for (size_t k = 0; k < x.size(); ++k)
        z += beta[k + 1] * x[k];
    return z;
}

constexpr double kGradientTol = 1e-8;
constexpr double kStepTol = 1e-10;
constexpr int kMaxIrlsIterations = 100;
constexpr double kSeparationBound = 15.0;

}  // namespace

double log_likelihood(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                      const std::vector<double>& beta) {
    double ll = 0;
    for (size_t i = 0; i < X.size(); ++i) {
        const double z = dot_with_intercept(beta, X[i]);
        ll += y[i] * z - log1p_exp(z);
    }
    return ll;
}

std::vector<double> log_likelihood_gradient(const std::vector<std::vector<double>>& X,
                                            const std::vector<int>& y,
                                            const std::vector<double>& beta) {
    std::vector<double> g(beta.size(), 0.0);
    for (size_t i = 0; i < X.size(); ++i) {
        const double resid = y[i] - sigmoid(dot_with_intercept(beta, X[i]));
        g[0] += resid;
        for (size_t k = 0; k < X[i].size(); ++k)
            g[k + 1] += resid * X[i][k];
    }
    return g;
}

namespace {

// Outcome of the IRLS loop; degeneracies are flagged so callers can choose
// between failing loudly and falling back.
struct IrlsOutcome {
    std::vector<double> beta;
    bool converged = false;
    bool separated = false;
    int singular_pivot = -1;  // index into (intercept, features...) when X'WX failed
    int iterations = 0;
};

IrlsOutcome run_irls(const std::vector<std::vector<double>>& X, const std::vector<int>& y) {
    const size_t n = X.size();
    const size_t p = X.empty() ? 1 : X[0].size() + 1;

    IrlsOutcome out;
    out.beta.assign(p, 0.0);
    std::vector<double> pi(n, 0.0);
    Matrix hessian(p, std::vector<double>(p, 0.0));

    auto fill_hessian = [&]() {
        for (auto& row : hessian)
            std::fill(row.begin(), row.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double w = pi[i] * (1.0 - pi[i]);
            // Row with implicit leading 1 for the intercept.
            for (size_t a = 0; a < p; ++a) {
                const double xa = a == 0 ? 1.0 : X[i][a - 1];
                for (size_t b = 0; b <= a; ++b) {
                    const double xb = b == 0 ? 1.0 : X[i][b - 1];
                    hessian[a][b] += w * xa * xb;
                }
            }
        }
        for (size_t a = 0; a < p; ++a)
            for (size_t b = a + 1; b < p; ++b)
                hessian[a][b] = hessian[b][a];
    };

    while (out.iterations < kMaxIrlsIterations) {
        ++out.iterations;
        std::vector<double> gradient(p, 0.0);
        for (size_t i = 0; i < n; ++i) {
            pi[i] = sigmoid(dot_with_intercept(out.beta, X[i]));
            const double resid = y[i] - pi[i];
            gradient[0] += resid;
            for (size_t k = 0; k + 1 < p; ++k)
                gradient[k + 1] += resid * X[i][k];
        }
        double max_grad = 0;
        for (double g : gradient)
            max_grad = std::max(max_grad, std::fabs(g));
        if (max_grad <= kGradientTol) {
            out.converged = true;
            return out;
        }
        double max_beta = 0;
        for (double b : out.beta)
            max_beta = std::max(max_beta, std::fabs(b));
        if (max_beta > kSeparationBound) {
            out.separated = true;
            return out;
        }

        fill_hessian();
        const CholeskyResult chol = cholesky(hessian);
        if (!chol.ok()) {
            out.singular_pivot = chol.failed_pivot;
            return out;
        }
        const std::vector<double> step = cholesky_solve(chol.l, gradient);
        double step_norm_sq = 0;
        for (size_t k = 0; k < p; ++k) {
            out.beta[k] += step[k];
            step_norm_sq += step[k] * step[k];
        }
        if (std::sqrt(step_norm_sq) <= kStepTol) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

Matrix information_matrix(const std::vector<std::vector<double>>& X,
                          const std::vector<double>& beta) {
    const size_t n = X.size();
    const size_t p = beta.size();
    Matrix hessian(p, std::vector<double>(p, 0.0));
    for (size_t i = 0; i < n; ++i) {
        const double pi = sigmoid(dot_with_intercept(beta, X[i]));
        const double w = pi * (1.0 - pi);
        for (size_t a = 0; a < p; ++a) {
            const double xa = a == 0 ? 1.0 : X[i][a - 1];
            for (size_t b = 0; b <= a; ++b) {
                const double xb = b == 0 ? 1.0 : X[i][b - 1];
                hessian[a][b] += w * xa * xb;
            }
        }
    }
    for (size_t a = 0; a < p; ++a)
        for (size_t b = a + 1; b < p; ++b)
            hessian[a][b] = hessian[b][a];
    return hessian;
}

void check_fit_preconditions(const std::vector<std::vector<double>>& X,
                             const std::vector<int>& y) {
    const size_t n = X.size();
    if (n == 0 || n != y.size())
        throw std::invalid_argument("fit_logistic: bad dimensions");
    const size_t p = X[0].size() + 1;  // with intercept
    for (const auto& row : X)
        if (row.size() + 1 != p)
            throw std::invalid_argument("fit_logistic: ragged design matrix");
    if (n < p + 1)
        throw std::invalid_argument("fit_logistic: need more rows than coefficients");
    const long positives = std::accumulate(y.begin(), y.end(), 0L);
    if (positives == 0 || positives == static_cast<long>(n))
        throw std::invalid_argument("fit_logistic: y contains a single class");
}

}  // namespace

LogisticModel fit_logistic(const std::vector<std::vector<double>>& X,
                           const std::vector<int>& y) {
    check_fit_preconditions(X, y);

    const IrlsOutcome out = run_irls(X, y);
    if (out.separated)
        throw SeparationError("fit_logistic: quasi-separated data, |beta| > " +
                              std::to_string(kSeparationBound) +
                              " with gradient still large");
    if (out.singular_pivot >= 0)
        throw SingularDesignError("fit_logistic: X'WX is singular (rank-deficient design, "
                                  "pivot " + std::to_string(out.singular_pivot) + ")");

    // Wald statistics from the observed information at the final estimate.
    const CholeskyResult chol = cholesky(information_matrix(X, out.beta));
    if (!chol.ok())
        throw SingularDesignError("fit_logistic: X'WX is singular at the optimum");
    const Matrix cov = cholesky_inverse(chol.l);

    const size_t p = out.beta.size();
    LogisticModel m;
    m.coefficients = out.beta;
    m.converged = out.converged;
    m.iterations = out.iterations;
    m.log_likelihood = log_likelihood(X, y, out.beta);
    m.std_errors.resize(p);
    m.z_values.resize(p);
    m.p_values.resize(p);
    for (size_t k = 0; k < p; ++k) {
        m.std_errors[k] = std::sqrt(cov[k][k]);
        m.z_values[k] = m.coefficients[k] / m.std_errors[k];
        m.p_values[k] = 2.0 * (1.0 - stats::std_normal_cdf(std::fabs(m.z_values[k])));
    }
    return m;
}

double predict_prob(const LogisticModel& model, const std::vector<double>& x) {
    if (x.size() + 1 != model.coefficients.size())
        throw std::invalid_argument("predict_prob: feature length does not match model");
    return sigmoid(dot_with_intercept(model.coefficients, x));
}

namespace {

Metrics metrics_from_counts(long tp, long fp, long fn, long tn) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    const long n = tp + fp + fn + tn;
    if (n > 0)
        m.accuracy = static_cast<double>(tp + tn) / n;
    if (tp + fp > 0)
        m.precision = static_cast<double>(tp) / (tp + fp);
    if (tp + fn > 0)
        m.recall = static_cast<double>(tp) / (tp + fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0)
        m.f_measure = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    if (tp + fp + fn > 0)
        m.csi = static_cast<double>(tp) / (tp + fp + fn);
    return m;
}

}  // namespace

Metrics evaluate(const std::vector<double>& preds, const std::vector<int>& labels,
                 double threshold) {
    if (preds.size() != labels.size())
        throw std::invalid_argument("evaluate: predictions and labels differ in length");
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
        const bool positive = preds[i] >= threshold;
        if (positive && labels[i] == 1)
            ++tp;
        else if (positive)
            ++fp;
        else if (labels[i] == 1)
            ++fn;
        else
            ++tn;
    }
    return metrics_from_counts(tp, fp, fn, tn);
}

std::vector<std::size_t> downsample_indices(const std::vector<int>& labels,
                                            std::uint64_t seed) {
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == 1 ? positives : negatives).push_back(i);
    if (positives.empty())
        throw std::invalid_argument("downsample: no positive examples");

    if (negatives.size() > positives.size()) {
        Rng rng(seed);
        // Partial Fisher-Yates: the first |positives| entries are a uniform
        // sample without replacement.
        for (std::size_t i = 0; i < positives.size(); ++i) {
            const std::size_t j = i + rng.below(negatives.size() - i);
            std::swap(negatives[i], negatives[j]);
        }
        negatives.resize(positives.size());
    }

    std::vector<std::size_t> kept = std::move(positives);
    kept.insert(kept.end(), negatives.begin(), negatives.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::vector<int> stratified_fold_ids(const std::vector<int>& labels, int k,
                                     std::uint64_t seed) {
    if (k < 2)
        throw std::invalid_argument("stratified_fold_ids: k must be >= 2");
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == 1 ? positives : negatives).push_back(i);
    if (positives.size() < static_cast<std::size_t>(k) ||
        negatives.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("stratified_fold_ids: need at least k examples per class");

    Rng rng(seed);
    rng.shuffle(positives);
    rng.shuffle(negatives);
    std::vector<int> folds(labels.size(), -1);
    for (std::size_t i = 0; i < positives.size(); ++i)
        folds[positives[i]] = static_cast<int>(i % k);
    for (std::size_t i = 0; i < negatives.size(); ++i)
        folds[negatives[i]] = static_cast<int>(i % k);
    return folds;
}

namespace {

// Training folds can be degenerate in ways the strict fit refuses: a
// category dummy may be constant within the fold, or a strong feature may
// quasi-separate the balanced sample. For prediction we drop uninformative
// columns (their coefficient is the reference value zero) and keep the
// diverged direction when separation stops the iteration; its saturated
// probabilities classify the same way the limit would.
std::vector<double> fit_fold_coefficients(const std::vector<std::vector<double>>& X,
                                          const std::vector<int>& y) {
    const size_t width = X.empty() ? 0 : X[0].size();
    std::vector<size_t> active;
    for (size_t j = 0; j < width; ++j) {
        for (size_t i = 1; i < X.size(); ++i) {
            if (X[i][j] != X[0][j]) {
                active.push_back(j);
                break;
            }
        }
    }

    for (;;) {
        std::vector<std::vector<double>> reduced(X.size());
        for (size_t i = 0; i < X.size(); ++i) {
            reduced[i].reserve(active.size());
            for (size_t j : active)
                reduced[i].push_back(X[i][j]);
        }
        const IrlsOutcome out = run_irls(reduced, y);
        if (out.singular_pivot > 0 && !active.empty()) {
            // Collinear column; drop it and refit.
            active.erase(active.begin() + (out.singular_pivot - 1));
            continue;
        }
        std::vector<double> beta(width + 1, 0.0);
        beta[0] = out.beta[0];
        for (size_t r = 0; r < active.size(); ++r)
            beta[active[r] + 1] = out.beta[r + 1];
        return beta;
    }
}

}  // namespace

Metrics cross_validate(const Dataset& dataset, int k, std::uint64_t seed) {
    const std::vector<int> folds =
        stratified_fold_ids(dataset.labels, k, derive_seed(seed, 0));

    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (int f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < folds.size(); ++i)
            (folds[i] == f ? test_idx : train_idx).push_back(i);

        // Balance the training portion only; the test fold stays untouched.
        std::vector<int> train_labels;
        train_labels.reserve(train_idx.size());
        for (std::size_t i : train_idx)
            train_labels.push_back(dataset.labels[i]);
        const std::vector<std::size_t> kept =
            downsample_indices(train_labels, derive_seed(seed, 1 + f));

        std::vector<std::vector<double>> X;
        std::vector<int> y;
        X.reserve(kept.size());
        for (std::size_t pos : kept) {
            X.push_back(dataset.rows[train_idx[pos]]);
            y.push_back(train_labels[pos]);
        }
        const std::vector<double> beta = fit_fold_coefficients(X, y);

        for (std::size_t i : test_idx) {
            const double pi = sigmoid(dot_with_intercept(beta, dataset.rows[i]));
            const bool positive = pi >= 0.5;
            if (positive && dataset.labels[i] == 1)
                ++tp;
            else if (positive)
                ++fp;
            else if (dataset.labels[i] == 1)
                ++fn;
            else
                ++tn;
        }
    }

    return metrics_from_counts(tp, fp, fn, tn);
}

std::vector<SweepRow> sweep_forecast(const std::vector<profile::TopicProfile>& profiles,
                                     const std::map<std::string, bool>& labels_by_ui,
                                     int m_lo, int m_hi, int k, std::uint64_t seed,
                                     const FeatureConfig& config) {
    if (m_lo < 1 || m_hi < m_lo)
        throw std::invalid_argument("sweep_forecast: bad forecast-year range");
    // One derived seed for the whole sweep: every forecast point sees the
    // same folds, so M-invariant features give identical rows.
    const std::uint64_t cv_seed = derive_seed(seed, 100);
    std::vector<SweepRow> rows;
    for (int m = m_lo; m <= m_hi; ++m) {
        const Dataset ds = build_dataset(profiles, labels_by_ui, m, config);
        SweepRow row;
        row.forecast_year = m;
        row.metrics = cross_validate(ds, k, cv_seed);
        rows.push_back(row);
    }
    return rows;
}

FullFit fit_full(const std::vector<profile::TopicProfile>& profiles,
                 const std::map<std::string, bool>& labels_by_ui,
                 const FeatureConfig& config) {
    const Dataset ds = build_dataset(profiles, labels_by_ui, std::nullopt, config);
    FullFit fit;
    fit.names.push_back("(Intercept)");
    for (const auto& name : ds.feature_names)
        fit.names.push_back(name);
    fit.model = fit_logistic(ds.rows, ds.labels);
    return fit;
}

std::string significance_code(double p) {
    if (p < 0.001)
        return "***";
    if (p < 0.01)
        return "**";
    if (p < 0.05)
        return "*";
    return "";
}

}  // namespace meshtrace::model
