#include "cdrtrip/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "cdrtrip/parallel.hpp"

namespace cdrtrip {

namespace {

double log1pexp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

// Cholesky solve of A x = b for symmetric positive definite A (row-major).
bool spd_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
               std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0 || !std::isfinite(d)) return false;
        const double root = std::sqrt(d);
        a[j * n + j] = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / root;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
        b[i] = v / a[i * n + i];
    }
    out.assign(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double v = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= a[k * n + ii] * out[k];
        out[ii] = v / a[ii * n + ii];
    }
    return true;
}

// Inverse of an SPD matrix by solving against unit vectors.
bool spd_inverse(const std::vector<double>& a, std::size_t n, std::vector<double>& inv) {
    inv.assign(n * n, 0.0);
    std::vector<double> e(n, 0.0), col;
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        if (!spd_solve(a, e, n, col)) return false;
        for (std::size_t i = 0; i < n; ++i) inv[i * n + j] = col[i];
    }
    return true;
}

double dot_row(std::span<const double> weights, std::span<const double> x) {
    double z = weights[0];
    for (std::size_t j = 0; j < x.size(); ++j) z += weights[j + 1] * x[j];
    return z;
}

std::vector<double> objective_hessian(const Matrix& x, std::span<const double> weights, double C) {
    const std::size_t d = x.cols() + 1;
    std::vector<double> h(d * d, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        const double p = sigmoid(dot_row(weights, row));
        const double s = p * (1.0 - p);
        h[0] += s;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            h[(j + 1) * d] += s * row[j];
            for (std::size_t k = 0; k <= j; ++k) {
                h[(j + 1) * d + (k + 1)] += s * row[j] * row[k];
            }
        }
    }
    for (std::size_t j = 1; j < d; ++j) h[j * d + j] += 1.0 / C;
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = j + 1; k < d; ++k) h[j * d + k] = h[k * d + j];
    }
    return h;
}

double optional_or(const std::optional<double>& v, double fallback) {
    return v.has_value() ? *v : fallback;
}

}  // namespace

Matrix Dataset::to_matrix() const {
    Matrix m(x.size(), kFeatureCount);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < kFeatureCount; ++j) m(i, j) = x[i][j];
    }
    return m;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logistic_loss(const Matrix& x, std::span<const int> y, std::span<const double> weights,
                     double C) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double z = dot_row(weights, x.row(i));
        loss += log1pexp(z) - (y[i] != 0 ? z : 0.0);
    }
    double penalty = 0.0;
    for (std::size_t j = 1; j < weights.size(); ++j) penalty += weights[j] * weights[j];
    return loss + penalty / (2.0 * C);
}

std::vector<double> logistic_gradient(const Matrix& x, std::span<const int> y,
                                      std::span<const double> weights, double C) {
    std::vector<double> g(weights.size(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto row = x.row(i);
        const double residual = sigmoid(dot_row(weights, row)) - (y[i] != 0 ? 1.0 : 0.0);
        g[0] += residual;
        for (std::size_t j = 0; j < row.size(); ++j) g[j + 1] += residual * row[j];
    }
    for (std::size_t j = 1; j < weights.size(); ++j) g[j] += weights[j] / C;
    return g;
}

GenericModel fit_logistic(const Matrix& x, std::span<const int> y, double C, double tol,
                          int max_iter, FitReport* report) {
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw DataError("fit_logistic: empty or misaligned inputs");
    }
    const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (positives == 0 || positives == y.size()) {
        throw DegenerateDataError("fit_logistic: training data has a single class");
    }
    if (C <= 0.0) throw DataError("fit_logistic: C must be positive");

    const std::size_t d = x.cols() + 1;
    std::vector<double> w(d, 0.0);
    double loss = logistic_loss(x, y, w, C);
    FitReport fit;
    for (fit.iterations = 0; fit.iterations < max_iter; ++fit.iterations) {
        std::vector<double> g = logistic_gradient(x, y, w, C);
        fit.grad_max_norm = 0.0;
        for (const double v : g) fit.grad_max_norm = std::max(fit.grad_max_norm, std::abs(v));
        if (fit.grad_max_norm <= tol) {
            fit.converged = true;
            break;
        }
        std::vector<double> h = objective_hessian(x, w, C);
        std::vector<double> neg_g(d);
        for (std::size_t j = 0; j < d; ++j) neg_g[j] = -g[j];
        std::vector<double> step;
        double jitter = 0.0;
        while (!spd_solve(h, neg_g, d, step)) {
            jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
            if (jitter > 1.0) {
                step = neg_g;  // gradient step as a last resort
                break;
            }
            for (std::size_t j = 0; j < d; ++j) h[j * d + j] += jitter;
        }
        double slope = 0.0;
        for (std::size_t j = 0; j < d; ++j) slope += g[j] * step[j];
        if (slope >= 0.0) {
            for (std::size_t j = 0; j < d; ++j) step[j] = -g[j];
            slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
        }
        double t = 1.0;
        std::vector<double> trial(d);
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            for (std::size_t j = 0; j < d; ++j) trial[j] = w[j] + t * step[j];
            const double trial_loss = logistic_loss(x, y, trial, C);
            if (trial_loss <= loss + 1e-4 * t * slope) {
                w = trial;
                loss = trial_loss;
                break;
            }
            t *= 0.5;
        }
    }
    fit.final_loss = loss;
    if (report) *report = fit;
    return GenericModel{std::move(w)};
}

ModelParams train_logistic(const Dataset& data, double C, double tol, int max_iter,
                           FitReport* report) {
    const GenericModel model = fit_logistic(data.to_matrix(), data.y, C, tol, max_iter, report);
    ModelParams params;
    params.intercept = model.weights[0];
    params.C = C;
    for (std::size_t j = 0; j < kFeatureCount; ++j) params.coefficients[j] = model.weights[j + 1];
    return params;
}

double predict_proba(const ModelParams& params, const FeatureVector& x) {
    double z = params.intercept;
    for (std::size_t j = 0; j < kFeatureCount; ++j) z += params.coefficients[j] * x[j];
    return sigmoid(z);
}

double predict_proba(const GenericModel& model, std::span<const double> x) {
    return sigmoid(dot_row(model.weights, x));
}

int predict_class(const ModelParams& params, const FeatureVector& x, double cutoff) {
    return predict_proba(params, x) >= cutoff ? 1 : 0;
}

int baseline_deterministic() { return 0; }

Metrics evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                 std::span<const double> scores) {
    if (y_true.empty() || y_true.size() != y_pred.size()) {
        throw DataError("evaluate: empty or misaligned inputs");
    }
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_pred[i] != 0) {
            y_true[i] != 0 ? ++tp : ++fp;
        } else {
            y_true[i] != 0 ? ++fn : ++tn;
        }
    }
    Metrics m;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(y_true.size());
    m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    const bool both_classes = (tp + fn) > 0 && (fp + tn) > 0;
    if (!scores.empty() && both_classes) {
        if (scores.size() != y_true.size()) throw DataError("evaluate: misaligned scores");
        m.roc_auc = roc_auc(y_true, scores);
    }
    return m;
}

double roc_auc(std::span<const int> y_true, std::span<const double> scores) {
    if (y_true.size() != scores.size() || y_true.empty()) {
        throw DataError("roc_auc: empty or misaligned inputs");
    }
    std::vector<std::size_t> order(y_true.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::size_t n_pos = 0;
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average
        for (std::size_t k = i; k < j; ++k) {
            if (y_true[order[k]] != 0) {
                ++n_pos;
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    const std::size_t n_neg = y_true.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc: undefined for a single class");
    return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

CvResult cross_validate(const Matrix& x, std::span<const int> y, int k, std::uint64_t seed,
                        double cutoff, const FitPredictFn& fit_predict, int workers) {
    const std::size_t n = x.rows();
    if (k < 2) throw DataError("cross_validate: k must be at least 2");
    if (n < static_cast<std::size_t>(k)) throw DataError("cross_validate: fewer rows than folds");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, "cv-shuffle"));
    shuffle(order, rng);

    // First n % k folds take the extra row.
    std::vector<std::pair<std::size_t, std::size_t>> fold_spans;
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t cursor = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        fold_spans.emplace_back(cursor, cursor + size);
        cursor += size;
    }

    CvResult result;
    result.folds.resize(static_cast<std::size_t>(k));
    parallel_for(static_cast<std::size_t>(k), workers, [&](std::size_t f) {
        const auto [lo, hi] = fold_spans[f];
        const std::size_t n_test = hi - lo;
        Matrix x_train(n - n_test, x.cols());
        Matrix x_test(n_test, x.cols());
        std::vector<int> y_train;
        std::vector<int> y_test;
        y_train.reserve(n - n_test);
        std::size_t tr = 0, te = 0;
        for (std::size_t pos = 0; pos < n; ++pos) {
            const std::size_t row = order[pos];
            if (pos >= lo && pos < hi) {
                for (std::size_t c = 0; c < x.cols(); ++c) x_test(te, c) = x(row, c);
                y_test.push_back(y[row]);
                ++te;
            } else {
                for (std::size_t c = 0; c < x.cols(); ++c) x_train(tr, c) = x(row, c);
                y_train.push_back(y[row]);
                ++tr;
            }
        }
        const std::vector<double> scores =
            fit_predict(x_train, y_train, x_test, mix_seed(seed, "cv-fold", f));
        std::vector<int> y_pred(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) y_pred[i] = scores[i] >= cutoff ? 1 : 0;
        result.folds[f] = evaluate(y_test, y_pred, scores);
    });

    const auto aggregate = [&](auto select) {
        double sum = 0.0, sq = 0.0;
        std::size_t count = 0;
        for (const Metrics& m : result.folds) {
            const std::optional<double> v = select(m);
            if (!v.has_value()) continue;
            sum += *v;
            sq += *v * *v;
            ++count;
        }
        if (count == 0) return std::pair<std::optional<double>, std::optional<double>>{};
        const double mean = sum / static_cast<double>(count);
        const double var = std::max(0.0, sq / static_cast<double>(count) - mean * mean);
        return std::pair<std::optional<double>, std::optional<double>>{mean, std::sqrt(var)};
    };
    const auto pick = [](double Metrics::*field) {
        return [field](const Metrics& m) { return std::optional<double>(m.*field); };
    };
    std::tie(result.mean.accuracy, result.stddev.accuracy) = [&] {
        const auto [m, s] = aggregate(pick(&Metrics::accuracy));
        return std::pair<double, double>(optional_or(m, 0.0), optional_or(s, 0.0));
    }();
    std::tie(result.mean.precision, result.stddev.precision) = [&] {
        const auto [m, s] = aggregate(pick(&Metrics::precision));
        return std::pair<double, double>(optional_or(m, 0.0), optional_or(s, 0.0));
    }();
    std::tie(result.mean.recall, result.stddev.recall) = [&] {
        const auto [m, s] = aggregate(pick(&Metrics::recall));
        return std::pair<double, double>(optional_or(m, 0.0), optional_or(s, 0.0));
    }();
    std::tie(result.mean.f1, result.stddev.f1) =
        aggregate([](const Metrics& m) { return m.f1; });
    std::tie(result.mean.roc_auc, result.stddev.roc_auc) =
        aggregate([](const Metrics& m) { return m.roc_auc; });
    return result;
}

CvResult cross_validate_logistic(const Dataset& data, int k, std::uint64_t seed, double C,
                                 double cutoff, int workers) {
    const Matrix x = data.to_matrix();
    return cross_validate(
        x, data.y, k, seed, cutoff,
        [C](const Matrix& x_train, std::span<const int> y_train, const Matrix& x_test,
            std::uint64_t) {
            const GenericModel model = fit_logistic(x_train, y_train, C);
            std::vector<double> scores(x_test.rows());
            for (std::size_t i = 0; i < x_test.rows(); ++i) {
                scores[i] = predict_proba(model, x_test.row(i));
            }
            return scores;
        },
        workers);
}

std::span<const std::size_t> feature_group_columns(FeatureGroup g) {
    static constexpr std::size_t spatial[] = {0, 1, 2, 3, 4, 5, 6};
    static constexpr std::size_t temporal[] = {7, 8, 9, 10, 11, 12};
    static constexpr std::size_t personal[] = {13, 14};
    switch (g) {
        case FeatureGroup::Spatial: return spatial;
        case FeatureGroup::Temporal: return temporal;
        case FeatureGroup::Personal: return personal;
    }
    return {};
}

std::string feature_group_name(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::Spatial: return "spatial";
        case FeatureGroup::Temporal: return "temporal";
        case FeatureGroup::Personal: return "personal";
    }
    return "?";
}

std::vector<AblationRow> ablate(const Dataset& data,
                                std::span<const std::vector<FeatureGroup>> combinations, int k,
                                std::uint64_t seed, double C, double cutoff, int workers) {
    std::vector<AblationRow> rows;
    for (const auto& combo : combinations) {
        std::vector<std::size_t> columns;
        for (const FeatureGroup g : combo) {
            const auto cols = feature_group_columns(g);
            columns.insert(columns.end(), cols.begin(), cols.end());
        }
        std::sort(columns.begin(), columns.end());
        columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
        if (columns.empty()) throw DataError("ablate: empty feature group union");

        Matrix x(data.size(), columns.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            for (std::size_t j = 0; j < columns.size(); ++j) x(i, j) = data.x[i][columns[j]];
        }
        const CvResult cv = cross_validate(
            x, data.y, k, seed, cutoff,
            [C](const Matrix& x_train, std::span<const int> y_train, const Matrix& x_test,
                std::uint64_t) {
                const GenericModel model = fit_logistic(x_train, y_train, C);
                std::vector<double> scores(x_test.rows());
                for (std::size_t i = 0; i < x_test.rows(); ++i) {
                    scores[i] = predict_proba(model, x_test.row(i));
                }
                return scores;
            },
            workers);
        rows.push_back(AblationRow{combo, cv.mean.accuracy, optional_or(cv.mean.roc_auc, 0.0)});
    }
    return rows;
}

std::vector<double> wald_p_values(const Matrix& x, std::span<const int> y,
                                  const GenericModel& model, double C) {
    (void)y;
    const std::size_t d = model.weights.size();
    const std::vector<double> h = objective_hessian(x, model.weights, C);
    std::vector<double> inv;
    if (!spd_inverse(h, d, inv)) {
        return std::vector<double>(d, std::numeric_limits<double>::quiet_NaN());
    }
    std::vector<double> p(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double se = std::sqrt(std::max(inv[j * d + j], 0.0));
        if (se == 0.0) {
            p[j] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double z = std::abs(model.weights[j]) / se;
        p[j] = std::erfc(z / std::sqrt(2.0));
    }
    return p;
}

std::string save_model(const ModelParams& params, const std::string& trained_at) {
    nlohmann::json doc;
    doc["intercept"] = params.intercept;
    doc["coefficients"] = params.coefficients;
    doc["C"] = params.C;
    std::vector<std::string> names;
    for (const char* n : feature_names()) names.emplace_back(n);
    doc["feature_names"] = names;
    doc["trained_at"] = trained_at;
    return doc.dump(2) + "\n";
}

ModelParams load_model(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    ModelParams params;
    params.intercept = doc.at("intercept").get<double>();
    params.C = doc.at("C").get<double>();
    const auto coef = doc.at("coefficients");
    if (coef.size() != kFeatureCount) throw DataError("load_model: wrong coefficient count");
    for (std::size_t j = 0; j < kFeatureCount; ++j) params.coefficients[j] = coef[j].get<double>();
    return params;
}

}  // namespace cdrtrip
