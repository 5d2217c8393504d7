#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdrtrip/features.hpp"
#include "cdrtrip/ingest.hpp"
#include "cdrtrip/rng.hpp"

namespace cdrtrip {

class DegenerateDataError : public DataError {
  public:
    using DataError::DataError;
};

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Dataset {
    std::vector<FeatureVector> x;
    std::vector<int> y;
    std::vector<std::string> users;

    Matrix to_matrix() const;
    std::size_t size() const { return y.size(); }
};

// weights[0] is the unpenalized intercept; weights[1..] align with columns.
struct GenericModel {
    std::vector<double> weights;

    double intercept() const { return weights[0]; }
    std::size_t dim() const { return weights.size() - 1; }
};

struct FitReport {
    int iterations = 0;
    bool converged = false;
    double grad_max_norm = 0.0;
    double final_loss = 0.0;
};

struct ModelParams {
    double intercept = 0.0;
    std::array<double, kFeatureCount> coefficients{};
    double C = 1.0;
};

// Objective: sum_i logloss(y_i, sigmoid(w0 + w.x_i)) + ||w||^2 / (2C), the
// intercept unpenalized. Evaluated pieces are exposed for gradient checking.
double logistic_loss(const Matrix& x, std::span<const int> y, std::span<const double> weights,
                     double C);
std::vector<double> logistic_gradient(const Matrix& x, std::span<const int> y,
                                      std::span<const double> weights, double C);

// Damped Newton with Armijo backtracking from a zero start; deterministic.
// Converged when the gradient max-norm reaches tol. Throws
// DegenerateDataError unless both classes are present.
GenericModel fit_logistic(const Matrix& x, std::span<const int> y, double C, double tol = 1e-8,
                          int max_iter = 1000, FitReport* report = nullptr);

ModelParams train_logistic(const Dataset& data, double C, double tol = 1e-8, int max_iter = 1000,
                           FitReport* report = nullptr);

double sigmoid(double z);
double predict_proba(const ModelParams& params, const FeatureVector& x);
double predict_proba(const GenericModel& model, std::span<const double> x);
// 1 iff proba >= cutoff (boundary counts as positive).
int predict_class(const ModelParams& params, const FeatureVector& x, double cutoff);

// Baseline 1: no hidden visit, ever.
int baseline_deterministic();
// Baseline 2: draws the training-set marginal.
class BaselineSampler {
  public:
    BaselineSampler(double p, std::uint64_t seed) : p_(p), rng_(seed) {}
    int next() { return rng_.bernoulli(p_) ? 1 : 0; }

  private:
    double p_;
    Rng rng_;
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;  // positive class; 0 when nothing predicted positive
    double recall = 0.0;
    std::optional<double> f1;       // absent when precision + recall == 0
    std::optional<double> roc_auc;  // absent when y_true is single-class
};

Metrics evaluate(std::span<const int> y_true, std::span<const int> y_pred,
                 std::span<const double> scores = {});

// Mann-Whitney statistic with average ranks on ties. Throws DataError when
// only one class is present.
double roc_auc(std::span<const int> y_true, std::span<const double> scores);

struct CvResult {
    std::vector<Metrics> folds;
    Metrics mean;
    Metrics stddev;
};

// Returns test-row scores for one fold; classes come from cutoff.
using FitPredictFn = std::function<std::vector<double>(
    const Matrix& x_train, std::span<const int> y_train, const Matrix& x_test,
    std::uint64_t fold_seed)>;

// Seeded shuffle into k folds with sizes differing by at most one, each held
// out once. Fold metrics that are undefined for a fold are skipped by the
// mean/stddev aggregation.
CvResult cross_validate(const Matrix& x, std::span<const int> y, int k, std::uint64_t seed,
                        double cutoff, const FitPredictFn& fit_predict, int workers = 1);

CvResult cross_validate_logistic(const Dataset& data, int k, std::uint64_t seed, double C,
                                 double cutoff, int workers = 1);

enum class FeatureGroup { Spatial, Temporal, Personal };

std::span<const std::size_t> feature_group_columns(FeatureGroup g);
std::string feature_group_name(FeatureGroup g);

struct AblationRow {
    std::vector<FeatureGroup> groups;
    double accuracy = 0.0;
    double auc = 0.0;
};

// Retrains and cross-validates the model restricted to each group union.
std::vector<AblationRow> ablate(const Dataset& data,
                                std::span<const std::vector<FeatureGroup>> combinations, int k,
                                std::uint64_t seed, double C, double cutoff, int workers = 1);

// Wald z-test p-values from the inverse objective Hessian at the optimum;
// diagnostics only. Index 0 is the intercept.
std::vector<double> wald_p_values(const Matrix& x, std::span<const int> y,
                                  const GenericModel& model, double C);

std::string save_model(const ModelParams& params, const std::string& trained_at);
ModelParams load_model(const std::string& json_text);

}  // namespace cdrtrip
