#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ladderkit/core_model.hpp"
#include "ladderkit/estimators.hpp"
#include "ladderkit/features.hpp"

namespace ladderkit {

/// Matern 5/2 covariance: s2 * (1 + sqrt5 r + 5 r^2 / 3) * exp(-sqrt5 r), r = |x1 - x2| / length.
double matern52(std::span<const double> x1, std::span<const double> x2, double sigma_f2, double length_scale);
double matern52_r(double r, double sigma_f2) noexcept;

struct GpHyper {
    double sigma_f2 = 1.0;
    double length_scale = 1.0;
    double sigma_n2 = 1e-2;
};

struct GpBounds {
    double sigma_f2_lo = 1e-6, sigma_f2_hi = 1e6;
    double length_lo = 1e-2, length_hi = 1e3;
    double sigma_n2_lo = 1e-8, sigma_n2_hi = 1e4;
};

struct GpFitOptions {
    bool optimize = true;
    int starts = 5;
    int iterations = 40;
    double tolerance = 1e-6;  // on the log marginal likelihood
    GpBounds bounds;
};

/// Column standardization; constant columns keep scale 1.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& X);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

/// GP regression on standardized inputs and centred targets. Immutable once
/// fitted; safe for concurrent prediction.
class GpModel {
public:
    static GpModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpHyper& init = {},
                       const GpFitOptions& opts = {});

    struct Prediction {
        double mean = 0.0;
        double variance = 0.0;
    };
    Prediction predict(std::span<const double> x) const;
    double predict_mean(std::span<const double> x) const { return predict(x).mean; }

    const GpHyper& hyper() const noexcept { return hyper_; }
    double jitter() const noexcept { return jitter_; }
    double log_marginal_likelihood() const noexcept { return lml_; }
    double y_mean() const noexcept { return y_mean_; }
    std::size_t dims() const noexcept { return static_cast<std::size_t>(X_raw_.cols()); }
    const Eigen::MatrixXd& train_inputs() const noexcept { return X_raw_; }
    const Eigen::VectorXd& train_targets() const noexcept { return y_raw_; }
    const Standardizer& standardizer() const noexcept { return std_; }

private:
    Eigen::MatrixXd X_raw_, Xs_;
    Eigen::VectorXd y_raw_, alpha_;
    Eigen::MatrixXd L_;  // lower Cholesky factor of K + (sigma_n2 + jitter) I
    Standardizer std_;
    GpHyper hyper_;
    double y_mean_ = 0.0;
    double jitter_ = 0.0;
    double lml_ = 0.0;
};

/// Log marginal likelihood of centred targets under the given hyperparameters;
/// jitter escalates up to 1e-6 before ConditioningError.
double gp_log_marginal_likelihood(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc, const GpHyper& h,
                                  double* jitter_used = nullptr);

struct RegressionMetrics {
    double mae = 0.0;
    double r2 = 0.0;
    double pearson = 0.0;
    double spearman = 0.0;
};

RegressionMetrics regression_metrics(std::span<const double> truth, std::span<const double> predicted);
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

struct CVReport {
    std::uint64_t seed = 0;
    int folds = 0;
    std::vector<int> assignment;  // fold of each row
    std::vector<RegressionMetrics> per_fold;
    RegressionMetrics pooled;
    std::vector<double> predictions;  // out-of-fold prediction of each row
};

struct CvOptions {
    GpFitOptions fit;
    GpHyper hyper;  // start point, or the fixed values when fit.optimize is false
    unsigned jobs = 1;
};

/// Seeded random partition into k near-equal folds.
std::vector<int> fold_assignment(std::size_t rows, int k, std::uint64_t seed);

CVReport kfold_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int k, std::uint64_t seed,
                  const CvOptions& opts = {});
CVReport kfold_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& assignment,
                  const CvOptions& opts = {});

struct RfeStep {
    std::vector<int> features;  // subset evaluated at this step
    double cv_mae = 0.0;
    int removed = -1;  // feature dropped to reach this subset; -1 for the full set
};

struct RfeResult {
    std::vector<int> selected;  // best subset seen
    double best_mae = 0.0;
    std::vector<RfeStep> steps;
    std::vector<int> elimination_order;
};

struct RfeOptions {
    int folds = 10;
    GpFitOptions fit{true, 2, 20, 1e-6, {}};  // hyperparameters per subset, fitted on all rows
    unsigned jobs = 1;
};

/// Backward elimination on k-fold CV MAE down to min_features.
RfeResult rfe_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int min_features, std::uint64_t cv_seed,
                     const RfeOptions& opts = {});

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, std::span<const int> cols);

/// Sequential regressors: link t sees its feature subset plus the targets of
/// links 0..t-1 (true values in training, predictions at inference).
struct ChainLink {
    std::string target;
    std::vector<int> features;
    GpModel model;
};

struct ChainModel {
    std::string kind;  // "knees" or "crossovers"
    std::vector<ChainLink> links;

    std::vector<double> predict(std::span<const double> features) const;
};

struct ChainOptions {
    std::optional<std::vector<int>> subset;  // shared feature subset; RFE per target when unset
    int rfe_min_features = 1;
    std::uint64_t seed = 1;
    GpFitOptions fit;
    RfeOptions rfe;
    unsigned jobs = 1;
};

ChainModel train_chain(const std::string& kind, const std::vector<std::string>& targets, const Eigen::MatrixXd& F,
                       const Eigen::MatrixXd& Y, const ChainOptions& opts = {});

/// Features F1-2, F4-5, F7, F9-10, F12, F15-17 (zero-based indices).
const std::vector<int>& default_knee_features();

const std::vector<std::string>& knee_targets();       // knee_2160p .. knee_540p
const std::vector<std::string>& crossover_targets();  // chain order of the six cross-over QPs

PerResolution<double> predict_knees_sequential(const ChainModel& m, const FeatureVector& f);
CrossoverQps predict_crossovers_sequential(const ChainModel& m, const FeatureVector& f);

void save_chain(const ChainModel& m, const std::filesystem::path& path);
ChainModel load_chain(const std::filesystem::path& path);

Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& rows);

}  // namespace ladderkit
