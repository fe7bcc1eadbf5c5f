#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gmwstn/svm.hpp"

namespace gmwstn {

/// sign(z)·max(|z| − γ, 0)
double soft_threshold(double z, double gamma);

struct WeightedLassoResult {
    double intercept = 0.0;
    Eigen::VectorXd beta;
    std::size_t sweeps = 0;
};

/// Cyclic coordinate descent for
///   (1/2n)·Σ w_i (z_i − b0 − x_iᵀβ)² + λ‖β‖₁.
/// This is the inner solver of the multinomial fit.
WeightedLassoResult weighted_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                                   double lambda, bool fit_intercept = true, double tolerance = 1e-14,
                                   std::size_t max_sweeps = 100000);

struct GlmnetOptions {
    std::size_t num_lambda = 100;
    /// λ_min / λ_max; zero picks 1e-4 when n > p, else 1e-2.
    double lambda_min_ratio = 0.0;
    /// Explicit decreasing path; overrides num_lambda/lambda_min_ratio.
    std::vector<double> lambda_path;
    std::size_t cv_folds = 5;
    std::uint64_t seed = 0;
    /// Outer iterations stop once the KKT residual is below this.
    double tolerance = 1e-7;
    std::size_t max_outer = 2000;
    bool standardize = true;
    /// The path stops early once the deviance ratio exceeds this.
    double max_deviance_ratio = 0.999;
};

/// Multinomial lasso logistic regression. theta is [num_classes × (p+1)] with
/// the intercept in column 0, on the scale of the caller's features.
class GlmModel {
public:
    int num_classes = 0;
    Eigen::MatrixXd theta;
    double lambda = 0.0;
    std::vector<double> lambda_path;
    /// Mean cross-validated loss per λ (empty when λ was fixed by the caller).
    std::vector<double> loss_path;
    /// Standardization used during fitting: x_std = (x − center) / scale.
    Eigen::VectorXd center;
    Eigen::VectorXd scale;

    std::size_t num_features() const noexcept { return static_cast<std::size_t>(theta.cols()) - 1; }
    Prediction predict(const Eigen::MatrixXd& x) const;
    /// Class probabilities [n × num_classes].
    Eigen::MatrixXd probabilities(const Eigen::MatrixXd& x) const;

    void save(const std::filesystem::path& path) const;
    static GlmModel load(const std::filesystem::path& path);
};

/// Fits along `lambdas` (decreasing) with warm starts and returns the model at
/// the last λ reached.
GlmModel glmnet_fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes,
                    std::span<const double> lambdas, const GlmnetOptions& options = {});

/// λ path from λ_max (all coefficients zero) down to λ_max·ratio, log-spaced.
std::vector<double> glmnet_lambda_path(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes,
                                       const GlmnetOptions& options = {});

/// Full procedure: λ path, K-fold CV on the mean multinomial loss, refit at
/// the minimizing λ. `groups` (e.g. track index per segment) keeps grouped
/// samples in the same CV fold.
GlmModel glmnet_train(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes,
                      const GlmnetOptions& options = {}, std::span<const int> groups = {});

/// Largest violation of the lasso KKT conditions in the standardized
/// coordinates the penalty acts on.
double glmnet_kkt_residual(const GlmModel& model, const Eigen::MatrixXd& x, std::span<const int> y);

/// Mean negative log-likelihood.
double glmnet_loss(const GlmModel& model, const Eigen::MatrixXd& x, std::span<const int> y);

}  // namespace gmwstn
