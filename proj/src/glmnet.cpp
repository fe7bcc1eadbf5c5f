#include "gmwstn/glmnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "gmwstn/binary_io.hpp"
#include "gmwstn/error.hpp"

namespace gmwstn {
namespace {

constexpr double kMinWeight = 1e-5;
constexpr double kMinProb = 1e-15;

struct Standardized {
    Eigen::MatrixXd xs;
    Eigen::VectorXd center;
    Eigen::VectorXd scale;
};

Standardized standardize(const Eigen::MatrixXd& x, bool enabled)
{
    Standardized s;
    const Eigen::Index p = x.cols();
    s.center = Eigen::VectorXd::Zero(p);
    s.scale = Eigen::VectorXd::Ones(p);
    if (enabled && x.rows() > 0) {
        s.center = x.colwise().mean().transpose();
        for (Eigen::Index j = 0; j < p; ++j) {
            const double sd = std::sqrt((x.col(j).array() - s.center[j]).square().mean());
            s.scale[j] = sd > 0 ? sd : 1.0;
        }
    }
    s.xs = (x.rowwise() - s.center.transpose()).array().rowwise() / s.scale.transpose().array();
    return s;
}

Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& x, const Eigen::VectorXd& center, const Eigen::VectorXd& scale)
{
    return (x.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array();
}

// Coefficients in standardized coordinates.
struct Coefficients {
    Eigen::VectorXd b0;    // [C]
    Eigen::MatrixXd beta;  // [C × p]
};

Eigen::MatrixXd one_hot(std::span<const int> y, int num_classes)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), num_classes);
    for (std::size_t i = 0; i < y.size(); ++i) m(static_cast<Eigen::Index>(i), y[i]) = 1.0;
    return m;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& eta)
{
    Eigen::MatrixXd p(eta.rows(), eta.cols());
    for (Eigen::Index i = 0; i < eta.rows(); ++i) {
        const double m = eta.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (eta.row(i).array() - m).exp();
        p.row(i) = e / e.sum();
    }
    return p;
}

double mean_loss(const Eigen::MatrixXd& eta, std::span<const int> y)
{
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.rows(); ++i) {
        const double m = eta.row(i).maxCoeff();
        const double lse = m + std::log((eta.row(i).array() - m).exp().sum());
        total += lse - eta(i, y[static_cast<std::size_t>(i)]);
    }
    return total / static_cast<double>(eta.rows());
}

double kkt(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& prob, const Eigen::MatrixXd& onehot,
           const Coefficients& coef, double lambda)
{
    const double n = static_cast<double>(xs.rows());
    const Eigen::MatrixXd diff = prob - onehot;
    const Eigen::MatrixXd grad = (diff.transpose() * xs) / n;  // [C × p]
    double worst = (diff.colwise().sum().array().abs() / n).maxCoeff();
    for (Eigen::Index c = 0; c < grad.rows(); ++c) {
        for (Eigen::Index j = 0; j < grad.cols(); ++j) {
            const double b = coef.beta(c, j);
            const double g = grad(c, j);
            const double r = b == 0.0 ? std::max(0.0, std::abs(g) - lambda) : std::abs(g + lambda * (b > 0 ? 1.0 : -1.0));
            worst = std::max(worst, r);
        }
    }
    return worst;
}

// Cyclic coordinate descent on a weighted least-squares lasso, in residual
// form: res = z − b0 − Xβ is kept current. Full sweeps alternate with sweeps
// over the active set until a full sweep changes nothing.
std::size_t cd_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, Eigen::VectorXd& res, double lambda,
                     double& b0, Eigen::VectorXd& beta, bool fit_intercept, double tolerance, std::size_t max_sweeps)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double wsum = w.sum();
    Eigen::VectorXd v(p);
    for (Eigen::Index j = 0; j < p; ++j) v[j] = w.dot(x.col(j).cwiseAbs2()) * inv_n;

    auto sweep = [&](const std::vector<Eigen::Index>& coords) {
        double max_change = 0.0;
        for (Eigen::Index j : coords) {
            if (v[j] <= 0.0) continue;
            const double g = x.col(j).dot(w.cwiseProduct(res)) * inv_n;
            const double updated = soft_threshold(g + v[j] * beta[j], lambda) / v[j];
            const double delta = updated - beta[j];
            if (delta != 0.0) {
                res.noalias() -= delta * x.col(j);
                beta[j] = updated;
                max_change = std::max(max_change, v[j] * delta * delta);
            }
        }
        if (fit_intercept && wsum > 0.0) {
            const double delta = w.dot(res) / wsum;
            if (delta != 0.0) {
                res.array() -= delta;
                b0 += delta;
                max_change = std::max(max_change, wsum * inv_n * delta * delta);
            }
        }
        return max_change;
    };

    std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    std::size_t sweeps = 0;
    while (sweeps < max_sweeps) {
        const double change = sweep(all);
        ++sweeps;
        if (change < tolerance) break;
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < p; ++j)
            if (beta[j] != 0.0) active.push_back(j);
        while (sweeps < max_sweeps) {
            ++sweeps;
            if (sweep(active) < tolerance) break;
        }
    }
    return sweeps;
}

class MultinomialSolver {
public:
    MultinomialSolver(const Eigen::MatrixXd& xs, std::span<const int> y, int num_classes, const GlmnetOptions& options)
        : xs_(xs), y_(y), onehot_(one_hot(y, num_classes)), options_(options)
    {
        const Eigen::Index classes = num_classes;
        coef_.b0 = Eigen::VectorXd::Zero(classes);
        coef_.beta = Eigen::MatrixXd::Zero(classes, xs.cols());
        // intercept-only start at the log class frequencies
        const Eigen::VectorXd freq = onehot_.colwise().mean().transpose();
        for (Eigen::Index c = 0; c < classes; ++c) coef_.b0[c] = std::log(std::max(freq[c], kMinProb));
        coef_.b0.array() -= coef_.b0.mean();
        eta_ = Eigen::MatrixXd::Zero(xs.rows(), classes);
        eta_.rowwise() += coef_.b0.transpose();
        null_loss_ = mean_loss(eta_, y_);
    }

    double null_loss() const noexcept { return null_loss_; }
    const Coefficients& coefficients() const noexcept { return coef_; }
    const Eigen::MatrixXd& eta() const noexcept { return eta_; }

    double lambda_max() const
    {
        const Eigen::MatrixXd prob = softmax_rows(eta_);
        const Eigen::MatrixXd grad = ((prob - onehot_).transpose() * xs_) / static_cast<double>(xs_.rows());
        return grad.cwiseAbs().maxCoeff();
    }

    double objective(const Eigen::MatrixXd& eta, const Coefficients& coef, double lambda) const
    {
        return mean_loss(eta, y_) + lambda * coef.beta.cwiseAbs().sum();
    }

    /// Warm-started fit at one λ. Returns the final KKT residual.
    double fit(double lambda)
    {
        const Eigen::Index n = xs_.rows();
        const Eigen::Index classes = onehot_.cols();
        double residual = std::numeric_limits<double>::infinity();
        for (std::size_t outer = 0; outer < options_.max_outer; ++outer) {
            Eigen::MatrixXd prob = softmax_rows(eta_);
            residual = kkt(xs_, prob, onehot_, coef_, lambda);
            if (residual <= options_.tolerance) break;

            for (Eigen::Index c = 0; c < classes; ++c) {
                prob = softmax_rows(eta_);
                const Eigen::VectorXd pc = prob.col(c);
                const Eigen::VectorXd w = (pc.array() * (1.0 - pc.array())).max(kMinWeight);
                const Eigen::VectorXd z = eta_.col(c).array() + (onehot_.col(c) - pc).array() / w.array();
                Eigen::VectorXd res = z - eta_.col(c);

                double b0 = coef_.b0[c];
                Eigen::VectorXd beta = coef_.beta.row(c).transpose();
                cd_solve(xs_, w, res, lambda, b0, beta, true, 1e-20, 100000);
                const Eigen::VectorXd eta_new = z - res;

                // Backtrack along the Newton direction if the penalized loss went up.
                const double before = objective(eta_, coef_, lambda);
                const double old_b0 = coef_.b0[c];
                const Eigen::VectorXd old_beta = coef_.beta.row(c).transpose();
                const Eigen::VectorXd old_eta = eta_.col(c);
                double t = 1.0;
                for (int attempt = 0; attempt < 30; ++attempt) {
                    coef_.b0[c] = old_b0 + t * (b0 - old_b0);
                    coef_.beta.row(c) = (old_beta + t * (beta - old_beta)).transpose();
                    eta_.col(c) = old_eta + t * (eta_new - old_eta);
                    if (objective(eta_, coef_, lambda) <= before + 1e-14 * std::abs(before)) break;
                    t *= 0.5;
                    if (attempt == 29) {
                        coef_.b0[c] = old_b0;
                        coef_.beta.row(c) = old_beta.transpose();
                        eta_.col(c) = old_eta;
                    }
                }
            }
            (void)n;
        }
        return residual;
    }

private:
    const Eigen::MatrixXd& xs_;
    std::span<const int> y_;
    Eigen::MatrixXd onehot_;
    GlmnetOptions options_;
    Coefficients coef_;
    Eigen::MatrixXd eta_;
    double null_loss_ = 0.0;
};

GlmModel to_model(const Coefficients& coef, const Standardized& s, int num_classes, double lambda)
{
    GlmModel m;
    m.num_classes = num_classes;
    m.lambda = lambda;
    m.center = s.center;
    m.scale = s.scale;
    const Eigen::Index p = coef.beta.cols();
    m.theta.resize(num_classes, p + 1);
    const Eigen::MatrixXd beta = coef.beta.array().rowwise() / s.scale.transpose().array();
    m.theta.rightCols(p) = beta;
    m.theta.col(0) = coef.b0 - beta * s.center;
    return m;
}

void validate_inputs(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes)
{
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ConfigError("glmnet: label count does not match sample count");
    if (x.rows() < 2) throw ConfigError("glmnet: need at least two samples");
    if (num_classes < 2) throw ConfigError("glmnet: need at least two classes");
    if (!x.allFinite()) throw NumericError("glmnet: non-finite features");
    for (int label : y)
        if (label < 0 || label >= num_classes) throw ConfigError("glmnet: label out of range");
}

// Models along the path (original scale); may stop early on saturation.
std::vector<GlmModel> fit_path(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes,
                               std::span<const double> lambdas, const GlmnetOptions& options)
{
    const Standardized s = standardize(x, options.standardize);
    MultinomialSolver solver(s.xs, y, num_classes, options);
    std::vector<GlmModel> models;
    for (double lambda : lambdas) {
        solver.fit(lambda);
        models.push_back(to_model(solver.coefficients(), s, num_classes, lambda));
        const double dev_ratio = 1.0 - mean_loss(solver.eta(), y) / solver.null_loss();
        if (dev_ratio > options.max_deviance_ratio) break;
    }
    return models;
}

}  // namespace

double soft_threshold(double z, double gamma)
{
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

WeightedLassoResult weighted_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                                   double lambda, bool fit_intercept, double tolerance, std::size_t max_sweeps)
{
    if (z.size() != x.rows() || w.size() != x.rows()) throw ConfigError("weighted_lasso: dimension mismatch");
    if (lambda < 0) throw ConfigError("weighted_lasso: lambda must be >= 0");
    WeightedLassoResult r;
    r.beta = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd res = z;
    r.sweeps = cd_solve(x, w, res, lambda, r.intercept, r.beta, fit_intercept, tolerance, max_sweeps);
    return r;
}

Eigen::MatrixXd GlmModel::probabilities(const Eigen::MatrixXd& x) const
{
    if (static_cast<std::size_t>(x.cols()) != num_features())
        throw ConfigError("glmnet predict: expected " + std::to_string(num_features()) + " features, got " +
                          std::to_string(x.cols()));
    Eigen::MatrixXd eta = x * theta.rightCols(theta.cols() - 1).transpose();
    eta.rowwise() += theta.col(0).transpose();
    return softmax_rows(eta);
}

Prediction GlmModel::predict(const Eigen::MatrixXd& x) const
{
    if (static_cast<std::size_t>(x.cols()) != num_features())
        throw ConfigError("glmnet predict: expected " + std::to_string(num_features()) + " features, got " +
                          std::to_string(x.cols()));
    Prediction p;
    p.scores = x * theta.rightCols(theta.cols() - 1).transpose();
    p.scores.rowwise() += theta.col(0).transpose();
    p.labels.resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Index best;
        p.scores.row(i).maxCoeff(&best);
        p.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return p;
}

std::vector<double> glmnet_lambda_path(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes,
                                       const GlmnetOptions& options)
{
    validate_inputs(x, y, num_classes);
    if (!options.lambda_path.empty()) return options.lambda_path;
    const Standardized s = standardize(x, options.standardize);
    const MultinomialSolver solver(s.xs, y, num_classes, options);
    const double lmax = solver.lambda_max();
    const double ratio = options.lambda_min_ratio > 0 ? options.lambda_min_ratio : (x.rows() > x.cols() ? 1e-4 : 1e-2);
    const std::size_t count = std::max<std::size_t>(options.num_lambda, 1);
    std::vector<double> path(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        path[i] = lmax * std::pow(ratio, frac);
    }
    return path;
}

GlmModel glmnet_fit(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes,
                    std::span<const double> lambdas, const GlmnetOptions& options)
{
    validate_inputs(x, y, num_classes);
    if (lambdas.empty()) throw ConfigError("glmnet: empty lambda path");
    GlmnetOptions opts = options;
    opts.max_deviance_ratio = std::numeric_limits<double>::infinity();
    auto models = fit_path(x, y, num_classes, lambdas, opts);
    GlmModel m = std::move(models.back());
    m.lambda_path.assign(lambdas.begin(), lambdas.end());
    return m;
}

GlmModel glmnet_train(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes,
                      const GlmnetOptions& options, std::span<const int> groups)
{
    validate_inputs(x, y, num_classes);
    if (!groups.empty() && groups.size() != y.size()) throw ConfigError("glmnet: group count does not match sample count");
    const std::vector<double> path = glmnet_lambda_path(x, y, num_classes, options);

    // fold assignment by group (or by sample)
    std::vector<int> group_of(y.size());
    if (groups.empty()) std::iota(group_of.begin(), group_of.end(), 0);
    else group_of.assign(groups.begin(), groups.end());
    std::vector<int> unique_groups = group_of;
    std::sort(unique_groups.begin(), unique_groups.end());
    unique_groups.erase(std::unique(unique_groups.begin(), unique_groups.end()), unique_groups.end());
    std::mt19937_64 rng(options.seed);
    std::shuffle(unique_groups.begin(), unique_groups.end(), rng);
    const std::size_t folds = std::min(options.cv_folds, unique_groups.size());
    if (folds < 2) throw ConfigError("glmnet: cross-validation needs at least two groups");
    std::vector<std::size_t> fold_of_group_rank(unique_groups.size());
    std::vector<std::pair<int, std::size_t>> fold_lookup;
    for (std::size_t i = 0; i < unique_groups.size(); ++i) fold_lookup.emplace_back(unique_groups[i], i % folds);
    std::sort(fold_lookup.begin(), fold_lookup.end());
    auto fold_of = [&](int g) {
        return std::lower_bound(fold_lookup.begin(), fold_lookup.end(), std::make_pair(g, std::size_t{0}))->second;
    };

    std::vector<double> loss_sum(path.size(), 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train_rows;
        std::vector<Eigen::Index> test_rows;
        for (std::size_t i = 0; i < y.size(); ++i)
            (fold_of(group_of[i]) == f ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(i));
        const Eigen::MatrixXd xtr = x(train_rows, Eigen::all);
        const Eigen::MatrixXd xte = x(test_rows, Eigen::all);
        std::vector<int> ytr;
        std::vector<int> yte;
        for (auto i : train_rows) ytr.push_back(y[static_cast<std::size_t>(i)]);
        for (auto i : test_rows) yte.push_back(y[static_cast<std::size_t>(i)]);
        const auto models = fit_path(xtr, ytr, num_classes, path, options);
        for (std::size_t l = 0; l < path.size(); ++l) {
            const GlmModel& m = models[std::min(l, models.size() - 1)];
            loss_sum[l] += glmnet_loss(m, xte, yte) * static_cast<double>(test_rows.size());
        }
    }
    std::vector<double> loss_path(path.size());
    for (std::size_t l = 0; l < path.size(); ++l) loss_path[l] = loss_sum[l] / static_cast<double>(y.size());
    const auto best = static_cast<std::size_t>(std::min_element(loss_path.begin(), loss_path.end()) - loss_path.begin());

    auto models = fit_path(x, y, num_classes, std::span<const double>(path.data(), best + 1), options);
    GlmModel m = std::move(models.back());
    m.lambda = path[std::min(best, models.size() - 1)];
    m.lambda_path = path;
    m.loss_path = std::move(loss_path);
    return m;
}

double glmnet_loss(const GlmModel& model, const Eigen::MatrixXd& x, std::span<const int> y)
{
    const Eigen::MatrixXd prob = model.probabilities(x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < prob.rows(); ++i)
        total -= std::log(std::max(prob(i, y[static_cast<std::size_t>(i)]), kMinProb));
    return total / static_cast<double>(prob.rows());
}

double glmnet_kkt_residual(const GlmModel& model, const Eigen::MatrixXd& x, std::span<const int> y)
{
    validate_inputs(x, y, model.num_classes);
    const Eigen::MatrixXd xs = apply_standardization(x, model.center, model.scale);
    Coefficients coef;
    const Eigen::Index p = x.cols();
    coef.beta = model.theta.rightCols(p).array().rowwise() * model.scale.transpose().array();
    coef.b0 = model.theta.col(0) + model.theta.rightCols(p) * model.center;
    Eigen::MatrixXd eta = xs * coef.beta.transpose();
    eta.rowwise() += coef.b0.transpose();
    return kkt(xs, softmax_rows(eta), one_hot(y, model.num_classes), coef, model.lambda);
}

void GlmModel::save(const std::filesystem::path& path) const
{
    io::Writer w(path);
    w.magic("GLMM", 1);
    w.u32(static_cast<std::uint32_t>(num_classes));
    w.u64(num_features());
    w.f64(lambda);
    w.u64(lambda_path.size());
    w.f64s(lambda_path);
    w.u64(loss_path.size());
    w.f64s(loss_path);
    w.f64s({center.data(), static_cast<std::size_t>(center.size())});
    w.f64s({scale.data(), static_cast<std::size_t>(scale.size())});
    for (Eigen::Index c = 0; c < theta.rows(); ++c) {
        const Eigen::VectorXd row = theta.row(c).transpose();
        w.f64s({row.data(), static_cast<std::size_t>(row.size())});
    }
    w.close();
}

GlmModel GlmModel::load(const std::filesystem::path& path)
{
    io::Reader r(path);
    if (r.magic("GLMM") != 1) throw DataError("'" + path.string() + "': unsupported GLMM version");
    GlmModel m;
    m.num_classes = static_cast<int>(r.u32());
    const auto p = static_cast<Eigen::Index>(r.u64());
    m.lambda = r.f64();
    m.lambda_path = r.f64s(r.u64());
    m.loss_path = r.f64s(r.u64());
    const auto center = r.f64s(static_cast<std::size_t>(p));
    const auto scale = r.f64s(static_cast<std::size_t>(p));
    m.center = Eigen::Map<const Eigen::VectorXd>(center.data(), p);
    m.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), p);
    m.theta.resize(m.num_classes, p + 1);
    for (Eigen::Index c = 0; c < m.num_classes; ++c) {
        const auto row = r.f64s(static_cast<std::size_t>(p + 1));
        m.theta.row(c) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), p + 1);
    }
    return m;
}

}  // namespace gmwstn
