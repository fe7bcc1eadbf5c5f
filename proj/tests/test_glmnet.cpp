#include <doctest.h>

#include <cmath>
#include <random>

#include "gmwstn/error.hpp"
#include "gmwstn/glmnet.hpp"

using namespace gmwstn;

namespace {

struct Data {
    Eigen::MatrixXd x;
    std::vector<int> y;
};

Data gaussian_classes(int classes, int per_class, int features, double sep, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Data d;
    d.x.resize(classes * per_class, features);
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            const int row = c * per_class + i;
            for (int j = 0; j < features; ++j) d.x(row, j) = nd(rng) + (j == c ? sep : 0.0);
            d.y.push_back(c);
        }
    return d;
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b)
{
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("soft threshold")
{
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-1.0, 1.0) == 0.0);
    CHECK(soft_threshold(2.0, 0.0) == 2.0);
}

TEST_CASE("coordinate descent on an orthonormal design matches soft thresholding")
{
    std::mt19937 rng(17);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd a(5, 5);
    for (auto& v : a.reshaped()) v = nd(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    Eigen::VectorXd z(5);
    for (auto& v : z) v = 3.0 * nd(rng);
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(5);
    for (double lambda : {0.0, 0.05, 0.2, 0.6, 5.0}) {
        const auto r = weighted_lasso(q, z, w, lambda, false);
        for (Eigen::Index j = 0; j < 5; ++j) {
            // (1/2n)‖z − Xβ‖² + λ‖β‖₁ with XᵀX = I ⇒ β_j = S(x_jᵀz, nλ)
            const double oracle = soft_threshold(q.col(j).dot(z), 5.0 * lambda);
            CHECK(std::abs(r.beta[j] - oracle) <= 1e-8);
        }
        CHECK(r.intercept == 0.0);
    }
}

TEST_CASE("weighted lasso with intercept satisfies its optimality conditions")
{
    std::mt19937 rng(5);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> uw(0.1, 2.0);
    Eigen::MatrixXd x(40, 8);
    for (auto& v : x.reshaped()) v = nd(rng);
    Eigen::VectorXd z(40), w(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        z[i] = 1.5 + x(i, 0) - 2.0 * x(i, 3) + 0.3 * nd(rng);
        w[i] = uw(rng);
    }
    const double lambda = 0.1;
    const auto r = weighted_lasso(x, z, w, lambda);
    const Eigen::VectorXd res = z - x * r.beta - Eigen::VectorXd::Constant(40, r.intercept);
    CHECK(std::abs(w.dot(res)) <= 1e-8);
    for (Eigen::Index j = 0; j < 8; ++j) {
        const double g = x.col(j).dot(w.cwiseProduct(res)) / 40.0;
        if (r.beta[j] == 0.0) CHECK(std::abs(g) <= lambda + 1e-8);
        else CHECK(std::abs(g - lambda * (r.beta[j] > 0 ? 1.0 : -1.0)) <= 1e-8);
    }
}

TEST_CASE("very large lambda zeroes every coefficient")
{
    const auto d = gaussian_classes(3, 20, 5, 2.0, 1);
    const std::vector<double> path{1e6};
    const auto model = glmnet_fit(d.x, d.y, 3, path);
    CHECK(model.theta.rightCols(5).cwiseAbs().maxCoeff() == 0.0);
    const auto lambdas = glmnet_lambda_path(d.x, d.y, 3);
    CHECK(lambdas.size() == 100);
    for (std::size_t i = 1; i < lambdas.size(); ++i) CHECK(lambdas[i] < lambdas[i - 1]);
    CHECK(lambdas.back() / lambdas.front() == doctest::Approx(1e-4));
    const std::vector<double> at_max{lambdas.front()};
    CHECK(glmnet_fit(d.x, d.y, 3, at_max).theta.rightCols(5).cwiseAbs().maxCoeff() == 0.0);
    const std::vector<double> below{lambdas.front(), lambdas.front() * 0.9};
    CHECK(glmnet_fit(d.x, d.y, 3, below).theta.rightCols(5).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("separable two-class data at small lambda")
{
    const auto d = gaussian_classes(2, 30, 3, 6.0, 2);
    const std::vector<double> path = glmnet_lambda_path(d.x, d.y, 2);
    const auto model = glmnet_fit(d.x, d.y, 2, std::span<const double>(path).first(60));
    CHECK(accuracy(model.predict(d.x).labels, d.y) == 1.0);
}

TEST_CASE("kkt conditions hold at the cross-validated lambda")
{
    const auto d = gaussian_classes(3, 40, 6, 2.0, 3);
    std::vector<int> groups;
    for (int i = 0; i < 120; ++i) groups.push_back(i / 4);
    GlmnetOptions opts;
    opts.seed = 7;
    const auto model = glmnet_train(d.x, d.y, 3, opts, groups);
    CHECK(model.lambda_path.size() == 100);
    CHECK(model.loss_path.size() == 100);
    const auto best = std::min_element(model.loss_path.begin(), model.loss_path.end()) - model.loss_path.begin();
    CHECK(model.lambda == model.lambda_path[static_cast<std::size_t>(best)]);
    CHECK(glmnet_kkt_residual(model, d.x, d.y) <= 1e-5);
    CHECK(accuracy(model.predict(d.x).labels, d.y) > 0.8);

    const auto again = glmnet_train(d.x, d.y, 3, opts, groups);
    CHECK(again.theta == model.theta);

    const Eigen::MatrixXd p = model.probabilities(d.x);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(glmnet_loss(model, d.x, d.y) > 0.0);
}

TEST_CASE("kkt on a fixed path of a harder problem")
{
    const auto d = gaussian_classes(4, 25, 30, 0.8, 4);
    const auto path = glmnet_lambda_path(d.x, d.y, 4);
    for (std::size_t stop : {5ul, 20ul, 40ul}) {
        const auto model = glmnet_fit(d.x, d.y, 4, std::span<const double>(path).first(stop));
        CHECK(glmnet_kkt_residual(model, d.x, d.y) <= 1e-5);
    }
}

TEST_CASE("errors and serialization")
{
    auto d = gaussian_classes(2, 10, 3, 2.0, 5);
    const std::vector<double> path{0.1};
    const auto model = glmnet_fit(d.x, d.y, 2, path);
    const auto file = std::filesystem::temp_directory_path() / "gmwstn_test_glm.bin";
    model.save(file);
    const auto back = GlmModel::load(file);
    CHECK(back.theta == model.theta);
    CHECK(back.lambda == model.lambda);
    CHECK(back.center == model.center);
    CHECK(back.predict(d.x).labels == model.predict(d.x).labels);

    d.x(3, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(glmnet_fit(d.x, d.y, 2, path), NumericError);
    CHECK_THROWS_AS(glmnet_fit(Eigen::MatrixXd::Zero(20, 3), d.y, 1, path), ConfigError);
    CHECK_THROWS_AS(model.predict(Eigen::MatrixXd::Zero(2, 4)), ConfigError);
}
