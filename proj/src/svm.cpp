#include "gmwstn/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmwstn/binary_io.hpp"
#include "gmwstn/error.hpp"

namespace gmwstn {
namespace {

constexpr double kTau = 1e-12;

}  // namespace

BinarySvm svm_train_binary(const Eigen::MatrixXd& x, std::span<const int> y, const SvmOptions& options)
{
    const Eigen::Index n = x.rows();
    if (static_cast<std::size_t>(n) != y.size()) throw ConfigError("svm: label count does not match sample count");
    if (!(options.c > 0.0)) throw ConfigError("svm: C must be > 0");
    const double g = options.kernel_gamma.value_or(1.0 / static_cast<double>(std::max<Eigen::Index>(x.cols(), 1)));
    if (!(g > 0.0)) throw ConfigError("svm: kernel gamma must be > 0");

    const Eigen::MatrixXd kernel = g * (x * x.transpose());
    const double c = options.c;
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    std::vector<double> grad(static_cast<std::size_t>(n), -1.0);
    auto yy = [&](Eigen::Index i) { return static_cast<double>(y[static_cast<std::size_t>(i)]); };
    auto q = [&](Eigen::Index i, Eigen::Index j) { return yy(i) * yy(j) * kernel(j, i); };  // symmetric; column access
    auto upper = [&](Eigen::Index i) { return alpha[static_cast<std::size_t>(i)] >= c; };
    auto lower = [&](Eigen::Index i) { return alpha[static_cast<std::size_t>(i)] <= 0.0; };

    BinarySvm model;
    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        // maximal violating pair with second-order selection of the partner
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const double gt = grad[static_cast<std::size_t>(t)];
            if (yy(t) > 0) {
                if (!upper(t) && -gt >= gmax) { gmax = -gt; i = t; }
            } else {
                if (!lower(t) && gt >= gmax) { gmax = gt; i = t; }
            }
        }
        if (i < 0) break;

        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const double gt = grad[static_cast<std::size_t>(t)];
            double diff;
            double quad;
            if (yy(t) > 0) {
                if (lower(t)) continue;
                diff = gmax + gt;
                gmax2 = std::max(gmax2, gt);
                quad = kernel(i, i) + kernel(t, t) - 2.0 * yy(i) * q(i, t);
            } else {
                if (upper(t)) continue;
                diff = gmax - gt;
                gmax2 = std::max(gmax2, -gt);
                quad = kernel(i, i) + kernel(t, t) + 2.0 * yy(i) * q(i, t);
            }
            if (diff > 0) {
                const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
                if (obj <= best) { best = obj; j = t; }
            }
        }
        if (gmax + gmax2 < options.tolerance || j < 0) break;

        const auto si = static_cast<std::size_t>(i);
        const auto sj = static_cast<std::size_t>(j);
        const double old_i = alpha[si];
        const double old_j = alpha[sj];
        double& ai = alpha[si];
        double& aj = alpha[sj];
        if (y[si] != y[sj]) {
            double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[si] - grad[sj]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0) {
                if (aj < 0) { aj = 0; ai = diff; }
            } else {
                if (ai < 0) { ai = 0; aj = -diff; }
            }
            if (diff > 0) {
                if (ai > c) { ai = c; aj = c - diff; }
            } else {
                if (aj > c) { aj = c; ai = c + diff; }
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (grad[si] - grad[sj]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) { ai = c; aj = sum - c; }
            } else {
                if (aj < 0) { aj = 0; ai = sum; }
            }
            if (sum > c) {
                if (aj > c) { aj = c; ai = sum - c; }
            } else {
                if (ai < 0) { ai = 0; aj = sum; }
            }
        }
        const double di = ai - old_i;
        const double dj = aj - old_j;
        for (Eigen::Index t = 0; t < n; ++t)
            grad[static_cast<std::size_t>(t)] += q(i, t) * di + q(j, t) * dj;
    }
    if (iter == options.max_iterations) throw NumericError("svm: SMO did not converge within the iteration limit");

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = yy(t) * grad[static_cast<std::size_t>(t)];
        if (upper(t)) {
            if (yy(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (yy(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free;
            sum_free += yg;
        }
    }
    model.rho = free > 0 ? sum_free / static_cast<double>(free) : 0.5 * (ub + lb);

    Eigen::VectorXd coef(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        coef[t] = alpha[static_cast<std::size_t>(t)] * yy(t);
        if (alpha[static_cast<std::size_t>(t)] > 0) ++model.support_vectors;
    }
    model.weights = g * (x.transpose() * coef);
    model.iterations = iter;
    return model;
}

SvmModel::SvmModel(int num_classes, std::size_t num_features, std::vector<BinarySvm> machines)
    : num_classes_(num_classes), num_features_(num_features), machines_(std::move(machines))
{
}

Prediction SvmModel::predict(const Eigen::MatrixXd& x) const
{
    if (static_cast<std::size_t>(x.cols()) != num_features_)
        throw ConfigError("svm predict: expected " + std::to_string(num_features_) + " features, got " +
                          std::to_string(x.cols()));
    const Eigen::Index n = x.rows();
    Prediction p;
    p.scores = Eigen::MatrixXd::Zero(n, num_classes_);
    Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(n, num_classes_);
    for (const auto& m : machines_) {
        const Eigen::VectorXd f = (x * m.weights).array() - m.rho;
        for (Eigen::Index i = 0; i < n; ++i) {
            p.scores(i, m.positive) += f[i];
            p.scores(i, m.negative) -= f[i];
            ++votes(i, f[i] > 0 ? m.positive : m.negative);
        }
    }
    p.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < num_classes_; ++c) {
            if (votes(i, c) > votes(i, best) || (votes(i, c) == votes(i, best) && p.scores(i, c) > p.scores(i, best)))
                best = c;
        }
        p.labels[static_cast<std::size_t>(i)] = best;
    }
    return p;
}

SvmModel svm_train(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes, const SvmOptions& options)
{
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ConfigError("svm: label count does not match sample count");
    if (!x.allFinite()) throw NumericError("svm: non-finite features");
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= num_classes) throw ConfigError("svm: label out of range");
        members[static_cast<std::size_t>(y[i])].push_back(static_cast<Eigen::Index>(i));
    }
    const auto present = std::count_if(members.begin(), members.end(), [](const auto& m) { return !m.empty(); });
    if (present < 2) throw ConfigError("svm: training data must contain at least two classes");

    SvmOptions opts = options;
    if (!opts.kernel_gamma) opts.kernel_gamma = 1.0 / static_cast<double>(std::max<Eigen::Index>(x.cols(), 1));

    std::vector<BinarySvm> machines;
    for (int a = 0; a < num_classes; ++a) {
        for (int b = a + 1; b < num_classes; ++b) {
            const auto& ma = members[static_cast<std::size_t>(a)];
            const auto& mb = members[static_cast<std::size_t>(b)];
            if (ma.empty() || mb.empty()) continue;
            Eigen::MatrixXd sub(static_cast<Eigen::Index>(ma.size() + mb.size()), x.cols());
            std::vector<int> labels;
            Eigen::Index r = 0;
            for (auto i : ma) { sub.row(r++) = x.row(i); labels.push_back(+1); }
            for (auto i : mb) { sub.row(r++) = x.row(i); labels.push_back(-1); }
            BinarySvm m = svm_train_binary(sub, labels, opts);
            m.positive = a;
            m.negative = b;
            machines.push_back(std::move(m));
        }
    }
    return SvmModel(num_classes, static_cast<std::size_t>(x.cols()), std::move(machines));
}

void SvmModel::save(const std::filesystem::path& path) const
{
    io::Writer w(path);
    w.magic("SVMM", 1);
    w.u32(static_cast<std::uint32_t>(num_classes_));
    w.u64(num_features_);
    w.u64(machines_.size());
    for (const auto& m : machines_) {
        w.u32(static_cast<std::uint32_t>(m.positive));
        w.u32(static_cast<std::uint32_t>(m.negative));
        w.f64(m.rho);
        w.f64s({m.weights.data(), static_cast<std::size_t>(m.weights.size())});
    }
    w.close();
}

SvmModel SvmModel::load(const std::filesystem::path& path)
{
    io::Reader r(path);
    if (r.magic("SVMM") != 1) throw DataError("'" + path.string() + "': unsupported SVMM version");
    const auto classes = static_cast<int>(r.u32());
    const auto d = r.u64();
    const auto count = r.u64();
    std::vector<BinarySvm> machines;
    for (std::uint64_t i = 0; i < count; ++i) {
        BinarySvm m;
        m.positive = static_cast<int>(r.u32());
        m.negative = static_cast<int>(r.u32());
        m.rho = r.f64();
        const auto w = r.f64s(d);
        m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(d));
        machines.push_back(std::move(m));
    }
    return SvmModel(classes, d, std::move(machines));
}

}  // namespace gmwstn
