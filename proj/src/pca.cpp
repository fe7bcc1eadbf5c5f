#include "gmwstn/features.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "gmwstn/binary_io.hpp"
#include "gmwstn/error.hpp"

namespace gmwstn {
namespace {

constexpr Eigen::Index kBlock = 2048;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Centered column block of X in double precision.
template <typename Scalar>
Eigen::MatrixXd centered_cols(const Mat<Scalar>& x, const Eigen::VectorXd& mean, Eigen::Index c, Eigen::Index w)
{
    Eigen::MatrixXd b = x.middleCols(c, w).template cast<double>();
    b.rowwise() -= mean.segment(c, w).transpose();
    return b;
}

template <typename Scalar>
Eigen::MatrixXd centered_rows(const Mat<Scalar>& x, const Eigen::VectorXd& mean, Eigen::Index r, Eigen::Index h)
{
    Eigen::MatrixXd b = x.middleRows(r, h).template cast<double>();
    b.rowwise() -= mean.transpose();
    return b;
}

// X_c · M  for M [d × l]
template <typename Scalar>
Eigen::MatrixXd times_right(const Mat<Scalar>& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& m)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), m.cols());
    for (Eigen::Index c = 0; c < x.cols(); c += kBlock) {
        const Eigen::Index w = std::min(kBlock, x.cols() - c);
        out.noalias() += centered_cols(x, mean, c, w) * m.middleRows(c, w);
    }
    return out;
}

// M^T · X_c  for M [n × l], giving [l × d]
template <typename Scalar>
Eigen::MatrixXd times_left(const Mat<Scalar>& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& m)
{
    Eigen::MatrixXd out(m.cols(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); c += kBlock) {
        const Eigen::Index w = std::min(kBlock, x.cols() - c);
        out.middleCols(c, w).noalias() = m.transpose() * centered_cols(x, mean, c, w);
    }
    return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// Rows [0, valid) are (nearly) orthonormal data directions; rows [valid, k)
// are filled with seeded random directions orthogonal to everything before.
void finalize_components(Eigen::MatrixXd& v, Eigen::Index valid, std::uint64_t seed)
{
    const Eigen::Index k = v.rows();
    const Eigen::Index d = v.cols();
    if (valid > 0) {
        // Cholesky QR: restores orthonormality lost to Gram-matrix rounding
        // while keeping each row in the span of the rows above it.
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::MatrixXd gram = v.topRows(valid) * v.topRows(valid).transpose();
            Eigen::LLT<Eigen::MatrixXd> llt(gram);
            if (llt.info() != Eigen::Success) throw NumericError("PCA: principal directions are numerically dependent");
            v.topRows(valid) = llt.matrixL().solve(v.topRows(valid));
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = valid; i < k; ++i) {
        Eigen::VectorXd r(d);
        for (Eigen::Index c = 0; c < d; ++c) r[c] = normal(rng);
        for (int pass = 0; pass < 2; ++pass) {
            if (i > 0) r -= v.topRows(i).transpose() * (v.topRows(i) * r);
        }
        const double norm = r.norm();
        if (!(norm > 1e-8)) throw NumericError("PCA: cannot complete orthonormal basis");
        v.row(i) = r.transpose() / norm;
    }
    // Deterministic sign: the largest-magnitude entry of each direction is positive.
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index arg;
        v.row(i).cwiseAbs().maxCoeff(&arg);
        if (v(i, arg) < 0) v.row(i) *= -1.0;
    }
}

// Top-k eigenpairs of a symmetric PSD matrix, descending.
void top_eigen(const Eigen::MatrixXd& sym, Eigen::Index k, Eigen::VectorXd& values, Eigen::MatrixXd& vectors)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericError("PCA: eigendecomposition failed");
    const Eigen::Index n = sym.rows();
    values.resize(k);
    vectors.resize(n, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        values[i] = std::max(solver.eigenvalues()[n - 1 - i], 0.0);
        vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
}

Eigen::Index count_nonzero(const Eigen::VectorXd& eigenvalues, double scale_hint)
{
    const double cutoff = 1e-13 * std::max(scale_hint, eigenvalues.size() > 0 ? eigenvalues[0] : 0.0);
    Eigen::Index valid = 0;
    while (valid < eigenvalues.size() && eigenvalues[valid] > cutoff && eigenvalues[valid] > 0.0) ++valid;
    return valid;
}

}  // namespace

PcaModel::PcaModel(Eigen::VectorXd mean, Eigen::MatrixXd components, Eigen::VectorXd singular_values)
    : mean_(std::move(mean)), components_(std::move(components)), singular_values_(std::move(singular_values))
{
    if (components_.cols() != mean_.size() || components_.rows() != singular_values_.size())
        throw ConfigError("PCA model dimensions are inconsistent");
}

Eigen::VectorXd PcaModel::project(const Eigen::Ref<const Eigen::VectorXd>& x) const
{
    if (x.size() != mean_.size())
        throw ConfigError("PCA project: expected dimension " + std::to_string(mean_.size()) + ", got " +
                          std::to_string(x.size()));
    return components_ * (x - mean_);
}

Eigen::VectorXd PcaModel::invert(const Eigen::Ref<const Eigen::VectorXd>& z) const
{
    if (z.size() != components_.rows())
        throw ConfigError("PCA invert: expected dimension " + std::to_string(components_.rows()) + ", got " +
                          std::to_string(z.size()));
    return mean_ + components_.transpose() * z;
}

template <typename Scalar>
Eigen::MatrixXd PcaModel::project_rows(const Mat<Scalar>& x) const
{
    if (x.cols() != mean_.size())
        throw ConfigError("PCA project: expected dimension " + std::to_string(mean_.size()) + ", got " +
                          std::to_string(x.cols()));
    Eigen::MatrixXd z(x.rows(), components_.rows());
    constexpr Eigen::Index rows_per_block = 256;
    for (Eigen::Index r = 0; r < x.rows(); r += rows_per_block) {
        const Eigen::Index h = std::min(rows_per_block, x.rows() - r);
        z.middleRows(r, h).noalias() = centered_rows(x, mean_, r, h) * components_.transpose();
    }
    return z;
}

template Eigen::MatrixXd PcaModel::project_rows(const Mat<double>&) const;
template Eigen::MatrixXd PcaModel::project_rows(const Mat<float>&) const;

void PcaModel::save(const std::filesystem::path& path) const
{
    io::Writer w(path);
    w.magic("PCAM", 1);
    w.u64(rank());
    w.u64(dim());
    w.f64s({mean_.data(), static_cast<std::size_t>(mean_.size())});
    w.f64s({singular_values_.data(), static_cast<std::size_t>(singular_values_.size())});
    Eigen::VectorXd row;
    for (Eigen::Index i = 0; i < components_.rows(); ++i) {
        row = components_.row(i).transpose();
        w.f64s({row.data(), static_cast<std::size_t>(row.size())});
    }
    w.close();
}

PcaModel PcaModel::load(const std::filesystem::path& path)
{
    io::Reader r(path);
    const auto version = r.magic("PCAM");
    if (version != 1) throw DataError("'" + path.string() + "': unsupported PCAM version");
    const auto k = static_cast<Eigen::Index>(r.u64());
    const auto d = static_cast<Eigen::Index>(r.u64());
    const auto mean = r.f64s(static_cast<std::size_t>(d));
    const auto sv = r.f64s(static_cast<std::size_t>(k));
    Eigen::MatrixXd comps(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto row = r.f64s(static_cast<std::size_t>(d));
        comps.row(i) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), d);
    }
    return PcaModel(Eigen::Map<const Eigen::VectorXd>(mean.data(), d), std::move(comps),
                    Eigen::Map<const Eigen::VectorXd>(sv.data(), k));
}

template <typename Scalar>
PcaModel fit_pca(const Mat<Scalar>& x, std::size_t k_requested, const PcaOptions& options)
{
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const auto k = static_cast<Eigen::Index>(k_requested);
    if (n < 2) throw ConfigError("PCA needs at least 2 samples, got " + std::to_string(n));
    if (k < 1 || k > std::min(n, d))
        throw ConfigError("PCA: k = " + std::to_string(k) + " must lie in [1, min(n, d) = " +
                          std::to_string(std::min(n, d)) + "]");
    if (!x.allFinite()) throw NumericError("PCA: input contains non-finite values");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) mean += x.row(i).template cast<double>().transpose();
    mean /= static_cast<double>(n);

    const bool randomized = options.solver == PcaSolver::Randomized ||
                            (options.solver == PcaSolver::Auto &&
                             static_cast<std::size_t>(std::min(n, d)) > options.exact_limit);

    Eigen::VectorXd eig;
    Eigen::MatrixXd comps(k, d);
    Eigen::Index valid = 0;

    if (randomized) {
        const Eigen::Index l = std::min<Eigen::Index>(k + static_cast<Eigen::Index>(options.oversample), std::min(n, d));
        std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ull);
        std::normal_distribution<double> normal;
        Eigen::MatrixXd omega(d, l);
        for (Eigen::Index j = 0; j < l; ++j)
            for (Eigen::Index i = 0; i < d; ++i) omega(i, j) = normal(rng);
        Eigen::MatrixXd q = orthonormal_basis(times_right(x, mean, omega));
        for (std::size_t it = 0; it < options.power_iterations; ++it) {
            const Eigen::MatrixXd z = orthonormal_basis(times_left(x, mean, q).transpose());
            q = orthonormal_basis(times_right(x, mean, z));
        }
        const Eigen::MatrixXd b = times_left(x, mean, q);  // [l × d]
        Eigen::MatrixXd u;
        top_eigen(b * b.transpose(), k, eig, u);
        valid = count_nonzero(eig, 0.0);
        comps.topRows(valid).noalias() =
            (eig.head(valid).cwiseSqrt().cwiseInverse()).asDiagonal() * (u.leftCols(valid).transpose() * b);
    } else if (n <= d) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index c = 0; c < d; c += kBlock) {
            const Eigen::Index w = std::min(kBlock, d - c);
            gram.selfadjointView<Eigen::Lower>().rankUpdate(centered_cols(x, mean, c, w));
        }
        gram = gram.selfadjointView<Eigen::Lower>();
        Eigen::MatrixXd u;
        top_eigen(gram, k, eig, u);
        valid = count_nonzero(eig, 0.0);
        if (valid > 0) {
            const Eigen::MatrixXd scaled = u.leftCols(valid) * eig.head(valid).cwiseSqrt().cwiseInverse().asDiagonal();
            comps.topRows(valid) = times_left(x, mean, scaled);
        }
    } else {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        constexpr Eigen::Index rows_per_block = 1024;
        for (Eigen::Index r = 0; r < n; r += rows_per_block) {
            const Eigen::Index h = std::min(rows_per_block, n - r);
            cov.selfadjointView<Eigen::Lower>().rankUpdate(centered_rows(x, mean, r, h).transpose());
        }
        cov = cov.selfadjointView<Eigen::Lower>();
        Eigen::MatrixXd v;
        top_eigen(cov, k, eig, v);
        valid = count_nonzero(eig, 0.0);
        comps.topRows(valid) = v.leftCols(valid).transpose();
    }

    finalize_components(comps, valid, options.seed);
    Eigen::VectorXd singular = Eigen::VectorXd::Zero(k);
    singular.head(valid) = eig.head(valid).cwiseSqrt();
    return PcaModel(std::move(mean), std::move(comps), std::move(singular));
}

template PcaModel fit_pca(const Mat<double>&, std::size_t, const PcaOptions&);
template PcaModel fit_pca(const Mat<float>&, std::size_t, const PcaOptions&);

}  // namespace gmwstn
