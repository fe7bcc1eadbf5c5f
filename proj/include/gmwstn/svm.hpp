#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gmwstn {

/// Soft-margin SVM with the degree-1 polynomial kernel K(u, v) = g·⟨u, v⟩
/// (coef0 = 0), trained per class pair in the dual with an unregularized bias.
struct SvmOptions {
    double c = 1.0;
    /// Stop when the maximal KKT violation m(α) − M(α) drops below this.
    double tolerance = 1e-4;
    /// Kernel scale g; defaults to 1 / num_features.
    std::optional<double> kernel_gamma;
    std::size_t max_iterations = 10'000'000;
};

/// One pairwise decision function f(x) = ⟨w, x⟩ − rho; positive favours
/// `positive`.
struct BinarySvm {
    int positive = 0;
    int negative = 0;
    Eigen::VectorXd weights;
    double rho = 0.0;
    std::size_t iterations = 0;
    std::size_t support_vectors = 0;
};

struct Prediction {
    std::vector<int> labels;
    /// [n × num_classes]; per class, the sum of pairwise decision values in its
    /// favour (SVM) or the linear predictor (GLM).
    Eigen::MatrixXd scores;
};

class SvmModel {
public:
    SvmModel() = default;
    SvmModel(int num_classes, std::size_t num_features, std::vector<BinarySvm> machines);

    int num_classes() const noexcept { return num_classes_; }
    std::size_t num_features() const noexcept { return num_features_; }
    const std::vector<BinarySvm>& machines() const noexcept { return machines_; }

    /// One-vs-one voting; ties go to the larger summed score, then the lower label.
    Prediction predict(const Eigen::MatrixXd& x) const;

    void save(const std::filesystem::path& path) const;
    static SvmModel load(const std::filesystem::path& path);

private:
    int num_classes_ = 0;
    std::size_t num_features_ = 0;
    std::vector<BinarySvm> machines_;
};

/// Binary dual solve on labels y ∈ {+1, −1}; exposed for testing.
BinarySvm svm_train_binary(const Eigen::MatrixXd& x, std::span<const int> y, const SvmOptions& options);

/// Labels are 0..num_classes−1; classes absent from y get no machines.
SvmModel svm_train(const Eigen::MatrixXd& x, std::span<const int> y, int num_classes, const SvmOptions& options = {});

}  // namespace gmwstn
