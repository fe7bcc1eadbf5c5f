#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmwstn/audio_io.hpp"
#include "gmwstn/classify.hpp"
#include "gmwstn/features.hpp"
#include "gmwstn/glmnet.hpp"
#include "gmwstn/scattering.hpp"
#include "gmwstn/svm.hpp"

namespace gmwstn {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Segment features for a whole corpus. Row t·S + s holds segment s of
/// track t; columns follow `layout` (all layers 0..M).
struct CorpusFeatures {
    FloatMatrix x;
    std::size_t segments_per_track = 0;
    FeatureLayout layout;
    std::vector<std::string> track_ids;
    std::vector<int> track_labels;
    std::vector<std::string> genres;
    std::string cache_key;

    std::size_t num_tracks() const noexcept { return track_ids.size(); }
};

struct ExtractOptions {
    ScatteringConfig scattering = ScatteringConfig::defaults();
    SegmentSpec segments{};
    DecodeOptions decode{};
    /// 0 = hardware concurrency.
    std::size_t threads = 0;
    /// Empty disables caching.
    std::filesystem::path cache_dir;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Cache directory: $GMWSTN_CACHE_DIR if set, else `fallback`.
std::filesystem::path resolve_cache_dir(const std::filesystem::path& fallback);

/// Key over the scattering/segment configuration and the corpus file contents.
std::string feature_cache_key(const Dataset& dataset, const ExtractOptions& options);

CorpusFeatures extract_features(const Dataset& dataset, const ExtractOptions& options);

/// Column range [offset, offset + count) of the requested layers. Cumulative
/// depth m is a prefix; a single layer is one block.
struct ColumnRange {
    std::size_t offset = 0;
    std::size_t count = 0;
};
ColumnRange layer_columns(const FeatureLayout& layout, int depth, bool cumulative = true);

enum class ClassifierKind { Svm, Glmnet };
std::string to_string(ClassifierKind kind);
ClassifierKind parse_classifier(const std::string& name);

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::Svm;
    std::size_t pca_k = 1000;
    bool zscore = false;
    SvmOptions svm{};
    GlmnetOptions glmnet{};
    PcaOptions pca{};
};

/// Segment-level model: optional z-score, PCA, then SVM or GLM.
struct SegmentModel {
    ClassifierKind kind = ClassifierKind::Svm;
    ColumnRange columns;
    Eigen::VectorXd zscore_mean;
    Eigen::VectorXd zscore_scale;
    PcaModel pca;
    SvmModel svm;
    GlmModel glm;

    /// Segment predictions for the given feature rows (full-width rows).
    Prediction predict(const FloatMatrix& x, std::span<const std::size_t> rows) const;
};

/// Trains on all segments of `tracks`. The effective PCA rank is
/// min(pca_k, n − 1, d).
SegmentModel train_segment_model(const CorpusFeatures& features, ColumnRange columns,
                                 std::span<const std::size_t> tracks, const ClassifierConfig& config,
                                 std::uint64_t seed);

/// Majority-voted track labels.
std::vector<int> predict_tracks(const SegmentModel& model, const CorpusFeatures& features,
                                std::span<const std::size_t> tracks);

TrackClassifier make_track_classifier(const CorpusFeatures& features, ColumnRange columns,
                                      const ClassifierConfig& config);

/// Model bundle for significance analysis: PCA + GLM, genres and the layout
/// of the features they were trained on.
struct TrainedModel {
    std::vector<std::string> genres;
    std::vector<std::vector<std::size_t>> shapes;  // full network output shapes
    std::vector<int> layers;
    PcaModel pca;
    GlmModel glm;

    FeatureLayout layout() const { return FeatureLayout(shapes, layers); }
    void save(const std::filesystem::path& dir) const;
    static TrainedModel load(const std::filesystem::path& dir);
};

}  // namespace gmwstn
