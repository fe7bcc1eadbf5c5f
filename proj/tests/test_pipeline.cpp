#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>

#include "gmwstn/error.hpp"
#include "gmwstn/pipeline.hpp"
#include "gmwstn/significance.hpp"

using namespace gmwstn;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kLen = 4096;

SegmentSpec small_segments() { return SegmentSpec{kLen, 15, 0}; }

// two genres: decaying tones and white noise
fs::path make_corpus(const std::string& name, int per_genre)
{
    const fs::path root = fs::temp_directory_path() / name;
    fs::remove_all(root);
    std::mt19937 rng(77);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> uf(0.05, 0.4);
    const std::size_t n = small_segments().required_samples() + 500;
    for (const std::string genre : {"noise", "tones"}) {
        fs::create_directories(root / genre);
        for (int t = 0; t < per_genre; ++t) {
            std::vector<double> x(n);
            const double f = uf(rng);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = genre == "tones" ? 0.5 * std::sin(f * static_cast<double>(i)) * std::exp(-static_cast<double>(i % 3000) / 900.0)
                                        : 0.2 * nd(rng);
            write_wav(root / genre / (genre + std::to_string(t) + ".wav"), x, kCorpusRate);
        }
    }
    return root;
}

ExtractOptions small_options(const fs::path& cache)
{
    ExtractOptions o;
    o.scattering = ScatteringConfig::defaults();
    o.segments = small_segments();
    o.threads = 1;
    o.cache_dir = cache;
    return o;
}

double mean_accuracy(const CorpusFeatures& f, ColumnRange cols, ClassifierKind kind)
{
    ClassifierConfig cc;
    cc.kind = kind;
    cc.pca_k = 20;
    return cross_validate(f.track_labels, f.genres, make_track_classifier(f, cols, cc), 1, 3, 4).mean_accuracy;
}

}  // namespace

TEST_CASE("feature extraction, caching and threading")
{
    const auto root = make_corpus("gmwstn_test_pipeline_a", 6);
    const Dataset ds = load_corpus(root);
    const fs::path cache = fs::temp_directory_path() / "gmwstn_test_pipeline_cache";
    fs::remove_all(cache);

    const auto opts = small_options(cache);
    const auto f = extract_features(ds, opts);
    CHECK(f.x.rows() == 12 * 15);
    CHECK(static_cast<std::size_t>(f.x.cols()) == f.layout.size());
    CHECK(f.genres == std::vector<std::string>{"noise", "tones"});
    CHECK(f.track_labels == ds.label_indices());
    CHECK(fs::exists(cache / ("features_" + f.cache_key + ".feat")));
    CHECK(f.x.allFinite());

    // row t·S + s is segment s of track t
    const Track t3 = ds.load(3);
    const auto segs = segment_track(t3, opts.segments);
    const ScatteringNetwork net(opts.scattering, kLen);
    const auto fv = flatten(net.scatter(segs[7].samples), layers_for_depth(3));
    for (std::size_t c = 0; c < fv.values.size(); c += 13)
        CHECK(f.x(3 * 15 + 7, static_cast<Eigen::Index>(c)) == static_cast<float>(fv.values[c]));

    const auto cached = extract_features(ds, opts);
    CHECK(cached.x == f.x);
    CHECK(cached.cache_key == f.cache_key);

    auto threaded = opts;
    threaded.threads = 3;
    threaded.cache_dir.clear();
    CHECK(extract_features(ds, threaded).x == f.x);

    auto other = opts;
    other.scattering.gmw = GmwParams(3, 2);
    CHECK(feature_cache_key(ds, other) != f.cache_key);

    ::setenv("GMWSTN_CACHE_DIR", "/tmp/somewhere_else", 1);
    CHECK(resolve_cache_dir("fallback") == fs::path("/tmp/somewhere_else"));
    ::unsetenv("GMWSTN_CACHE_DIR");
    CHECK(resolve_cache_dir("fallback") == fs::path("fallback"));
}

TEST_CASE("layer column ranges")
{
    const ScatteringNetwork net(ScatteringConfig::defaults(), 110250);
    const FeatureLayout layout(net.output_shapes(), layers_for_depth(3));
    CHECK(layer_columns(layout, 0).count == 3446);
    CHECK(layer_columns(layout, 1).count == 3446 + 431 * 33);
    CHECK(layer_columns(layout, 3).count == 74957);
    const auto only2 = layer_columns(layout, 2, false);
    CHECK(only2.offset == 3446 + 431 * 33);
    CHECK(only2.count == 54 * 14 * 33);
    CHECK_THROWS_AS(layer_columns(layout, 4), ConfigError);
    CHECK(parse_classifier("svm") == ClassifierKind::Svm);
    CHECK(parse_classifier("glmnet") == ClassifierKind::Glmnet);
    CHECK_THROWS_AS(parse_classifier("knn"), ConfigError);
}

TEST_CASE("cross-validated classification and the significance model")
{
    const auto root = make_corpus("gmwstn_test_pipeline_b", 6);
    const Dataset ds = load_corpus(root);
    const auto f = extract_features(ds, small_options({}));

    for (int depth : {1, 3}) {
        const auto cols = layer_columns(f.layout, depth);
        CHECK(mean_accuracy(f, cols, ClassifierKind::Svm) >= 0.9);
        CHECK(mean_accuracy(f, cols, ClassifierKind::Glmnet) >= 0.9);
    }

    ClassifierConfig cc;
    cc.kind = ClassifierKind::Glmnet;
    cc.pca_k = 1000;
    std::vector<std::size_t> all(12);
    for (std::size_t i = 0; i < 12; ++i) all[i] = i;
    const auto model = train_segment_model(f, {0, f.layout.size()}, all, cc, 1);
    CHECK(model.pca.rank() == 12 * 15 - 1);
    CHECK(predict_tracks(model, f, all) == f.track_labels);

    TrainedModel tm;
    tm.genres = f.genres;
    tm.shapes = ScatteringNetwork(ScatteringConfig::defaults(), kLen).output_shapes();
    tm.layers = layers_for_depth(3);
    tm.pca = model.pca;
    tm.glm = model.glm;
    const fs::path dir = fs::temp_directory_path() / "gmwstn_test_trained";
    fs::remove_all(dir);
    tm.save(dir);
    const auto back = TrainedModel::load(dir);
    CHECK(back.genres == tm.genres);
    CHECK(back.layout() == f.layout);
    CHECK(back.glm.theta == tm.glm.theta);
    for (std::size_t g = 0; g < 2; ++g) {
        const Eigen::VectorXd theta = back.glm.theta.row(static_cast<Eigen::Index>(g)).tail(back.glm.theta.cols() - 1);
        const auto map = significance_scores(theta, back.pca, back.layout(), 3, back.genres[g]);
        if (!map.degenerate) CHECK(*std::max_element(map.scores.begin(), map.scores.end()) == 1.0);
    }
    CHECK_THROWS_AS(TrainedModel::load(dir / "missing"), DataError);
}

TEST_CASE("short tracks and empty corpora")
{
    const fs::path root = fs::temp_directory_path() / "gmwstn_test_pipeline_short";
    fs::remove_all(root);
    fs::create_directories(root / "a");
    write_wav(root / "a" / "short.wav", std::vector<double>(1000, 0.1), kCorpusRate);
    const Dataset ds = load_corpus(root);
    CHECK_THROWS_AS(extract_features(ds, small_options({})), DataError);
    CHECK_THROWS_AS(extract_features(Dataset{}, small_options({})), DataError);
}
