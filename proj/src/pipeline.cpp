#include "gmwstn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "gmwstn/binary_io.hpp"
#include "gmwstn/error.hpp"

namespace gmwstn {
namespace {

using ColMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;

void hash_config(io::Hasher& h, const ExtractOptions& o)
{
    const auto& c = o.scattering;
    h.value(static_cast<int>(c.family)).value(c.gmw.beta()).value(c.gmw.gamma()).value(c.average_subsample0);
    h.value(c.peak_fraction).value(static_cast<int>(c.contraction)).value(c.prune_increasing);
    h.value(c.layers.size());
    for (const auto& l : c.layers) h.value(l.quality).value(l.j_max).value(l.subsample).value(l.average_subsample);
    h.value(o.segments.length).value(o.segments.count).value(o.segments.effective_hop());
    h.value(o.decode.target_rate).value(o.decode.resample).value(o.decode.downmix);
}

void hash_file(io::Hasher& h, const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("'" + path.string() + "': cannot open");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.bytes(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
}

std::vector<std::size_t> segment_rows(std::span<const std::size_t> tracks, std::size_t per_track)
{
    std::vector<std::size_t> rows;
    rows.reserve(tracks.size() * per_track);
    for (auto t : tracks)
        for (std::size_t s = 0; s < per_track; ++s) rows.push_back(t * per_track + s);
    return rows;
}

ColMatrixF gather(const FloatMatrix& x, std::span<const std::size_t> rows, ColumnRange cols)
{
    ColMatrixF out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.count));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) =
            x.row(static_cast<Eigen::Index>(rows[i])).segment(static_cast<Eigen::Index>(cols.offset),
                                                               static_cast<Eigen::Index>(cols.count));
    return out;
}

void save_cache(const std::filesystem::path& path, const CorpusFeatures& f)
{
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        io::Writer w(tmp);
        w.magic("FEAT", 1);
        w.str(f.cache_key);
        w.u64(static_cast<std::uint64_t>(f.x.rows()));
        w.u64(static_cast<std::uint64_t>(f.x.cols()));
        w.u64(f.segments_per_track);
        w.f32s({f.x.data(), static_cast<std::size_t>(f.x.size())});
        w.close();
    }
    std::filesystem::rename(tmp, path);
}

bool load_cache(const std::filesystem::path& path, CorpusFeatures& f)
{
    if (!std::filesystem::exists(path)) return false;
    try {
        io::Reader r(path);
        if (r.magic("FEAT") != 1) return false;
        if (r.str() != f.cache_key) return false;
        const auto rows = r.u64();
        const auto cols = r.u64();
        const auto seg = r.u64();
        if (cols != f.layout.size() || seg != f.segments_per_track || rows != f.num_tracks() * seg) return false;
        const auto data = r.f32s(rows * cols);
        f.x = Eigen::Map<const FloatMatrix>(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        return true;
    } catch (const DataError&) {
        return false;
    }
}

}  // namespace

std::filesystem::path resolve_cache_dir(const std::filesystem::path& fallback)
{
    if (const char* env = std::getenv("GMWSTN_CACHE_DIR"); env != nullptr && *env != '\0') return env;
    return fallback;
}

std::string feature_cache_key(const Dataset& dataset, const ExtractOptions& options)
{
    io::Hasher h;
    hash_config(h, options);
    for (const auto& t : dataset.tracks()) {
        h.str(t.id).str(t.label);
        hash_file(h, t.path);
    }
    return h.hex();
}

CorpusFeatures extract_features(const Dataset& dataset, const ExtractOptions& options)
{
    if (dataset.empty()) throw DataError("extract_features: corpus is empty");
    options.scattering.validate();
    const ScatteringNetwork network(options.scattering, options.segments.length);
    const auto shapes = network.output_shapes();
    const auto layers = layers_for_depth(static_cast<int>(options.scattering.num_layers()));

    CorpusFeatures f;
    f.layout = FeatureLayout(shapes, layers);
    f.segments_per_track = options.segments.count;
    f.genres = dataset.genres();
    f.track_labels = dataset.label_indices();
    for (const auto& t : dataset.tracks()) f.track_ids.push_back(t.id);

    std::filesystem::path cache_file;
    if (!options.cache_dir.empty()) {
        f.cache_key = feature_cache_key(dataset, options);
        cache_file = options.cache_dir / ("features_" + f.cache_key + ".feat");
        if (load_cache(cache_file, f)) return f;
    }

    const std::size_t n = dataset.size();
    f.x.resize(static_cast<Eigen::Index>(n * f.segments_per_track), static_cast<Eigen::Index>(f.layout.size()));
    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (std::size_t i = next++; i < n; i = next++) {
                {
                    std::lock_guard lock(failure_mutex);
                    if (failure) return;
                }
                const Track track = dataset.load(i, options.decode);
                const auto segments = segment_track(track, options.segments);
                for (std::size_t s = 0; s < segments.size(); ++s) {
                    const auto out = network.scatter(segments[s].samples);
                    const auto fv = flatten(out, layers);
                    auto row = f.x.row(static_cast<Eigen::Index>(i * f.segments_per_track + s));
                    for (std::size_t c = 0; c < fv.values.size(); ++c)
                        row[static_cast<Eigen::Index>(c)] = static_cast<float>(fv.values[c]);
                }
                const auto count = ++done;
                if (options.progress) {
                    std::lock_guard lock(progress_mutex);
                    options.progress(count, n);
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    if (!cache_file.empty()) save_cache(cache_file, f);
    return f;
}

ColumnRange layer_columns(const FeatureLayout& layout, int depth, bool cumulative)
{
    const auto* block = layout.find(depth);
    if (block == nullptr) throw ConfigError("features do not contain layer " + std::to_string(depth));
    if (cumulative) return {0, block->offset + block->size};
    return {block->offset, block->size};
}

std::string to_string(ClassifierKind kind) { return kind == ClassifierKind::Svm ? "svm" : "glmnet"; }

ClassifierKind parse_classifier(const std::string& name)
{
    if (name == "svm") return ClassifierKind::Svm;
    if (name == "glmnet" || name == "glm") return ClassifierKind::Glmnet;
    throw ConfigError("unknown classifier '" + name + "' (expected svm or glmnet)");
}

Prediction SegmentModel::predict(const FloatMatrix& x, std::span<const std::size_t> rows) const
{
    ColMatrixF block = gather(x, rows, columns);
    if (zscore_mean.size() > 0) {
        const Eigen::RowVectorXf m = zscore_mean.cast<float>().transpose();
        const Eigen::RowVectorXf s = zscore_scale.cast<float>().transpose();
        block = ((block.rowwise() - m).array().rowwise() / s.array()).matrix();
    }
    const Eigen::MatrixXd z = pca.project_rows(block);
    return kind == ClassifierKind::Svm ? svm.predict(z) : glm.predict(z);
}

SegmentModel train_segment_model(const CorpusFeatures& features, ColumnRange columns,
                                 std::span<const std::size_t> tracks, const ClassifierConfig& config,
                                 std::uint64_t seed)
{
    const auto rows = segment_rows(tracks, features.segments_per_track);
    if (rows.size() < 2) throw ConfigError("training needs at least two segments");
    SegmentModel model;
    model.kind = config.kind;
    model.columns = columns;

    ColMatrixF x = gather(features.x, rows, columns);
    if (config.zscore) {
        const Eigen::VectorXd mean = x.cast<double>().colwise().mean().transpose();
        Eigen::VectorXd scale(mean.size());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double sd = std::sqrt((x.col(j).cast<double>().array() - mean[j]).square().mean());
            scale[j] = sd > 0 ? sd : 1.0;
        }
        x = ((x.rowwise() - mean.cast<float>().transpose()).array().rowwise() / scale.cast<float>().transpose().array())
                .matrix();
        model.zscore_mean = mean;
        model.zscore_scale = scale;
    }

    const std::size_t k = std::min({config.pca_k, rows.size() - 1, columns.count});
    PcaOptions pca_options = config.pca;
    pca_options.seed = seed;
    model.pca = fit_pca(x, k, pca_options);
    const Eigen::MatrixXd z = model.pca.project_rows(x);
    x.resize(0, 0);

    std::vector<int> y;
    std::vector<int> groups;
    y.reserve(rows.size());
    for (auto r : rows) {
        y.push_back(features.track_labels[r / features.segments_per_track]);
        groups.push_back(static_cast<int>(r / features.segments_per_track));
    }
    const auto num_classes = static_cast<int>(features.genres.size());
    if (config.kind == ClassifierKind::Svm) {
        model.svm = svm_train(z, y, num_classes, config.svm);
    } else {
        GlmnetOptions glm = config.glmnet;
        glm.seed = seed;
        model.glm = glmnet_train(z, y, num_classes, glm, groups);
    }
    return model;
}

std::vector<int> predict_tracks(const SegmentModel& model, const CorpusFeatures& features,
                                std::span<const std::size_t> tracks)
{
    const auto rows = segment_rows(tracks, features.segments_per_track);
    const Prediction p = model.predict(features.x, rows);
    const std::size_t per = features.segments_per_track;
    std::vector<int> out;
    out.reserve(tracks.size());
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        const std::span<const int> labels(p.labels.data() + t * per, per);
        const Eigen::MatrixXd scores = p.scores.middleRows(static_cast<Eigen::Index>(t * per), static_cast<Eigen::Index>(per));
        out.push_back(majority_vote(labels, scores, per));
    }
    return out;
}

TrackClassifier make_track_classifier(const CorpusFeatures& features, ColumnRange columns,
                                      const ClassifierConfig& config)
{
    return [&features, columns, config](std::span<const std::size_t> train, std::span<const std::size_t> test,
                                        std::uint64_t seed) {
        const SegmentModel model = train_segment_model(features, columns, train, config, seed);
        return predict_tracks(model, features, test);
    };
}

void TrainedModel::save(const std::filesystem::path& dir) const
{
    std::filesystem::create_directories(dir);
    pca.save(dir / "pca.bin");
    glm.save(dir / "glm.bin");
    io::Writer w(dir / "model.bin");
    w.magic("TRMD", 1);
    w.u32(static_cast<std::uint32_t>(genres.size()));
    for (const auto& g : genres) w.str(g);
    w.u32(static_cast<std::uint32_t>(shapes.size()));
    for (const auto& s : shapes) {
        w.u32(static_cast<std::uint32_t>(s.size()));
        for (auto d : s) w.u64(d);
    }
    w.u32(static_cast<std::uint32_t>(layers.size()));
    for (int l : layers) w.u32(static_cast<std::uint32_t>(l));
    w.close();
}

TrainedModel TrainedModel::load(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) throw DataError("'" + dir.string() + "': model directory not found");
    TrainedModel m;
    io::Reader r(dir / "model.bin");
    if (r.magic("TRMD") != 1) throw DataError("'" + (dir / "model.bin").string() + "': unsupported version");
    m.genres.resize(r.u32());
    for (auto& g : m.genres) g = r.str();
    m.shapes.resize(r.u32());
    for (auto& s : m.shapes) {
        s.resize(r.u32());
        for (auto& d : s) d = r.u64();
    }
    m.layers.resize(r.u32());
    for (auto& l : m.layers) l = static_cast<int>(r.u32());
    m.pca = PcaModel::load(dir / "pca.bin");
    m.glm = GlmModel::load(dir / "glm.bin");
    if (m.glm.num_features() != m.pca.rank() || m.pca.dim() != m.layout().size() ||
        static_cast<std::size_t>(m.glm.num_classes) != m.genres.size())
        throw DataError("'" + dir.string() + "': model parts are inconsistent");
    return m;
}

}  // namespace gmwstn
