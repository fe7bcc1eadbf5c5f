// gmwstn: filter banks, scattering coefficients, cross-validated genre
// classification and significance maps from the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gmwstn/audio_io.hpp"
#include "gmwstn/classify.hpp"
#include "gmwstn/containers.hpp"
#include "gmwstn/error.hpp"
#include "gmwstn/pipeline.hpp"
#include "gmwstn/scattering.hpp"
#include "gmwstn/significance.hpp"

namespace fs = std::filesystem;
using namespace gmwstn;

namespace {

struct RunConfig {
    std::string family = "gmw";
    double beta = 4.0;
    double gamma = 2.0;
    int layers = 3;
    std::vector<double> q;
    std::vector<int> j;
    std::vector<std::size_t> r;
    std::vector<std::size_t> r_prime;
    std::size_t r_prime0 = 32;
    bool prune = false;
    std::size_t segment_length = kSegmentLength;
    std::size_t segments = kSegmentsPerTrack;
    bool resample = false;
    bool downmix = false;
    std::size_t threads = 0;
    std::uint64_t seed = 0;
    bool quiet = false;

    ScatteringConfig scattering(WaveletFamily fam) const
    {
        ScatteringConfig c = ScatteringConfig::defaults(fam);
        c.gmw = GmwParams(beta, gamma);
        if (layers < 1 || layers > 3) throw ConfigError("--layers must be 1, 2 or 3");
        c.layers.resize(static_cast<std::size_t>(layers));
        auto override_each = [&](const auto& values, const char* flag, auto apply) {
            if (values.empty()) return;
            if (values.size() != c.layers.size())
                throw ConfigError(std::string(flag) + " needs one value per layer (" + std::to_string(layers) + ")");
            for (std::size_t m = 0; m < values.size(); ++m) apply(c.layers[m], values[m]);
        };
        override_each(q, "--q", [](LayerConfig& l, double v) { l.quality = v; });
        override_each(j, "--j", [](LayerConfig& l, int v) { l.j_max = v; });
        override_each(r, "--r", [](LayerConfig& l, std::size_t v) { l.subsample = v; });
        override_each(r_prime, "--r-prime", [](LayerConfig& l, std::size_t v) { l.average_subsample = v; });
        c.average_subsample0 = r_prime0;
        c.prune_increasing = prune;
        c.validate();
        return c;
    }
    ScatteringConfig scattering() const { return scattering(parse_family(family)); }

    SegmentSpec segment_spec() const { return SegmentSpec{segment_length, segments, 0}; }
    DecodeOptions decode() const { return DecodeOptions{kCorpusRate, resample, downmix}; }
};

void add_network_options(CLI::App& app, RunConfig& cfg)
{
    app.add_option("--family", cfg.family, "Wavelet family: gmw or morlet")->capture_default_str();
    app.add_option("--beta", cfg.beta, "GMW beta")->capture_default_str();
    app.add_option("--gamma", cfg.gamma, "GMW gamma")->capture_default_str();
    app.add_option("--layers", cfg.layers, "Scattering depth M (1-3)")->capture_default_str();
    app.add_option("--q", cfg.q, "Quality factor per layer (default 8 4 4)");
    app.add_option("--j", cfg.j, "Largest scale index per layer (default 32 13 9)");
    app.add_option("--r", cfg.r, "U subsampling per layer (default 8)");
    app.add_option("--r-prime", cfg.r_prime, "S subsampling per layer (default 32)");
    app.add_option("--r-prime0", cfg.r_prime0, "S_0 subsampling")->capture_default_str();
    app.add_flag("--prune-increasing", cfg.prune, "Skip paths whose frequency does not decrease");
}

void add_corpus_options(CLI::App& app, RunConfig& cfg)
{
    app.add_option("--segment-length", cfg.segment_length, "Samples per segment")->capture_default_str();
    app.add_option("--segments", cfg.segments, "Segments per track")->capture_default_str();
    app.add_flag("--resample", cfg.resample, "Decimate integer multiples of 22050 Hz");
    app.add_flag("--downmix", cfg.downmix, "Average multi-channel audio to mono");
    app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw DataError("'" + path.string() + "': cannot write");
    out << text;
}

template <typename F>
void write_with(const fs::path& path, F&& fn)
{
    std::ofstream out(path);
    if (!out) throw DataError("'" + path.string() + "': cannot write");
    fn(out);
}

void log(const RunConfig& cfg, const std::string& msg)
{
    if (!cfg.quiet) std::cerr << msg << '\n';
}

int cmd_filters(const RunConfig& cfg, const fs::path& out_dir, std::size_t length)
{
    const auto sc = cfg.scattering();
    const ScatteringNetwork net(sc, length);
    fs::create_directories(out_dir);
    for (std::size_t m = 0; m < net.num_layers(); ++m) {
        const auto& bank = net.bank(m);
        const std::string stem = "layer" + std::to_string(m + 1) + "_" + std::string(to_string(sc.family));
        save_filter_bank(bank, out_dir / (stem + ".gmwb"));
        write_with(out_dir / (stem + ".csv"), [&](std::ostream& os) { write_filter_bank_csv(bank, os); });
        std::cout << stem << ": " << bank.num_scales() << " filters, N = " << bank.signal_len() << '\n';
    }
    return 0;
}

void scatter_track(const ScatteringNetwork& net, const Track& track, const RunConfig& cfg, const fs::path& dir, bool csv)
{
    fs::create_directories(dir);
    const auto segments = segment_track(track, cfg.segment_spec());
    for (const auto& seg : segments) {
        const auto out = net.scatter(seg.samples);
        const std::string stem = "segment_" + std::to_string(seg.index);
        save_scattering(out, dir / (stem + ".stnc"));
        if (csv) write_with(dir / (stem + ".csv"), [&](std::ostream& os) { write_scattering_csv(out, os); });
    }
}

int cmd_scatter(const RunConfig& cfg, const fs::path& input, const fs::path& out_dir, bool csv)
{
    const ScatteringNetwork net(cfg.scattering(), cfg.segment_length);
    if (fs::is_directory(input)) {
        const Dataset ds = load_corpus(input);
        for (const auto& w : ds.warnings()) std::cerr << "warning: " << w << '\n';
        for (std::size_t i = 0; i < ds.size(); ++i) {
            fs::path rel = ds.tracks()[i].id;
            scatter_track(net, ds.load(i, cfg.decode()), cfg, out_dir / rel.replace_extension(), csv);
            log(cfg, "scattered " + ds.tracks()[i].id);
        }
        std::cout << ds.size() << " tracks x " << cfg.segments << " segments written to " << out_dir.string() << '\n';
    } else {
        if (!fs::exists(input)) throw DataError("'" + input.string() + "': no such file");
        Track t = decode_audio(input, cfg.decode());
        t.id = input.filename().string();
        scatter_track(net, t, cfg, out_dir, csv);
        std::cout << cfg.segments << " segments written to " << out_dir.string() << '\n';
    }
    return 0;
}

int cmd_manifest(const fs::path& data_root, const fs::path& out)
{
    const Dataset ds = load_corpus(data_root);
    for (const auto& w : ds.warnings()) std::cerr << "warning: " << w << '\n';
    if (ds.empty()) throw DataError("'" + data_root.string() + "': no audio tracks found");
    if (out.empty()) write_manifest_csv(ds, std::cout);
    else write_with(out, [&](std::ostream& os) { write_manifest_csv(ds, os); });
    return 0;
}

struct TrainEvalOptions {
    fs::path data_root;
    fs::path out_dir = "out";
    std::vector<std::string> classifiers{"svm"};
    bool table = false;
    bool per_layer = false;
    bool zscore = false;
    std::size_t pca_k = 1000;
    std::size_t repeats = 10;
    double c = 1.0;
    std::optional<double> kernel_gamma;
    std::string save_model;
    std::string cache_dir;
};

CorpusFeatures features_for(const Dataset& ds, const RunConfig& cfg, WaveletFamily fam, const TrainEvalOptions& o)
{
    ExtractOptions ex;
    ex.scattering = cfg.scattering(fam);
    ex.segments = cfg.segment_spec();
    ex.decode = cfg.decode();
    ex.threads = cfg.threads;
    ex.cache_dir = resolve_cache_dir(o.cache_dir.empty() ? o.out_dir / "cache" : fs::path(o.cache_dir));
    if (!cfg.quiet)
        ex.progress = [fam](std::size_t done, std::size_t total) {
            std::cerr << "\r" << to_string(fam) << " features: " << done << "/" << total << std::flush;
            if (done == total) std::cerr << '\n';
        };
    return extract_features(ds, ex);
}

int cmd_train_eval(const RunConfig& cfg, const TrainEvalOptions& o)
{
    const Dataset ds = load_corpus(o.data_root);
    for (const auto& w : ds.warnings()) std::cerr << "warning: " << w << '\n';
    if (ds.genres().size() < 2) throw DataError("corpus needs at least two genres");
    fs::create_directories(o.out_dir);

    // (family, classifier) columns
    std::vector<std::pair<WaveletFamily, ClassifierKind>> columns;
    if (o.table) {
        columns = {{WaveletFamily::Gmw, ClassifierKind::Glmnet},
                   {WaveletFamily::Gmw, ClassifierKind::Svm},
                   {WaveletFamily::Morlet, ClassifierKind::Svm}};
    } else {
        for (const auto& name : o.classifiers) columns.emplace_back(parse_family(cfg.family), parse_classifier(name));
    }

    ClassifierConfig base;
    base.pca_k = o.pca_k;
    base.zscore = o.zscore;
    base.svm.c = o.c;
    base.svm.kernel_gamma = o.kernel_gamma;

    std::vector<std::string> headers;
    for (const auto& [fam, kind] : columns)
        headers.push_back(std::string(fam == WaveletFamily::Gmw ? "GMW" : "Morlet") + "-" +
                          (kind == ClassifierKind::Svm ? "SVM" : "GLMNet"));
    std::vector<TableRow> rows(static_cast<std::size_t>(cfg.layers));
    for (int m = 1; m <= cfg.layers; ++m) {
        rows[static_cast<std::size_t>(m - 1)].label = "Layer " + std::to_string(m);
        rows[static_cast<std::size_t>(m - 1)].values.resize(columns.size());
    }

    nlohmann::json summary = nlohmann::json::array();
    std::optional<CorpusFeatures> features;
    std::optional<WaveletFamily> loaded;
    for (std::size_t col = 0; col < columns.size(); ++col) {
        const auto [fam, kind] = columns[col];
        if (loaded != fam) {
            features.reset();
            features = features_for(ds, cfg, fam, o);
            loaded = fam;
        }
        for (int m = 1; m <= cfg.layers; ++m) {
            ClassifierConfig cc = base;
            cc.kind = kind;
            const ColumnRange range = layer_columns(features->layout, m, !o.per_layer);
            const auto report = cross_validate(features->track_labels, features->genres,
                                               make_track_classifier(*features, range, cc), o.repeats, 3, cfg.seed);
            rows[static_cast<std::size_t>(m - 1)].values[col] = report.mean_accuracy;
            const std::string stem = std::string(to_string(fam)) + "_" + to_string(kind) + "_layer" + std::to_string(m);
            write_with(o.out_dir / (stem + "_runs.csv"), [&](std::ostream& os) { write_runs_csv(report, os); });
            write_with(o.out_dir / (stem + "_per_genre.csv"), [&](std::ostream& os) { write_per_genre_csv(report, os); });
            write_with(o.out_dir / (stem + "_confusion.csv"), [&](std::ostream& os) { write_confusion_csv(report, os); });
            summary.push_back({{"family", to_string(fam)},
                               {"classifier", to_string(kind)},
                               {"layer", m},
                               {"cumulative", !o.per_layer},
                               {"repeats", o.repeats},
                               {"mean_accuracy", report.mean_accuracy},
                               {"std_accuracy", report.std_accuracy},
                               {"repeat_accuracy", report.repeat_accuracy}});
            log(cfg, headers[col] + " layer " + std::to_string(m) + ": " + std::to_string(report.mean_accuracy * 100) + "%");
        }
    }

    const std::string table = format_table(headers, rows);
    write_text(o.out_dir / "table.txt", table);
    write_with(o.out_dir / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    std::cout << table;

    if (!o.save_model.empty()) {
        const auto fam = parse_family(cfg.family);
        if (loaded != fam) {
            features.reset();
            features = features_for(ds, cfg, fam, o);
        }
        ClassifierConfig cc = base;
        cc.kind = ClassifierKind::Glmnet;
        const ColumnRange range{0, features->layout.size()};
        std::vector<std::size_t> all(features->num_tracks());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const SegmentModel sm = train_segment_model(*features, range, all, cc, cfg.seed);
        TrainedModel tm;
        tm.genres = features->genres;
        tm.shapes = ScatteringNetwork(cfg.scattering(fam), cfg.segment_length).output_shapes();
        tm.layers = layers_for_depth(cfg.layers);
        tm.pca = sm.pca;
        tm.glm = sm.glm;
        tm.save(o.save_model);
        std::cout << "model saved to " << o.save_model << '\n';
    }
    return 0;
}

int cmd_significance(const fs::path& model_dir, const fs::path& out_dir, double clamp, int layer)
{
    const TrainedModel tm = TrainedModel::load(model_dir);
    const FeatureLayout layout = tm.layout();
    fs::create_directories(out_dir);
    for (std::size_t g = 0; g < tm.genres.size(); ++g) {
        const Eigen::VectorXd theta = tm.glm.theta.row(static_cast<Eigen::Index>(g)).tail(tm.glm.theta.cols() - 1);
        const auto map = significance_scores(theta, tm.pca, layout, layer, tm.genres[g]);
        if (map.degenerate) std::cerr << "warning: genre '" << tm.genres[g] << "' has all-zero coefficients\n";
        const auto grid = export_heatmap(map, clamp);
        write_with(out_dir / ("significance_" + tm.genres[g] + ".csv"),
                   [&](std::ostream& os) { write_heatmap_csv(map, grid, os); });
    }
    std::cout << tm.genres.size() << " significance maps written to " << out_dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Scattering transform features with analytic wavelets for music genre classification"};
    app.require_subcommand(1);
    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_flag("-q,--quiet", cfg.quiet, "Suppress progress output");

    auto* filters = app.add_subcommand("filters", "Build and save the filter bank of every layer");
    fs::path filters_out = "filters";
    std::size_t filters_len = kSegmentLength;
    add_network_options(*filters, cfg);
    filters->add_option("-o,--out", filters_out, "Output directory")->capture_default_str();
    filters->add_option("--length", filters_len, "Input length of the first layer")->capture_default_str();

    auto* scatter_cmd = app.add_subcommand("scatter", "Scattering coefficients for an audio file or corpus");
    fs::path scatter_in;
    fs::path scatter_out = "scatter";
    bool scatter_csv = false;
    add_network_options(*scatter_cmd, cfg);
    add_corpus_options(*scatter_cmd, cfg);
    scatter_cmd->add_option("input", scatter_in, "Audio file or corpus root")->required();
    scatter_cmd->add_option("-o,--out", scatter_out, "Output directory")->capture_default_str();
    scatter_cmd->add_flag("--csv", scatter_csv, "Also write long-format CSV");

    auto* manifest = app.add_subcommand("manifest", "List the tracks of a corpus");
    fs::path manifest_root;
    fs::path manifest_out;
    manifest->add_option("data_root,--data-root", manifest_root, "Corpus root (one directory per genre)")->required();
    manifest->add_option("-o,--out", manifest_out, "CSV path (default stdout)");

    auto* train = app.add_subcommand("train-eval", "Repeated 3-fold cross-validation");
    TrainEvalOptions te;
    add_network_options(*train, cfg);
    add_corpus_options(*train, cfg);
    train->add_option("data_root,--data-root", te.data_root, "Corpus root (one directory per genre)")->required();
    train->add_option("-o,--out", te.out_dir, "Output directory")->capture_default_str();
    train->add_option("--classifier", te.classifiers, "svm and/or glmnet")->capture_default_str();
    train->add_flag("--table", te.table, "Run GMW-GLMNet, GMW-SVM and Morlet-SVM for every layer");
    train->add_flag("--per-layer", te.per_layer, "Use layer m alone instead of layers 0..m");
    train->add_flag("--zscore", te.zscore, "Standardize features before PCA");
    train->add_option("--pca-k", te.pca_k, "Principal components kept")->capture_default_str();
    train->add_option("--repeats", te.repeats, "Cross-validation repeats")->capture_default_str();
    train->add_option("--c", te.c, "SVM cost")->capture_default_str();
    train->add_option("--kernel-gamma", te.kernel_gamma, "SVM kernel scale (default 1/features)");
    train->add_option("--save-model", te.save_model, "Train a GLM on all tracks and save it to this directory");
    train->add_option("--cache-dir", te.cache_dir, "Feature cache (default <out>/cache; GMWSTN_CACHE_DIR overrides)");

    auto* sig = app.add_subcommand("significance", "Per-genre significance heatmaps from a saved GLM");
    fs::path sig_model;
    fs::path sig_out = "significance";
    double sig_clamp = 0.4;
    int sig_layer = 3;
    sig->add_option("model", sig_model, "Directory written by train-eval --save-model")->required();
    sig->add_option("-o,--out", sig_out, "Output directory")->capture_default_str();
    sig->add_option("--clamp", sig_clamp, "Lower clamp of the heatmap")->capture_default_str();
    sig->add_option("--layer", sig_layer, "Scattering layer to map")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*filters) return cmd_filters(cfg, filters_out, filters_len);
        if (*scatter_cmd) return cmd_scatter(cfg, scatter_in, scatter_out, scatter_csv);
        if (*manifest) return cmd_manifest(manifest_root, manifest_out);
        if (*train) return cmd_train_eval(cfg, te);
        if (*sig) return cmd_significance(sig_model, sig_out, sig_clamp, sig_layer);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
