// Acceptance runner: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gmwstn/audio_io.hpp"
#include "gmwstn/classify.hpp"
#include "gmwstn/error.hpp"
#include "gmwstn/features.hpp"
#include "gmwstn/filters.hpp"
#include "gmwstn/glmnet.hpp"
#include "gmwstn/pipeline.hpp"
#include "gmwstn/scattering.hpp"
#include "gmwstn/significance.hpp"

namespace fs = std::filesystem;
using namespace gmwstn;
using std::numbers::pi;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Pass;
    std::string detail;
};

struct Options {
    fs::path work_dir = "acceptance_work";
    std::size_t threads = 0;
    std::string only;
};

// Accumulates failed checks with a short reason for each.
class Checks {
public:
    void expect(bool ok, const std::string& what)
    {
        ++total_;
        if (!ok && failures_.size() < 4) failures_.push_back(what);
        failed_ += !ok;
    }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }

    Outcome outcome() const
    {
        Outcome o;
        o.status = failed_ ? Status::Fail : Status::Pass;
        std::ostringstream ss;
        ss << (total_ - failed_) << "/" << total_ << " checks";
        if (!notes_.empty()) ss << "; " << notes_;
        for (const auto& f : failures_) ss << "; failed: " << f;
        o.detail = ss.str();
        return o;
    }

private:
    std::size_t total_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
    std::string notes_;
};

std::string fmt(double v, int precision = 6)
{
    std::ostringstream ss;
    ss.precision(precision);
    ss << v;
    return ss.str();
}

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> gaussian_signal(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    return x;
}

Outcome analyticity()
{
    Checks c;
    for (std::size_t n : {64ul, 1000ul, 1723ul, 13782ul, 110250ul}) {
        for (const auto& [q, j] : {std::pair{8.0, 32}, std::pair{4.0, 13}, std::pair{4.0, 9}}) {
            const auto gmw = build_filter_bank(WaveletFamily::Gmw, n, q, j);
            const auto morlet = build_filter_bank(WaveletFamily::Morlet, n, q, j);
            bool zero = true;
            bool leaks = true;
            for (std::size_t s = 0; s < gmw.num_scales(); ++s) {
                const auto row = gmw.filter(s);
                zero = zero && row[0] == 0.0;
                for (std::size_t k = n / 2 + 1; k < n; ++k) zero = zero && row[k] == 0.0;
                const auto mrow = morlet.filter(s);
                double leak = 0.0;
                for (std::size_t k = n / 2 + 1; k < n; ++k) leak = std::max(leak, mrow[k]);
                leaks = leaks && leak > 0.0;
            }
            c.expect(zero, "gmw nonzero off the positive axis, N=" + std::to_string(n));
            c.expect(leaks, "morlet without leakage, N=" + std::to_string(n));
        }
    }
    return c.outcome();
}

Outcome peak_frequency_check()
{
    Checks c;
    const GmwParams p(4.0, 2.0);
    const std::size_t n = std::size_t{1} << 16;
    // ω_k = 4k/n on [0, 4): the peak √2 sits well inside the grid
    const double bin = 4.0 / static_cast<double>(n);
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = gmw_spectrum(p, static_cast<double>(k) * bin);
        if (v > best_v) {
            best_v = v;
            best = k;
        }
    }
    const double measured = static_cast<double>(best) * bin;
    c.expect(std::abs(measured - std::sqrt(2.0)) <= bin, "argmax " + fmt(measured, 10));
    c.expect(std::abs(peak_frequency(p) - std::sqrt(2.0)) <= 1e-15, "analytic peak");
    const double at_peak = gmw_spectrum(p, std::sqrt(2.0));
    c.expect(std::abs(at_peak - 2.0) <= 1e-12, "peak value " + fmt(at_peak, 17));
    c.note("argmax " + fmt(measured, 10) + ", peak value " + fmt(at_peak, 17));

    // on the DFT grid every bank row peaks within a bin of its scaled peak
    const auto bank = build_filter_bank(WaveletFamily::Gmw, n, 8, 32);
    const double dft_bin = 2.0 * pi / static_cast<double>(n);
    bool rows_ok = true;
    for (std::size_t j = 0; j < bank.num_scales(); ++j) {
        const auto row = bank.filter(j);
        const auto k = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        rows_ok = rows_ok && std::abs(static_cast<double>(k) * dft_bin - bank.peak_frequency(j)) <= dft_bin;
        rows_ok = rows_ok && row[k] <= 2.0 + 1e-12;
    }
    c.expect(rows_ok, "bank row peaks");
    return c.outcome();
}

Outcome convolution_oracle()
{
    Checks c;
    std::mt19937_64 rng(20240101);
    std::uniform_int_distribution<std::size_t> len(64, 512);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = len(rng);
        std::vector<double> row(n);
        for (auto& v : row) v = u(rng);
        // impulse response by a direct inverse DFT
        CVector h(n);
        for (std::size_t t = 0; t < n; ++t) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += row[k] * std::polar(1.0, 2.0 * pi * static_cast<double>(k * t % n) / static_cast<double>(n));
            h[t] = acc / static_cast<double>(n);
        }
        const auto x = gaussian_signal(n, rng);
        const auto fast = analytic_conv(std::span<const double>(x), row);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            cplx acc = 0.0;
            for (std::size_t s = 0; s < n; ++s) acc += x[s] * h[(t + n - s) % n];
            num += std::norm(fast[t] - acc);
            den += std::norm(acc);
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    c.expect(worst <= 1e-8, "relative error " + fmt(worst));
    c.note("worst relative error " + fmt(worst, 3));
    return c.outcome();
}

Outcome shape_reproduction()
{
    Checks c;
    const ScatteringNetwork net(ScatteringConfig::defaults(), kSegmentLength);
    const std::vector<std::vector<std::size_t>> expected{{3446}, {431, 33}, {54, 14, 33}, {7, 10, 14, 33}};
    c.expect(net.output_shapes() == expected, "declared shapes");
    std::mt19937_64 rng(3);
    const auto out = net.scatter(gaussian_signal(kSegmentLength, rng));
    c.expect(out.layer0.size() == 3446, "layer-0 length " + std::to_string(out.layer0.size()));
    for (std::size_t m = 0; m < 3; ++m) c.expect(out.layers[m].shape == expected[m + 1], "layer " + std::to_string(m + 1));
    c.note("layer 0 has 3446 samples (ceil rule; a floor rule gives 3445)");
    return c.outcome();
}

Outcome lipschitz_suite()
{
    Checks c;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> nd;
    const std::size_t n = 4096;
    // pointwise modulus
    bool pointwise = true;
    for (int i = 0; i < 10000; ++i) {
        const cplx a{nd(rng), nd(rng)};
        const cplx b{nd(rng), nd(rng)};
        pointwise = pointwise && std::abs(std::abs(a) - std::abs(b)) <= std::abs(a - b) * (1 + 1e-15);
    }
    c.expect(pointwise, "pointwise modulus");

    double worst_ratio = 0.0;
    for (auto fam : {WaveletFamily::Gmw, WaveletFamily::Morlet}) {
        const auto bank = build_filter_bank(fam, n, 8, 32);
        for (int pair = 0; pair < 50; ++pair) {
            const auto f = gaussian_signal(n, rng);
            const auto g = gaussian_signal(n, rng);
            std::vector<double> d(n);
            for (std::size_t i = 0; i < n; ++i) d[i] = f[i] - g[i];
            const double dn = norm2(d);
            const auto uf = layer_u(f, bank, 8);
            const auto ug = layer_u(g, bank, 8);
            const auto cf = contraction(analytic_conv(std::span<const double>(f), bank.filter(0)));
            const auto cg = contraction(analytic_conv(std::span<const double>(g), bank.filter(0)));
            for (std::size_t j = 0; j < bank.num_scales(); ++j) {
                const auto row = bank.filter(j);
                const double bound = *std::max_element(row.begin(), row.end());
                std::vector<double> diff(uf[j].size());
                for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = uf[j][i] - ug[j][i];
                worst_ratio = std::max(worst_ratio, norm2(diff) / (bound * dn));
            }
            std::vector<double> diff(n);
            for (std::size_t i = 0; i < n; ++i) diff[i] = cf[i] - cg[i];
            worst_ratio = std::max(worst_ratio, norm2(diff) / (*std::max_element(bank.filter(0).begin(), bank.filter(0).end()) * dn));
        }
    }
    c.expect(worst_ratio <= 1.0 + 1e-12, "layer bound ratio " + fmt(worst_ratio));
    c.note("max ‖ΔU‖/(G‖Δf‖) = " + fmt(worst_ratio, 4));
    return c.outcome();
}

Outcome glm_correctness()
{
    Checks c;
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;

    Eigen::MatrixXd a(8, 8);
    for (auto& v : a.reshaped()) v = nd(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    Eigen::VectorXd z(8);
    for (auto& v : z) v = 3.0 * nd(rng);
    double worst = 0.0;
    for (double lambda : {0.0, 0.01, 0.1, 0.3, 1.0, 10.0}) {
        const auto r = weighted_lasso(q, z, Eigen::VectorXd::Ones(8), lambda, false);
        for (Eigen::Index j = 0; j < 8; ++j)
            worst = std::max(worst, std::abs(r.beta[j] - soft_threshold(q.col(j).dot(z), 8.0 * lambda)));
    }
    c.expect(worst <= 1e-8, "soft-threshold oracle " + fmt(worst));

    // toy three-class problem
    const int classes = 3;
    const int per = 40;
    Eigen::MatrixXd x(classes * per, 6);
    std::vector<int> y;
    std::vector<int> groups;
    for (int k = 0; k < classes; ++k)
        for (int i = 0; i < per; ++i) {
            const int row = k * per + i;
            for (int j = 0; j < 6; ++j) x(row, j) = nd(rng) + (j == k ? 2.0 : 0.0);
            y.push_back(k);
            groups.push_back(row / 4);
        }
    GlmnetOptions opts;
    opts.seed = 11;
    const auto model = glmnet_train(x, y, classes, opts, groups);
    const double kkt = glmnet_kkt_residual(model, x, y);
    c.expect(kkt <= 1e-5, "kkt " + fmt(kkt));
    c.note("oracle error " + fmt(worst, 3) + ", KKT " + fmt(kkt, 3) + " at λ=" + fmt(model.lambda, 4));
    return c.outcome();
}

Outcome cv_harness()
{
    Checks c;
    std::vector<int> y;
    std::vector<std::string> genres;
    for (int g = 0; g < 10; ++g) {
        genres.push_back("g" + std::to_string(g));
        for (int i = 0; i < 100; ++i) y.push_back(g);
    }
    const auto folds = stratified_folds(y, 10, 3, 0);
    c.expect(folds.size() == 3 && folds[0].size() == 340 && folds[1].size() == 330 && folds[2].size() == 330,
             "fold sizes");
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<int> per(10, 0);
        for (auto t : folds[f]) ++per[static_cast<std::size_t>(y[t])];
        const int want = f == 0 ? 34 : 33;
        c.expect(std::all_of(per.begin(), per.end(), [&](int v) { return v == want; }),
                 "per-genre counts in fold " + std::to_string(f));
    }

    const TrackClassifier oracle = [&](std::span<const std::size_t>, std::span<const std::size_t> test, std::uint64_t) {
        std::vector<int> out;
        for (auto t : test) out.push_back(y[t]);
        return out;
    };
    const auto perfect = cross_validate(y, genres, oracle, 10, 3, 1);
    c.expect(perfect.mean_accuracy == 1.0, "oracle accuracy " + fmt(perfect.mean_accuracy));

    const TrackClassifier random = [](std::span<const std::size_t>, std::span<const std::size_t> test, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> pick(0, 9);
        std::vector<int> out;
        for (std::size_t i = 0; i < test.size(); ++i) out.push_back(pick(rng));
        return out;
    };
    const auto chance = cross_validate(y, genres, random, 10, 3, 2);
    c.expect(chance.runs.size() == 30, "30 runs");
    c.expect(std::abs(chance.mean_accuracy - 0.10) <= 0.03, "random accuracy " + fmt(chance.mean_accuracy));
    c.note("random classifier " + fmt(100.0 * chance.mean_accuracy, 4) + "%");
    return c.outcome();
}

// Mini-corpus stand-ins for two maximally distinct genres: sparse harmonic
// notes with soft attacks versus distorted power chords over a drum pattern.
std::vector<double> classical_track(std::mt19937_64& rng, std::size_t n, double rate)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nd;
    std::vector<double> x(n, 0.0);
    const int voices = 2 + static_cast<int>(u(rng) * 2.0);
    for (int v = 0; v < voices; ++v) {
        double t0 = u(rng) * 0.5;
        const double register_hz = 110.0 * std::pow(2.0, 3.0 * u(rng));
        while (t0 < static_cast<double>(n) / rate) {
            const double dur = 0.3 + 1.2 * u(rng);
            const double f0 = register_hz * std::pow(2.0, std::round(12.0 * (u(rng) - 0.5)) / 12.0);
            const double amp = 0.08 + 0.1 * u(rng);
            const double vib = 0.003 * u(rng);
            const auto start = static_cast<std::size_t>(t0 * rate);
            const auto stop = std::min(n, static_cast<std::size_t>((t0 + dur * 1.3) * rate));
            for (std::size_t i = start; i < stop; ++i) {
                const double t = static_cast<double>(i - start) / rate;
                const double env = (1.0 - std::exp(-t / 0.06)) * std::exp(-t / (0.6 * dur));
                const double phase = 2.0 * pi * f0 * (t + vib * std::sin(2.0 * pi * 5.0 * t) / 5.0);
                double s = 0.0;
                for (int h = 1; h <= 6; ++h) s += std::sin(h * phase) / (h * h);
                x[i] += amp * env * s;
            }
            t0 += dur;
        }
    }
    for (auto& v : x) v += 0.003 * nd(rng);
    return x;
}

std::vector<double> metal_track(std::mt19937_64& rng, std::size_t n, double rate)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nd;
    std::vector<double> x(n, 0.0);
    const double beat = 60.0 / (140.0 + 80.0 * u(rng));
    const double drive = 4.0 + 12.0 * u(rng);
    const double root = 82.4 * std::pow(2.0, std::round(7.0 * u(rng)) / 12.0);
    // rhythm guitar: one chord per beat pair
    double f0 = root;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        if (i % static_cast<std::size_t>(2.0 * beat * rate) == 0)
            f0 = root * std::pow(2.0, std::round(5.0 * u(rng)) / 12.0);
        const double saw = std::fmod(f0 * t, 1.0) * 2.0 - 1.0;
        const double fifth = std::fmod(1.5 * f0 * t, 1.0) * 2.0 - 1.0;
        x[i] = 0.35 * std::tanh(drive * (saw + 0.8 * fifth));
    }
    // drums
    const auto step = static_cast<std::size_t>(beat * rate / 2.0);
    for (std::size_t k = 0; k * step < n; ++k) {
        const std::size_t start = k * step;
        const bool kick = k % 4 == 0 || u(rng) < 0.2;
        const bool snare = k % 4 == 2;
        for (std::size_t i = start; i < std::min(n, start + step); ++i) {
            const double t = static_cast<double>(i - start) / rate;
            if (kick) x[i] += 0.5 * std::sin(2.0 * pi * (50.0 * t + 40.0 * (1.0 - std::exp(-t / 0.03)))) * std::exp(-t / 0.12);
            if (snare) x[i] += 0.3 * nd(rng) * std::exp(-t / 0.08);
            x[i] += 0.08 * nd(rng) * std::exp(-t / 0.015);  // hi-hat
        }
    }
    for (auto& v : x) v = std::clamp(v, -1.0, 1.0);
    return x;
}

fs::path build_mini_corpus(const fs::path& root, std::size_t per_genre)
{
    const double rate = kCorpusRate;
    const std::size_t n = static_cast<std::size_t>(30.0 * rate);
    std::mt19937_64 rng(0xc1a55);
    for (const std::string genre : {"classical", "metal"}) {
        fs::create_directories(root / genre);
        for (std::size_t i = 0; i < per_genre; ++i) {
            std::mt19937_64 track_rng(rng());
            const auto path = root / genre / (genre + "." + std::to_string(10000 + i).substr(1) + ".wav");
            if (fs::exists(path)) continue;
            const auto x = genre == "classical" ? classical_track(track_rng, n, rate) : metal_track(track_rng, n, rate);
            write_wav(path, x, kCorpusRate);
        }
    }
    return root;
}

double track_accuracy(const CorpusFeatures& features, int depth, std::size_t repeats, std::uint64_t seed)
{
    ClassifierConfig cfg;
    cfg.kind = ClassifierKind::Svm;
    const auto classifier = make_track_classifier(features, layer_columns(features.layout, depth), cfg);
    return cross_validate(features.track_labels, features.genres, classifier, repeats, 3, seed).mean_accuracy;
}

Outcome desk_trend(const Options& opt)
{
    Checks c;
    const auto root = build_mini_corpus(opt.work_dir / "mini_corpus", 50);
    const auto dataset = load_corpus(root);
    c.expect(dataset.size() == 100, "corpus size " + std::to_string(dataset.size()));

    std::map<WaveletFamily, std::vector<double>> acc;
    for (auto fam : {WaveletFamily::Gmw, WaveletFamily::Morlet}) {
        ExtractOptions eo;
        eo.scattering = ScatteringConfig::defaults(fam);
        eo.threads = opt.threads;
        eo.cache_dir = resolve_cache_dir(opt.work_dir / "cache");
        const auto start = std::chrono::steady_clock::now();
        const auto features = extract_features(dataset, eo);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "  " << to_string(fam) << " features " << features.x.rows() << "x" << features.x.cols() << " in "
                  << fmt(secs, 4) << " s\n";
        for (int depth = 1; depth <= 3; ++depth) acc[fam].push_back(track_accuracy(features, depth, 1, 0));
    }
    const auto& g = acc[WaveletFamily::Gmw];
    const auto& m = acc[WaveletFamily::Morlet];
    c.expect(g[0] <= g[1] && g[1] <= g[2], "gmw depth ordering");
    c.expect(m[0] <= m[1] && m[1] <= m[2], "morlet depth ordering");
    c.expect(g[2] >= m[2], "gmw >= morlet at depth 3");
    auto pct = [](const std::vector<double>& v) {
        std::string s;
        for (double a : v) s += (s.empty() ? "" : "/") + fmt(100.0 * a, 4);
        return s;
    };
    c.note("gmw " + pct(g) + "%, morlet " + pct(m) + "% at depths 1/2/3");
    return c.outcome();
}

Outcome full_reproduction(const Options& opt)
{
    const char* env = std::getenv("GMWSTN_GTZAN_ROOT");
    if (env == nullptr || *env == '\0') return {Status::Skip, "set GMWSTN_GTZAN_ROOT to run on the full corpus"};
    Checks c;
    const auto dataset = load_corpus(env);
    std::map<WaveletFamily, AccuracyReport> reports;
    for (auto fam : {WaveletFamily::Gmw, WaveletFamily::Morlet}) {
        ExtractOptions eo;
        eo.scattering = ScatteringConfig::defaults(fam);
        eo.threads = opt.threads;
        eo.decode.resample = true;
        eo.decode.downmix = true;
        eo.cache_dir = resolve_cache_dir(opt.work_dir / "cache");
        const auto features = extract_features(dataset, eo);
        const auto classifier = make_track_classifier(features, layer_columns(features.layout, 3), ClassifierConfig{});
        reports[fam] = cross_validate(features.track_labels, features.genres, classifier, 10, 3, 0);
    }
    const double g = 100.0 * reports[WaveletFamily::Gmw].mean_accuracy;
    const double m = 100.0 * reports[WaveletFamily::Morlet].mean_accuracy;
    c.expect(std::abs(g - 77.9088) <= 3.0, "gmw mean " + fmt(g, 5));
    c.expect(std::abs(m - 73.7178) <= 3.0, "morlet mean " + fmt(m, 5));
    const auto& rep = reports[WaveletFamily::Gmw];
    const auto hi = std::max_element(rep.per_genre_accuracy.begin(), rep.per_genre_accuracy.end()) - rep.per_genre_accuracy.begin();
    const auto lo = std::min_element(rep.per_genre_accuracy.begin(), rep.per_genre_accuracy.end()) - rep.per_genre_accuracy.begin();
    c.expect(rep.genres[static_cast<std::size_t>(hi)] == "classical", "highest genre " + rep.genres[static_cast<std::size_t>(hi)]);
    c.expect(rep.genres[static_cast<std::size_t>(lo)] == "rock", "lowest genre " + rep.genres[static_cast<std::size_t>(lo)]);
    c.note("gmw " + fmt(g, 6) + "%, morlet " + fmt(m, 6) + "%");
    return c.outcome();
}

Outcome significance_suite()
{
    Checks c;
    const ScatteringNetwork net(ScatteringConfig::defaults(), kSegmentLength);
    const FeatureLayout layout(net.output_shapes(), layers_for_depth(3));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const std::size_t k = 20;
    Eigen::MatrixXd comp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(layout.size()));
    for (auto& v : comp.reshaped()) v = nd(rng);
    const PcaModel pca(Eigen::VectorXd::Zero(comp.cols()), comp, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k)));
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd theta(static_cast<Eigen::Index>(k));
        for (auto& v : theta) v = nd(rng);
        const auto map = significance_scores(theta, pca, layout, 3, "g");
        const double peak = *std::max_element(map.scores.begin(), map.scores.end());
        c.expect(!map.degenerate && peak == 1.0, "max score " + fmt(peak, 17));
        const auto grid = export_heatmap(map, 0.4);
        c.expect(grid.cols == 231, "columns " + std::to_string(grid.cols));
        c.expect(grid.block_rows == 14 && grid.blocks == 10, "block layout");
        const double floor = *std::min_element(grid.values.begin(), grid.values.end());
        c.expect(floor == 0.4, "floor " + fmt(floor));
    }
    return c.outcome();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria for the scattering classifier"};
    Options opt;
    app.add_option("--work-dir", opt.work_dir, "Directory for the mini-corpus and feature cache");
    app.add_option("--threads", opt.threads, "Feature extraction threads (0 = all cores)");
    app.add_option("--only", opt.only, "Run only criteria whose name contains this string");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"analyticity", analyticity},
        {"peak-frequency", peak_frequency_check},
        {"convolution-oracle", convolution_oracle},
        {"shape-reproduction", shape_reproduction},
        {"lipschitz-contraction", lipschitz_suite},
        {"glm-correctness", glm_correctness},
        {"cv-harness", cv_harness},
        {"desk-scale-trend", [&] { return desk_trend(opt); }},
        {"full-reproduction", [&] { return full_reproduction(opt); }},
        {"significance", significance_suite},
    };

    fs::create_directories(opt.work_dir);
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        if (!opt.only.empty() && name.find(opt.only) == std::string::npos) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        failures += o.status == Status::Fail;
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        std::cout << tag << "  " << name << "  " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
