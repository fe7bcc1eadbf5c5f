#include "gmwstn/classify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "gmwstn/error.hpp"

namespace gmwstn {

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int num_classes, std::size_t folds,
                                                       std::uint64_t seed)
{
    if (folds < 2) throw ConfigError("stratified_folds: need at least two folds");
    if (num_classes < 1) throw ConfigError("stratified_folds: need at least one class");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) throw ConfigError("stratified_folds: label out of range");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> out(folds);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.empty()) continue;
        if (members.size() < folds)
            throw DataError("stratified_folds: class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                            " tracks, fewer than " + std::to_string(folds) + " folds");
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) out[i % folds].push_back(members[i]);
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

int majority_vote(std::span<const int> segment_labels, const Eigen::MatrixXd& scores, std::size_t expected_segments)
{
    if (segment_labels.size() != expected_segments)
        throw DataError("majority_vote: expected " + std::to_string(expected_segments) + " segment labels, got " +
                        std::to_string(segment_labels.size()));
    if (scores.rows() != 0 && static_cast<std::size_t>(scores.rows()) != segment_labels.size())
        throw ConfigError("majority_vote: score rows do not match segment count");
    int max_label = *std::max_element(segment_labels.begin(), segment_labels.end());
    if (*std::min_element(segment_labels.begin(), segment_labels.end()) < 0)
        throw ConfigError("majority_vote: negative label");
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_label) + 1, 0);
    for (int l : segment_labels) ++counts[static_cast<std::size_t>(l)];
    const std::size_t top = *std::max_element(counts.begin(), counts.end());

    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < counts.size(); ++l) {
        if (counts[l] != top) continue;
        double s = 0.0;
        if (scores.rows() != 0 && static_cast<Eigen::Index>(l) < scores.cols()) s = scores.col(static_cast<Eigen::Index>(l)).sum();
        if (best < 0 || s > best_score) {
            best = static_cast<int>(l);
            best_score = s;
        }
    }
    return best;
}

AccuracyReport cross_validate(std::span<const int> track_labels, const std::vector<std::string>& genres,
                              const TrackClassifier& classifier, std::size_t repeats, std::size_t folds,
                              std::uint64_t seed)
{
    const auto num_classes = static_cast<int>(genres.size());
    if (num_classes < 2) throw ConfigError("cross_validate: need at least two genres");
    if (repeats < 1) throw ConfigError("cross_validate: repeats must be >= 1");

    AccuracyReport report;
    report.genres = genres;
    report.confusion.assign(genres.size(), std::vector<std::size_t>(genres.size(), 0));
    std::seed_seq seq{seed, std::uint64_t{0x5eed}};
    std::mt19937_64 master(seq);

    for (std::size_t r = 0; r < repeats; ++r) {
        const auto split = stratified_folds(track_labels, num_classes, folds, master());
        double sum = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            const auto& test = split[f];
            std::vector<std::size_t> train;
            for (std::size_t g = 0; g < folds; ++g)
                if (g != f) train.insert(train.end(), split[g].begin(), split[g].end());
            std::sort(train.begin(), train.end());

            const auto predicted = classifier(train, test, master());
            if (predicted.size() != test.size())
                throw ConfigError("cross_validate: classifier returned " + std::to_string(predicted.size()) +
                                  " labels for " + std::to_string(test.size()) + " tracks");
            FoldResult run{r, f, 0, test.size()};
            for (std::size_t i = 0; i < test.size(); ++i) {
                const int truth = track_labels[test[i]];
                const int guess = predicted[i];
                if (guess < 0 || guess >= num_classes) throw ConfigError("cross_validate: predicted label out of range");
                ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(guess)];
                if (truth == guess) ++run.correct;
            }
            sum += run.accuracy();
            report.runs.push_back(run);
        }
        report.repeat_accuracy.push_back(sum / static_cast<double>(folds));
    }

    const double n = static_cast<double>(report.repeat_accuracy.size());
    report.mean_accuracy = std::accumulate(report.repeat_accuracy.begin(), report.repeat_accuracy.end(), 0.0) / n;
    double var = 0.0;
    for (double a : report.repeat_accuracy) var += (a - report.mean_accuracy) * (a - report.mean_accuracy);
    report.std_accuracy = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;

    report.per_genre_accuracy.resize(genres.size(), 0.0);
    for (std::size_t g = 0; g < genres.size(); ++g) {
        const auto total = std::accumulate(report.confusion[g].begin(), report.confusion[g].end(), std::size_t{0});
        report.per_genre_accuracy[g] = total ? static_cast<double>(report.confusion[g][g]) / static_cast<double>(total) : 0.0;
    }
    return report;
}

void write_runs_csv(const AccuracyReport& report, std::ostream& out)
{
    out << "repeat,fold,correct,total,accuracy\n" << std::setprecision(10);
    for (const auto& r : report.runs)
        out << r.repeat << ',' << r.fold << ',' << r.correct << ',' << r.total << ',' << r.accuracy() << '\n';
}

void write_per_genre_csv(const AccuracyReport& report, std::ostream& out)
{
    out << "genre,accuracy\n" << std::setprecision(10);
    for (std::size_t g = 0; g < report.genres.size(); ++g)
        out << report.genres[g] << ',' << report.per_genre_accuracy[g] << '\n';
}

void write_confusion_csv(const AccuracyReport& report, std::ostream& out)
{
    out << "true\\predicted";
    for (const auto& g : report.genres) out << ',' << g;
    out << '\n';
    for (std::size_t i = 0; i < report.genres.size(); ++i) {
        out << report.genres[i];
        for (auto c : report.confusion[i]) out << ',' << c;
        out << '\n';
    }
}

std::string format_table(const std::vector<std::string>& columns, const std::vector<TableRow>& rows)
{
    std::size_t label_width = 5;
    for (const auto& r : rows) label_width = std::max(label_width, r.label.size());
    std::vector<std::size_t> widths;
    for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 9));

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(label_width)) << "";
    for (std::size_t c = 0; c < columns.size(); ++c) os << "  " << std::right << std::setw(static_cast<int>(widths[c])) << columns[c];
    os << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(static_cast<int>(label_width)) << r.label;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            os << "  " << std::right << std::setw(static_cast<int>(widths[c]));
            if (c < r.values.size() && r.values[c]) {
                std::ostringstream cell;
                cell << std::fixed << std::setprecision(4) << *r.values[c] * 100.0 << '%';
                os << cell.str();
            } else {
                os << "-";
            }
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace gmwstn
