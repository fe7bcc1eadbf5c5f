#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gmwstn {

/// Per-class shuffle (seeded), then round-robin dealing into `folds` folds
/// starting at fold 0 for every class. Returns track indices per fold, sorted.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, int num_classes, std::size_t folds,
                                                       std::uint64_t seed);

/// Most frequent segment label. Ties go to the tied label with the largest
/// summed score column (scores is [segments × classes], may have zero rows),
/// then to the lowest label.
int majority_vote(std::span<const int> segment_labels, const Eigen::MatrixXd& scores,
                  std::size_t expected_segments = 15);

/// Predicts one label per test track given train/test track indices and a
/// job seed.
using TrackClassifier = std::function<std::vector<int>(std::span<const std::size_t> train,
                                                       std::span<const std::size_t> test, std::uint64_t seed)>;

struct FoldResult {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const noexcept { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct AccuracyReport {
    std::vector<std::string> genres;
    std::vector<FoldResult> runs;
    /// Mean of fold accuracies, per repeat.
    std::vector<double> repeat_accuracy;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> per_genre_accuracy;
    /// confusion[true][predicted], summed over all runs.
    std::vector<std::vector<std::size_t>> confusion;
};

AccuracyReport cross_validate(std::span<const int> track_labels, const std::vector<std::string>& genres,
                              const TrackClassifier& classifier, std::size_t repeats = 10, std::size_t folds = 3,
                              std::uint64_t seed = 0);

/// repeat,fold,correct,total,accuracy
void write_runs_csv(const AccuracyReport& report, std::ostream& out);
/// genre,accuracy
void write_per_genre_csv(const AccuracyReport& report, std::ostream& out);
/// Header row of predicted genres, one row per true genre.
void write_confusion_csv(const AccuracyReport& report, std::ostream& out);

struct TableRow {
    std::string label;
    std::vector<std::optional<double>> values;  // accuracy in [0, 1]; empty cell when absent
};

/// Fixed-width text table of percentages.
std::string format_table(const std::vector<std::string>& columns, const std::vector<TableRow>& rows);

}  // namespace gmwstn
