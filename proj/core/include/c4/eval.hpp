#pragma once

#include <functional>
#include <string>
#include <vector>

#include "c4/config.hpp"
#include "c4/dataset.hpp"
#include "c4/train.hpp"

namespace c4 {

// The five benchmark statistics over one set of angular errors.
struct ErrorReport {
    double mean = 0.0;
    double median = 0.0;
    double trimean = 0.0;       // (Q1 + 2*Q2 + Q3) / 4, type-7 quartiles
    double best25_mean = 0.0;
    double worst25_mean = 0.0;
    size_t n = 0;
    std::vector<std::pair<std::string, double>> per_sample; // (id, error deg)
};

ErrorReport summarize(const std::vector<AngularError>& errors);
ErrorReport summarize(const std::vector<std::pair<std::string, double>>& errors);

// Linear-interpolated (type-7) percentile of a sorted sample, p in [0,1].
double percentile_sorted(const std::vector<double>& sorted, double p);

// Maps an image to an illuminant estimate.
using Predictor = std::function<Illuminant(const LinearImage&)>;

// Builds a predictor from a training split. Training-free estimators
// ignore the split.
using PredictorFactory =
    std::function<Predictor(const std::vector<Sample>& train_split, uint64_t seed)>;

struct CrossValidationResult {
    std::vector<ErrorReport> per_fold;
    ErrorReport pooled;
};

// k-fold protocol: for each fold, the factory is trained on the other
// folds and evaluated on the held-out one; the pooled report covers every
// held-out prediction. Folds must be assigned in the manifest. Folds may
// run in parallel up to the C4_THREADS cap.
CrossValidationResult cross_validate(const PredictorFactory& factory,
                                     const DatasetManifest& manifest, uint64_t seed);

// In-memory variant used by the synthetic benchmarks.
CrossValidationResult cross_validate_samples(const PredictorFactory& factory,
                                             const std::vector<Sample>& samples,
                                             const std::vector<int>& folds, uint64_t seed);

// Fraction of samples where the (l+1)-th cumulative estimate is strictly
// more accurate than the l-th, for each consecutive stage pair.
// stage_errors[sample][stage] are angular errors in degrees.
std::vector<double> stage_improvement_ratio(
    const std::vector<std::vector<double>>& stage_errors);

struct CascadeStudyRow {
    int stages = 0;
    ErrorReport report;
};

// Trains one model per requested cascade size on a fixed train/test split
// with identical seeds and configs.
std::vector<CascadeStudyRow> cascade_size_study(const std::vector<int>& sizes,
                                                const std::vector<Sample>& train_set,
                                                const std::vector<Sample>& test_set,
                                                const RunConfig& config);

// Report emission: CSV rows and an aligned plain-text table with the
// benchmark columns (Mean, Median, Tri-mean, Best 25%, Worst 25%).
void write_report_csv(const std::vector<std::pair<std::string, ErrorReport>>& rows,
                      const std::string& path);
std::string format_report_table(const std::vector<std::pair<std::string, ErrorReport>>& rows);

// Worker cap: C4_THREADS env var, defaulting to the hardware concurrency.
int worker_cap();

} // namespace c4
