#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calib/calibrators.hpp"
#include "calib/types.hpp"

namespace calib {

struct EvalConfig {
    int replicates = 10;
    std::uint64_t seed = 0;
    int bin_count = 15;
    double threshold = 0.5;  // for ece_odds
    bool balanced = false;
    Objective objective = Objective::NLL;

    void validate() const;
};

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // population std over replicates
    int samples = 0;
};

// Per-bin reliability aggregated over replicates, for the diagram's band.
struct BinBand {
    double lower = 0.0;
    double upper = 0.0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double mean_confidence = 0.0;
    double mean_mass = 0.0;  // average weight mass, zero replicates included
    int nonempty_replicates = 0;
};

struct MethodReport {
    std::string name;
    MetricSummary accuracy;
    MetricSummary ece;
    MetricSummary ece_odds;
    MetricSummary nll;
    MetricSummary brier;
    int ece_odds_excluded = 0;  // replicates with no better-than-odds prediction
    std::vector<BinBand> diagram;
    std::optional<double> temperature;
    std::optional<FitMetadata> fit_meta;
    std::optional<std::string> error;  // fit failure; metrics absent
};

struct EvaluationReport {
    EvalConfig config;
    int class_count = 0;
    Eigen::Index test_size = 0;
    double random_guess_accuracy = 0.0;
    std::vector<MethodReport> methods;
};

struct NamedCalibrator {
    std::string name;
    FittedCalibrator calibrator;
};

// Evaluates every calibrator on `replicates` bootstrap resamples of the test
// set (size n, drawn with replacement from per-replicate substreams of the
// seed) and aggregates mean and population std per metric. Balanced weights,
// when enabled, are computed once from the full test label distribution.
EvaluationReport bootstrap_evaluate(const PredictionSet& test,
                                    const std::vector<NamedCalibrator>& calibrators,
                                    const EvalConfig& cfg);

// Draws n standard-normal logit rows, samples labels from
// softmax(logits / t_true), and splits half/half into (val, test).
std::pair<PredictionSet, PredictionSet> synthesize_predictions(int n, int class_count,
                                                               double t_true,
                                                               std::uint64_t seed);

// Fits each method on val, evaluates all of them (plus the uncalibrated
// "original") on test via bootstrap_evaluate. A method whose fit fails is
// reported with an error and does not abort the others.
EvaluationReport compare_methods(const PredictionSet& test, const PredictionSet& val,
                                 const std::vector<Method>& methods, const EvalConfig& cfg);

}  // namespace calib
