#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "calib/types.hpp"

namespace calib {

enum class Method { Identity, Temperature, HistogramBinning, Isotonic };
enum class Objective { NLL, Brier };

std::string to_string(Method m);
std::string to_string(Objective o);
Method method_from_string(const std::string& s);
Objective objective_from_string(const std::string& s);

struct IdentityParams {};

struct TemperatureParams {
    double t = 1.0;
};

// One lookup table per class (one-vs-all); empty bins fall back to the
// class's overall weighted positive rate.
struct HistogramParams {
    int bin_count = 0;
    Matrix bin_values;  // C x m
    Vector fallback;    // length C
};

// Per-class monotone step functions stored as (score, value) breakpoints,
// scores strictly increasing, values nondecreasing.
struct IsotonicParams {
    std::vector<std::vector<std::pair<double, double>>> curves;
};

struct FitMetadata {
    std::optional<Objective> objective;
    Eigen::Index fit_size = 0;
    double achieved_objective = 0.0;
    std::vector<std::string> warnings;
};

struct FittedCalibrator {
    std::variant<IdentityParams, TemperatureParams, HistogramParams, IsotonicParams> params;
    FitMetadata fit_metadata;

    Method method() const;

    std::string to_json() const;
    static FittedCalibrator from_json(const std::string& text);
};

struct FitConfig {
    Objective objective = Objective::NLL;
    int bin_count = 15;
    double logit_eps = 1e-12;
};

// Minimizes the weighted objective of softmax(logits / t) by golden-section
// search on log t over t in [1e-3, 1e3], relative tolerance 1e-6. A result
// clamped at a bracket bound is recorded as a warning, not a failure.
FittedCalibrator fit_temperature(const PredictionSet& val, Objective objective,
                                 const Vector& weights);

// softmax(logits / t); never changes any row's argmax.
PredictionSet apply_temperature(const FittedCalibrator& cal, const PredictionSet& ps);

// Per class, maps each confidence bin of the class column to the weighted
// positive rate of that class among fit examples in the bin.
FittedCalibrator fit_histogram_binning(const PredictionSet& val, int bin_count,
                                       const Vector& weights);

// Per class, weighted pool-adjacent-violators of 1[y = c] against the class
// column, equal scores pre-pooled.
FittedCalibrator fit_isotonic(const PredictionSet& val, const Vector& weights);

// Applies a per-class map (HistogramBinning: bin lookup; Isotonic:
// piecewise-linear interpolation clamped at the extremes). Rows are not
// renormalized unless requested; a zero row renormalizes to uniform.
PredictionSet apply_map(const FittedCalibrator& cal, const PredictionSet& ps,
                        bool renormalize = false);

// Uniform dispatch over the four methods.
FittedCalibrator fit(Method method, const PredictionSet& val, const FitConfig& config,
                     const Vector& weights);
PredictionSet calibrate(const FittedCalibrator& cal, const PredictionSet& ps,
                        bool renormalize = false);

// Weighted monotone least-squares on (score, target, weight) triples sorted
// by score; returns (score, fitted value) breakpoints. Exposed for tests.
std::vector<std::pair<double, double>> pava_fit(std::vector<double> scores,
                                                std::vector<double> targets,
                                                std::vector<double> weights);

}  // namespace calib
