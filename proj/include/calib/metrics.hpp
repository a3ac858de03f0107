#pragma once

#include <vector>

#include "calib/types.hpp"

namespace calib {

struct BinStat {
    double lower = 0.0;
    double upper = 0.0;
    double weight_mass = 0.0;
    double mean_confidence = 0.0;
    double mean_accuracy = 0.0;

    bool empty() const { return weight_mass <= 0.0; }
};

// Per-bin mass, mean confidence and mean accuracy over examples with
// confidence >= threshold, on m equal-width bins of [0,1].
struct ReliabilityCurve {
    int bin_count = 0;
    double threshold = 0.0;
    std::vector<BinStat> bins;
    double total_weight = 0.0;
    Eigen::Index included_count = 0;
};

// Groups predictions into m equal-width confidence bins [k/m, (k+1)/m),
// last bin closed at 1; only examples with confidence >= tau are included.
// Throws empty_selection when no example meets tau.
ReliabilityCurve bin_predictions(const PredictionView& pv, const Vector& weights,
                                 int bin_count, double tau = 0.0);

// Mass-weighted mean absolute gap between bin accuracy and bin confidence.
double ece(const ReliabilityCurve& curve);

// ECE restricted to predictions with confidence >= tau (default: better than
// odds), renormalized by the included weight only.
double ece_odds(const PredictionSet& ps, const Vector& weights, int bin_count,
                double tau = 0.5);

double accuracy(const PredictionView& pv, const Vector& weights);

// Weighted mean negative log-likelihood; probabilities clipped to
// [1e-12, 1] before the log.
double nll(const PredictionSet& ps, const Vector& weights);

// Weighted mean squared distance between the probability row and the one-hot
// label, summed over classes. Range [0, 2].
double brier(const PredictionSet& ps, const Vector& weights);

}  // namespace calib
