#include "calib/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "calib/core.hpp"

namespace calib {

ReliabilityCurve bin_predictions(const PredictionView& pv, const Vector& weights,
                                 int bin_count, double tau) {
    if (bin_count < 1)
        throw invalid_input("bin count must be >= 1");
    if (tau < 0.0 || tau >= 1.0)
        throw invalid_input("threshold must be in [0, 1)");
    if (weights.size() != pv.size())
        throw invalid_input("weight count does not match prediction count");
    if (weights.minCoeff() < 0.0)
        throw invalid_input("weights must be nonnegative");

    const int m = bin_count;
    Vector mass = Vector::Zero(m);
    Vector conf_sum = Vector::Zero(m);
    Vector acc_sum = Vector::Zero(m);
    Eigen::Index included = 0;
    for (Eigen::Index i = 0; i < pv.size(); ++i) {
        const double c = pv.confidence[i];
        if (c < tau)
            continue;
        ++included;
        const int k = std::min(static_cast<int>(c * m), m - 1);
        mass[k] += weights[i];
        conf_sum[k] += weights[i] * c;
        if (pv.correct[i])
            acc_sum[k] += weights[i];
    }
    const double total = mass.sum();
    if (included == 0 || total <= 0.0)
        throw empty_selection("no prediction with positive weight meets the confidence threshold");

    ReliabilityCurve curve;
    curve.bin_count = m;
    curve.threshold = tau;
    curve.total_weight = total;
    curve.included_count = included;
    curve.bins.resize(m);
    for (int k = 0; k < m; ++k) {
        BinStat& b = curve.bins[k];
        b.lower = static_cast<double>(k) / m;
        b.upper = static_cast<double>(k + 1) / m;
        b.weight_mass = mass[k];
        if (mass[k] > 0.0) {
            b.mean_confidence = conf_sum[k] / mass[k];
            b.mean_accuracy = acc_sum[k] / mass[k];
        }
    }
    return curve;
}

double ece(const ReliabilityCurve& curve) {
    double total = 0.0;
    for (const BinStat& b : curve.bins)
        if (!b.empty())
            total += b.weight_mass / curve.total_weight *
                     std::abs(b.mean_accuracy - b.mean_confidence);
    return total;
}

double ece_odds(const PredictionSet& ps, const Vector& weights, int bin_count, double tau) {
    return ece(bin_predictions(view(ps), weights, bin_count, tau));
}

double accuracy(const PredictionView& pv, const Vector& weights) {
    if (weights.size() != pv.size())
        throw invalid_input("weight count does not match prediction count");
    const double total = weights.sum();
    if (total <= 0.0)
        throw invalid_input("total weight must be positive");
    double correct = 0.0;
    for (Eigen::Index i = 0; i < pv.size(); ++i)
        if (pv.correct[i])
            correct += weights[i];
    return correct / total;
}

double nll(const PredictionSet& ps, const Vector& weights) {
    const double total = weights.sum();
    if (total <= 0.0)
        throw invalid_input("total weight must be positive");
    const Matrix p = probabilities(ps);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        sum -= weights[i] * std::log(std::clamp(p(i, ps.labels[i]), 1e-12, 1.0));
    return sum / total;
}

double brier(const PredictionSet& ps, const Vector& weights) {
    const double total = weights.sum();
    if (total <= 0.0)
        throw invalid_input("total weight must be positive");
    const Matrix p = probabilities(ps);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            const double d = p(i, c) - (ps.labels[i] == c ? 1.0 : 0.0);
            row += d * d;
        }
        sum += weights[i] * row;
    }
    return sum / total;
}

}  // namespace calib
