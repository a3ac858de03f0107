#include "calib/core.hpp"

#include <cmath>

namespace calib {

PredictionSet::PredictionSet(Matrix scores_in, ScoreKind kind_in, LabelVector labels_in)
    : scores(std::move(scores_in)), kind(kind_in), labels(std::move(labels_in)) {
    if (scores.rows() < 1)
        throw invalid_input("prediction set needs at least one example");
    if (scores.cols() < 2)
        throw invalid_input("prediction set needs at least two classes");
    if (labels.size() != scores.rows())
        throw invalid_input("label count does not match score rows");
    if (!scores.allFinite())
        throw invalid_input("scores contain non-finite values");
    class_count = static_cast<int>(scores.cols());
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count)
            throw invalid_input("label " + std::to_string(labels[i]) + " out of range at row " +
                                std::to_string(i));
    }
    if (kind == ScoreKind::Probabilities) {
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
            if (scores.row(i).minCoeff() < -kRowSumTolerance || scores.row(i).maxCoeff() > 1.0 + kRowSumTolerance)
                throw invalid_input("probability out of [0,1] at row " + std::to_string(i));
            const double sum = scores.row(i).sum();
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                throw invalid_input("probability row " + std::to_string(i) +
                                    " sums to " + std::to_string(sum));
            scores.row(i) /= sum;
        }
        scores = scores.cwiseMax(0.0).cwiseMin(1.0);
    }
}

Vector ClassWeights::per_example(const LabelVector& labels) const {
    Vector w(labels.size());
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= per_class.size())
            throw invalid_input("label out of range for class weights");
        w[i] = per_class[labels[i]];
    }
    return w;
}

ClassWeights ClassWeights::uniform(int class_count) {
    return ClassWeights{Vector::Ones(class_count)};
}

Matrix softmax(const Matrix& logits) {
    if (!logits.allFinite())
        throw invalid_input("softmax input contains non-finite values");
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const Vector shifted = logits.row(i).transpose().array() - logits.row(i).maxCoeff();
        const Vector e = shifted.array().exp();
        out.row(i) = e.transpose() / e.sum();
    }
    return out;
}

Matrix probabilities(const PredictionSet& ps) {
    return ps.kind == ScoreKind::Logits ? softmax(ps.scores) : ps.scores;
}

Matrix logits(const PredictionSet& ps, double eps) {
    return ps.kind == ScoreKind::Logits ? ps.scores : to_logits(ps.scores, eps);
}

Matrix to_logits(const Matrix& probs, double eps) {
    return probs.cwiseMax(eps).cwiseMin(1.0).array().log();
}

PredictionView view(const PredictionSet& ps) {
    const Matrix p = probabilities(ps);
    const Eigen::Index n = p.rows();
    PredictionView pv;
    pv.predicted.resize(n);
    pv.confidence.resize(n);
    pv.correct.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        // maxCoeff ties break to the first (lowest) index
        pv.confidence[i] = p.row(i).maxCoeff(&arg);
        pv.predicted[i] = static_cast<int>(arg);
        pv.correct[i] = (pv.predicted[i] == ps.labels[i]);
    }
    return pv;
}

Matrix average_ensemble(const std::vector<Matrix>& members) {
    if (members.empty())
        throw invalid_input("ensemble needs at least one member");
    const Eigen::Index rows = members.front().rows();
    const Eigen::Index cols = members.front().cols();
    Matrix sum = Matrix::Zero(rows, cols);
    for (const Matrix& m : members) {
        if (m.rows() != rows || m.cols() != cols)
            throw invalid_input("ensemble member shape mismatch");
        sum += m;
    }
    return sum / static_cast<double>(members.size());
}

ClassWeights balanced_weights(const LabelVector& labels, int class_count) {
    if (labels.size() < 1)
        throw invalid_input("balanced_weights needs at least one example");
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(class_count);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count)
            throw invalid_input("label out of range in balanced_weights");
        counts[labels[i]] += 1;
    }
    const int present = static_cast<int>((counts.array() > 0).count());
    const double n = static_cast<double>(labels.size());
    Vector per_class = Vector::Zero(class_count);
    for (int c = 0; c < class_count; ++c)
        if (counts[c] > 0)
            per_class[c] = n / (static_cast<double>(present) * counts[c]);
    return ClassWeights{std::move(per_class)};
}

}  // namespace calib
