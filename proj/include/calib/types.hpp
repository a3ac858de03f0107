#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace calib {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LabelVector = Eigen::VectorXi;

// Thrown when an input violates a precondition (shape, range, NaN).
class invalid_input : public std::runtime_error {
public:
    explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a confidence threshold excludes every example.
class empty_selection : public std::runtime_error {
public:
    explicit empty_selection(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed prediction files; message carries the line number.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

enum class ScoreKind { Logits, Probabilities };

// An n x C score matrix plus true labels. The universe every metric and
// calibrator operates on. Rows of a Probabilities matrix are renormalized
// on construction if they sum to 1 within kRowSumTolerance.
struct PredictionSet {
    Matrix scores;
    ScoreKind kind = ScoreKind::Probabilities;
    LabelVector labels;
    int class_count = 0;

    static constexpr double kRowSumTolerance = 1e-6;

    PredictionSet() = default;
    PredictionSet(Matrix scores, ScoreKind kind, LabelVector labels);

    Eigen::Index size() const { return scores.rows(); }
};

// Per-class weights realizing balanced evaluation: every present class
// contributes equal total mass, and the weights sum to n over the fit labels.
struct ClassWeights {
    Vector per_class;

    Vector per_example(const LabelVector& labels) const;
    static ClassWeights uniform(int class_count);
};

// Predicted label, confidence (max probability) and correctness per example.
struct PredictionView {
    LabelVector predicted;
    Vector confidence;
    Eigen::Array<bool, Eigen::Dynamic, 1> correct;

    Eigen::Index size() const { return predicted.size(); }
};

}  // namespace calib
