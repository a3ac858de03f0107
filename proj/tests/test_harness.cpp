#include <doctest.h>

#include <cmath>

#include "calib/core.hpp"
#include "calib/harness.hpp"
#include "calib/io.hpp"
#include "calib/metrics.hpp"

using namespace calib;

namespace {

NamedCalibrator identity_method() {
    FittedCalibrator cal;
    cal.params = IdentityParams{};
    return {"original", cal};
}

}  // namespace

TEST_CASE("bootstrapping a constant perfect predictor") {
    const int n = 50;
    Matrix p(n, 2);
    LabelVector y(n);
    for (int i = 0; i < n; ++i) {
        p.row(i) << 1.0, 0.0;
        y[i] = 0;
    }
    const PredictionSet test(p, ScoreKind::Probabilities, y);
    EvalConfig cfg;
    cfg.replicates = 10;
    cfg.seed = 3;
    const EvaluationReport report = bootstrap_evaluate(test, {identity_method()}, cfg);
    const MethodReport& mr = report.methods.front();
    CHECK(mr.accuracy.mean == doctest::Approx(1.0));
    CHECK(mr.accuracy.stddev == 0.0);
    CHECK(mr.ece.mean == doctest::Approx(0.0));
    CHECK(mr.ece.stddev == 0.0);
    CHECK(mr.ece_odds_excluded == 0);
}

TEST_CASE("identical config and seed reproduce the report bitwise") {
    const auto [val, test] = synthesize_predictions(400, 3, 2.0, 19);
    EvalConfig cfg;
    cfg.seed = 1234;
    const std::string a = report_to_json(bootstrap_evaluate(test, {identity_method()}, cfg));
    const std::string b = report_to_json(bootstrap_evaluate(test, {identity_method()}, cfg));
    CHECK(a == b);
}

TEST_CASE("replicates with no better-than-odds prediction are excluded") {
    const int n = 20;
    Matrix p(n, 3);
    LabelVector y(n);
    for (int i = 0; i < n; ++i) {
        p.row(i) << 0.4, 0.3, 0.3;
        y[i] = 0;
    }
    const PredictionSet test(p, ScoreKind::Probabilities, y);
    EvalConfig cfg;
    cfg.replicates = 5;
    const EvaluationReport report = bootstrap_evaluate(test, {identity_method()}, cfg);
    const MethodReport& mr = report.methods.front();
    CHECK(mr.ece_odds_excluded == 5);
    CHECK(mr.ece_odds.samples == 0);
    CHECK(mr.accuracy.samples == 5);  // the other metrics are unaffected
}

TEST_CASE("synthesized predictions are reproducible and split correctly") {
    const auto [val_a, test_a] = synthesize_predictions(101, 4, 2.5, 77);
    const auto [val_b, test_b] = synthesize_predictions(101, 4, 2.5, 77);
    CHECK(val_a.scores.isApprox(val_b.scores, 0.0));
    CHECK(test_a.scores.isApprox(test_b.scores, 0.0));
    CHECK(val_a.labels == val_b.labels);
    CHECK(val_a.size() == 51);
    CHECK(test_a.size() == 50);
    CHECK(val_a.kind == ScoreKind::Logits);

    const auto [val_c, test_c] = synthesize_predictions(101, 4, 2.5, 78);
    CHECK_FALSE(val_a.scores.isApprox(val_c.scores, 1e-12));
}

TEST_CASE("temperature scaling lowers bootstrap-mean ece on the synthetic set") {
    const auto [val, test] = synthesize_predictions(10000, 4, 2.5, 42);
    EvalConfig cfg;
    cfg.seed = 42;
    const EvaluationReport report =
        compare_methods(test, val, {Method::Temperature}, cfg);
    REQUIRE(report.methods.size() == 2);
    const MethodReport& original = report.methods[0];
    const MethodReport& scaled = report.methods[1];
    CHECK(original.name == "original");
    CHECK(scaled.name == "temperature-nll");
    CHECK(scaled.ece.mean < original.ece.mean);
    CHECK(scaled.temperature.has_value());
}

TEST_CASE("compare_methods with only the identity reports one method") {
    const auto [val, test] = synthesize_predictions(200, 4, 1.5, 5);
    EvalConfig cfg;
    const EvaluationReport report = compare_methods(test, val, {Method::Identity}, cfg);
    REQUIRE(report.methods.size() == 1);
    CHECK(report.methods[0].name == "original");
    CHECK(report.random_guess_accuracy == doctest::Approx(0.25));
}

TEST_CASE("a failing fit does not abort the other methods") {
    // single-example validation set: temperature fit requires n >= 2
    Matrix p(1, 2);
    p << 0.6, 0.4;
    LabelVector y(1);
    y << 0;
    const PredictionSet val(p, ScoreKind::Probabilities, y);
    const auto [ignored, test] = synthesize_predictions(100, 2, 1.0, 1);
    EvalConfig cfg;
    const EvaluationReport report =
        compare_methods(test, val, {Method::Temperature, Method::HistogramBinning}, cfg);
    REQUIRE(report.methods.size() == 3);
    bool saw_error = false, saw_histogram = false;
    for (const MethodReport& mr : report.methods) {
        if (mr.error)
            saw_error = true;
        if (mr.name == "histogram" && !mr.error)
            saw_histogram = true;
    }
    CHECK(saw_error);
    CHECK(saw_histogram);
}

TEST_CASE("balanced weighting comes from the full test distribution") {
    // class-1-blind predictor over a 90/10 split
    const int n = 100;
    Matrix p(n, 2);
    LabelVector y(n);
    for (int i = 0; i < n; ++i) {
        p.row(i) << 1.0, 0.0;
        y[i] = i < 90 ? 0 : 1;
    }
    const PredictionSet test(p, ScoreKind::Probabilities, y);
    EvalConfig cfg;
    cfg.replicates = 1;
    cfg.seed = 0;
    cfg.balanced = true;
    // replicate 1 resamples, but the class weights stay fixed from the full set;
    // check the exact values on the unresampled metrics instead
    const Vector w = balanced_weights(test.labels, 2).per_example(test.labels);
    CHECK(accuracy(view(test), w) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(accuracy(view(test), Vector::Ones(n)) == doctest::Approx(0.9).epsilon(1e-12));
    // and the bootstrap path still runs without a divide-by-zero even if a
    // resample drops class 1 entirely
    const EvaluationReport report = bootstrap_evaluate(test, {identity_method()}, cfg);
    CHECK(report.methods.front().accuracy.samples == 1);
}
