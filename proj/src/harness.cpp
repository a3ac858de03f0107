#include "calib/harness.hpp"

#include <algorithm>
#include <cmath>

#include "calib/core.hpp"
#include "calib/metrics.hpp"
#include "calib/rng.hpp"

namespace calib {

namespace {

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    s.samples = static_cast<int>(values.size());
    if (values.empty())
        return s;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = sum / values.size();
    double sq = 0.0;
    for (double v : values)
        sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / values.size());
    return s;
}

// Per-method precomputation over the full test set; replicates only gather.
struct MethodData {
    Vector confidence;
    Eigen::Array<bool, Eigen::Dynamic, 1> correct;
    Vector nll_terms;    // -log clip(p[y])
    Vector brier_terms;  // sum_c (p[c] - 1[y=c])^2
    std::vector<int> bin;
};

MethodData precompute(const PredictionSet& calibrated, int bin_count) {
    MethodData d;
    const Matrix& p = calibrated.scores;
    const Eigen::Index n = p.rows();
    const PredictionView pv = view(calibrated);
    d.confidence = pv.confidence;
    d.correct = pv.correct;
    d.nll_terms.resize(n);
    d.brier_terms.resize(n);
    d.bin.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.nll_terms[i] = -std::log(std::clamp(p(i, calibrated.labels[i]), 1e-12, 1.0));
        double row = 0.0;
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            const double diff = p(i, c) - (calibrated.labels[i] == c ? 1.0 : 0.0);
            row += diff * diff;
        }
        d.brier_terms[i] = row;
        d.bin[i] = std::min(static_cast<int>(pv.confidence[i] * bin_count), bin_count - 1);
    }
    return d;
}

}  // namespace

void EvalConfig::validate() const {
    if (replicates < 1)
        throw invalid_input("replicates must be >= 1");
    if (bin_count < 1 || bin_count > 1000)
        throw invalid_input("bin count must be in [1, 1000]");
    if (threshold < 0.0 || threshold >= 1.0)
        throw invalid_input("threshold must be in [0, 1)");
}

EvaluationReport bootstrap_evaluate(const PredictionSet& test,
                                    const std::vector<NamedCalibrator>& calibrators,
                                    const EvalConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = test.size();
    const int m = cfg.bin_count;

    const Vector weights = cfg.balanced
        ? balanced_weights(test.labels, test.class_count).per_example(test.labels)
        : Vector::Ones(n);

    EvaluationReport report;
    report.config = cfg;
    report.class_count = test.class_count;
    report.test_size = n;
    report.random_guess_accuracy = 1.0 / test.class_count;

    struct Accum {
        std::vector<double> accuracy, ece, ece_odds, nll, brier;
        int odds_excluded = 0;
        // per bin, per replicate stats (only nonempty recorded for acc/conf)
        std::vector<std::vector<double>> bin_acc, bin_conf;
        std::vector<double> bin_mass_sum;
        std::vector<int> bin_nonempty;
    };

    std::vector<MethodData> data;
    std::vector<Accum> accum(calibrators.size());
    for (const auto& nc : calibrators) {
        data.push_back(precompute(calibrate(nc.calibrator, test), m));
    }
    for (Accum& a : accum) {
        a.bin_acc.resize(m);
        a.bin_conf.resize(m);
        a.bin_mass_sum.assign(m, 0.0);
        a.bin_nonempty.assign(m, 0);
    }

    std::vector<Eigen::Index> idx(n);
    for (int r = 1; r <= cfg.replicates; ++r) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(r));
        for (Eigen::Index i = 0; i < n; ++i)
            idx[i] = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));

        for (std::size_t mi = 0; mi < calibrators.size(); ++mi) {
            const MethodData& d = data[mi];
            Accum& a = accum[mi];

            double w_total = 0.0, w_correct = 0.0, w_nll = 0.0, w_brier = 0.0;
            Vector mass = Vector::Zero(m), conf_sum = Vector::Zero(m), acc_sum = Vector::Zero(m);
            double odds_mass = 0.0, odds_gap_num = 0.0;
            Vector odds_mass_bin = Vector::Zero(m), odds_conf = Vector::Zero(m),
                   odds_acc = Vector::Zero(m);
            for (Eigen::Index j : idx) {
                const double w = weights[j];
                w_total += w;
                if (d.correct[j])
                    w_correct += w;
                w_nll += w * d.nll_terms[j];
                w_brier += w * d.brier_terms[j];
                const int k = d.bin[j];
                mass[k] += w;
                conf_sum[k] += w * d.confidence[j];
                if (d.correct[j])
                    acc_sum[k] += w;
                if (d.confidence[j] >= cfg.threshold) {
                    odds_mass_bin[k] += w;
                    odds_conf[k] += w * d.confidence[j];
                    if (d.correct[j])
                        odds_acc[k] += w;
                    odds_mass += w;
                }
            }
            a.accuracy.push_back(w_correct / w_total);
            a.nll.push_back(w_nll / w_total);
            a.brier.push_back(w_brier / w_total);

            double ece_val = 0.0;
            for (int k = 0; k < m; ++k)
                if (mass[k] > 0.0)
                    ece_val += mass[k] / w_total *
                               std::abs(acc_sum[k] / mass[k] - conf_sum[k] / mass[k]);
            a.ece.push_back(ece_val);

            if (odds_mass > 0.0) {
                odds_gap_num = 0.0;
                for (int k = 0; k < m; ++k)
                    if (odds_mass_bin[k] > 0.0)
                        odds_gap_num += odds_mass_bin[k] *
                                        std::abs(odds_acc[k] / odds_mass_bin[k] -
                                                 odds_conf[k] / odds_mass_bin[k]);
                a.ece_odds.push_back(odds_gap_num / odds_mass);
            } else {
                ++a.odds_excluded;
            }

            for (int k = 0; k < m; ++k) {
                a.bin_mass_sum[k] += mass[k];
                if (mass[k] > 0.0) {
                    ++a.bin_nonempty[k];
                    a.bin_acc[k].push_back(acc_sum[k] / mass[k]);
                    a.bin_conf[k].push_back(conf_sum[k] / mass[k]);
                }
            }
        }
    }

    for (std::size_t mi = 0; mi < calibrators.size(); ++mi) {
        const Accum& a = accum[mi];
        MethodReport mr;
        mr.name = calibrators[mi].name;
        mr.accuracy = summarize(a.accuracy);
        mr.ece = summarize(a.ece);
        mr.ece_odds = summarize(a.ece_odds);
        mr.nll = summarize(a.nll);
        mr.brier = summarize(a.brier);
        mr.ece_odds_excluded = a.odds_excluded;
        const FittedCalibrator& cal = calibrators[mi].calibrator;
        if (const auto* t = std::get_if<TemperatureParams>(&cal.params))
            mr.temperature = t->t;
        if (cal.method() != Method::Identity || cal.fit_metadata.fit_size > 0)
            mr.fit_meta = cal.fit_metadata;
        mr.diagram.resize(m);
        for (int k = 0; k < m; ++k) {
            BinBand& b = mr.diagram[k];
            b.lower = static_cast<double>(k) / m;
            b.upper = static_cast<double>(k + 1) / m;
            b.mean_mass = a.bin_mass_sum[k] / cfg.replicates;
            b.nonempty_replicates = a.bin_nonempty[k];
            const MetricSummary acc = summarize(a.bin_acc[k]);
            const MetricSummary conf = summarize(a.bin_conf[k]);
            b.mean_accuracy = acc.mean;
            b.std_accuracy = acc.stddev;
            b.mean_confidence = conf.mean;
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

std::pair<PredictionSet, PredictionSet> synthesize_predictions(int n, int class_count,
                                                               double t_true,
                                                               std::uint64_t seed) {
    if (n < 2)
        throw invalid_input("synthesize_predictions needs n >= 2");
    if (class_count < 2)
        throw invalid_input("synthesize_predictions needs at least 2 classes");
    if (t_true <= 0.0)
        throw invalid_input("true temperature must be positive");

    Rng rng(seed, 0);
    Matrix z(n, class_count);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < class_count; ++c)
            z(i, c) = rng.normal();
    const Matrix p = softmax(z / t_true);
    LabelVector labels(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double cum = 0.0;
        int y = class_count - 1;
        for (int c = 0; c < class_count; ++c) {
            cum += p(i, c);
            if (u < cum) {
                y = c;
                break;
            }
        }
        labels[i] = y;
    }

    const int n_val = (n + 1) / 2;
    const int n_test = n - n_val;
    PredictionSet val(z.topRows(n_val), ScoreKind::Logits, labels.head(n_val));
    PredictionSet test(z.bottomRows(n_test), ScoreKind::Logits, labels.tail(n_test));
    return {std::move(val), std::move(test)};
}

EvaluationReport compare_methods(const PredictionSet& test, const PredictionSet& val,
                                 const std::vector<Method>& methods, const EvalConfig& cfg) {
    cfg.validate();
    const Vector fit_weights = cfg.balanced
        ? balanced_weights(val.labels, val.class_count).per_example(val.labels)
        : Vector::Ones(val.size());

    std::vector<NamedCalibrator> fitted;
    std::vector<MethodReport> failures;
    FittedCalibrator identity;
    identity.params = IdentityParams{};
    fitted.push_back({"original", identity});

    FitConfig fit_cfg;
    fit_cfg.objective = cfg.objective;
    fit_cfg.bin_count = cfg.bin_count;
    for (Method m : methods) {
        if (m == Method::Identity)
            continue;  // always present as "original"
        std::string name = to_string(m);
        if (m == Method::Temperature)
            name += "-" + to_string(cfg.objective);
        try {
            fitted.push_back({name, fit(m, val, fit_cfg, fit_weights)});
        } catch (const std::exception& e) {
            MethodReport mr;
            mr.name = name;
            mr.error = e.what();
            failures.push_back(std::move(mr));
        }
    }

    EvaluationReport report = bootstrap_evaluate(test, fitted, cfg);
    for (MethodReport& mr : failures)
        report.methods.push_back(std::move(mr));
    return report;
}

}  // namespace calib
