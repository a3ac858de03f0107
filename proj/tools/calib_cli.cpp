#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calib/core.hpp"
#include "calib/harness.hpp"
#include "calib/io.hpp"
#include "calib/metrics.hpp"
#include "calib/stats.hpp"

#include <json.hpp>

namespace {

calib::ScoreKind kind_from_flag(const std::string& s) {
    if (s == "logits")
        return calib::ScoreKind::Logits;
    if (s == "probs")
        return calib::ScoreKind::Probabilities;
    throw CLI::ValidationError("--scores", "must be 'logits' or 'probs'");
}

int run(int argc, char** argv) {
    CLI::App app{"Classifier calibration toolkit: evaluation, recalibration, diagrams"};
    app.require_subcommand(1);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Bootstrap-evaluate a prediction file");
    std::string ev_predictions, ev_scores = "probs", ev_output;
    calib::EvalConfig ev_cfg;
    evaluate->add_option("--predictions", ev_predictions, "Prediction file (CSV or JSONL)")
        ->required();
    evaluate->add_option("--scores", ev_scores, "Score kind: logits|probs");
    evaluate->add_option("--bins", ev_cfg.bin_count, "Reliability bins");
    evaluate->add_option("--threshold", ev_cfg.threshold, "Confidence threshold for ECE>=tau");
    evaluate->add_flag("--balanced", ev_cfg.balanced, "Class-balanced weighting");
    evaluate->add_option("--bootstrap", ev_cfg.replicates, "Bootstrap replicates");
    evaluate->add_option("--seed", ev_cfg.seed, "RNG seed");
    evaluate->add_option("--output", ev_output, "Write JSON report here");

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "Fit a calibrator and apply it");
    std::string ca_fit, ca_apply, ca_method, ca_objective = "nll", ca_scores = "probs";
    std::string ca_output, ca_save;
    bool ca_renorm = false, ca_balanced = false;
    int ca_bins = 15;
    cal_cmd->add_option("--fit", ca_fit, "Validation prediction file")->required();
    cal_cmd->add_option("--apply", ca_apply, "Prediction file to calibrate")->required();
    cal_cmd->add_option("--method", ca_method, "temperature|histogram|isotonic|identity")
        ->required();
    cal_cmd->add_option("--objective", ca_objective, "nll|brier (temperature)");
    cal_cmd->add_option("--scores", ca_scores, "Score kind: logits|probs");
    cal_cmd->add_option("--bins", ca_bins, "Bins for histogram binning");
    cal_cmd->add_flag("--renormalize", ca_renorm, "Renormalize one-vs-all outputs");
    cal_cmd->add_flag("--balanced", ca_balanced, "Class-balanced fit weights");
    cal_cmd->add_option("--output", ca_output, "Calibrated predictions CSV")->required();
    cal_cmd->add_option("--save-calibrator", ca_save, "Write fitted calibrator JSON here");

    // diagram
    auto* diagram = app.add_subcommand("diagram", "Render a reliability diagram as SVG");
    std::string di_predictions, di_scores = "probs", di_calibrator, di_svg;
    calib::EvalConfig di_cfg;
    diagram->add_option("--predictions", di_predictions, "Prediction file")->required();
    diagram->add_option("--scores", di_scores, "Score kind: logits|probs");
    diagram->add_option("--calibrator", di_calibrator, "Apply this saved calibrator first");
    diagram->add_option("--bins", di_cfg.bin_count, "Reliability bins");
    diagram->add_option("--bootstrap", di_cfg.replicates, "Bootstrap replicates for the band");
    diagram->add_option("--seed", di_cfg.seed, "RNG seed");
    diagram->add_flag("--balanced", di_cfg.balanced, "Class-balanced weighting");
    diagram->add_option("--svg", di_svg, "Output SVG path")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "Class-dispersion statistics of the labels");
    std::string st_predictions, st_scores = "probs";
    stats->add_option("--predictions", st_predictions, "Prediction file")->required();
    stats->add_option("--scores", st_scores, "Score kind: logits|probs");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic miscalibrated set");
    int sy_n = 10000, sy_classes = 4;
    double sy_temperature = 2.5;
    std::uint64_t sy_seed = 0;
    std::string sy_val, sy_test;
    synth->add_option("--n", sy_n, "Total examples (split half/half)");
    synth->add_option("--classes", sy_classes, "Class count");
    synth->add_option("--temperature", sy_temperature, "True miscalibration temperature");
    synth->add_option("--seed", sy_seed, "RNG seed");
    synth->add_option("--out-val", sy_val, "Validation split output (logits CSV)")->required();
    synth->add_option("--out-test", sy_test, "Test split output (logits CSV)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    if (*evaluate) {
        const auto ps = calib::parse_predictions(ev_predictions, calib::infer_format(ev_predictions),
                                                 kind_from_flag(ev_scores));
        calib::FittedCalibrator identity;
        identity.params = calib::IdentityParams{};
        const auto report = calib::bootstrap_evaluate(ps, {{"original", identity}}, ev_cfg);
        std::cout << calib::report_to_text(report);
        if (!ev_output.empty())
            calib::write_report(report, ev_output);
        return 0;
    }

    if (*cal_cmd) {
        const auto kind = kind_from_flag(ca_scores);
        const auto val = calib::parse_predictions(ca_fit, calib::infer_format(ca_fit), kind);
        const auto test = calib::parse_predictions(ca_apply, calib::infer_format(ca_apply), kind);
        calib::FitConfig fit_cfg;
        fit_cfg.objective = calib::objective_from_string(ca_objective);
        fit_cfg.bin_count = ca_bins;
        const calib::Vector weights =
            ca_balanced
                ? calib::balanced_weights(val.labels, val.class_count).per_example(val.labels)
                : calib::Vector::Ones(val.size());
        const auto cal =
            calib::fit(calib::method_from_string(ca_method), val, fit_cfg, weights);
        const auto out = calib::calibrate(cal, test, ca_renorm);
        calib::write_predictions(out, ca_output, calib::infer_format(ca_output));
        if (!ca_save.empty())
            calib::save_calibrator(cal, ca_save);
        for (const auto& w : cal.fit_metadata.warnings)
            std::cerr << "warning: " << w << "\n";
        return 0;
    }

    if (*diagram) {
        const auto ps = calib::parse_predictions(di_predictions, calib::infer_format(di_predictions),
                                                 kind_from_flag(di_scores));
        calib::FittedCalibrator cal;
        cal.params = calib::IdentityParams{};
        std::string name = "original";
        if (!di_calibrator.empty()) {
            cal = calib::load_calibrator(di_calibrator);
            name = calib::to_string(cal.method());
        }
        const auto report = calib::bootstrap_evaluate(ps, {{name, cal}}, di_cfg);
        calib::write_diagram(calib::diagram_spec(report.methods.front(), report.class_count),
                             di_svg);
        return 0;
    }

    if (*stats) {
        const auto ps = calib::parse_predictions(st_predictions, calib::infer_format(st_predictions),
                                                 kind_from_flag(st_scores));
        const auto s = calib::dispersion(ps.labels, ps.class_count);
        nlohmann::json doc = {{"class_count", s.class_count},
                              {"present_classes", s.present_classes},
                              {"imbalance_ratio", s.imbalance_ratio},
                              {"entropy", s.entropy},
                              {"simpson", s.simpson},
                              {"simpson_vs_balanced", s.simpson_vs_balanced},
                              {"effective_classes", s.effective_classes}};
        std::cout << doc.dump(2) << "\n";
        return 0;
    }

    if (*synth) {
        auto [val, test] = calib::synthesize_predictions(sy_n, sy_classes, sy_temperature, sy_seed);
        calib::write_predictions(val, sy_val, calib::infer_format(sy_val));
        calib::write_predictions(test, sy_test, calib::infer_format(sy_test));
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const calib::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const calib::invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const calib::empty_selection& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
