#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "calib/core.hpp"
#include "calib/harness.hpp"
#include "calib/io.hpp"
#include "calib/rng.hpp"

using namespace calib;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("calib_io_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("CSV parsing") {
    TempDir dir;
    const std::string path = dir.file("preds.csv");
    write_text(path, "label,score_0,score_1\n0,0.7,0.3\n");
    const PredictionSet ps = parse_predictions(path, FileFormat::CSV, ScoreKind::Probabilities);
    CHECK(ps.size() == 1);
    CHECK(ps.class_count == 2);
    CHECK(ps.scores(0, 0) == doctest::Approx(0.7));
    CHECK(ps.labels[0] == 0);
}

TEST_CASE("CSV rejects bad rows with a line number") {
    TempDir dir;
    const std::string path = dir.file("bad.csv");

    write_text(path, "label,score_0,score_1\n1,0.7,0.4\n");
    CHECK_THROWS_AS(parse_predictions(path, FileFormat::CSV, ScoreKind::Probabilities),
                    parse_error);

    write_text(path, "label,score_0,score_1\n0,0.7\n");
    CHECK_THROWS_WITH_AS(parse_predictions(path, FileFormat::CSV, ScoreKind::Probabilities),
                         doctest::Contains("line 2"), parse_error);

    write_text(path, "label,score_0,score_1\n0,abc,0.3\n");
    CHECK_THROWS_WITH_AS(parse_predictions(path, FileFormat::CSV, ScoreKind::Probabilities),
                         doctest::Contains("line 2"), parse_error);

    write_text(path, "label,score_0,score_1\n5,0.7,0.3\n");
    CHECK_THROWS_AS(parse_predictions(path, FileFormat::CSV, ScoreKind::Probabilities),
                    parse_error);

    write_text(path, "");
    CHECK_THROWS_AS(parse_predictions(path, FileFormat::CSV, ScoreKind::Probabilities),
                    parse_error);
}

TEST_CASE("JSONL parsing") {
    TempDir dir;
    const std::string path = dir.file("preds.jsonl");
    write_text(path, "{\"label\": 1, \"scores\": [0.25, 0.75]}\n"
                     "{\"label\": 0, \"scores\": [0.6, 0.4]}\n");
    const PredictionSet ps = parse_predictions(path, FileFormat::JSONL, ScoreKind::Probabilities);
    CHECK(ps.size() == 2);
    CHECK(ps.scores(0, 1) == doctest::Approx(0.75));

    write_text(path, "{\"label\": 0, \"scores\": [0.6, 0.4]}\n{\"label\": 0}\n");
    CHECK_THROWS_WITH_AS(parse_predictions(path, FileFormat::JSONL, ScoreKind::Probabilities),
                         doctest::Contains("line 2"), parse_error);
}

TEST_CASE("prediction files round-trip") {
    Rng rng(61);
    const int n = 40, C = 4;
    Matrix p(n, C);
    LabelVector y(n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int c = 0; c < C; ++c) {
            p(i, c) = -std::log(1.0 - rng.uniform());
            sum += p(i, c);
        }
        p.row(i) /= sum;
        y[i] = static_cast<int>(rng.index(C));
    }
    const PredictionSet ps(p, ScoreKind::Probabilities, y);

    TempDir dir;
    for (FileFormat fmt : {FileFormat::CSV, FileFormat::JSONL}) {
        const std::string path =
            dir.file(fmt == FileFormat::CSV ? "roundtrip.csv" : "roundtrip.jsonl");
        write_predictions(ps, path, fmt);
        const PredictionSet back = parse_predictions(path, fmt, ScoreKind::Probabilities);
        CHECK(back.labels == ps.labels);
        CHECK((back.scores - ps.scores).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("format inference") {
    CHECK(infer_format("a.csv") == FileFormat::CSV);
    CHECK(infer_format("a.jsonl") == FileFormat::JSONL);
    CHECK(infer_format("a.json") == FileFormat::JSONL);
    CHECK(infer_format("a.txt") == FileFormat::CSV);
}

TEST_CASE("report JSON round-trips exactly") {
    const auto [val, test] = synthesize_predictions(300, 3, 2.0, 9);
    EvalConfig cfg;
    cfg.seed = 31;
    cfg.balanced = true;
    const EvaluationReport report =
        compare_methods(test, val, {Method::Temperature, Method::Isotonic}, cfg);
    const std::string text = report_to_json(report);
    const EvaluationReport back = parse_report(text);
    CHECK(report_to_json(back) == text);
    CHECK(back.methods.size() == report.methods.size());
    CHECK(back.methods[1].ece.mean == report.methods[1].ece.mean);
}

TEST_CASE("text table uses the mean (std) cell style") {
    EvaluationReport report;
    report.class_count = 4;
    report.random_guess_accuracy = 0.25;
    MethodReport mr;
    mr.name = "original";
    mr.ece = {0.0440, 0.0121, 10};
    mr.accuracy = {0.3509, 0.0094, 10};
    mr.ece_odds = {0.1712, 0.0502, 10};
    mr.nll = {1.2, 0.1, 10};
    mr.brier = {0.6, 0.05, 10};
    report.methods.push_back(mr);
    const std::string table = report_to_text(report);
    CHECK(table.find("4.40 (01.21)") != std::string::npos);
    CHECK(table.find("35.09 (00.94)") != std::string::npos);
    CHECK(table.find("17.12 (05.02)") != std::string::npos);
    CHECK(table.find("25.00") != std::string::npos);
}

TEST_CASE("diagram rendering is deterministic and annotated") {
    const auto [val, test] = synthesize_predictions(500, 4, 2.0, 3);
    EvalConfig cfg;
    cfg.seed = 8;
    FittedCalibrator identity;
    identity.params = IdentityParams{};
    const EvaluationReport report =
        bootstrap_evaluate(test, {{"original", identity}}, cfg);
    const DiagramSpec spec = diagram_spec(report.methods.front(), report.class_count);
    const std::string a = render_diagram(spec);
    const std::string b = render_diagram(spec);
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(a.find("confidence") != std::string::npos);
    CHECK(a.find("accuracy") != std::string::npos);
    CHECK(a.find("polyline") != std::string::npos);
}

TEST_CASE("perfectly calibrated bins sit on the diagonal") {
    DiagramSpec spec;
    spec.class_count = 4;
    for (int k = 0; k < 15; ++k) {
        BinBand b;
        b.lower = k / 15.0;
        b.upper = (k + 1) / 15.0;
        b.mean_confidence = (b.lower + b.upper) / 2;
        b.mean_accuracy = b.mean_confidence;
        b.std_accuracy = 0.0;
        b.mean_mass = 1.0;
        b.nonempty_replicates = 10;
        spec.bins.push_back(b);
    }
    const std::string svg = render_diagram(spec);
    // circle centers must satisfy y = T + (1 - v) * ph when x = L + v * pw,
    // i.e. cx + cy is constant along the diagonal of the 480x480 plot area
    std::size_t pos = 0;
    int circles = 0;
    while ((pos = svg.find("<circle cx=\"", pos)) != std::string::npos) {
        pos += 12;
        const double cx = std::stod(svg.substr(pos));
        const std::size_t cy_pos = svg.find("cy=\"", pos) + 4;
        const double cy = std::stod(svg.substr(cy_pos));
        CHECK(cx + cy == doctest::Approx(560.0).epsilon(0.01));  // L + T + pw = 60+20+480
        ++circles;
    }
    CHECK(circles == 15);
}

TEST_CASE("calibrator save/load") {
    TempDir dir;
    FittedCalibrator cal;
    cal.params = TemperatureParams{2.5};
    cal.fit_metadata.objective = Objective::Brier;
    const std::string path = dir.file("cal.json");
    save_calibrator(cal, path);
    const FittedCalibrator back = load_calibrator(path);
    CHECK(back.method() == Method::Temperature);
    CHECK(std::get<TemperatureParams>(back.params).t == doctest::Approx(2.5));
    CHECK(back.fit_metadata.objective == Objective::Brier);
}
