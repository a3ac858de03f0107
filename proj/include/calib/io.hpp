#pragma once

#include <string>

#include "calib/harness.hpp"
#include "calib/types.hpp"

namespace calib {

enum class FileFormat { CSV, JSONL };

// Picks JSONL for .jsonl / .json paths, CSV otherwise.
FileFormat infer_format(const std::string& path);

// CSV: header `label,score_0,...,score_{C-1}`; JSONL: one
// `{"label": int, "scores": [..]}` object per line. C is inferred from the
// column count. Malformed rows raise parse_error naming the line.
PredictionSet parse_predictions(const std::string& path, FileFormat format,
                                ScoreKind score_kind);

void write_predictions(const PredictionSet& ps, const std::string& path,
                       FileFormat format = FileFormat::CSV);

// Versioned JSON report schema; parse_report inverts report_to_json.
std::string report_to_json(const EvaluationReport& report);
EvaluationReport parse_report(const std::string& text);
void write_report(const EvaluationReport& report, const std::string& path);

// Aligned table with "mean (std)" cells; accuracy/ECE columns in percent.
std::string report_to_text(const EvaluationReport& report);

struct DiagramSpec {
    std::vector<BinBand> bins;
    int class_count = 2;
    bool show_diagonal = true;
    bool show_random_guess = true;
    bool show_histogram = true;
};

DiagramSpec diagram_spec(const MethodReport& method, int class_count);

// Self-contained SVG reliability diagram: mean-accuracy polyline with a
// +-1 std band, background confidence histogram, identity diagonal and the
// random-guess line at 1/C. Byte-identical output for identical input.
std::string render_diagram(const DiagramSpec& spec);
void write_diagram(const DiagramSpec& spec, const std::string& path);

void save_calibrator(const FittedCalibrator& cal, const std::string& path);
FittedCalibrator load_calibrator(const std::string& path);

}  // namespace calib
