#include "calib/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace calib {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw parse_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw invalid_input("cannot write " + path);
    out << content;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.push_back("");
    return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw parse_error("line " + std::to_string(line_no) + ": non-numeric field '" + s + "'");
    }
    if (pos != s.size())
        throw parse_error("line " + std::to_string(line_no) + ": non-numeric field '" + s + "'");
    return v;
}

long parse_label(const std::string& s, std::size_t line_no) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw parse_error("line " + std::to_string(line_no) + ": bad label '" + s + "'");
    }
    if (pos != s.size() || v < 0)
        throw parse_error("line " + std::to_string(line_no) + ": bad label '" + s + "'");
    return v;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

json summary_to_json(const MetricSummary& s) {
    return {{"mean", s.mean}, {"std", s.stddev}, {"samples", s.samples}};
}

MetricSummary summary_from_json(const json& j) {
    MetricSummary s;
    s.mean = j.at("mean").get<double>();
    s.stddev = j.at("std").get<double>();
    s.samples = j.at("samples").get<int>();
    return s;
}

}  // namespace

FileFormat infer_format(const std::string& path) {
    if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0)
        return FileFormat::JSONL;
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
        return FileFormat::JSONL;
    return FileFormat::CSV;
}

PredictionSet parse_predictions(const std::string& path, FileFormat format,
                                ScoreKind score_kind) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    Eigen::Index cols = -1;
    std::string line;
    std::size_t line_no = 0;

    if (format == FileFormat::CSV) {
        if (!std::getline(in, line))
            throw parse_error("line 1: empty file " + path);
        ++line_no;
        const auto header = split_csv_line(line);
        if (header.size() < 3 || header[0] != "label")
            throw parse_error("line 1: expected header label,score_0,...");
        cols = static_cast<Eigen::Index>(header.size()) - 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty())
                continue;
            const auto fields = split_csv_line(line);
            if (static_cast<Eigen::Index>(fields.size()) != cols + 1)
                throw parse_error("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(cols + 1) + " fields, got " +
                                  std::to_string(fields.size()));
            labels.push_back(static_cast<int>(parse_label(fields[0], line_no)));
            std::vector<double> row(cols);
            for (Eigen::Index c = 0; c < cols; ++c)
                row[c] = parse_double(fields[c + 1], line_no);
            rows.push_back(std::move(row));
        }
    } else {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty())
                continue;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::exception& e) {
                throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!obj.contains("label") || !obj.contains("scores"))
                throw parse_error("line " + std::to_string(line_no) +
                                  ": object needs label and scores");
            const long label = obj["label"].is_number_integer() ? obj["label"].get<long>() : -1;
            if (label < 0)
                throw parse_error("line " + std::to_string(line_no) + ": bad label");
            std::vector<double> row;
            for (const auto& v : obj["scores"]) {
                if (!v.is_number())
                    throw parse_error("line " + std::to_string(line_no) + ": non-numeric score");
                row.push_back(v.get<double>());
            }
            if (cols < 0)
                cols = static_cast<Eigen::Index>(row.size());
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw parse_error("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(cols) + " scores, got " +
                                  std::to_string(row.size()));
            labels.push_back(static_cast<int>(label));
            rows.push_back(std::move(row));
        }
    }

    if (rows.empty())
        throw parse_error("no prediction rows in " + path);
    if (cols < 2)
        throw parse_error(path + ": need at least two score columns");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= cols)
            throw parse_error("line " + std::to_string(format == FileFormat::CSV ? i + 2 : i + 1) +
                              ": label " + std::to_string(labels[i]) + " >= class count " +
                              std::to_string(cols));

    Matrix scores(rows.size(), cols);
    LabelVector lv(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lv[static_cast<Eigen::Index>(i)] = labels[i];
        for (Eigen::Index c = 0; c < cols; ++c)
            scores(static_cast<Eigen::Index>(i), c) = rows[i][c];
    }
    try {
        return PredictionSet(std::move(scores), score_kind, std::move(lv));
    } catch (const invalid_input& e) {
        throw parse_error(path + ": " + e.what());
    }
}

void write_predictions(const PredictionSet& ps, const std::string& path, FileFormat format) {
    std::ostringstream out;
    char buf[64];
    if (format == FileFormat::CSV) {
        out << "label";
        for (int c = 0; c < ps.class_count; ++c)
            out << ",score_" << c;
        out << "\n";
        for (Eigen::Index i = 0; i < ps.size(); ++i) {
            out << ps.labels[i];
            for (int c = 0; c < ps.class_count; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", ps.scores(i, c));
                out << ',' << buf;
            }
            out << "\n";
        }
    } else {
        for (Eigen::Index i = 0; i < ps.size(); ++i) {
            json obj;
            obj["label"] = ps.labels[i];
            json scores = json::array();
            for (int c = 0; c < ps.class_count; ++c)
                scores.push_back(ps.scores(i, c));
            obj["scores"] = scores;
            out << obj.dump() << "\n";
        }
    }
    write_file(path, out.str());
}

std::string report_to_json(const EvaluationReport& report) {
    json doc;
    doc["schema_version"] = 1;
    doc["config"] = {{"replicates", report.config.replicates},
                     {"seed", report.config.seed},
                     {"bins", report.config.bin_count},
                     {"threshold", report.config.threshold},
                     {"balanced", report.config.balanced},
                     {"objective", to_string(report.config.objective)}};
    doc["class_count"] = report.class_count;
    doc["test_size"] = report.test_size;
    doc["random_guess_accuracy"] = report.random_guess_accuracy;
    json methods = json::array();
    for (const MethodReport& mr : report.methods) {
        json jm;
        jm["name"] = mr.name;
        if (mr.error) {
            jm["error"] = *mr.error;
            methods.push_back(jm);
            continue;
        }
        json metrics;
        metrics["accuracy"] = summary_to_json(mr.accuracy);
        metrics["ece"] = summary_to_json(mr.ece);
        json odds = summary_to_json(mr.ece_odds);
        odds["excluded_replicates"] = mr.ece_odds_excluded;
        metrics["ece_odds"] = odds;
        metrics["nll"] = summary_to_json(mr.nll);
        metrics["brier"] = summary_to_json(mr.brier);
        jm["metrics"] = metrics;
        json diagram = json::array();
        for (const BinBand& b : mr.diagram)
            diagram.push_back({{"lower", b.lower},
                               {"upper", b.upper},
                               {"mean_accuracy", b.mean_accuracy},
                               {"std_accuracy", b.std_accuracy},
                               {"mean_confidence", b.mean_confidence},
                               {"mean_mass", b.mean_mass},
                               {"nonempty_replicates", b.nonempty_replicates}});
        jm["diagram"] = diagram;
        if (mr.temperature)
            jm["temperature"] = *mr.temperature;
        if (mr.fit_meta) {
            json meta;
            if (mr.fit_meta->objective)
                meta["objective"] = to_string(*mr.fit_meta->objective);
            meta["fit_size"] = mr.fit_meta->fit_size;
            meta["achieved_objective"] = mr.fit_meta->achieved_objective;
            meta["warnings"] = mr.fit_meta->warnings;
            jm["fit_metadata"] = meta;
        }
        methods.push_back(jm);
    }
    doc["methods"] = methods;
    return doc.dump(2);
}

EvaluationReport parse_report(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("report JSON: ") + e.what());
    }
    if (doc.value("schema_version", 0) != 1)
        throw parse_error("unsupported report schema version");
    EvaluationReport report;
    const json& cfg = doc.at("config");
    report.config.replicates = cfg.at("replicates").get<int>();
    report.config.seed = cfg.at("seed").get<std::uint64_t>();
    report.config.bin_count = cfg.at("bins").get<int>();
    report.config.threshold = cfg.at("threshold").get<double>();
    report.config.balanced = cfg.at("balanced").get<bool>();
    report.config.objective = objective_from_string(cfg.at("objective").get<std::string>());
    report.class_count = doc.at("class_count").get<int>();
    report.test_size = doc.at("test_size").get<Eigen::Index>();
    report.random_guess_accuracy = doc.at("random_guess_accuracy").get<double>();
    for (const json& jm : doc.at("methods")) {
        MethodReport mr;
        mr.name = jm.at("name").get<std::string>();
        if (jm.contains("error")) {
            mr.error = jm["error"].get<std::string>();
            report.methods.push_back(std::move(mr));
            continue;
        }
        const json& metrics = jm.at("metrics");
        mr.accuracy = summary_from_json(metrics.at("accuracy"));
        mr.ece = summary_from_json(metrics.at("ece"));
        mr.ece_odds = summary_from_json(metrics.at("ece_odds"));
        mr.ece_odds_excluded = metrics.at("ece_odds").value("excluded_replicates", 0);
        mr.nll = summary_from_json(metrics.at("nll"));
        mr.brier = summary_from_json(metrics.at("brier"));
        for (const json& jb : jm.at("diagram")) {
            BinBand b;
            b.lower = jb.at("lower").get<double>();
            b.upper = jb.at("upper").get<double>();
            b.mean_accuracy = jb.at("mean_accuracy").get<double>();
            b.std_accuracy = jb.at("std_accuracy").get<double>();
            b.mean_confidence = jb.at("mean_confidence").get<double>();
            b.mean_mass = jb.at("mean_mass").get<double>();
            b.nonempty_replicates = jb.at("nonempty_replicates").get<int>();
            mr.diagram.push_back(b);
        }
        if (jm.contains("temperature"))
            mr.temperature = jm["temperature"].get<double>();
        if (jm.contains("fit_metadata")) {
            FitMetadata meta;
            const json& jmeta = jm["fit_metadata"];
            if (jmeta.contains("objective"))
                meta.objective = objective_from_string(jmeta["objective"].get<std::string>());
            meta.fit_size = jmeta.value("fit_size", 0);
            meta.achieved_objective = jmeta.value("achieved_objective", 0.0);
            if (jmeta.contains("warnings"))
                meta.warnings = jmeta["warnings"].get<std::vector<std::string>>();
            mr.fit_meta = meta;
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

void write_report(const EvaluationReport& report, const std::string& path) {
    write_file(path, report_to_json(report));
}

std::string report_to_text(const EvaluationReport& report) {
    // percent cells in the "4.40 (01.21)" style
    const auto pct = [](const MetricSummary& s) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f (%05.2f)", 100.0 * s.mean, 100.0 * s.stddev);
        return std::string(buf);
    };
    const auto raw = [](const MetricSummary& s) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f (%.4f)", s.mean, s.stddev);
        return std::string(buf);
    };

    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Method", "Accuracy", "ECE", "ECE>=50", "NLL", "Brier"});
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * report.random_guess_accuracy);
        cells.push_back({"random", buf, "-", "-", "-", "-"});
    }
    for (const MethodReport& mr : report.methods) {
        if (mr.error) {
            cells.push_back({mr.name, "error: " + *mr.error, "", "", "", ""});
            continue;
        }
        std::string odds = pct(mr.ece_odds);
        if (mr.ece_odds.samples == 0)
            odds = "n/a";
        else if (mr.ece_odds_excluded > 0)
            odds += " [" + std::to_string(mr.ece_odds_excluded) + " excl.]";
        cells.push_back({mr.name, pct(mr.accuracy), pct(mr.ece), odds, raw(mr.nll),
                         raw(mr.brier)});
    }

    std::vector<std::size_t> widths(6, 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size() && c < 6; ++c)
            widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size() && c < 6; ++c) {
            if (c > 0)
                out << "  ";
            out << row[c] << std::string(widths[c] - row[c].size(), ' ');
        }
        out << "\n";
    }
    return out.str();
}

DiagramSpec diagram_spec(const MethodReport& method, int class_count) {
    DiagramSpec spec;
    spec.bins = method.diagram;
    spec.class_count = class_count;
    return spec;
}

std::string render_diagram(const DiagramSpec& spec) {
    constexpr double W = 560.0, H = 560.0;
    constexpr double L = 60.0, R = 20.0, T = 20.0, B = 60.0;
    const double pw = W - L - R;
    const double ph = H - T - B;
    const auto X = [&](double v) { return L + v * pw; };
    const auto Y = [&](double v) { return T + (1.0 - v) * ph; };
    const auto coord = [](double v) { return fmt("%.2f", v); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    // background confidence histogram
    if (spec.show_histogram) {
        double total = 0.0;
        double max_mass = 0.0;
        for (const BinBand& b : spec.bins) {
            total += b.mean_mass;
            max_mass = std::max(max_mass, b.mean_mass);
        }
        if (max_mass > 0.0) {
            for (const BinBand& b : spec.bins) {
                if (b.mean_mass <= 0.0)
                    continue;
                const double h = b.mean_mass / max_mass * 0.3 * ph;
                svg << "<rect x=\"" << coord(X(b.lower)) << "\" y=\"" << coord(T + ph - h)
                    << "\" width=\"" << coord((b.upper - b.lower) * pw) << "\" height=\""
                    << coord(h) << "\" fill=\"#d0d0d0\"/>\n";
            }
        }
        (void)total;
    }

    // axes
    svg << "<rect x=\"" << coord(L) << "\" y=\"" << coord(T) << "\" width=\"" << coord(pw)
        << "\" height=\"" << coord(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = i / 4.0;
        svg << "<text x=\"" << coord(X(v)) << "\" y=\"" << coord(T + ph + 18)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt("%.2f", v) << "</text>\n";
        svg << "<text x=\"" << coord(L - 8) << "\" y=\"" << coord(Y(v) + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << fmt("%.2f", v) << "</text>\n";
    }
    svg << "<text x=\"" << coord(L + pw / 2) << "\" y=\"" << coord(H - 16)
        << "\" font-size=\"14\" text-anchor=\"middle\">confidence</text>\n";
    svg << "<text x=\"16\" y=\"" << coord(T + ph / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << coord(T + ph / 2) << ")\">accuracy</text>\n";

    if (spec.show_diagonal)
        svg << "<line x1=\"" << coord(X(0)) << "\" y1=\"" << coord(Y(0)) << "\" x2=\""
            << coord(X(1)) << "\" y2=\"" << coord(Y(1))
            << "\" stroke=\"#606060\" stroke-dasharray=\"4,3\"/>\n";
    if (spec.show_random_guess) {
        const double g = 1.0 / spec.class_count;
        svg << "<line x1=\"" << coord(X(0)) << "\" y1=\"" << coord(Y(g)) << "\" x2=\""
            << coord(X(1)) << "\" y2=\"" << coord(Y(g))
            << "\" stroke=\"#c06060\" stroke-dasharray=\"2,3\"/>\n";
    }

    // +-1 std band, nonempty bins only
    std::vector<const BinBand*> filled;
    for (const BinBand& b : spec.bins)
        if (b.nonempty_replicates > 0)
            filled.push_back(&b);
    if (filled.size() >= 2) {
        std::ostringstream pts;
        for (const BinBand* b : filled)
            pts << coord(X(b->mean_confidence)) << ","
                << coord(Y(std::min(1.0, b->mean_accuracy + b->std_accuracy))) << " ";
        for (auto it = filled.rbegin(); it != filled.rend(); ++it)
            pts << coord(X((*it)->mean_confidence)) << ","
                << coord(Y(std::max(0.0, (*it)->mean_accuracy - (*it)->std_accuracy))) << " ";
        svg << "<polygon points=\"" << pts.str() << "\" fill=\"#7090c0\" fill-opacity=\"0.3\"/>\n";
    }
    if (!filled.empty()) {
        std::ostringstream pts;
        for (const BinBand* b : filled)
            pts << coord(X(b->mean_confidence)) << "," << coord(Y(b->mean_accuracy)) << " ";
        svg << "<polyline points=\"" << pts.str()
            << "\" fill=\"none\" stroke=\"#3060b0\" stroke-width=\"2\"/>\n";
        for (const BinBand* b : filled)
            svg << "<circle cx=\"" << coord(X(b->mean_confidence)) << "\" cy=\""
                << coord(Y(b->mean_accuracy)) << "\" r=\"3\" fill=\"#3060b0\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_diagram(const DiagramSpec& spec, const std::string& path) {
    write_file(path, render_diagram(spec));
}

void save_calibrator(const FittedCalibrator& cal, const std::string& path) {
    write_file(path, cal.to_json());
}

FittedCalibrator load_calibrator(const std::string& path) {
    return FittedCalibrator::from_json(read_file(path));
}

}  // namespace calib
