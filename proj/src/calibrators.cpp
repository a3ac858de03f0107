#include "calib/calibrators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "calib/core.hpp"
#include "calib/metrics.hpp"

namespace calib {

namespace {

using nlohmann::json;

constexpr double kTempMin = 1e-3;
constexpr double kTempMax = 1e3;
constexpr double kLogTempTol = 1e-6;

PredictionSet make_probability_set(Matrix probs, LabelVector labels) {
    // Bypasses row-sum validation: one-vs-all outputs need not sum to one.
    PredictionSet out;
    out.scores = std::move(probs);
    out.kind = ScoreKind::Probabilities;
    out.labels = std::move(labels);
    out.class_count = static_cast<int>(out.scores.cols());
    return out;
}

double objective_value(const Matrix& scaled_logits, const LabelVector& labels,
                       const Vector& weights, Objective objective) {
    PredictionSet ps;
    ps.scores = softmax(scaled_logits);
    ps.kind = ScoreKind::Probabilities;
    ps.labels = labels;
    ps.class_count = static_cast<int>(ps.scores.cols());
    return objective == Objective::NLL ? nll(ps, weights) : brier(ps, weights);
}

double interpolate_curve(const std::vector<std::pair<double, double>>& pts, double x) {
    if (pts.empty())
        return x;
    if (x <= pts.front().first)
        return pts.front().second;
    if (x >= pts.back().first)
        return pts.back().second;
    auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                               [](double v, const auto& p) { return v < p.first; });
    auto lo = hi - 1;
    const double span = hi->first - lo->first;
    if (span <= 0.0)
        return lo->second;
    const double frac = (x - lo->first) / span;
    return lo->second + frac * (hi->second - lo->second);
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::Identity: return "identity";
        case Method::Temperature: return "temperature";
        case Method::HistogramBinning: return "histogram";
        case Method::Isotonic: return "isotonic";
    }
    return "identity";
}

std::string to_string(Objective o) {
    return o == Objective::NLL ? "nll" : "brier";
}

Method method_from_string(const std::string& s) {
    if (s == "identity") return Method::Identity;
    if (s == "temperature") return Method::Temperature;
    if (s == "histogram") return Method::HistogramBinning;
    if (s == "isotonic") return Method::Isotonic;
    throw invalid_input("unknown calibration method: " + s);
}

Objective objective_from_string(const std::string& s) {
    if (s == "nll") return Objective::NLL;
    if (s == "brier") return Objective::Brier;
    throw invalid_input("unknown objective: " + s);
}

Method FittedCalibrator::method() const {
    return static_cast<Method>(params.index());
}

FittedCalibrator fit_temperature(const PredictionSet& val, Objective objective,
                                 const Vector& weights) {
    if (val.size() < 2)
        throw invalid_input("temperature fit needs at least two examples");
    const Matrix z = logits(val);

    const auto eval = [&](double log_t) {
        return objective_value(z / std::exp(log_t), val.labels, weights, objective);
    };

    // golden-section search on log t
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(kTempMin);
    double b = std::log(kTempMax);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    // ties move left so a flat plateau resolves to the smaller temperature
    while (b - a > kLogTempTol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d);
        }
    }
    double log_t = 0.5 * (a + b);
    FittedCalibrator cal;
    FitMetadata meta;
    meta.objective = objective;
    meta.fit_size = val.size();

    if (log_t - std::log(kTempMin) < 1e-4) {
        log_t = std::log(kTempMin);
        meta.warnings.push_back("temperature clamped at lower bracket bound 1e-3");
    } else if (std::log(kTempMax) - log_t < 1e-4) {
        log_t = std::log(kTempMax);
        meta.warnings.push_back("temperature clamped at upper bracket bound 1e3");
    }
    double t = std::exp(log_t);
    double achieved = eval(log_t);
    const double at_unit = eval(0.0);
    if (at_unit < achieved) {
        t = 1.0;
        achieved = at_unit;
    }
    meta.achieved_objective = achieved;
    cal.params = TemperatureParams{t};
    cal.fit_metadata = meta;
    return cal;
}

PredictionSet apply_temperature(const FittedCalibrator& cal, const PredictionSet& ps) {
    const auto* p = std::get_if<TemperatureParams>(&cal.params);
    if (!p)
        throw invalid_input("calibrator is not a temperature scaler");
    return make_probability_set(softmax(logits(ps) / p->t), ps.labels);
}

FittedCalibrator fit_histogram_binning(const PredictionSet& val, int bin_count,
                                       const Vector& weights) {
    if (bin_count < 1)
        throw invalid_input("bin count must be >= 1");
    const Matrix p = probabilities(val);
    const int C = val.class_count;
    const int m = bin_count;
    const double total = weights.sum();
    if (total <= 0.0)
        throw invalid_input("total weight must be positive");

    HistogramParams params;
    params.bin_count = m;
    params.bin_values.resize(C, m);
    params.fallback.resize(C);
    for (int c = 0; c < C; ++c) {
        Vector mass = Vector::Zero(m);
        Vector pos = Vector::Zero(m);
        double pos_total = 0.0;
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            const int k = std::min(static_cast<int>(p(i, c) * m), m - 1);
            mass[k] += weights[i];
            if (val.labels[i] == c) {
                pos[k] += weights[i];
                pos_total += weights[i];
            }
        }
        params.fallback[c] = pos_total / total;
        for (int k = 0; k < m; ++k)
            params.bin_values(c, k) = mass[k] > 0.0 ? pos[k] / mass[k] : params.fallback[c];
    }
    FittedCalibrator cal;
    cal.params = std::move(params);
    cal.fit_metadata.fit_size = val.size();
    return cal;
}

std::vector<std::pair<double, double>> pava_fit(std::vector<double> scores,
                                                std::vector<double> targets,
                                                std::vector<double> weights) {
    const std::size_t n = scores.size();
    if (targets.size() != n || weights.size() != n)
        throw invalid_input("pava_fit input length mismatch");
    if (n == 0)
        return {};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // pre-pool equal scores
    std::vector<double> xs, ys, ws;
    for (std::size_t idx : order) {
        if (!xs.empty() && scores[idx] == xs.back()) {
            const double w = ws.back() + weights[idx];
            ys.back() = w > 0.0 ? (ys.back() * ws.back() + targets[idx] * weights[idx]) / w
                                : ys.back();
            ws.back() = w;
        } else {
            xs.push_back(scores[idx]);
            ys.push_back(targets[idx]);
            ws.push_back(weights[idx]);
        }
    }

    // blocks: (mean value, weight, count of pooled points)
    struct Block {
        double value;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        blocks.push_back({ys[i], ws[i], 1});
        while (blocks.size() > 1 &&
               blocks[blocks.size() - 2].value > blocks.back().value) {
            Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double w = prev.weight + top.weight;
            prev.value = w > 0.0 ? (prev.value * prev.weight + top.value * top.weight) / w
                                 : prev.value;
            prev.weight = w;
            prev.count += top.count;
        }
    }

    std::vector<std::pair<double, double>> out;
    out.reserve(xs.size());
    std::size_t pos = 0;
    for (const Block& b : blocks)
        for (std::size_t i = 0; i < b.count; ++i)
            out.emplace_back(xs[pos++], b.value);
    return out;
}

FittedCalibrator fit_isotonic(const PredictionSet& val, const Vector& weights) {
    const Matrix p = probabilities(val);
    const int C = val.class_count;
    IsotonicParams params;
    params.curves.resize(C);
    for (int c = 0; c < C; ++c) {
        std::vector<double> scores(p.rows()), targets(p.rows()), ws(p.rows());
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            scores[i] = p(i, c);
            targets[i] = val.labels[i] == c ? 1.0 : 0.0;
            ws[i] = weights[i];
        }
        params.curves[c] = pava_fit(std::move(scores), std::move(targets), std::move(ws));
    }
    FittedCalibrator cal;
    cal.params = std::move(params);
    cal.fit_metadata.fit_size = val.size();
    return cal;
}

PredictionSet apply_map(const FittedCalibrator& cal, const PredictionSet& ps,
                        bool renormalize) {
    const Matrix p = probabilities(ps);
    Matrix out(p.rows(), p.cols());
    if (const auto* hist = std::get_if<HistogramParams>(&cal.params)) {
        if (hist->bin_values.rows() != p.cols())
            throw invalid_input("calibrator class count does not match predictions");
        const int m = hist->bin_count;
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                const int k = std::min(static_cast<int>(p(i, c) * m), m - 1);
                out(i, c) = hist->bin_values(c, k);
            }
    } else if (const auto* iso = std::get_if<IsotonicParams>(&cal.params)) {
        if (static_cast<Eigen::Index>(iso->curves.size()) != p.cols())
            throw invalid_input("calibrator class count does not match predictions");
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            for (Eigen::Index c = 0; c < p.cols(); ++c)
                out(i, c) = interpolate_curve(iso->curves[c], p(i, c));
    } else {
        throw invalid_input("calibrator is not a per-class map");
    }
    if (renormalize) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            const double sum = out.row(i).sum();
            if (sum > 0.0)
                out.row(i) /= sum;
            else
                out.row(i).setConstant(1.0 / out.cols());
        }
    }
    return make_probability_set(std::move(out), ps.labels);
}

FittedCalibrator fit(Method method, const PredictionSet& val, const FitConfig& config,
                     const Vector& weights) {
    switch (method) {
        case Method::Identity: {
            FittedCalibrator cal;
            cal.params = IdentityParams{};
            cal.fit_metadata.fit_size = val.size();
            return cal;
        }
        case Method::Temperature:
            return fit_temperature(val, config.objective, weights);
        case Method::HistogramBinning:
            return fit_histogram_binning(val, config.bin_count, weights);
        case Method::Isotonic:
            return fit_isotonic(val, weights);
    }
    throw invalid_input("unknown calibration method");
}

PredictionSet calibrate(const FittedCalibrator& cal, const PredictionSet& ps,
                        bool renormalize) {
    switch (cal.method()) {
        case Method::Identity:
            return make_probability_set(probabilities(ps), ps.labels);
        case Method::Temperature:
            return apply_temperature(cal, ps);
        case Method::HistogramBinning:
        case Method::Isotonic:
            return apply_map(cal, ps, renormalize);
    }
    throw invalid_input("unknown calibrator variant");
}

std::string FittedCalibrator::to_json() const {
    json doc;
    doc["schema_version"] = 1;
    doc["method"] = to_string(method());
    json meta;
    if (fit_metadata.objective)
        meta["objective"] = to_string(*fit_metadata.objective);
    meta["fit_size"] = fit_metadata.fit_size;
    meta["achieved_objective"] = fit_metadata.achieved_objective;
    meta["warnings"] = fit_metadata.warnings;
    doc["fit_metadata"] = meta;

    if (const auto* t = std::get_if<TemperatureParams>(&params)) {
        doc["params"] = {{"t", t->t}};
    } else if (const auto* h = std::get_if<HistogramParams>(&params)) {
        json values = json::array();
        for (Eigen::Index c = 0; c < h->bin_values.rows(); ++c) {
            json row = json::array();
            for (Eigen::Index k = 0; k < h->bin_values.cols(); ++k)
                row.push_back(h->bin_values(c, k));
            values.push_back(row);
        }
        json fallback = json::array();
        for (Eigen::Index c = 0; c < h->fallback.size(); ++c)
            fallback.push_back(h->fallback[c]);
        doc["params"] = {{"bin_count", h->bin_count},
                         {"bin_values", values},
                         {"fallback", fallback}};
    } else if (const auto* iso = std::get_if<IsotonicParams>(&params)) {
        json curves = json::array();
        for (const auto& curve : iso->curves) {
            json pts = json::array();
            for (const auto& [x, y] : curve)
                pts.push_back({x, y});
            curves.push_back(pts);
        }
        doc["params"] = {{"curves", curves}};
    } else {
        doc["params"] = json::object();
    }
    return doc.dump(2);
}

FittedCalibrator FittedCalibrator::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("calibrator JSON: ") + e.what());
    }
    if (doc.value("schema_version", 0) != 1)
        throw parse_error("unsupported calibrator schema version");

    FittedCalibrator cal;
    const Method m = method_from_string(doc.at("method").get<std::string>());
    const json& p = doc.at("params");
    switch (m) {
        case Method::Identity:
            cal.params = IdentityParams{};
            break;
        case Method::Temperature:
            cal.params = TemperatureParams{p.at("t").get<double>()};
            break;
        case Method::HistogramBinning: {
            HistogramParams h;
            h.bin_count = p.at("bin_count").get<int>();
            const auto& values = p.at("bin_values");
            const auto& fallback = p.at("fallback");
            h.bin_values.resize(values.size(), h.bin_count);
            h.fallback.resize(fallback.size());
            for (std::size_t c = 0; c < values.size(); ++c)
                for (int k = 0; k < h.bin_count; ++k)
                    h.bin_values(c, k) = values[c][k].get<double>();
            for (std::size_t c = 0; c < fallback.size(); ++c)
                h.fallback[c] = fallback[c].get<double>();
            cal.params = std::move(h);
            break;
        }
        case Method::Isotonic: {
            IsotonicParams iso;
            for (const auto& curve : p.at("curves")) {
                std::vector<std::pair<double, double>> pts;
                for (const auto& pt : curve)
                    pts.emplace_back(pt[0].get<double>(), pt[1].get<double>());
                iso.curves.push_back(std::move(pts));
            }
            cal.params = std::move(iso);
            break;
        }
    }
    const json& meta = doc.at("fit_metadata");
    if (meta.contains("objective"))
        cal.fit_metadata.objective = objective_from_string(meta["objective"].get<std::string>());
    cal.fit_metadata.fit_size = meta.value("fit_size", 0);
    cal.fit_metadata.achieved_objective = meta.value("achieved_objective", 0.0);
    if (meta.contains("warnings"))
        cal.fit_metadata.warnings = meta["warnings"].get<std::vector<std::string>>();
    return cal;
}

}  // namespace calib
