// Evaluation metrics (MAPE, SMAPE, RMSE, nRMSE), scatter reports with
// +/-5% and +/-10% bands, per-well time-series reports, and result tables.
// All percentage metrics are computed on de-normalized pressures; nRMSE is
// RMSE over the mean actual value, in percent.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "wellsense/conditioning.hpp"
#include "wellsense/core.hpp"
#include "wellsense/models/artifact.hpp"

namespace wellsense {

namespace detail {

inline void check_pair(const std::vector<double>& pred, const std::vector<double>& actual) {
    if (pred.size() != actual.size()) throw LengthMismatchError("metric: length mismatch");
    if (pred.empty()) throw LengthMismatchError("metric: empty input");
}

}  // namespace detail

// Mean absolute percentage error, percent, actual values in the denominator.
inline double mape(const std::vector<double>& pred, const std::vector<double>& actual) {
    detail::check_pair(pred, actual);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (actual[i] == 0.0) throw DomainError("mape: zero actual value");
        s += std::abs((pred[i] - actual[i]) / actual[i]);
    }
    return 100.0 * s / static_cast<double>(pred.size());
}

// Symmetric MAPE, percent, half-sum denominator.
inline double smape(const std::vector<double>& pred, const std::vector<double>& actual) {
    detail::check_pair(pred, actual);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double m = 0.5 * (pred[i] + actual[i]);
        if (m == 0.0) throw DomainError("smape: zero denominator");
        s += std::abs(pred[i] - actual[i]) / m;
    }
    return 100.0 * s / static_cast<double>(pred.size());
}

inline double rmse(const std::vector<double>& pred, const std::vector<double>& actual) {
    detail::check_pair(pred, actual);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - actual[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

// RMSE normalized by the mean actual value, percent.
inline double nrmse(const std::vector<double>& pred, const std::vector<double>& actual) {
    const double mean_actual = stats::mean(actual);
    if (mean_actual == 0.0) throw DomainError("nrmse: zero mean actual");
    return 100.0 * rmse(pred, actual) / mean_actual;
}

struct Metrics {
    double mape = 0.0;
    double smape = 0.0;
    double rmse = 0.0;
    double nrmse = 0.0;
};

inline Metrics compute_metrics(const std::vector<double>& pred,
                               const std::vector<double>& actual) {
    return {mape(pred, actual), smape(pred, actual), rmse(pred, actual), nrmse(pred, actual)};
}

inline double within_band(const std::vector<double>& pred, const std::vector<double>& actual,
                          double band) {
    detail::check_pair(pred, actual);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (actual[i] == 0.0) throw DomainError("within_band: zero actual");
        if (std::abs(pred[i] - actual[i]) / std::abs(actual[i]) <= band) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Model evaluation over a conditioned partition
// ---------------------------------------------------------------------------

struct EvalReport {
    Metrics pooled;
    double within_5pct = 0.0;
    double within_10pct = 0.0;
    std::size_t n = 0;
    std::map<std::string, Metrics> per_well;

    nlohmann::json to_json() const {
        nlohmann::json wells = nlohmann::json::object();
        for (const auto& [w, m] : per_well)
            wells[w] = {{"mape", m.mape}, {"smape", m.smape}, {"rmse", m.rmse},
                        {"nrmse", m.nrmse}};
        return {{"n", n},
                {"mape", pooled.mape},
                {"smape", pooled.smape},
                {"rmse", pooled.rmse},
                {"nrmse", pooled.nrmse},
                {"within_5pct", within_5pct},
                {"within_10pct", within_10pct},
                {"per_well", wells}};
    }
};

// Predictions for one partition, aligned with the windows that produced them.
struct PartitionPredictions {
    std::vector<WindowedSample> windows;
    std::vector<double> pred;
    std::vector<double> actual;
};

inline PartitionPredictions predict_partition(const TrainedModel& m, const DerivedDataset& part) {
    PartitionPredictions out;
    out.windows = window_samples(part, m.feature_set(), m.window_p());
    out.pred = predict_all(m, out.windows);
    out.actual.reserve(out.windows.size());
    for (const auto& w : out.windows) out.actual.push_back(w.y);
    return out;
}

inline EvalReport evaluate(const TrainedModel& m, const DerivedDataset& part) {
    const PartitionPredictions pp = predict_partition(m, part);
    if (pp.windows.empty()) throw TooFewSamplesError("evaluate: partition yields no windows");
    EvalReport rep;
    rep.n = pp.windows.size();
    rep.pooled = compute_metrics(pp.pred, pp.actual);
    rep.within_5pct = within_band(pp.pred, pp.actual, 0.05);
    rep.within_10pct = within_band(pp.pred, pp.actual, 0.10);

    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_well;
    for (std::size_t i = 0; i < pp.windows.size(); ++i) {
        auto& [pred, actual] = by_well[pp.windows[i].well_id];
        pred.push_back(pp.pred[i]);
        actual.push_back(pp.actual[i]);
    }
    for (const auto& [well, series] : by_well)
        rep.per_well[well] = compute_metrics(series.first, series.second);
    return rep;
}

// ---------------------------------------------------------------------------
// Report files (CSV + SVG)
// ---------------------------------------------------------------------------

namespace svg {

struct Canvas {
    std::string body;
    double width, height;

    Canvas(double w, double h) : width(w), height(h) {}

    void line(double x1, double y1, double x2, double y2, const std::string& style) {
        body += "<line x1=\"" + fmt_double(x1) + "\" y1=\"" + fmt_double(y1) + "\" x2=\"" +
                fmt_double(x2) + "\" y2=\"" + fmt_double(y2) + "\" style=\"" + style + "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill) {
        body += "<circle cx=\"" + fmt_double(x) + "\" cy=\"" + fmt_double(y) + "\" r=\"" +
                fmt_double(r) + "\" fill=\"" + fill + "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        if (pts.size() < 2) return;
        body += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1\" points=\"";
        for (const auto& [x, y] : pts) body += fmt_double(x) + "," + fmt_double(y) + " ";
        body += "\"/>\n";
    }
    void text(double x, double y, const std::string& s) {
        body += "<text x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(y) +
                "\" font-size=\"11\" font-family=\"sans-serif\">" + s + "</text>\n";
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
            << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body << "</svg>\n";
        if (!out) throw IoError("write failure on " + path.string());
    }
};

}  // namespace svg

// Estimated-vs-measured scatter with the identity line and +/-5% / +/-10%
// deviation bands. Writes <stem>.csv and <stem>.svg.
struct ScatterSummary {
    double within_5pct = 0.0;
    double within_10pct = 0.0;
};

inline ScatterSummary scatter_report(const std::vector<double>& pred,
                                     const std::vector<double>& actual,
                                     const std::filesystem::path& stem) {
    detail::check_pair(pred, actual);
    {
        std::ofstream csv(stem.string() + ".csv", std::ios::trunc);
        if (!csv) throw IoError("cannot write " + stem.string() + ".csv");
        csv << "actual,predicted\n";
        for (std::size_t i = 0; i < pred.size(); ++i)
            csv << fmt_double(actual[i]) << ',' << fmt_double(pred[i]) << '\n';
    }

    const double lo = std::min(*std::min_element(actual.begin(), actual.end()),
                               *std::min_element(pred.begin(), pred.end()));
    const double hi = std::max(*std::max_element(actual.begin(), actual.end()),
                               *std::max_element(pred.begin(), pred.end()));
    const double span = hi > lo ? hi - lo : 1.0;
    const double w = 480, h = 480, margin = 40;
    auto sx = [&](double v) { return margin + (v - lo) / span * (w - 2 * margin); };
    auto sy = [&](double v) { return h - margin - (v - lo) / span * (h - 2 * margin); };

    svg::Canvas canvas(w, h);
    canvas.line(sx(lo), sy(lo), sx(hi), sy(hi), "stroke:black;stroke-width:1");
    for (double band : {0.05, 0.10}) {
        const char* dash = band == 0.05 ? "6,2,2,2" : "6,4";
        for (double sign : {1.0, -1.0}) {
            const double f = 1.0 + sign * band;
            canvas.line(sx(lo), sy(lo * f), sx(hi), sy(hi * f),
                        std::string("stroke:gray;stroke-width:0.8;stroke-dasharray:") + dash);
        }
    }
    for (std::size_t i = 0; i < pred.size(); ++i)
        canvas.circle(sx(actual[i]), sy(pred[i]), 1.5, "steelblue");
    canvas.text(margin, 16, "estimated vs measured");
    canvas.write(stem.string() + ".svg");

    return {within_band(pred, actual, 0.05), within_band(pred, actual, 0.10)};
}

// Per-well time series of measured and estimated BHP. Days removed by
// conditioning are real gaps: no CSV row and a break in the SVG polyline.
// `model_series` maps model label -> (day -> prediction).
inline void timeseries_report(const std::string& well_id,
                              const std::vector<std::pair<Date, double>>& actual,
                              const std::map<std::string, std::map<std::int64_t, double>>& model_series,
                              const std::filesystem::path& stem) {
    if (actual.empty()) throw TooFewSamplesError("timeseries_report: empty series");
    {
        std::ofstream csv(stem.string() + ".csv", std::ios::trunc);
        if (!csv) throw IoError("cannot write " + stem.string() + ".csv");
        csv << "date,actual";
        for (const auto& [label, series] : model_series) csv << ',' << label;
        csv << '\n';
        for (const auto& [day, value] : actual) {
            csv << day.to_string() << ',' << fmt_double(value);
            for (const auto& [label, series] : model_series) {
                csv << ',';
                const auto it = series.find(day.days_since_epoch());
                if (it != series.end()) csv << fmt_double(it->second);
            }
            csv << '\n';
        }
    }

    double lo = actual[0].second, hi = actual[0].second;
    for (const auto& [d, v] : actual) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const auto& [label, series] : model_series)
        for (const auto& [d, v] : series) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double span = hi > lo ? hi - lo : 1.0;
    const Date d0 = actual.front().first;
    const double days = std::max<double>(1.0, static_cast<double>(actual.back().first - d0));
    const double w = 720, h = 300, margin = 40;
    auto sx = [&](Date d) {
        return margin + static_cast<double>(d - d0) / days * (w - 2 * margin);
    };
    auto sy = [&](double v) { return h - margin - (v - lo) / span * (h - 2 * margin); };

    svg::Canvas canvas(w, h);
    const char* palette[] = {"firebrick", "seagreen", "darkorange", "purple"};
    auto draw_series = [&](auto get_value, const std::string& color) {
        std::vector<std::pair<double, double>> run;
        Date prev = d0;
        bool first = true;
        for (const auto& [day, value] : actual) {
            const auto v = get_value(day);
            if (!v.has_value() || (!first && day - prev > 1)) {  // gap: break the line
                canvas.polyline(run, color);
                run.clear();
            }
            if (v.has_value()) run.emplace_back(sx(day), sy(*v));
            prev = day;
            first = false;
        }
        canvas.polyline(run, color);
    };

    std::map<std::int64_t, double> actual_by_day;
    for (const auto& [day, v] : actual) actual_by_day[day.days_since_epoch()] = v;
    draw_series(
        [&](Date d) -> std::optional<double> {
            const auto it = actual_by_day.find(d.days_since_epoch());
            if (it == actual_by_day.end()) return std::nullopt;
            return it->second;
        },
        "black");

    int color_idx = 0;
    for (const auto& [label, series] : model_series) {
        const std::string color = palette[color_idx++ % 4];
        draw_series(
            [&](Date d) -> std::optional<double> {
                const auto it = series.find(d.days_since_epoch());
                if (it == series.end()) return std::nullopt;
                return it->second;
            },
            color);
        canvas.text(margin + 140.0 * color_idx, 16, label + " (" + color + ")");
    }
    canvas.text(margin, 16, well_id + " actual (black)");
    canvas.write(stem.string() + ".svg");
}

// Result table in the Table-6 layout: Model, MAPE, SMAPE, nRMSE with
// "mean +/-std" cells, sorted by MAPE ascending. The sample count appears
// in a comment line; single-run rows render "+/-0.0" and are flagged.
struct ResultRow {
    std::string label;
    Metrics mean;
    Metrics stddev;
    int runs = 1;
};

inline void result_table(std::vector<ResultRow> rows, std::size_t n_samples,
                         const std::filesystem::path& path, const std::string& title = "") {
    if (rows.empty()) throw TooFewSamplesError("result_table: no rows");
    std::sort(rows.begin(), rows.end(),
              [](const ResultRow& a, const ResultRow& b) { return a.mean.mape < b.mean.mape; });

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# " << (title.empty() ? "results" : title) << " (" << n_samples << " samples)\n";
    bool any_single = false;
    for (const ResultRow& r : rows) any_single |= r.runs == 1;
    if (any_single) out << "# single-run rows: std is 0.0 by convention\n";

    char buf[64];
    auto cell = [&](double mean, double sd) {
        if (sd == 0.0) {
            std::snprintf(buf, sizeof(buf), "%.3f +/-0.0", mean);
        } else {
            std::snprintf(buf, sizeof(buf), "%.3f +/-%.3f", mean, sd);
        }
        return std::string(buf);
    };
    out << "Model,MAPE,SMAPE,nRMSE\n";
    for (const ResultRow& r : rows)
        out << r.label << ',' << cell(r.mean.mape, r.stddev.mape) << ','
            << cell(r.mean.smape, r.stddev.smape) << ',' << cell(r.mean.nrmse, r.stddev.nrmse)
            << '\n';
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace wellsense
