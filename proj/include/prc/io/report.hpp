#pragma once

// Result tables as CSV and their SVG renderings (line, box, shaded band).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "prc/experiments.hpp"
#include "prc/io/text.hpp"

namespace prc::io {

// ---------------------------------------------------------------------------
// CSV tables

inline std::string cross_matrix_csv(const experiments::CrossMatrix& m)
{
    std::string out = "variant,trained_on,i1,i2,i3,i4,i5\n";
    auto emit = [&](const char* name, const auto& mat) {
        for (int i = 0; i < experiments::kConditions; ++i) {
            out += std::string(name) + "," + std::to_string(i + 1);
            for (int j = 0; j < experiments::kConditions; ++j) out += "," + format_double(mat(i, j));
            out += '\n';
        }
    };
    emit("train", m.train);
    emit("test", m.test);
    return out;
}

inline std::string box_stats_csv(std::span<const experiments::WeightStudy> studies)
{
    std::string out = "source,item,count,p25,p50,p75,whisker_low,whisker_high,outliers\n";
    for (const auto& s : studies) {
        for (int c = 0; c < experiments::kConditions; ++c) {
            const auto& b = s.boxes[c];
            out += std::string(reservoir::to_string(s.source)) + "," + std::to_string(c + 1) + "," + std::to_string(b.count) + "," +
                   format_double(b.p25) + "," + format_double(b.p50) + "," + format_double(b.p75) + "," +
                   format_double(b.whisker_low) + "," + format_double(b.whisker_high) + ",";
            for (std::size_t i = 0; i < b.outliers.size(); ++i) out += (i ? " " : "") + format_double(b.outliers[i]);
            out += '\n';
        }
    }
    return out;
}

inline std::string estimates_csv(std::span<const experiments::WeightStudy> studies)
{
    std::string out = "source,item,repeat,estimate\n";
    for (const auto& s : studies) {
        for (int c = 0; c < experiments::kConditions; ++c) {
            for (std::size_t r = 0; r < s.estimates[c].size(); ++r) {
                out += std::string(reservoir::to_string(s.source)) + "," + std::to_string(c + 1) + "," + std::to_string(r) + "," +
                       format_double(s.estimates[c][r]) + "\n";
            }
        }
    }
    return out;
}

inline std::string accuracy_csv(std::span<const experiments::AccuracyRow> rows)
{
    std::string out = "source,task,correct,total,accuracy,relative_mae\n";
    for (const auto& r : rows) {
        const std::string src(reservoir::to_string(r.source));
        out += src + ",direction," + std::to_string(r.direction_correct) + "," + std::to_string(r.direction_total) + "," +
               format_double(r.direction_accuracy()) + ",\n";
        out += src + ",closeweight," + std::to_string(r.closeweight_correct) + "," + std::to_string(r.closeweight_total) + "," +
               format_double(r.closeweight_accuracy()) + "," + format_double(r.closeweight_relative_mae) + "\n";
    }
    return out;
}

inline std::string sweep_csv(const experiments::SweepResult& s)
{
    const std::string xname = s.kind == experiments::SweepKind::Reduction ? "sensors" : "failed";
    std::string out = xname + ",subsets,posture_mean,posture_std,weight_mean,weight_std,closeweight_mean,closeweight_std,"
                              "direction_accuracy,best_subset,best_posture\n";
    for (const auto& p : s.points) {
        out += std::to_string(p.x) + "," + std::to_string(p.subsets);
        for (const auto* m : {&p.posture, &p.weight, &p.closeweight}) out += "," + format_double(m->mean) + "," + format_double(m->std);
        out += "," + format_double(p.direction_accuracy) + ",";
        for (std::size_t i = 0; i < p.best_subset.size(); ++i) out += (i ? " " : "") + std::to_string(p.best_subset[i] + 1);
        out += "," + format_double(p.best_posture) + "\n";
    }
    return out;
}

/// Predicted (and, when given, actual) x1..x5 per frame.
inline std::string trajectory_csv(const tasks::PipelineResult& r, const reservoir::SyncedTrial* actual = nullptr, double rate = reservoir::kFrameRate)
{
    std::string out = "t,x1,x2,x3,x4,x5";
    const bool with_actual = actual && actual->has_tracked();
    if (with_actual) out += ",x1_true,x2_true,x3_true,x4_true,x5_true";
    out += '\n';
    for (Eigen::Index k = 0; k < r.trajectory.rows(); ++k) {
        const Eigen::Index frame = r.trajectory_begin + k;
        out += format_double(static_cast<double>(frame) / rate);
        for (Eigen::Index c = 0; c < r.trajectory.cols(); ++c) out += "," + format_double(r.trajectory(k, c));
        if (with_actual) {
            for (Eigen::Index c = 0; c < reservoir::kTracked; ++c) out += "," + format_double(actual->tracked(frame, c));
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVG

struct CsvText {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        return -1;
    }

    std::optional<double> number(std::size_t row, int col) const
    {
        if (col < 0 || row >= rows.size() || static_cast<std::size_t>(col) >= rows[row].size()) return std::nullopt;
        return parse_double(rows[row][static_cast<std::size_t>(col)]);
    }
};

inline CsvText parse_csv_text(std::string_view text)
{
    CsvText t;
    const auto ls = lines(text);
    if (ls.empty()) fail(ErrorKind::SchemaError, "empty CSV");
    for (auto c : split(ls[0])) t.header.emplace_back(trim(c));
    for (std::size_t r = 1; r < ls.size(); ++r) {
        if (trim(ls[r]).empty()) continue;
        std::vector<std::string> row;
        for (auto c : split(ls[r])) row.emplace_back(trim(c));
        if (row.size() != t.header.size()) {
            fail(ErrorKind::SchemaError, "row " + std::to_string(r + 1) + ": expected " + std::to_string(t.header.size()) + " fields");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

enum class PlotKind { Line, Box, Band };

inline PlotKind detect_plot(const CsvText& t)
{
    if (t.column("p25") >= 0 && t.column("p75") >= 0) return PlotKind::Box;
    for (const auto& h : t.header) {
        if (h.ends_with("_mean") && t.column(h.substr(0, h.size() - 5) + "_std") >= 0) return PlotKind::Band;
    }
    return PlotKind::Line;
}

namespace detail {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Frame {
    double width = 720, height = 420;
    double left = 70, right = 150, top = 40, bottom = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }

    void fit(double xlo, double xhi, double ylo, double yhi)
    {
        if (!(xhi > xlo)) { xlo -= 0.5; xhi += 0.5; }
        if (!(yhi > ylo)) { ylo -= 0.5; yhi += 0.5; }
        const double pad = 0.05 * (yhi - ylo);
        x0 = xlo; x1 = xhi; y0 = ylo - pad; y1 = yhi + pad;
    }
};

inline std::string open_svg(const Frame& f, std::string_view title, std::string_view xlabel, std::string_view ylabel)
{
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(f.width) + "\" height=\"" + fmt(f.height) +
         "\" viewBox=\"0 0 " + fmt(f.width) + " " + fmt(f.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(f.width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
    const double xa = f.left, xb = f.width - f.right, ya = f.top, yb = f.height - f.bottom;
    s += "<g class=\"axes\" stroke=\"black\" fill=\"none\"><line x1=\"" + fmt(xa) + "\" y1=\"" + fmt(yb) + "\" x2=\"" + fmt(xb) + "\" y2=\"" +
         fmt(yb) + "\"/><line x1=\"" + fmt(xa) + "\" y1=\"" + fmt(ya) + "\" x2=\"" + fmt(xa) + "\" y2=\"" + fmt(yb) + "\"/></g>\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
        const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", y);
        s += "<text x=\"" + fmt(xa - 6) + "\" y=\"" + fmt(f.py(y) + 4) + "\" text-anchor=\"end\">" + buf + "</text>\n";
        std::snprintf(buf, sizeof buf, "%.4g", x);
        s += "<text x=\"" + fmt(f.px(x)) + "\" y=\"" + fmt(yb + 16) + "\" text-anchor=\"middle\">" + buf + "</text>\n";
    }
    s += "<text x=\"" + fmt((xa + xb) / 2) + "\" y=\"" + fmt(f.height - 10) + "\" text-anchor=\"middle\">" + xml_escape(xlabel) + "</text>\n";
    s += "<text x=\"16\" y=\"" + fmt((ya + yb) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + fmt((ya + yb) / 2) + ")\">" +
         xml_escape(ylabel) + "</text>\n";
    return s;
}

inline std::string legend(const Frame& f, std::size_t i, std::string_view name)
{
    const double x = f.width - f.right + 12;
    const double y = f.top + 16.0 * static_cast<double>(i);
    return "<g class=\"legend\"><rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"10\" height=\"10\" fill=\"" +
           kPalette[i % kPalette.size()] + "\"/><text x=\"" + fmt(x + 14) + "\" y=\"" + fmt(y + 9) + "\">" + xml_escape(name) + "</text></g>\n";
}

} // namespace detail

/// First column is x; every other fully numeric column becomes one polyline.
inline std::string render_line(const CsvText& t, std::string_view title)
{
    std::vector<int> series;
    for (std::size_t c = 1; c < t.header.size(); ++c) {
        bool numeric = !t.rows.empty();
        for (std::size_t r = 0; r < t.rows.size() && numeric; ++r) numeric = t.number(r, static_cast<int>(c)).has_value();
        if (numeric) series.push_back(static_cast<int>(c));
    }
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double x = t.number(r, 0).value_or(static_cast<double>(r));
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        for (int c : series) {
            ylo = std::min(ylo, *t.number(r, c));
            yhi = std::max(yhi, *t.number(r, c));
        }
    }
    detail::Frame f;
    if (t.rows.empty() || series.empty()) f.fit(0, 1, 0, 1);
    else f.fit(xlo, xhi, ylo, yhi);
    std::string s = detail::open_svg(f, title, t.header.empty() ? "" : t.header[0], "value");
    for (std::size_t i = 0; i < series.size(); ++i) {
        const int c = series[i];
        s += "<polyline class=\"series\" data-column=\"" + detail::xml_escape(t.header[static_cast<std::size_t>(c)]) + "\" fill=\"none\" stroke=\"" +
             detail::kPalette[i % detail::kPalette.size()] + "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const double x = t.number(r, 0).value_or(static_cast<double>(r));
            s += (r ? " " : "") + detail::fmt(f.px(x)) + "," + detail::fmt(f.py(*t.number(r, c)));
        }
        s += "\"/>\n" + detail::legend(f, i, t.header[static_cast<std::size_t>(c)]);
    }
    return s + "</svg>\n";
}

/// One box per row; labelled by `source`/`item` columns when present.
inline std::string render_box(const CsvText& t, std::string_view title)
{
    const int c25 = t.column("p25"), c50 = t.column("p50"), c75 = t.column("p75");
    const int clo = t.column("whisker_low"), chi = t.column("whisker_high");
    if (c50 < 0 || clo < 0 || chi < 0) fail(ErrorKind::SchemaError, "box table needs p25,p50,p75,whisker_low,whisker_high");
    const int csrc = t.column("source"), citem = t.column("item");
    double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (int c : {c25, c50, c75, clo, chi}) {
            const auto v = t.number(r, c);
            if (!v) fail(ErrorKind::SchemaError, "row " + std::to_string(r + 2) + ": box columns must be numeric");
            ylo = std::min(ylo, *v);
            yhi = std::max(yhi, *v);
        }
    }
    detail::Frame f;
    f.fit(-0.5, static_cast<double>(t.rows.size()) - 0.5, t.rows.empty() ? 0.0 : ylo, t.rows.empty() ? 1.0 : yhi);
    std::string s = detail::open_svg(f, title, "group", "value");
    std::vector<std::string> sources;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::string label;
        std::size_t colour = 0;
        if (csrc >= 0) {
            const auto& src = t.rows[r][static_cast<std::size_t>(csrc)];
            auto it = std::find(sources.begin(), sources.end(), src);
            if (it == sources.end()) {
                sources.push_back(src);
                s += detail::legend(f, sources.size() - 1, src);
                it = sources.end() - 1;
            }
            colour = static_cast<std::size_t>(it - sources.begin());
            label = src + " ";
        }
        label += citem >= 0 ? "item " + t.rows[r][static_cast<std::size_t>(citem)] : "row " + std::to_string(r + 1);
        const double x = f.px(static_cast<double>(r));
        const double w = 0.3 * (f.px(1.0) - f.px(0.0));
        const auto y = [&](int c) { return f.py(*t.number(r, c)); };
        const std::string colr = detail::kPalette[colour % detail::kPalette.size()];
        s += "<g class=\"series\" data-column=\"" + detail::xml_escape(label) + "\" stroke=\"" + colr + "\" fill=\"none\">";
        s += "<line x1=\"" + detail::fmt(x) + "\" y1=\"" + detail::fmt(y(clo)) + "\" x2=\"" + detail::fmt(x) + "\" y2=\"" + detail::fmt(y(c25)) + "\"/>";
        s += "<line x1=\"" + detail::fmt(x) + "\" y1=\"" + detail::fmt(y(c75)) + "\" x2=\"" + detail::fmt(x) + "\" y2=\"" + detail::fmt(y(chi)) + "\"/>";
        s += "<rect x=\"" + detail::fmt(x - w) + "\" y=\"" + detail::fmt(y(c75)) + "\" width=\"" + detail::fmt(2 * w) + "\" height=\"" +
             detail::fmt(std::max(0.0, y(c25) - y(c75))) + "\" fill=\"" + colr + "\" fill-opacity=\"0.25\"/>";
        s += "<line x1=\"" + detail::fmt(x - w) + "\" y1=\"" + detail::fmt(y(c50)) + "\" x2=\"" + detail::fmt(x + w) + "\" y2=\"" + detail::fmt(y(c50)) + "\"/>";
        s += "</g>\n";
    }
    return s + "</svg>\n";
}

/// Every `<name>_mean` column with a matching `<name>_std` becomes a line plus a +-1 std band.
inline std::string render_band(const CsvText& t, std::string_view title)
{
    std::vector<std::pair<int, int>> series;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const auto& h = t.header[c];
        if (!h.ends_with("_mean")) continue;
        const std::string base = h.substr(0, h.size() - 5);
        const int sc = t.column(base + "_std");
        if (sc < 0) continue;
        series.emplace_back(static_cast<int>(c), sc);
        names.push_back(base);
    }
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double x = t.number(r, 0).value_or(static_cast<double>(r));
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        for (auto [m, sd] : series) {
            const double mv = t.number(r, m).value_or(0.0), sv = t.number(r, sd).value_or(0.0);
            ylo = std::min(ylo, mv - sv);
            yhi = std::max(yhi, mv + sv);
        }
    }
    detail::Frame f;
    if (t.rows.empty() || series.empty()) f.fit(0, 1, 0, 1);
    else f.fit(xlo, xhi, ylo, yhi);
    std::string s = detail::open_svg(f, title, t.header.empty() ? "" : t.header[0], "NRMSE");
    std::vector<std::size_t> order(t.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return t.number(a, 0).value_or(double(a)) < t.number(b, 0).value_or(double(b));
    });
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto [m, sd] = series[i];
        const std::string colr = detail::kPalette[i % detail::kPalette.size()];
        std::string upper, lower, line;
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t r = order[k];
            const double x = f.px(t.number(r, 0).value_or(double(r)));
            const double mv = t.number(r, m).value_or(0.0), sv = t.number(r, sd).value_or(0.0);
            upper += (k ? " " : "") + detail::fmt(x) + "," + detail::fmt(f.py(mv + sv));
            line += (k ? " " : "") + detail::fmt(x) + "," + detail::fmt(f.py(mv));
        }
        for (std::size_t k = order.size(); k-- > 0;) {
            const std::size_t r = order[k];
            const double x = f.px(t.number(r, 0).value_or(double(r)));
            lower += " " + detail::fmt(x) + "," + detail::fmt(f.py(t.number(r, m).value_or(0.0) - t.number(r, sd).value_or(0.0)));
        }
        s += "<g class=\"series\" data-column=\"" + detail::xml_escape(names[i]) + "\">";
        s += "<polygon fill=\"" + colr + "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"" + upper + lower + "\"/>";
        s += "<polyline fill=\"none\" stroke=\"" + colr + "\" stroke-width=\"1.5\" points=\"" + line + "\"/></g>\n";
        s += detail::legend(f, i, names[i]);
    }
    return s + "</svg>\n";
}

inline std::string render_svg(std::string_view csv, std::string_view title)
{
    const auto t = parse_csv_text(csv);
    switch (detect_plot(t)) {
    case PlotKind::Box: return render_box(t, title);
    case PlotKind::Band: return render_band(t, title);
    case PlotKind::Line: break;
    }
    return render_line(t, title);
}

} // namespace prc::io
