#pragma once

// Trial CSV files.
//
//   synced: t,s1..s12,m1..m9,x1..x5,item_id   (20 fps; the s, m and x blocks are each optional)
//   raw:    <stem>_daq.csv  t,s1..s12,item_id  (DAQ rate)
//           <stem>_cam.csv  t,m1..m9           (camera rate)
//
// Numbers use the shortest round-trip decimal form, so write/read is lossless.

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "prc/io/text.hpp"
#include "prc/plant.hpp"
#include "prc/reservoir.hpp"

namespace prc::io {

using PayloadTable = std::array<plant::PayloadCondition, 5>;

namespace detail {

inline void append_block(std::vector<std::string>& h, char prefix, int n)
{
    for (int i = 1; i <= n; ++i) h.push_back(std::string(1, prefix) + std::to_string(i));
}

[[noreturn]] inline void schema(std::size_t row, std::size_t col, const std::string& what)
{
    fail(ErrorKind::SchemaError, "row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what);
}

inline plant::PayloadCondition lookup_payload(int item, const PayloadTable& table)
{
    if (item >= 1 && item <= 5) return table[item - 1];
    plant::PayloadCondition p;
    p.item = item;
    return p;
}

struct Table {
    std::vector<std::string> header;
    Eigen::MatrixXd values; // rows x header.size(), item_id included
};

/// Parses a numeric CSV with a header row; rows are 1-based in diagnostics (header = row 1).
inline Table parse_table(std::string_view text)
{
    const auto ls = lines(text);
    if (ls.empty() || trim(ls[0]).empty()) fail(ErrorKind::SchemaError, "missing header row");
    Table t;
    for (auto c : split(ls[0])) t.header.emplace_back(trim(c));
    std::size_t n = ls.size();
    while (n > 1 && trim(ls[n - 1]).empty()) --n;
    t.values.resize(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t r = 1; r < n; ++r) {
        const auto cells = split(ls[r]);
        if (cells.size() != t.header.size()) {
            schema(r + 1, std::min(cells.size(), t.header.size()) + 1,
                   "expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = parse_double(cells[c]);
            if (!v) schema(r + 1, c + 1, "not a number: '" + std::string(trim(cells[c])) + "'");
            t.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = *v;
        }
    }
    return t;
}

/// Locates the contiguous block prefix1..prefixN; returns its first column or -1 when absent.
inline int find_block(const std::vector<std::string>& h, char prefix, int n)
{
    int first = -1;
    for (std::size_t c = 0; c < h.size(); ++c) {
        if (h[c].size() >= 2 && h[c][0] == prefix && h[c].find_first_not_of("0123456789", 1) == std::string::npos) {
            first = static_cast<int>(c);
            break;
        }
    }
    if (first < 0) return -1;
    for (int i = 0; i < n; ++i) {
        const std::size_t c = static_cast<std::size_t>(first + i);
        const std::string want = std::string(1, prefix) + std::to_string(i + 1);
        if (c >= h.size() || h[c] != want) schema(1, c + 1, "expected column '" + want + "'");
    }
    return first;
}

inline void check_time(const Eigen::MatrixXd& v)
{
    for (Eigen::Index r = 1; r < v.rows(); ++r) {
        if (!(v(r, 0) > v(r - 1, 0))) schema(static_cast<std::size_t>(r) + 2, 1, "time column must increase strictly");
    }
}

inline double infer_rate(const Eigen::MatrixXd& v, const std::string& what)
{
    if (v.rows() < 2) fail(ErrorKind::RateMismatch, what + " needs at least two rows to infer its rate");
    const double rate = static_cast<double>(v.rows() - 1) / (v(v.rows() - 1, 0) - v(0, 0));
    return std::round(rate);
}

inline int item_column(const Table& t)
{
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c] == "item_id") return static_cast<int>(c);
    }
    return -1;
}

inline int read_item(const Table& t, int col)
{
    if (col < 0 || t.values.rows() == 0) return 0;
    const double first = t.values(0, col);
    for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
        const double v = t.values(r, col);
        if (v != first || v != std::floor(v)) schema(static_cast<std::size_t>(r) + 2, static_cast<std::size_t>(col) + 1, "item_id must be one constant integer");
    }
    return static_cast<int>(first);
}

inline void write_row(std::string& out, double t, std::initializer_list<const Eigen::MatrixXd*> blocks, Eigen::Index r)
{
    out += format_double(t);
    for (const auto* b : blocks) {
        for (Eigen::Index c = 0; c < b->cols(); ++c) {
            out += ',';
            out += format_double((*b)(r, c));
        }
    }
}

inline std::string join(const std::vector<std::string>& h)
{
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i) s += ',';
        s += h[i];
    }
    return s;
}

} // namespace detail

inline std::string format_trial(const reservoir::SyncedTrial& t)
{
    std::vector<std::string> h{"t"};
    std::vector<const Eigen::MatrixXd*> blocks;
    if (t.has_sensors()) {
        detail::append_block(h, 's', reservoir::kSensors);
        blocks.push_back(&t.sensors);
    }
    if (t.has_visual()) {
        detail::append_block(h, 'm', reservoir::kMarkers);
        blocks.push_back(&t.markers);
    }
    if (t.has_tracked()) {
        detail::append_block(h, 'x', reservoir::kTracked);
        blocks.push_back(&t.tracked);
    }
    h.push_back("item_id");
    std::string out = detail::join(h) + '\n';
    const std::string item = std::to_string(t.payload.item);
    for (Eigen::Index r = 0; r < t.frames(); ++r) {
        out += format_double(static_cast<double>(r) / t.frame_rate);
        for (const auto* b : blocks) {
            for (Eigen::Index c = 0; c < b->cols(); ++c) {
                out += ',';
                out += format_double((*b)(r, c));
            }
        }
        out += ',' + item + '\n';
    }
    return out;
}

inline reservoir::SyncedTrial parse_trial(std::string_view text, const PayloadTable& table = plant::default_payloads())
{
    const auto tab = detail::parse_table(text);
    const auto& h = tab.header;
    if (h.empty() || h[0] != "t") detail::schema(1, 1, "first column must be 't'");
    const int item_col = detail::item_column(tab);
    if (item_col != static_cast<int>(h.size()) - 1) detail::schema(1, h.size(), "last column must be 'item_id'");
    const int s = detail::find_block(h, 's', reservoir::kSensors);
    const int m = detail::find_block(h, 'm', reservoir::kMarkers);
    const int x = detail::find_block(h, 'x', reservoir::kTracked);
    const std::size_t expected = 2 + (s >= 0 ? reservoir::kSensors : 0) + (m >= 0 ? reservoir::kMarkers : 0) +
                                 (x >= 0 ? reservoir::kTracked : 0);
    if (h.size() != expected) {
        // locate the first header cell that belongs to no complete block
        for (std::size_t c = 1; c + 1 < h.size(); ++c) {
            const int ci = static_cast<int>(c);
            const bool in = (s >= 0 && ci >= s && ci < s + reservoir::kSensors) || (m >= 0 && ci >= m && ci < m + reservoir::kMarkers) ||
                            (x >= 0 && ci >= x && ci < x + reservoir::kTracked);
            if (!in) detail::schema(1, c + 1, "unexpected column '" + h[c] + "'");
        }
        detail::schema(1, h.size(), "column blocks overlap");
    }
    if (s < 0 && m < 0) fail(ErrorKind::SchemaError, "trial file needs sensor (s1..s12) or marker (m1..m9) columns");
    if (tab.values.rows() == 0) fail(ErrorKind::SchemaError, "trial file has no data rows");
    detail::check_time(tab.values);

    reservoir::SyncedTrial t;
    if (tab.values.rows() >= 2) {
        const double rate = detail::infer_rate(tab.values, "trial file");
        if (rate != reservoir::kFrameRate) fail(ErrorKind::RateMismatch, "trial file must be sampled at 20 fps");
    }
    if (s >= 0) t.sensors = tab.values.middleCols(s, reservoir::kSensors);
    if (m >= 0) t.markers = tab.values.middleCols(m, reservoir::kMarkers);
    if (x >= 0) {
        t.tracked = tab.values.middleCols(x, reservoir::kTracked);
    } else if (m >= 0) {
        t.tracked = reservoir::tracked_from_markers(t.markers);
    }
    t.payload = detail::lookup_payload(detail::read_item(tab, item_col), table);
    return t;
}

inline void write_trial(const reservoir::SyncedTrial& t, const std::filesystem::path& p) { write_file(p, format_trial(t)); }

inline reservoir::SyncedTrial read_trial(const std::filesystem::path& p, const PayloadTable& table = plant::default_payloads())
{
    try {
        return parse_trial(read_file(p), table);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw Error(e.kind(), p.string() + ": " + e.detail());
    }
}

// ---------------------------------------------------------------------------
// Raw multi-rate recordings

inline std::filesystem::path daq_path(const std::filesystem::path& stem) { return stem.string() + "_daq.csv"; }
inline std::filesystem::path cam_path(const std::filesystem::path& stem) { return stem.string() + "_cam.csv"; }

inline void write_raw(const reservoir::RawRecording& rec, const std::filesystem::path& stem)
{
    std::vector<std::string> h{"t"};
    detail::append_block(h, 's', reservoir::kSensors);
    h.push_back("item_id");
    std::string daq = detail::join(h) + '\n';
    const std::string item = std::to_string(rec.payload.item);
    for (Eigen::Index r = 0; r < rec.sensors.rows(); ++r) {
        detail::write_row(daq, static_cast<double>(r) / rec.daq_rate, {&rec.sensors}, r);
        daq += ',' + item + '\n';
    }
    h.assign({"t"});
    detail::append_block(h, 'm', reservoir::kMarkers);
    std::string cam = detail::join(h) + '\n';
    for (Eigen::Index r = 0; r < rec.markers.rows(); ++r) {
        detail::write_row(cam, static_cast<double>(r) / rec.camera_rate, {&rec.markers}, r);
        cam += '\n';
    }
    write_file(daq_path(stem), daq);
    write_file(cam_path(stem), cam);
}

inline reservoir::RawRecording read_raw(const std::filesystem::path& stem, const PayloadTable& table = plant::default_payloads())
{
    reservoir::RawRecording rec;
    const auto daq = detail::parse_table(read_file(daq_path(stem)));
    if (daq.header.empty() || daq.header[0] != "t") detail::schema(1, 1, "first column must be 't'");
    if (detail::find_block(daq.header, 's', reservoir::kSensors) != 1 || daq.header.size() != reservoir::kSensors + 2 ||
        daq.header.back() != "item_id") {
        fail(ErrorKind::SchemaError, daq_path(stem).string() + ": header must be t,s1..s12,item_id");
    }
    detail::check_time(daq.values);
    rec.daq_rate = detail::infer_rate(daq.values, "DAQ file");
    rec.sensors = daq.values.middleCols(1, reservoir::kSensors);
    rec.payload = detail::lookup_payload(detail::read_item(daq, reservoir::kSensors + 1), table);

    const auto cam = detail::parse_table(read_file(cam_path(stem)));
    if (cam.header.empty() || cam.header[0] != "t") detail::schema(1, 1, "first column must be 't'");
    if (detail::find_block(cam.header, 'm', reservoir::kMarkers) != 1 || cam.header.size() != reservoir::kMarkers + 1) {
        fail(ErrorKind::SchemaError, cam_path(stem).string() + ": header must be t,m1..m9");
    }
    detail::check_time(cam.values);
    rec.camera_rate = detail::infer_rate(cam.values, "camera file");
    rec.markers = cam.values.middleCols(1, reservoir::kMarkers);
    return rec;
}

} // namespace prc::io
