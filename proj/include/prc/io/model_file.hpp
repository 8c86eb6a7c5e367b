#pragma once

// Versioned text model file holding a (possibly partial) readout bank.
//
//   prc-model 1
//   readout 6
//   task weight
//   source sensor
//   condition 0
//   lambda 0.1
//   features 0 1 2 3 4 5 6 7 8 9 10 11
//   targets 50 100 100 150 155
//   coef 13 1
//   <13 rows of 1 value>
//   end

#include <filesystem>
#include <string>

#include "prc/io/text.hpp"
#include "prc/tasks.hpp"

namespace prc::io {

inline constexpr int kModelVersion = 1;

namespace detail {

inline reservoir::ReadoutTask parse_task(std::string_view s)
{
    using reservoir::ReadoutTask;
    for (auto t : {ReadoutTask::Generic, ReadoutTask::Posture, ReadoutTask::Weight, ReadoutTask::Direction, ReadoutTask::CloseWeight}) {
        if (reservoir::to_string(t) == s) return t;
    }
    fail(ErrorKind::SchemaError, "unknown readout task '" + std::string(s) + "'");
}

inline reservoir::FeatureSource parse_source(std::string_view s)
{
    if (s == "sensor") return reservoir::FeatureSource::Sensor;
    if (s == "visual") return reservoir::FeatureSource::Visual;
    fail(ErrorKind::SchemaError, "unknown feature source '" + std::string(s) + "'");
}

class LineReader {
public:
    explicit LineReader(std::string_view text) : lines_(lines(text)) {}

    /// Next non-empty line split on whitespace; the first word must equal `keyword`.
    std::vector<std::string_view> expect(std::string_view keyword, std::size_t min_words = 1)
    {
        const auto w = next();
        if (w.size() < min_words || w[0] != keyword) {
            fail(ErrorKind::SchemaError, "line " + std::to_string(pos_) + ": expected '" + std::string(keyword) + "'");
        }
        return w;
    }

    std::vector<std::string_view> next()
    {
        while (pos_ < lines_.size()) {
            const auto l = trim(lines_[pos_++]);
            if (l.empty()) continue;
            std::vector<std::string_view> words;
            std::size_t i = 0;
            while (i < l.size()) {
                const auto b = l.find_first_not_of(" \t", i);
                if (b == std::string_view::npos) break;
                const auto e = l.find_first_of(" \t", b);
                words.push_back(l.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
                i = e == std::string_view::npos ? l.size() : e;
            }
            return words;
        }
        return {};
    }

    std::size_t line() const { return pos_; }

private:
    std::vector<std::string_view> lines_;
    std::size_t pos_ = 0;
};

inline double number(std::string_view s, std::size_t line)
{
    const auto v = parse_double(s);
    if (!v || !std::isfinite(*v)) fail(ErrorKind::SchemaError, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return *v;
}

inline long long integer(std::string_view s, std::size_t line)
{
    const auto v = parse_int<long long>(s);
    if (!v) fail(ErrorKind::SchemaError, "line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    return *v;
}

} // namespace detail

inline std::string format_model(const tasks::ReadoutBank& bank)
{
    std::string out = "prc-model " + std::to_string(kModelVersion) + "\n";
    for (int n = 1; n <= tasks::kReadouts; ++n) {
        const auto& w = bank[n];
        if (!w) continue;
        out += "readout " + std::to_string(n) + "\n";
        out += "task " + std::string(reservoir::to_string(w->task)) + "\n";
        out += "source " + std::string(reservoir::to_string(w->source)) + "\n";
        out += "condition " + std::to_string(w->condition) + "\n";
        out += "lambda " + format_double(w->lambda) + "\n";
        out += "features";
        for (int f : w->features) out += " " + std::to_string(f);
        out += "\ntargets";
        for (double t : w->targets) out += " " + format_double(t);
        out += "\ncoef " + std::to_string(w->coef.rows()) + " " + std::to_string(w->coef.cols()) + "\n";
        for (Eigen::Index r = 0; r < w->coef.rows(); ++r) {
            for (Eigen::Index c = 0; c < w->coef.cols(); ++c) {
                if (c) out += ' ';
                out += format_double(w->coef(r, c));
            }
            out += '\n';
        }
        out += "end\n";
    }
    return out;
}

inline tasks::ReadoutBank parse_model(std::string_view text)
{
    detail::LineReader in(text);
    const auto head = in.expect("prc-model");
    if (head.size() != 2 || detail::integer(head[1], in.line()) != kModelVersion) {
        fail(ErrorKind::SchemaError, "unsupported model version (expected " + std::to_string(kModelVersion) + ")");
    }
    tasks::ReadoutBank bank;
    for (auto w = in.next(); !w.empty(); w = in.next()) {
        if (w[0] != "readout" || w.size() != 2) fail(ErrorKind::SchemaError, "line " + std::to_string(in.line()) + ": expected 'readout N'");
        const auto slot = detail::integer(w[1], in.line());
        if (slot < 1 || slot > tasks::kReadouts) fail(ErrorKind::SchemaError, "readout slot out of range");
        reservoir::ReadoutWeights r;
        r.task = detail::parse_task(in.expect("task", 2)[1]);
        r.source = detail::parse_source(in.expect("source", 2)[1]);
        r.condition = static_cast<int>(detail::integer(in.expect("condition", 2)[1], in.line()));
        r.lambda = detail::number(in.expect("lambda", 2)[1], in.line());
        const auto feats = in.expect("features");
        for (const auto f : std::span(feats).subspan(1)) {
            const auto v = detail::integer(f, in.line());
            if (v < 0 || v >= reservoir::source_dimension(r.source)) fail(ErrorKind::SchemaError, "feature index out of range");
            r.features.push_back(static_cast<int>(v));
        }
        const auto targets = in.expect("targets");
        for (const auto t : std::span(targets).subspan(1)) r.targets.push_back(detail::number(t, in.line()));
        const auto shape = in.expect("coef");
        if (shape.size() != 3) fail(ErrorKind::SchemaError, "coef needs rows and columns");
        const auto rows = detail::integer(shape[1], in.line());
        const auto cols = detail::integer(shape[2], in.line());
        if (rows != static_cast<long long>(r.features.size()) + 1 || cols < 1) {
            fail(ErrorKind::SchemaError, "readout " + std::to_string(slot) + ": coefficient shape does not match its features");
        }
        r.coef.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto row = in.next();
            if (static_cast<long long>(row.size()) != cols) fail(ErrorKind::SchemaError, "line " + std::to_string(in.line()) + ": wrong coefficient count");
            for (Eigen::Index j = 0; j < cols; ++j) r.coef(i, j) = detail::number(row[static_cast<std::size_t>(j)], in.line());
        }
        in.expect("end");
        if (tasks::bank_slot(r) != slot) fail(ErrorKind::SchemaError, "readout " + std::to_string(slot) + " has a mismatched task tag");
        bank[static_cast<int>(slot)] = std::move(r);
    }
    return bank;
}

inline void save_model(const tasks::ReadoutBank& bank, const std::filesystem::path& p) { write_file(p, format_model(bank)); }

inline tasks::ReadoutBank load_model(const std::filesystem::path& p)
{
    try {
        return parse_model(read_file(p));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw Error(e.kind(), p.string() + ": " + e.detail());
    }
}

} // namespace prc::io
