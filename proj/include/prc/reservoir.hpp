#pragma once

// State-space side of the reservoir: multi-rate synchronisation, design
// matrices, linear readouts and the NRMSE score.

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "prc/circuit.hpp"
#include "prc/error.hpp"
#include "prc/plant.hpp"
#include "prc/rng.hpp"

namespace prc::reservoir {

using plant::kMarkers;
using plant::kSensors;
using plant::kTracked;

inline constexpr double kFrameRate = 20.0;

enum class FeatureSource { Sensor, Visual };

constexpr std::string_view to_string(FeatureSource s) noexcept { return s == FeatureSource::Sensor ? "sensor" : "visual"; }

constexpr int source_dimension(FeatureSource s) noexcept { return s == FeatureSource::Sensor ? kSensors : kMarkers; }

/// Measured 1 kHz voltages and 60 fps markers, i.e. what the DAQ and camera deliver.
struct RawRecording {
    Eigen::MatrixXd sensors; // N x 12, V
    Eigen::MatrixXd markers; // M x 9, mm
    plant::PayloadCondition payload;
    double daq_rate = plant::kDaqRate;
    double camera_rate = plant::kCameraRate;
};

/// One experiment aligned at 20 fps. Either feature block may be empty (0 columns) for foreign logs.
struct SyncedTrial {
    double frame_rate = kFrameRate;
    Eigen::MatrixXd sensors; // N_f x 12
    Eigen::MatrixXd markers; // N_f x 9
    Eigen::MatrixXd tracked; // N_f x 5, x1..x5
    plant::PayloadCondition payload;

    Eigen::Index frames() const { return std::max({sensors.rows(), markers.rows(), tracked.rows()}); }
    bool has_sensors() const { return sensors.cols() == kSensors && sensors.rows() > 0; }
    bool has_visual() const { return markers.cols() == kMarkers && markers.rows() > 0; }
    bool has_tracked() const { return tracked.cols() == kTracked && tracked.rows() > 0; }

    const Eigen::MatrixXd& features(FeatureSource s) const
    {
        if (s == FeatureSource::Sensor) {
            if (!has_sensors()) fail(ErrorKind::DimensionMismatch, "trial has no sensor columns");
            return sensors;
        }
        if (!has_visual()) fail(ErrorKind::DimensionMismatch, "trial has no marker columns");
        return markers;
    }
};

/// Half-open frame interval [begin, end).
struct FrameRange {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;

    Eigen::Index size() const { return end > begin ? end - begin : 0; }
    bool empty() const { return size() == 0; }

    static FrameRange first(Eigen::Index n) { return {0, n}; }
    static FrameRange from_seconds(double start_s, double length_s, double rate = kFrameRate)
    {
        const auto b = static_cast<Eigen::Index>(std::llround(start_s * rate));
        return {b, b + static_cast<Eigen::Index>(std::llround(length_s * rate))};
    }
};

inline Eigen::MatrixXd tracked_from_markers(const Eigen::MatrixXd& markers)
{
    Eigen::MatrixXd x(markers.rows(), kTracked);
    for (int i = 0; i < plant::kModules; ++i) {
        x.col(i) = (markers.col(2 * i) + markers.col(2 * i + 1)) / 2.0;
    }
    x.col(plant::kModules) = markers.col(2 * plant::kModules);
    return x;
}

/// Fold angles -> voltages through the sensor network, sample by sample.
inline RawRecording measure_trial(const plant::RawTrial& raw, const circuit::SensorCircuit& c,
                                  const circuit::FailureSpec& failures, Rng& rng)
{
    c.validate();
    RawRecording rec;
    rec.payload = raw.payload;
    rec.daq_rate = raw.daq_rate;
    rec.camera_rate = raw.camera_rate;
    rec.markers = raw.markers;
    rec.sensors.resize(raw.fold_angles.rows(), kSensors);
    plant::SensorArray phi{};
    for (Eigen::Index k = 0; k < raw.fold_angles.rows(); ++k) {
        for (int j = 0; j < kSensors; ++j) phi[j] = raw.fold_angles(k, j);
        const auto v = circuit::measure(phi, c, failures, rng);
        for (int j = 0; j < kSensors; ++j) rec.sensors(k, j) = v[j];
    }
    return rec;
}

namespace detail {

inline Eigen::Index decimation_factor(double rate, std::string_view what)
{
    const double q = rate / kFrameRate;
    const double r = std::round(q);
    if (!(r >= 1.0) || std::abs(q - r) > 1e-9) {
        fail(ErrorKind::RateMismatch, std::string(what) + " rate " + std::to_string(rate) + " Hz is not a multiple of 20 Hz");
    }
    return static_cast<Eigen::Index>(r);
}

inline Eigen::MatrixXd take_every(const Eigen::MatrixXd& m, Eigen::Index stride, Eigen::Index count)
{
    Eigen::MatrixXd out(count, m.cols());
    for (Eigen::Index k = 0; k < count; ++k) out.row(k) = m.row(k * stride);
    return out;
}

} // namespace detail

/// Sample-and-hold selection: frame k is the raw sample at t = k / 20 s for both streams.
inline SyncedTrial decimate(const RawRecording& rec)
{
    const bool has_daq = rec.sensors.rows() > 0;
    const bool has_cam = rec.markers.rows() > 0;
    if (!has_daq && !has_cam) fail(ErrorKind::EmptySelection, "recording has neither sensor nor marker samples");
    if (has_daq && rec.sensors.cols() != kSensors) fail(ErrorKind::SchemaError, "recording must carry 12 sensor channels");
    if (has_cam && rec.markers.cols() != kMarkers) fail(ErrorKind::SchemaError, "recording must carry 9 marker channels");

    Eigen::Index frames = std::numeric_limits<Eigen::Index>::max();
    Eigen::Index daq_stride = 0;
    Eigen::Index cam_stride = 0;
    if (has_daq) {
        daq_stride = detail::decimation_factor(rec.daq_rate, "DAQ");
        frames = std::min(frames, (rec.sensors.rows() + daq_stride - 1) / daq_stride);
    }
    if (has_cam) {
        cam_stride = detail::decimation_factor(rec.camera_rate, "camera");
        frames = std::min(frames, (rec.markers.rows() + cam_stride - 1) / cam_stride);
    }

    SyncedTrial t;
    t.payload = rec.payload;
    if (has_daq) t.sensors = detail::take_every(rec.sensors, daq_stride, frames);
    if (has_cam) {
        t.markers = detail::take_every(rec.markers, cam_stride, frames);
        t.tracked = tracked_from_markers(t.markers);
    }
    return t;
}

inline SyncedTrial synchronize(const plant::RawTrial& raw, const circuit::SensorCircuit& c,
                               const circuit::FailureSpec& failures, Rng& rng)
{
    return decimate(measure_trial(raw, c, failures, rng));
}

/// Copy of `trial` with the given sensor channels forced to zero (run-time sensor failure).
inline SyncedTrial with_stuck_sensors(const SyncedTrial& trial, std::span<const int> channels)
{
    SyncedTrial out = trial;
    for (int j : channels) {
        if (j < 0 || j >= kSensors) fail(ErrorKind::DimensionMismatch, "sensor index out of range");
        out.sensors.col(j).setZero();
    }
    return out;
}

inline std::vector<int> all_features(FeatureSource s)
{
    std::vector<int> f(static_cast<std::size_t>(source_dimension(s)));
    std::iota(f.begin(), f.end(), 0);
    return f;
}

/// T x (D+1) design matrix; column 0 is the bias.
struct StateMatrix {
    Eigen::MatrixXd data;
    FeatureSource source = FeatureSource::Sensor;
    std::vector<int> features; // source column behind each non-bias column

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols() - 1; }
    bool well_posed() const { return rows() >= data.cols(); }
};

struct Block {
    const SyncedTrial* trial = nullptr;
    FrameRange range;
};

inline void check_range(const SyncedTrial& t, FrameRange r)
{
    if (r.begin < 0 || r.end > t.frames() || r.end < r.begin) {
        fail(ErrorKind::EmptySelection, "frame range [" + std::to_string(r.begin) + ", " + std::to_string(r.end) +
                                            ") outside trial of " + std::to_string(t.frames()) + " frames");
    }
}

/// Stacks the selected frames of each block in order and prepends the bias column.
inline StateMatrix assemble(std::span<const Block> blocks, FeatureSource source, std::vector<int> features = {})
{
    if (features.empty()) features = all_features(source);
    for (int f : features) {
        if (f < 0 || f >= source_dimension(source)) fail(ErrorKind::DimensionMismatch, "feature index out of range");
    }
    Eigen::Index total = 0;
    for (const auto& b : blocks) {
        check_range(*b.trial, b.range);
        total += b.range.size();
    }
    if (total == 0) fail(ErrorKind::EmptySelection, "no frames selected");

    StateMatrix x;
    x.source = source;
    x.features = std::move(features);
    x.data.resize(total, static_cast<Eigen::Index>(x.features.size()) + 1);
    x.data.col(0).setOnes();
    Eigen::Index row = 0;
    for (const auto& b : blocks) {
        const Eigen::MatrixXd& src = b.trial->features(source);
        for (Eigen::Index k = b.range.begin; k < b.range.end; ++k, ++row) {
            for (std::size_t c = 0; c < x.features.size(); ++c) {
                x.data(row, static_cast<Eigen::Index>(c) + 1) = src(k, x.features[c]);
            }
        }
    }
    if (!x.data.allFinite()) fail(ErrorKind::NonFinite, "state matrix contains non-finite entries");
    return x;
}

inline StateMatrix assemble(const SyncedTrial& trial, FeatureSource source, FrameRange range, std::vector<int> features = {})
{
    const Block b{&trial, range};
    return assemble(std::span<const Block>(&b, 1), source, std::move(features));
}

enum class ReadoutTask { Generic, Posture, Weight, Direction, CloseWeight };

constexpr std::string_view to_string(ReadoutTask t) noexcept
{
    switch (t) {
    case ReadoutTask::Generic: return "generic";
    case ReadoutTask::Posture: return "posture";
    case ReadoutTask::Weight: return "weight";
    case ReadoutTask::Direction: return "direction";
    case ReadoutTask::CloseWeight: return "closeweight";
    }
    return "?";
}

/// y = w0 + sum_i w_i s_i, one column per output. Row 0 of `coef` holds w0.
struct ReadoutWeights {
    Eigen::MatrixXd coef;
    ReadoutTask task = ReadoutTask::Generic;
    int condition = 0; // payload item for posture readouts
    FeatureSource source = FeatureSource::Sensor;
    double lambda = 0.0;
    std::vector<int> features;
    std::vector<double> targets; // class target values for classification readouts

    Eigen::Index dim() const { return coef.rows() - 1; }
    Eigen::Index outputs() const { return coef.cols(); }
};

/// Ridge readout. The bias is not penalised; lambda = 0 gives the minimum-norm least-squares solution.
inline ReadoutWeights fit(const StateMatrix& x, const Eigen::MatrixXd& y, double lambda)
{
    if (x.rows() != y.rows()) fail(ErrorKind::DimensionMismatch, "state matrix and targets differ in row count");
    if (x.rows() == 0 || y.cols() == 0) fail(ErrorKind::EmptySelection, "empty training set");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::ValidationError, "ridge lambda must be finite and >= 0");
    if (!y.allFinite() || !x.data.allFinite()) fail(ErrorKind::NonFinite, "training data contains non-finite values");

    ReadoutWeights w;
    w.source = x.source;
    w.features = x.features;
    w.lambda = lambda;

    if (lambda > 0.0) {
        Eigen::MatrixXd gram = x.data.transpose() * x.data;
        gram.diagonal().tail(x.dim()).array() += lambda;
        const Eigen::MatrixXd rhs = x.data.transpose() * y;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) fail(ErrorKind::SingularSystem, "ridge normal equations could not be factored");
        w.coef = ldlt.solve(rhs);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x.data);
        w.coef = cod.solve(y);
    }
    if (!w.coef.allFinite()) fail(ErrorKind::SingularSystem, "readout solve produced non-finite weights");
    return w;
}

inline Eigen::MatrixXd predict(const ReadoutWeights& w, const StateMatrix& x)
{
    if (x.data.cols() != w.coef.rows() || x.source != w.source || x.features != w.features) {
        fail(ErrorKind::DimensionMismatch, "readout was trained on a different feature set");
    }
    return x.data * w.coef;
}

/// RMSE divided by the mean of the actual series.
inline double nrmse(std::span<const double> pred, std::span<const double> actual, double mean_eps = 1e-9)
{
    if (pred.size() != actual.size()) fail(ErrorKind::DimensionMismatch, "nrmse series differ in length");
    if (actual.empty()) fail(ErrorKind::EmptySelection, "nrmse of an empty series");
    const double n = static_cast<double>(actual.size());
    double sq = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = pred[i] - actual[i];
        sq += d * d;
        sum += actual[i];
    }
    const double mean = sum / n;
    if (!(std::abs(mean) > mean_eps)) fail(ErrorKind::ZeroMeanTarget, "mean of the actual series is ~0; NRMSE undefined");
    return std::sqrt(sq / n) / mean;
}

inline double nrmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual, double mean_eps = 1e-9)
{
    return nrmse(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                 std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())), mean_eps);
}

} // namespace prc::reservoir
