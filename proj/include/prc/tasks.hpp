#pragma once

// Posture tracking, weight estimation, refined classification and the
// hierarchical inference pipeline built on top of them.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "prc/reservoir.hpp"
#include "prc/scenario.hpp"

namespace prc::tasks {

using reservoir::Block;
using reservoir::FeatureSource;
using reservoir::FrameRange;
using reservoir::ReadoutTask;
using reservoir::ReadoutWeights;
using reservoir::StateMatrix;
using reservoir::SyncedTrial;

inline constexpr Eigen::Index kPostureTrainFrames = 120;
inline constexpr FrameRange kPostureTest{120, 240};
inline constexpr Eigen::Index kClassifyFrames = 160; // 8 s at 20 fps
inline constexpr int kReadouts = 8;

/// W(1)..W(8). Slots 1-5 are posture readouts for payload items 1-5, 6 weight, 7 direction, 8 close-weight.
struct ReadoutBank {
    std::array<std::optional<ReadoutWeights>, kReadouts> slot;

    std::optional<ReadoutWeights>& operator[](int n) { return slot.at(static_cast<std::size_t>(n - 1)); }
    const std::optional<ReadoutWeights>& operator[](int n) const { return slot.at(static_cast<std::size_t>(n - 1)); }

    std::vector<int> missing() const
    {
        std::vector<int> m;
        for (int n = 1; n <= kReadouts; ++n) {
            if (!(*this)[n]) m.push_back(n);
        }
        return m;
    }
    bool complete() const { return missing().empty(); }

    const ReadoutWeights& at(int n) const
    {
        const auto& w = (*this)[n];
        if (!w) fail(ErrorKind::IncompleteBank, "readout W(" + std::to_string(n) + ") is missing");
        return *w;
    }
};

/// Maps a trained readout to its bank slot.
inline int bank_slot(const ReadoutWeights& w)
{
    switch (w.task) {
    case ReadoutTask::Posture:
        if (w.condition < 1 || w.condition > 5) fail(ErrorKind::ValidationError, "posture readout without a payload tag");
        return w.condition;
    case ReadoutTask::Weight: return 6;
    case ReadoutTask::Direction: return 7;
    case ReadoutTask::CloseWeight: return 8;
    case ReadoutTask::Generic: break;
    }
    fail(ErrorKind::ValidationError, "generic readouts have no bank slot");
}

// ---------------------------------------------------------------------------
// Task 1: posture

inline StateMatrix posture_inputs(const SyncedTrial& t, FrameRange targets, const std::vector<int>& features = {})
{
    return reservoir::assemble(t, FeatureSource::Sensor, {targets.begin - 1, targets.end - 1}, features);
}

inline Eigen::MatrixXd tracked_rows(const SyncedTrial& t, FrameRange r)
{
    if (!t.has_tracked()) fail(ErrorKind::DimensionMismatch, "trial has no tracked-point columns");
    reservoir::check_range(t, r);
    return t.tracked.middleRows(r.begin, r.size());
}

/// One-step-ahead readout x(t+1) from s(t) on the first 6 s.
inline ReadoutWeights train_posture(const SyncedTrial& trial, double lambda, const std::vector<int>& features = {})
{
    if (trial.frames() < kPostureTest.end) {
        fail(ErrorKind::InsufficientFrames,
             "posture training needs >= 240 frames, trial has " + std::to_string(trial.frames()));
    }
    const FrameRange targets{1, kPostureTrainFrames};
    auto w = reservoir::fit(posture_inputs(trial, targets, features), tracked_rows(trial, targets), lambda);
    w.task = ReadoutTask::Posture;
    w.condition = trial.payload.item;
    return w;
}

/// One-step-ahead predictions x(t+1) for every pair (t, t+1) inside `range`.
inline Eigen::MatrixXd predict_posture(const ReadoutWeights& w, const SyncedTrial& trial, FrameRange range)
{
    if (range.size() < 2) fail(ErrorKind::EmptySelection, "posture range must span at least two frames");
    return reservoir::predict(w, posture_inputs(trial, {range.begin + 1, range.end}, w.features));
}

inline std::array<double, reservoir::kTracked> eval_posture(const ReadoutWeights& w, const SyncedTrial& trial,
                                                            FrameRange range = kPostureTest)
{
    const Eigen::MatrixXd pred = predict_posture(w, trial, range);
    const Eigen::MatrixXd actual = tracked_rows(trial, {range.begin + 1, range.end});
    std::array<double, reservoir::kTracked> out{};
    for (int i = 0; i < reservoir::kTracked; ++i) {
        out[i] = reservoir::nrmse(Eigen::VectorXd(pred.col(i)), Eigen::VectorXd(actual.col(i)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tasks 2 and 3: window-mean readouts on 8 s blocks

namespace detail {

inline const SyncedTrial& require_item(std::span<const SyncedTrial* const> trials, int item)
{
    const SyncedTrial* found = nullptr;
    for (const auto* t : trials) {
        if (t->payload.item != item) continue;
        if (found) fail(ErrorKind::MissingCondition, "payload item " + std::to_string(item) + " given twice");
        found = t;
    }
    if (!found) fail(ErrorKind::MissingCondition, "no trial for payload item " + std::to_string(item));
    return *found;
}

inline ReadoutWeights fit_blocks(std::span<const SyncedTrial* const> trials, std::span<const int> items,
                                 std::span<const double> targets, FeatureSource source, double lambda,
                                 const std::vector<int>& features, Eigen::Index frames)
{
    std::vector<Block> blocks;
    for (int item : items) blocks.push_back({&require_item(trials, item), FrameRange::first(frames)});
    if (trials.size() != items.size()) fail(ErrorKind::MissingCondition, "unexpected extra trials for this readout");
    const StateMatrix x = reservoir::assemble(blocks, source, features);
    Eigen::VectorXd y(x.rows());
    for (std::size_t b = 0; b < items.size(); ++b) y.segment(static_cast<Eigen::Index>(b) * frames, frames).setConstant(targets[b]);
    auto w = reservoir::fit(x, y, lambda);
    w.targets.assign(targets.begin(), targets.end());
    return w;
}

inline double window_mean(const ReadoutWeights& w, const SyncedTrial& trial, FrameRange window)
{
    if (window.empty()) fail(ErrorKind::EmptyWindow, "inference window has no frames");
    const Eigen::MatrixXd y = reservoir::predict(w, reservoir::assemble(trial, w.source, window, w.features));
    return y.col(0).mean();
}

} // namespace detail

/// Trials must hold exactly one experiment per payload item 1..5; targets are their masses.
inline ReadoutWeights train_weight(std::span<const SyncedTrial* const> trials, FeatureSource source, double lambda,
                                   const std::vector<int>& features = {}, Eigen::Index frames = kClassifyFrames)
{
    static constexpr std::array<int, 5> items{1, 2, 3, 4, 5};
    std::array<double, 5> mass{};
    for (int i = 0; i < 5; ++i) mass[i] = detail::require_item(trials, items[i]).payload.mass;
    auto w = detail::fit_blocks(trials, items, mass, source, lambda, features, frames);
    w.task = ReadoutTask::Weight;
    return w;
}

inline double estimate_weight(const ReadoutWeights& w, const SyncedTrial& trial, FrameRange window)
{
    return detail::window_mean(w, trial, window);
}

enum class Direction { Left, Right };

constexpr std::string_view to_string(Direction d) noexcept { return d == Direction::Left ? "left" : "right"; }

/// Item 2 (left-facing) maps to -1, item 3 to +1.
inline ReadoutWeights train_direction(std::span<const SyncedTrial* const> trials, FeatureSource source, double lambda,
                                      const std::vector<int>& features = {}, Eigen::Index frames = kClassifyFrames)
{
    static constexpr std::array<int, 2> items{2, 3};
    static constexpr std::array<double, 2> targets{-1.0, 1.0};
    auto w = detail::fit_blocks(trials, items, targets, source, lambda, features, frames);
    w.task = ReadoutTask::Direction;
    return w;
}

struct Decision {
    double output = 0.0;
    int item = 0;
};

/// Negative window mean is left (item 2); zero and above is right (item 3).
inline Decision classify_direction(const ReadoutWeights& w, const SyncedTrial& trial, FrameRange window)
{
    const double y = detail::window_mean(w, trial, window);
    return {y, y < 0.0 ? 2 : 3};
}

/// Targets are the true masses of items 4 and 5.
inline ReadoutWeights train_closeweight(std::span<const SyncedTrial* const> trials, FeatureSource source, double lambda,
                                        const std::vector<int>& features = {}, Eigen::Index frames = kClassifyFrames)
{
    static constexpr std::array<int, 2> items{4, 5};
    const std::array<double, 2> mass{detail::require_item(trials, 4).payload.mass, detail::require_item(trials, 5).payload.mass};
    auto w = detail::fit_blocks(trials, items, mass, source, lambda, features, frames);
    w.task = ReadoutTask::CloseWeight;
    return w;
}

/// Nearest target wins; the midpoint goes to item 5.
inline int closeweight_item(const ReadoutWeights& w, double output)
{
    if (w.targets.size() != 2) fail(ErrorKind::ValidationError, "close-weight readout must carry two class targets");
    const double mid = 0.5 * (w.targets[0] + w.targets[1]);
    const bool upper = w.targets[1] >= w.targets[0] ? output >= mid : output <= mid;
    return upper ? 5 : 4;
}

inline Decision classify_closeweight(const ReadoutWeights& w, const SyncedTrial& trial, FrameRange window)
{
    const double y = detail::window_mean(w, trial, window);
    return {y, closeweight_item(w, y)};
}

// ---------------------------------------------------------------------------
// Hierarchical inference

struct PipelineResult {
    double weight = 0.0;
    Scenario scenario = Scenario::A;
    int item = 0;
    int readout = 0; // posture slot used, equal to `item`
    std::optional<double> direction_output;
    std::optional<double> closeweight_output;
    FrameRange window;
    Eigen::Index trajectory_begin = 0; // frame index of trajectory row 0
    Eigen::MatrixXd trajectory;        // predicted x1..x5
};

inline bool scenario_consistent(Scenario s, int item)
{
    switch (s) {
    case Scenario::A: return item == 1;
    case Scenario::B: return item == 2 || item == 3;
    case Scenario::C: return item == 4 || item == 5;
    }
    return false;
}

namespace detail {

template <class F>
auto stage(const char* name, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage ") + name + ": " + e.detail());
    }
}

} // namespace detail

/// weight -> route -> refine -> posture readout -> one-step-ahead trajectory after the window.
inline PipelineResult run_pipeline(const ReadoutBank& bank, const SyncedTrial& trial, FrameRange window,
                                   const ScenarioThresholds& th = {})
{
    if (const auto m = bank.missing(); !m.empty()) {
        fail(ErrorKind::IncompleteBank, "readout W(" + std::to_string(m.front()) + ") is missing");
    }
    PipelineResult r;
    r.window = window;
    r.weight = detail::stage("weight", [&] { return estimate_weight(bank.at(6), trial, window); });
    r.scenario = detail::stage("route", [&] { return route(r.weight, th); });
    switch (r.scenario) {
    case Scenario::A: r.item = 1; break;
    case Scenario::B: {
        const auto d = detail::stage("direction", [&] { return classify_direction(bank.at(7), trial, window); });
        r.direction_output = d.output;
        r.item = d.item;
        break;
    }
    case Scenario::C: {
        const auto d = detail::stage("closeweight", [&] { return classify_closeweight(bank.at(8), trial, window); });
        r.closeweight_output = d.output;
        r.item = d.item;
        break;
    }
    }
    r.readout = r.item;
    r.trajectory_begin = window.end + 1;
    if (window.end + 1 < trial.frames()) {
        r.trajectory = detail::stage("posture", [&] {
            return predict_posture(bank.at(r.readout), trial, {window.end, trial.frames()});
        });
    } else {
        r.trajectory.resize(0, reservoir::kTracked);
    }
    return r;
}

} // namespace prc::tasks
