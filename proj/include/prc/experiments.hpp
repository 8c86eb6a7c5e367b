#pragma once

// Batch protocol: repeated trials per payload condition, cross-condition
// matrices, box statistics, classification accuracy and the two sensor sweeps.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "prc/circuit.hpp"
#include "prc/plant.hpp"
#include "prc/reservoir.hpp"
#include "prc/rng.hpp"
#include "prc/tasks.hpp"

namespace prc::experiments {

using reservoir::FeatureSource;
using reservoir::FrameRange;
using reservoir::ReadoutWeights;
using reservoir::SyncedTrial;
using tasks::ReadoutBank;

inline constexpr int kConditions = 5;

struct ExperimentPlan {
    std::uint64_t seed = 2024;
    int trials = 10;             // per payload condition
    int repeats = 50;            // random windows per evaluation
    double window = 8.0;         // s
    double lambda = 0.1;
    int subsets = 10;            // random sensor subsets per sweep point
    int windows_per_unit = 5;    // windows behind one weight / close-weight sweep score
    std::vector<int> reduction{12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    std::vector<int> failure{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};

    Eigen::Index window_frames() const { return static_cast<Eigen::Index>(std::llround(window * reservoir::kFrameRate)); }

    void validate(double duration) const
    {
        if (trials < 1) fail(ErrorKind::ValidationError, "plan.trials must be >= 1");
        if (repeats < 1) fail(ErrorKind::ValidationError, "plan.repeats must be >= 1");
        if (subsets < 1) fail(ErrorKind::ValidationError, "plan.subsets must be >= 1");
        if (windows_per_unit < 1) fail(ErrorKind::ValidationError, "plan.windows_per_unit must be >= 1");
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::ValidationError, "plan.lambda must be >= 0");
        if (!(window > 0.0) || window > duration) fail(ErrorKind::ValidationError, "plan.window must fit inside the trial");
        for (int k : reduction) {
            if (k < 1 || k > plant::kSensors) fail(ErrorKind::ValidationError, "reduction sensor counts must be in 1..12");
        }
        for (int f : failure) {
            if (f < 0 || f > plant::kSensors) fail(ErrorKind::ValidationError, "failure counts must be in 0..12");
        }
    }
};

/// Everything needed to produce synthetic trials.
struct Setup {
    plant::PlantConfig plant;
    circuit::SensorCircuit circuit;
    std::array<plant::PayloadCondition, kConditions> payloads = plant::default_payloads();
    tasks::ScenarioThresholds thresholds;

    void validate() const
    {
        plant.validate();
        circuit.validate();
        thresholds.validate();
        plant::validate_payloads(payloads, thresholds);
    }
};

/// Trials indexed [item - 1][trial].
using Dataset = std::array<std::vector<SyncedTrial>, kConditions>;

inline std::uint64_t trial_seed(std::uint64_t base, int item, int index)
{
    return derive_seed({base, static_cast<std::uint64_t>(item), static_cast<std::uint64_t>(index)});
}

inline SyncedTrial simulate_synced(const Setup& setup, const plant::PayloadCondition& payload, std::uint64_t seed,
                                   const circuit::FailureSpec& failures = {})
{
    const auto raw = plant::simulate_trial(setup.plant, payload, setup.plant.schedule.duration, seed);
    Rng rng(derive_seed({seed, kStreamCircuit}));
    return reservoir::synchronize(raw, setup.circuit, failures, rng);
}

inline std::vector<SyncedTrial> run_trials(const Setup& setup, const ExperimentPlan& plan, int item)
{
    if (item < 1 || item > kConditions) fail(ErrorKind::MissingCondition, "payload item must be 1..5");
    std::vector<SyncedTrial> out;
    out.reserve(static_cast<std::size_t>(plan.trials));
    for (int i = 0; i < plan.trials; ++i) {
        try {
            out.push_back(simulate_synced(setup, setup.payloads[item - 1], trial_seed(plan.seed, item, i)));
        } catch (const Error& e) {
            throw Error(e.kind(), "item " + std::to_string(item) + " trial " + std::to_string(i) + ": " + e.detail());
        }
    }
    return out;
}

inline Dataset run_dataset(const Setup& setup, const ExperimentPlan& plan)
{
    setup.validate();
    plan.validate(setup.plant.schedule.duration);
    Dataset d;
    for (int c = 1; c <= kConditions; ++c) d[c - 1] = run_trials(setup, plan, c);
    return d;
}

inline void require_complete(const Dataset& d)
{
    for (int c = 0; c < kConditions; ++c) {
        if (d[c].empty()) fail(ErrorKind::MissingCondition, "dataset has no trials for item " + std::to_string(c + 1));
    }
}

// ---------------------------------------------------------------------------
// Statistics

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // population
    std::size_t count = 0;
};

inline MeanStd mean_std(std::span<const double> v)
{
    MeanStd m;
    m.count = v.size();
    if (v.empty()) return m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(v.size()));
    return m;
}

/// Linear-interpolation percentile on sorted data (p in [0, 1]).
inline double percentile_sorted(std::span<const double> s, double p)
{
    if (s.empty()) fail(ErrorKind::EmptySelection, "percentile of an empty sample");
    const double h = p * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

struct BoxStats {
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    std::vector<double> outliers;
    std::size_t count = 0;

    double iqr() const { return p75 - p25; }
    bool overlaps(const BoxStats& o) const { return p25 <= o.p75 && o.p25 <= p75; }
};

inline BoxStats box_stats(std::vector<double> v)
{
    if (v.empty()) fail(ErrorKind::EmptySelection, "box statistics of an empty sample");
    std::sort(v.begin(), v.end());
    BoxStats b;
    b.count = v.size();
    b.p25 = percentile_sorted(v, 0.25);
    b.p50 = percentile_sorted(v, 0.50);
    b.p75 = percentile_sorted(v, 0.75);
    const double lo = b.p25 - 1.5 * b.iqr();
    const double hi = b.p75 + 1.5 * b.iqr();
    b.whisker_low = b.p25;
    b.whisker_high = b.p75;
    for (double x : v) {
        if (x < lo || x > hi) {
            b.outliers.push_back(x);
            continue;
        }
        b.whisker_low = std::min(b.whisker_low, x);
        b.whisker_high = std::max(b.whisker_high, x);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Seeded selections

namespace tag {
inline constexpr std::uint64_t kBank = 0xba4b;
inline constexpr std::uint64_t kWeight = 0x3e16;
inline constexpr std::uint64_t kDirection = 0xd14e;
inline constexpr std::uint64_t kClose = 0xc105;
inline constexpr std::uint64_t kPipeline = 0x919e;
inline constexpr std::uint64_t kSweepWindow = 0x5ee9;
inline constexpr std::uint64_t kReduction = 0x4ed0;
inline constexpr std::uint64_t kFailure = 0xfa11;
} // namespace tag

/// Index of the trial used to train W(6)-W(8) for `item`.
inline int training_trial(const ExperimentPlan& plan, int item, int available)
{
    Rng rng(derive_seed({plan.seed, tag::kBank, static_cast<std::uint64_t>(item)}));
    return std::uniform_int_distribution<int>(0, available - 1)(rng);
}

inline FrameRange draw_window(Rng& rng, Eigen::Index frames, Eigen::Index length)
{
    if (length > frames) fail(ErrorKind::EmptyWindow, "window longer than the trial");
    const auto start = std::uniform_int_distribution<Eigen::Index>(0, frames - length)(rng);
    return {start, start + length};
}

struct Draw {
    int trial = 0;
    FrameRange window;
};

/// Random (trial, window) pairs for `item`, avoiding the bank's training trial when others exist.
inline std::vector<Draw> draw_windows(const Dataset& d, const ExperimentPlan& plan, int item, std::uint64_t stream, int count)
{
    const auto& trials = d[item - 1];
    const int n = static_cast<int>(trials.size());
    const int skip = n > 1 ? training_trial(plan, item, n) : -1;
    Rng rng(derive_seed({plan.seed, stream, static_cast<std::uint64_t>(item)}));
    std::vector<Draw> out;
    for (int r = 0; r < count; ++r) {
        int t = std::uniform_int_distribution<int>(0, n - 1 - (skip >= 0 ? 1 : 0))(rng);
        if (skip >= 0 && t >= skip) ++t;
        out.push_back({t, draw_window(rng, trials[t].frames(), plan.window_frames())});
    }
    return out;
}

/// Distinct sorted k-subsets of 0..11, at most `count` of them (fewer when C(12, k) is smaller).
inline std::vector<std::vector<int>> draw_subsets(std::uint64_t seed, int k, int count)
{
    if (k < 0 || k > plant::kSensors) fail(ErrorKind::ValidationError, "subset size must be in 0..12");
    double combos = 1.0;
    for (int i = 0; i < k; ++i) combos = combos * (plant::kSensors - i) / (i + 1);
    const auto want = static_cast<std::size_t>(std::min<double>(count, std::round(combos)));
    Rng rng(seed);
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> out;
    std::array<int, plant::kSensors> idx{};
    while (out.size() < want) {
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<int> s(idx.begin(), idx.begin() + k);
        std::sort(s.begin(), s.end());
        if (seen.insert(s).second) out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Banks and evaluations

inline std::vector<const SyncedTrial*> training_set(const Dataset& d, const ExperimentPlan& plan, std::span<const int> items)
{
    std::vector<const SyncedTrial*> out;
    for (int item : items) {
        const auto& trials = d[item - 1];
        out.push_back(&trials[training_trial(plan, item, static_cast<int>(trials.size()))]);
    }
    return out;
}

/// Posture readouts always use the sensors; W(6)-W(8) use `source`.
inline ReadoutBank build_bank(const Dataset& d, const ExperimentPlan& plan, FeatureSource source,
                              const std::vector<int>& features = {})
{
    require_complete(d);
    static constexpr std::array<int, 5> all{1, 2, 3, 4, 5};
    static constexpr std::array<int, 2> dir{2, 3};
    static constexpr std::array<int, 2> close{4, 5};
    const auto sensor_features = source == FeatureSource::Sensor ? features : std::vector<int>{};
    ReadoutBank bank;
    const auto picks = training_set(d, plan, all);
    for (int c = 1; c <= kConditions; ++c) bank[c] = tasks::train_posture(*picks[c - 1], plan.lambda, sensor_features);
    bank[6] = tasks::train_weight(picks, source, plan.lambda, features);
    bank[7] = tasks::train_direction(training_set(d, plan, dir), source, plan.lambda, features);
    bank[8] = tasks::train_closeweight(training_set(d, plan, close), source, plan.lambda, features);
    return bank;
}

struct CrossMatrix {
    Eigen::Matrix<double, kConditions, kConditions> train = Eigen::Matrix<double, kConditions, kConditions>::Zero();
    Eigen::Matrix<double, kConditions, kConditions> test = Eigen::Matrix<double, kConditions, kConditions>::Zero();
};

inline double diagonal_mean(const Eigen::Matrix<double, kConditions, kConditions>& m) { return m.diagonal().mean(); }

inline double off_diagonal_mean(const Eigen::Matrix<double, kConditions, kConditions>& m)
{
    return (m.sum() - m.trace()) / (kConditions * (kConditions - 1));
}

/// Entry (i, j): gripper NRMSE of the readout trained on item i+1 applied to item j+1, averaged over trial index.
inline CrossMatrix cross_condition_matrix(const Dataset& d, double lambda)
{
    require_complete(d);
    std::size_t n = d[0].size();
    for (const auto& c : d) n = std::min(n, c.size());
    constexpr int gripper = reservoir::kTracked - 1;
    const FrameRange targets{1, tasks::kPostureTrainFrames};

    CrossMatrix m;
    for (std::size_t a = 0; a < n; ++a) {
        for (int i = 0; i < kConditions; ++i) {
            const auto x = tasks::posture_inputs(d[i][a], targets);
            const auto w = tasks::train_posture(d[i][a], lambda);
            for (int j = 0; j < kConditions; ++j) {
                const Eigen::MatrixXd y = tasks::tracked_rows(d[j][a], targets);
                const auto wij = reservoir::fit(x, y, lambda);
                const Eigen::VectorXd fitted = reservoir::predict(wij, x).col(gripper);
                m.train(i, j) += reservoir::nrmse(fitted, Eigen::VectorXd(y.col(gripper)));
                m.test(i, j) += tasks::eval_posture(w, d[j][a])[gripper];
            }
        }
    }
    m.train /= static_cast<double>(n);
    m.test /= static_cast<double>(n);
    return m;
}

struct WeightStudy {
    FeatureSource source = FeatureSource::Sensor;
    std::array<std::vector<double>, kConditions> estimates;
    std::array<BoxStats, kConditions> boxes;
    std::array<BoxStats, 3> scenario_boxes; // A, B, C pooled by the payload table's scenario
};

inline WeightStudy weight_box_stats(const ReadoutBank& bank, const Dataset& d, const ExperimentPlan& plan)
{
    require_complete(d);
    const auto& w = bank.at(6);
    WeightStudy s;
    s.source = w.source;
    std::array<std::vector<double>, 3> pooled;
    for (int c = 1; c <= kConditions; ++c) {
        for (const auto& draw : draw_windows(d, plan, c, tag::kWeight, plan.repeats)) {
            const auto& trial = d[c - 1][draw.trial];
            const double g = tasks::estimate_weight(w, trial, draw.window);
            s.estimates[c - 1].push_back(g);
            pooled[static_cast<int>(trial.payload.scenario)].push_back(g);
        }
        s.boxes[c - 1] = box_stats(s.estimates[c - 1]);
    }
    for (int k = 0; k < 3; ++k) {
        if (!pooled[k].empty()) s.scenario_boxes[k] = box_stats(pooled[k]);
    }
    return s;
}

struct AccuracyRow {
    FeatureSource source = FeatureSource::Sensor;
    int direction_correct = 0;
    int direction_total = 0;
    int closeweight_correct = 0;
    int closeweight_total = 0;
    double closeweight_relative_mae = 0.0; // mean |estimate - mass| / mass

    double direction_accuracy() const { return direction_total ? double(direction_correct) / direction_total : 0.0; }
    double closeweight_accuracy() const { return closeweight_total ? double(closeweight_correct) / closeweight_total : 0.0; }
};

/// `repeats` windows per task, alternating between the two items of the task. Draws do not depend on the source.
inline AccuracyRow accuracy_eval(const ReadoutBank& bank, const Dataset& d, const ExperimentPlan& plan)
{
    require_complete(d);
    AccuracyRow row;
    row.source = bank.at(7).source;
    const int half = (plan.repeats + 1) / 2;
    std::array<std::vector<Draw>, kConditions> draws;
    for (int c = 2; c <= kConditions; ++c) draws[c - 1] = draw_windows(d, plan, c, c <= 3 ? tag::kDirection : tag::kClose, half);

    double err = 0.0;
    for (int r = 0; r < plan.repeats; ++r) {
        const int item = 2 + r % 2;
        const auto& dr = draws[item - 1][r / 2];
        const auto dec = tasks::classify_direction(bank.at(7), d[item - 1][dr.trial], dr.window);
        row.direction_correct += dec.item == item;
        ++row.direction_total;
    }
    for (int r = 0; r < plan.repeats; ++r) {
        const int item = 4 + r % 2;
        const auto& dr = draws[item - 1][r / 2];
        const auto& trial = d[item - 1][dr.trial];
        const auto dec = tasks::classify_closeweight(bank.at(8), trial, dr.window);
        row.closeweight_correct += dec.item == item;
        ++row.closeweight_total;
        err += std::abs(dec.output - trial.payload.mass) / trial.payload.mass;
    }
    row.closeweight_relative_mae = err / plan.repeats;
    return row;
}

struct PipelineTally {
    std::array<int, kConditions> correct{};
    std::array<int, kConditions> readout_match{};
    std::array<int, kConditions> runs{};
    bool always_consistent = true;
};

/// `repeats` seeded pipeline runs per item on held-out trials.
inline PipelineTally pipeline_eval(const ReadoutBank& bank, const Dataset& d, const ExperimentPlan& plan,
                                   const tasks::ScenarioThresholds& th = {})
{
    require_complete(d);
    PipelineTally t;
    for (int c = 1; c <= kConditions; ++c) {
        for (const auto& dr : draw_windows(d, plan, c, tag::kPipeline, plan.repeats)) {
            const auto r = tasks::run_pipeline(bank, d[c - 1][dr.trial], dr.window, th);
            ++t.runs[c - 1];
            t.correct[c - 1] += r.item == c;
            t.readout_match[c - 1] += r.item == c && r.readout == c;
            t.always_consistent = t.always_consistent && tasks::scenario_consistent(r.scenario, r.item);
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Sweeps

/// Readouts for every sweep unit: one posture readout per (item, trial) plus W(6)-W(8).
struct TaskReadouts {
    std::array<std::vector<ReadoutWeights>, kConditions> posture;
    ReadoutWeights weight;
    ReadoutWeights direction;
    ReadoutWeights closeweight;
};

inline TaskReadouts train_task_readouts(const Dataset& d, const ExperimentPlan& plan, const std::vector<int>& features)
{
    require_complete(d);
    TaskReadouts r;
    for (int c = 0; c < kConditions; ++c) {
        for (const auto& trial : d[c]) r.posture[c].push_back(tasks::train_posture(trial, plan.lambda, features));
    }
    const auto bank = build_bank(d, plan, FeatureSource::Sensor, features);
    r.weight = bank.at(6);
    r.direction = bank.at(7);
    r.closeweight = bank.at(8);
    return r;
}

struct UnitScores {
    std::vector<double> posture;     // gripper NRMSE per (item, trial)
    std::vector<double> weight;      // per (item, trial): RMS window error / true mass
    std::vector<double> closeweight; // same, items 4 and 5
    int direction_correct = 0;
    int direction_total = 0;

    void append(const UnitScores& o)
    {
        posture.insert(posture.end(), o.posture.begin(), o.posture.end());
        weight.insert(weight.end(), o.weight.begin(), o.weight.end());
        closeweight.insert(closeweight.end(), o.closeweight.begin(), o.closeweight.end());
        direction_correct += o.direction_correct;
        direction_total += o.direction_total;
    }
};

/// Scores every (item, trial) unit with `stuck` sensor channels forced to zero at test time.
inline UnitScores score_units(const TaskReadouts& r, const Dataset& d, const ExperimentPlan& plan, std::span<const int> stuck)
{
    UnitScores s;
    constexpr int gripper = reservoir::kTracked - 1;
    for (int c = 1; c <= kConditions; ++c) {
        for (std::size_t a = 0; a < d[c - 1].size(); ++a) {
            const auto trial = reservoir::with_stuck_sensors(d[c - 1][a], stuck);
            s.posture.push_back(tasks::eval_posture(r.posture[c - 1][a], trial)[gripper]);

            Rng rng(derive_seed({plan.seed, tag::kSweepWindow, static_cast<std::uint64_t>(c), a}));
            double sq_w = 0.0;
            double sq_c = 0.0;
            for (int k = 0; k < plan.windows_per_unit; ++k) {
                const auto win = draw_window(rng, trial.frames(), plan.window_frames());
                const double m = trial.payload.mass;
                const double g = tasks::estimate_weight(r.weight, trial, win);
                sq_w += (g - m) * (g - m);
                if (c == 2 || c == 3) {
                    s.direction_correct += tasks::classify_direction(r.direction, trial, win).item == c;
                    ++s.direction_total;
                }
                if (c == 4 || c == 5) {
                    const double y = tasks::estimate_weight(r.closeweight, trial, win);
                    sq_c += (y - m) * (y - m);
                }
            }
            const double n = plan.windows_per_unit;
            s.weight.push_back(std::sqrt(sq_w / n) / trial.payload.mass);
            if (c >= 4) s.closeweight.push_back(std::sqrt(sq_c / n) / trial.payload.mass);
        }
    }
    return s;
}

struct SweepPoint {
    int x = 0;
    std::size_t subsets = 0;
    MeanStd posture;
    MeanStd weight;
    MeanStd closeweight;
    double direction_accuracy = 0.0;
    std::vector<int> best_subset; // lowest mean posture NRMSE among the subsets tried
    double best_posture = 0.0;
};

enum class SweepKind { Reduction, Failure };

constexpr std::string_view to_string(SweepKind k) noexcept { return k == SweepKind::Reduction ? "reduction" : "failure"; }

struct SweepResult {
    SweepKind kind = SweepKind::Reduction;
    std::vector<SweepPoint> points;
};

namespace detail {

inline SweepPoint summarise(int x, const std::vector<std::vector<int>>& subsets, const std::vector<UnitScores>& per_subset)
{
    SweepPoint p;
    p.x = x;
    p.subsets = subsets.size();
    UnitScores all;
    for (std::size_t i = 0; i < per_subset.size(); ++i) {
        all.append(per_subset[i]);
        const double m = mean_std(per_subset[i].posture).mean;
        if (i == 0 || m < p.best_posture) {
            p.best_posture = m;
            p.best_subset = subsets[i];
        }
    }
    p.posture = mean_std(all.posture);
    p.weight = mean_std(all.weight);
    p.closeweight = mean_std(all.closeweight);
    p.direction_accuracy = all.direction_total ? double(all.direction_correct) / all.direction_total : 0.0;
    return p;
}

} // namespace detail

/// The unmodified pipeline scored with the sweep protocol.
inline SweepPoint sweep_baseline(const Dataset& d, const ExperimentPlan& plan)
{
    const auto all = reservoir::all_features(FeatureSource::Sensor);
    const auto r = train_task_readouts(d, plan, all);
    return detail::summarise(plant::kSensors, {all}, {score_units(r, d, plan, {})});
}

/// Fewer sensors at training and test time; every subset is retrained from scratch.
inline SweepResult sensor_reduction_sweep(const Dataset& d, const ExperimentPlan& plan)
{
    SweepResult out{SweepKind::Reduction, {}};
    for (int k : plan.reduction) {
        if (k < 1 || k > plant::kSensors) fail(ErrorKind::ValidationError, "reduction sensor count must be in 1..12");
        const auto subsets = draw_subsets(derive_seed({plan.seed, tag::kReduction, static_cast<std::uint64_t>(k)}), k, plan.subsets);
        std::vector<UnitScores> scores;
        for (const auto& s : subsets) scores.push_back(score_units(train_task_readouts(d, plan, s), d, plan, {}));
        out.points.push_back(detail::summarise(k, subsets, scores));
    }
    return out;
}

/// Readouts trained on all 12 sensors; f channels read zero at test time.
inline SweepResult failure_sweep(const TaskReadouts& full, const Dataset& d, const ExperimentPlan& plan)
{
    SweepResult out{SweepKind::Failure, {}};
    for (int f : plan.failure) {
        if (f < 0 || f > plant::kSensors) fail(ErrorKind::ValidationError, "failed sensor count must be in 0..12");
        const auto subsets = draw_subsets(derive_seed({plan.seed, tag::kFailure, static_cast<std::uint64_t>(f)}), f, plan.subsets);
        std::vector<UnitScores> scores;
        for (const auto& s : subsets) scores.push_back(score_units(full, d, plan, s));
        out.points.push_back(detail::summarise(f, subsets, scores));
    }
    return out;
}

inline SweepResult failure_sweep(const Dataset& d, const ExperimentPlan& plan)
{
    return failure_sweep(train_task_readouts(d, plan, reservoir::all_features(FeatureSource::Sensor)), d, plan);
}

} // namespace prc::experiments
