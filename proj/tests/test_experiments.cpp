#include <catch_amalgamated.hpp>

#include <set>

#include "prc/experiments.hpp"

using namespace prc;
using namespace prc::experiments;
using Catch::Approx;

namespace {

ExperimentPlan small_plan()
{
    ExperimentPlan p;
    p.trials = 2;
    p.repeats = 10;
    p.subsets = 3;
    p.windows_per_unit = 2;
    p.reduction = {12, 11, 6};
    p.failure = {0, 1, 3};
    return p;
}

const Dataset& sim()
{
    static const Dataset d = run_dataset(Setup{}, small_plan());
    return d;
}

Dataset separable()
{
    Dataset d;
    const auto table = plant::default_payloads();
    for (int c = 1; c <= kConditions; ++c) {
        for (int a = 0; a < 2; ++a) {
            Rng rng(derive_seed({7, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(a)}));
            std::normal_distribution<double> n(0.0, 0.001);
            SyncedTrial t;
            t.sensors.resize(600, plant::kSensors);
            for (Eigen::Index k = 0; k < 600; ++k) {
                for (int j = 0; j < plant::kSensors; ++j) t.sensors(k, j) = (j == c - 1 ? 1.0 : 0.0) + n(rng);
            }
            t.markers = Eigen::MatrixXd::NullaryExpr(600, plant::kMarkers, [&] { return 10.0 + n(rng); });
            t.tracked = reservoir::tracked_from_markers(t.markers);
            t.payload = table[c - 1];
            d[c - 1].push_back(std::move(t));
        }
    }
    return d;
}

} // namespace

TEST_CASE("run_trials is seeded and sized")
{
    Setup s;
    ExperimentPlan p;
    p.trials = 1;
    const auto a = run_trials(s, p, 2);
    const auto b = run_trials(s, p, 2);
    REQUIRE(a.size() == 1);
    CHECK(a[0].frames() == 600);
    CHECK(a[0].sensors == b[0].sensors);
    CHECK(a[0].markers == b[0].markers);
    p.seed = 1;
    CHECK(run_trials(s, p, 2)[0].sensors != a[0].sensors);
    CHECK_THROWS_AS(run_trials(s, p, 6), Error);
}

TEST_CASE("mean and std match a two-pass reference")
{
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(1000);
    for (auto& x : v) x = u(rng);
    long double s = 0;
    for (double x : v) s += x;
    const long double mean = s / v.size();
    long double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const auto m = mean_std(v);
    CHECK(std::abs(m.mean - static_cast<double>(mean)) <= 1e-12);
    CHECK(std::abs(m.std - std::sqrt(static_cast<double>(ss / v.size()))) <= 1e-12);
    std::reverse(v.begin(), v.end());
    CHECK(std::abs(mean_std(v).mean - m.mean) <= 1e-12);
    CHECK(mean_std(std::vector<double>{4.0}).std == 0.0);
}

TEST_CASE("box statistics")
{
    const auto b = box_stats({9, 1, 8, 2, 7, 3, 6, 4, 5});
    CHECK(b.p25 == 3.0);
    CHECK(b.p50 == 5.0);
    CHECK(b.p75 == 7.0);
    CHECK(b.whisker_low == 1.0);
    CHECK(b.whisker_high == 9.0);
    CHECK(b.outliers.empty());
    const auto o = box_stats({1, 2, 3, 4, 100});
    CHECK(o.p25 == 2.0);
    CHECK(o.p75 == 4.0);
    CHECK(o.whisker_high == 4.0);
    CHECK(o.outliers == std::vector<double>{100.0});
    CHECK(box_stats({1, 2, 3, 4}).p25 == Approx(1.75));
    CHECK_THROWS_AS(box_stats({}), Error);
}

TEST_CASE("sensor subsets are distinct and valid")
{
    const auto s6 = draw_subsets(1, 6, 10);
    CHECK(s6.size() == 10);
    std::set<std::vector<int>> seen(s6.begin(), s6.end());
    CHECK(seen.size() == 10);
    for (const auto& s : s6) {
        CHECK(s.size() == 6);
        CHECK(std::set<int>(s.begin(), s.end()).size() == 6);
        CHECK(std::is_sorted(s.begin(), s.end()));
        CHECK(s.back() < 12);
    }
    CHECK(draw_subsets(1, 12, 10).size() == 1);
    CHECK(draw_subsets(1, 11, 20).size() == 12);
    CHECK(draw_subsets(1, 0, 10).size() == 1);
    CHECK(draw_subsets(5, 4, 3) == draw_subsets(5, 4, 3));
}

TEST_CASE("cross-condition matrix")
{
    const auto& d = sim();
    const auto m = cross_condition_matrix(d, 0.1);
    double diag = 0;
    for (std::size_t a = 0; a < d[0].size(); ++a) diag += tasks::eval_posture(tasks::train_posture(d[2][a], 0.1), d[2][a])[4];
    CHECK(m.test(2, 2) == Approx(diag / d[0].size()).epsilon(1e-12));
    CHECK(diagonal_mean(m.test) < off_diagonal_mean(m.test));
    CHECK(m.test(1, 2) > m.test(1, 1));
    CHECK(m.test(2, 1) > m.test(2, 2));
    Dataset missing = d;
    missing[3].clear();
    CHECK_THROWS_AS(cross_condition_matrix(missing, 0.1), Error);
}

TEST_CASE("weight box statistics and accuracy denominators")
{
    const auto& d = sim();
    const auto plan = small_plan();
    const auto bank = build_bank(d, plan, FeatureSource::Sensor);
    const auto w = weight_box_stats(bank, d, plan);
    for (const auto& b : w.boxes) {
        CHECK(b.count == 10);
        CHECK(b.p25 <= b.p50);
        CHECK(b.p50 <= b.p75);
    }
    CHECK(w.scenario_boxes[1].count == 20);
    const auto acc = accuracy_eval(bank, d, plan);
    CHECK(acc.direction_total == plan.repeats);
    CHECK(acc.closeweight_total == plan.repeats);
    const auto again = accuracy_eval(bank, d, plan);
    CHECK(again.closeweight_relative_mae == acc.closeweight_relative_mae);
}

TEST_CASE("perfectly separable data classifies perfectly")
{
    const auto d = separable();
    ExperimentPlan plan;
    plan.trials = 2;
    for (auto src : {FeatureSource::Sensor}) {
        const auto bank = build_bank(d, plan, src);
        const auto acc = accuracy_eval(bank, d, plan);
        CHECK(acc.direction_accuracy() == 1.0);
        CHECK(acc.closeweight_accuracy() == 1.0);
        const auto t = pipeline_eval(bank, d, plan);
        for (int c = 0; c < kConditions; ++c) CHECK(t.correct[c] == plan.repeats);
        CHECK(t.always_consistent);
    }
}

TEST_CASE("sweeps anchor to the baseline")
{
    const auto& d = sim();
    const auto plan = small_plan();
    const auto base = sweep_baseline(d, plan);
    const auto red = sensor_reduction_sweep(d, plan);
    const auto fail = failure_sweep(d, plan);
    REQUIRE(red.points.size() == 3);
    REQUIRE(fail.points.size() == 3);
    for (const auto* p : {&red.points[0], &fail.points[0]}) {
        CHECK(p->subsets == 1);
        CHECK(p->posture.mean == base.posture.mean);
        CHECK(p->posture.std == base.posture.std);
        CHECK(p->weight.mean == base.weight.mean);
        CHECK(p->closeweight.mean == base.closeweight.mean);
        CHECK(p->direction_accuracy == base.direction_accuracy);
    }
    CHECK(red.points[1].subsets == 3);
    CHECK(red.points[2].posture.count == 3 * 10);
    CHECK(fail.points[1].posture.mean > base.posture.mean);
    CHECK(red.points[2].best_subset.size() == 6);
    for (const auto& p : red.points) {
        CHECK(p.posture.std >= 0.0);
        CHECK(p.weight.std >= 0.0);
    }

    auto bad = plan;
    bad.reduction = {0};
    CHECK_THROWS_AS(sensor_reduction_sweep(d, bad), Error);
}

TEST_CASE("plan validation")
{
    ExperimentPlan p;
    CHECK_NOTHROW(p.validate(30));
    p.window = 40;
    CHECK_THROWS_AS(p.validate(30), Error);
    p = {};
    p.trials = 0;
    CHECK_THROWS_AS(p.validate(30), Error);
}
