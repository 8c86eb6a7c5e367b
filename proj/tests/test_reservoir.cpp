#include <catch_amalgamated.hpp>

#include "oracle.hpp"
#include "prc/reservoir.hpp"

using namespace prc;
using namespace prc::reservoir;
using Catch::Approx;

namespace {

SyncedTrial synthetic(Eigen::Index frames, int item, std::uint64_t seed)
{
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    SyncedTrial t;
    t.sensors = Eigen::MatrixXd::NullaryExpr(frames, kSensors, [&] { return n(rng); });
    t.markers = Eigen::MatrixXd::NullaryExpr(frames, kMarkers, [&] { return n(rng); });
    t.tracked = tracked_from_markers(t.markers);
    t.payload.item = item;
    return t;
}

StateMatrix raw_matrix(const Eigen::MatrixXd& data)
{
    StateMatrix x;
    x.data = data;
    x.features.resize(static_cast<std::size_t>(data.cols() - 1));
    std::iota(x.features.begin(), x.features.end(), 0);
    return x;
}

} // namespace

TEST_CASE("synchronize decimates by selection")
{
    const plant::PlantConfig cfg;
    const auto raw = plant::simulate_trial(cfg, plant::default_payloads()[0], 1.0, 3);
    circuit::SensorCircuit quiet;
    quiet.noise_sigma = 0.0;
    Rng rng(1);
    const auto rec = measure_trial(raw, quiet, {}, rng);
    const auto t = decimate(rec);
    REQUIRE(t.frames() == 20);
    for (Eigen::Index k = 0; k < 20; ++k) {
        CHECK(t.sensors.row(k) == rec.sensors.row(50 * k));
        CHECK(t.markers.row(k) == rec.markers.row(3 * k));
    }
    CHECK(t.tracked(4, 4) == t.markers(4, 8));
}

TEST_CASE("decimation of constant streams and rate checks")
{
    RawRecording rec;
    rec.sensors = Eigen::MatrixXd::Constant(600, kSensors, 1.25);
    rec.markers = Eigen::MatrixXd::Constant(36, kMarkers, -2.0);
    const auto t = decimate(rec);
    CHECK(t.frames() == 12);
    CHECK((t.sensors.array() == 1.25).all());
    CHECK((t.tracked.array() == -2.0).all());

    rec.daq_rate = 1010.0;
    try {
        decimate(rec);
        FAIL("expected RateMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RateMismatch);
    }
}

TEST_CASE("assemble stacks blocks in order with a bias column")
{
    std::vector<SyncedTrial> trials;
    for (int i = 1; i <= 5; ++i) trials.push_back(synthetic(600, i, static_cast<std::uint64_t>(i)));
    std::vector<Block> blocks;
    for (const auto& t : trials) blocks.push_back({&t, FrameRange::first(160)});
    const auto x = assemble(blocks, FeatureSource::Sensor);
    CHECK(x.rows() == 800);
    CHECK(x.data.cols() == 13);
    CHECK((x.data.col(0).array() == 1.0).all());
    CHECK(x.data.block(160, 1, 1, 12) == trials[1].sensors.row(0));

    const auto v = assemble(trials[0], FeatureSource::Visual, {0, 120});
    CHECK(v.rows() == 120);
    CHECK(v.data.cols() == 10);

    const auto sub = assemble(trials[0], FeatureSource::Sensor, {10, 20}, {11, 2});
    CHECK(sub.data(0, 1) == trials[0].sensors(10, 11));
    CHECK(sub.data(0, 2) == trials[0].sensors(10, 2));

    CHECK_THROWS_AS(assemble(trials[0], FeatureSource::Sensor, {5, 5}), Error);
    CHECK_THROWS_AS(assemble(trials[0], FeatureSource::Sensor, {590, 610}), Error);
    CHECK_THROWS_AS(assemble(trials[0], FeatureSource::Visual, {0, 10}, {9}), Error);
    SyncedTrial blind = trials[0];
    blind.sensors.resize(0, 0);
    CHECK_THROWS_AS(assemble(blind, FeatureSource::Sensor, {0, 10}), Error);
}

TEST_CASE("fit: intercept-only and exact interpolation")
{
    const auto ones = raw_matrix(Eigen::MatrixXd::Ones(7, 1));
    const auto w = fit(ones, Eigen::VectorXd::Constant(7, 4.5), 0.0);
    CHECK(w.coef(0, 0) == Approx(4.5).margin(1e-12));

    const auto eye = raw_matrix(Eigen::MatrixXd::Identity(2, 2));
    Eigen::VectorXd y(2);
    y << 3.0, 5.0;
    const auto w2 = fit(eye, y, 0.0);
    CHECK(w2.coef(0, 0) == Approx(3.0).margin(1e-12));
    CHECK(w2.coef(1, 0) == Approx(5.0).margin(1e-12));
    CHECK((predict(w2, eye) - y).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fit recovers known weights and matches the elimination oracle")
{
    Rng rng(99);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd data = Eigen::MatrixXd::NullaryExpr(50, 13, [&] { return n(rng); });
    data.col(0).setOnes();
    const auto x = raw_matrix(data);
    const Eigen::MatrixXd truth = Eigen::MatrixXd::NullaryExpr(13, 2, [&] { return n(rng); });
    const Eigen::MatrixXd y = data * truth;
    const auto w = fit(x, y, 0.0);
    CHECK((w.coef - truth).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((w.coef - oracle::ridge_solve(data, y, 0.0)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("ridge solution satisfies the penalised normal equations")
{
    Rng rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd data = Eigen::MatrixXd::NullaryExpr(40, 6, [&] { return n(rng); });
    data.col(0).setOnes();
    const Eigen::MatrixXd y = Eigen::MatrixXd::NullaryExpr(40, 1, [&] { return n(rng); });
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.01, 0.1, 1.0, 10.0}) {
        const auto w = fit(raw_matrix(data), y, lambda);
        Eigen::MatrixXd pen = w.coef;
        pen.row(0).setZero();
        const Eigen::MatrixXd grad = data.transpose() * (data * w.coef - y) + lambda * pen;
        CHECK(grad.cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((w.coef - oracle::ridge_solve(data, y, lambda)).cwiseAbs().maxCoeff() <= 1e-8);
        const double norm = w.coef.bottomRows(5).norm();
        CHECK(norm <= prev);
        prev = norm;
    }
}

TEST_CASE("minimum-norm solution on rank deficiency")
{
    Eigen::MatrixXd data(4, 3);
    data << 1, 1, 1, 1, 2, 2, 1, 3, 3, 1, 4, 4; // duplicated feature
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    const auto w = fit(raw_matrix(data), y, 0.0);
    CHECK(w.coef(1, 0) == Approx(w.coef(2, 0)).margin(1e-10));
    CHECK((data.transpose() * (data * w.coef - y)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("predict is the affine readout")
{
    auto x = raw_matrix(Eigen::MatrixXd::Ones(1, 4));
    x.data << 1.0, 0.5, -2.0, 3.0;
    ReadoutWeights w;
    w.features = x.features;
    w.coef = Eigen::MatrixXd::Zero(4, 1);
    CHECK(predict(w, x)(0, 0) == 0.0);
    w.coef << 0.1, 2.0, 0.25, -1.0;
    CHECK(predict(w, x)(0, 0) == Approx(0.1 + 0.5 * 2.0 - 2.0 * 0.25 - 3.0).margin(1e-12));
    ReadoutWeights wrong = w;
    wrong.coef = Eigen::MatrixXd::Zero(3, 1);
    CHECK_THROWS_AS(predict(wrong, x), Error);
}

TEST_CASE("fit argument checks")
{
    const auto x = raw_matrix(Eigen::MatrixXd::Ones(5, 2));
    CHECK_THROWS_AS(fit(x, Eigen::VectorXd::Zero(4), 0.0), Error);
    CHECK_THROWS_AS(fit(x, Eigen::VectorXd::Zero(5), -1.0), Error);
}

TEST_CASE("nrmse examples")
{
    const std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(nrmse(a, a) == 0.0);
    CHECK(nrmse(std::vector<double>{2, 2, 2}, std::vector<double>{1, 1, 1}) == 1.0);
    CHECK(nrmse(std::vector<double>{1, 2, 3}, std::vector<double>{2, 2, 2}) == Approx(std::sqrt(2.0 / 3.0) / 2.0).margin(1e-12));
    try {
        nrmse(std::vector<double>{0.5, -0.5}, std::vector<double>{-1, 1});
        FAIL("expected ZeroMeanTarget");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroMeanTarget);
    }
    const std::vector<double> p{1.1, 2.3, 2.9}, q{1.0, 2.0, 3.0};
    std::vector<double> p3, q3;
    for (std::size_t i = 0; i < 3; ++i) {
        p3.push_back(3.5 * p[i]);
        q3.push_back(3.5 * q[i]);
    }
    CHECK(nrmse(p3, q3) == Approx(nrmse(p, q)).epsilon(1e-12));
    CHECK_THROWS_AS(nrmse(std::vector<double>{}, std::vector<double>{}), Error);
}
