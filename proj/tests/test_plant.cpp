#include <catch_amalgamated.hpp>

#include <cmath>

#include "prc/plant.hpp"

using namespace prc;
using namespace prc::plant;
using Catch::Approx;

namespace {

PlantConfig quiet_config()
{
    PlantConfig cfg;
    cfg.schedule.duty = 0.0;
    cfg.reset_perturbation = 0.0;
    return cfg;
}

PlantState run(PlantState s, const PlantConfig& cfg, const PayloadCondition& p, int steps, const ModuleArray& ext = {})
{
    for (int k = 0; k < steps; ++k) s = step(s, cfg.arm, cfg.sma, cfg.schedule, p, 1e-3, ext);
    return s;
}

} // namespace

TEST_CASE("chain pose matches hand-computed joints")
{
    const auto p = chain_pose({0.1, -0.2, 0.3, 0.05}, 40.0);
    const double jx[] = {0.0, 3.993336665873126, 0.0, 7.946773231802448, 17.842931601983366};
    const double jy[] = {0.0, -39.800166611121035, -79.60033322224207, -118.80299633589173, -157.55949320431753};
    for (int i = 0; i <= kModules; ++i) {
        CHECK(p.joint_x[i] == Approx(jx[i]).margin(1e-12));
        CHECK(p.joint_y[i] == Approx(jy[i]).margin(1e-12));
    }
}

TEST_CASE("markers and tracked points")
{
    const auto f = marker_positions({0.1, -0.2, 0.3, 0.05}, ArmParams{}, KinematicMap::defaults());
    const double want[] = {0.9983341664682815, 2.9950024994048445, 2.9950024994048445, 0.9983341664682817, 1.986693307950612,
                           5.960079923851835,  10.420812824347678, 15.368892009438136, 27.739089972164283};
    for (int m = 0; m < kMarkers; ++m) CHECK(f.markers[m] == Approx(want[m]).margin(1e-12));
    CHECK(f.tracked[0] == Approx((want[0] + want[1]) / 2).margin(1e-12));
    CHECK(f.tracked[4] == Approx(want[8]).margin(1e-12));
}

TEST_CASE("panel fold angles follow the quadratic map")
{
    const auto phi = panel_fold_angles({0.1, -0.2, 0.3, 0.05}, KinematicMap::defaults());
    const double want[] = {0.62, 0.283, 0.277, -0.04, 0.652, 0.628, 1.06, 0.067, 0.013, 0.51, 0.34075, 0.33925};
    for (int j = 0; j < kSensors; ++j) CHECK(phi[j] == Approx(want[j]).margin(1e-12));
}

TEST_CASE("effective inertia includes distal masses")
{
    const auto j0 = effective_inertia(ArmParams{}, PayloadCondition{});
    CHECK(j0[0] == Approx(1952.0));
    CHECK(j0[1] == Approx(1056.0));
    CHECK(j0[2] == Approx(480.0));
    CHECK(j0[3] == Approx(160.0));
    const auto j2 = effective_inertia(ArmParams{}, default_payloads()[1]);
    CHECK(j2[0] == Approx(6384.5));
    CHECK(j2[3] == Approx(992.5));
}

TEST_CASE("gravity torque is the negative gradient of the potential")
{
    const ArmParams arm;
    const auto payload = default_payloads()[2];
    const ModuleArray th{0.2, -0.1, 0.15, 0.3};
    const auto tau = gravity_torque(th, arm, payload);
    for (int i = 0; i < kModules; ++i) {
        auto a = th, b = th;
        const double h = 1e-6;
        a[i] += h;
        b[i] -= h;
        const double grad = (gravity_potential(a, arm, payload) - gravity_potential(b, arm, payload)) / (2 * h);
        CHECK(tau[i] == Approx(-grad).epsilon(1e-6));
    }
}

TEST_CASE("unforced equilibrium is exact")
{
    const auto cfg = quiet_config();
    PlantState s;
    const auto out = run(s, cfg, PayloadCondition{}, 2000);
    for (int i = 0; i < kModules; ++i) {
        CHECK(out.angle[i] == 0.0);
        CHECK(out.rate[i] == 0.0);
    }
}

TEST_CASE("linear static deflection equals tau / k")
{
    auto cfg = quiet_config();
    cfg.arm.gravity = 0.0;
    cfg.arm.coupling = 0.0;
    cfg.arm.cubic_stiffness.fill(0.0);
    const ModuleArray ext{6.0, -5.0, 4.0, 3.0};
    const auto s = run(PlantState{}, cfg, PayloadCondition{}, 20000, ext);
    for (int i = 0; i < kModules; ++i) CHECK(std::abs(s.angle[i] - ext[i] / cfg.arm.stiffness[i]) <= 1e-6);
}

TEST_CASE("damped oscillation frequency matches the linear model")
{
    auto cfg = quiet_config();
    cfg.arm.gravity = 0.0;
    cfg.arm.coupling = 0.0;
    cfg.arm.cubic_stiffness.fill(0.0);
    cfg.arm.damping = {2.0, 2.0, 2.0, 2.0};
    const PayloadCondition none;
    const auto j = effective_inertia(cfg.arm, none);
    const int i = 3;
    const double k = 1000.0 * cfg.arm.stiffness[i] / j[i];
    const double c = 1000.0 * cfg.arm.damping[i] / j[i];
    const double wd = std::sqrt(k - c * c / 4.0);

    PlantState s;
    s.angle[i] = 0.01;
    std::vector<double> crossings;
    for (int n = 0; n < 5000 && crossings.size() < 7; ++n) {
        const auto next = step(s, cfg.arm, cfg.sma, cfg.schedule, none, 1e-3);
        if ((s.angle[i] > 0) != (next.angle[i] > 0)) {
            const double frac = s.angle[i] / (s.angle[i] - next.angle[i]);
            crossings.push_back(s.time + frac * 1e-3);
        }
        s = next;
    }
    REQUIRE(crossings.size() >= 3);
    const double period = 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    CHECK(std::abs(2 * std::numbers::pi / period - wd) / wd < 0.02);
}

TEST_CASE("energy never increases without actuation")
{
    auto cfg = quiet_config();
    const auto payload = default_payloads()[3];
    PlantState s;
    s.angle = {0.3, -0.2, 0.25, -0.1};
    double e = mechanical_energy(s, cfg.arm, payload);
    for (int n = 0; n < 3000; ++n) {
        s = step(s, cfg.arm, cfg.sma, cfg.schedule, payload, 1e-3);
        const double en = mechanical_energy(s, cfg.arm, payload);
        REQUIRE(en <= e + 1e-9 * std::abs(e));
        e = en;
    }
}

TEST_CASE("schedule gates and phases")
{
    const ActuationSchedule s;
    CHECK(s.period() == Approx(0.6));
    CHECK(s.gate(0, 0.0) == 1.0);
    CHECK(s.gate(0, 0.25) == 0.0);
    CHECK(s.gate(1, 0.1) == 0.0);
    CHECK(s.gate(1, 0.25) == 1.0);
    CHECK(s.gate(0, 0.6 * 10 + 0.1) == 1.0);
}

TEST_CASE("periodic temperature is a fixed point of the thermal ODE")
{
    const PlantConfig cfg;
    PlantState s;
    s.temperature = {periodic_temperature(cfg.sma, cfg.schedule, 0, 0.0), periodic_temperature(cfg.sma, cfg.schedule, 1, 0.0)};
    // integrate one full period with the arm frozen far from its limits
    PlantConfig frozen = cfg;
    frozen.sma.torque_gain = 1e-12;
    for (int n = 0; n < 600; ++n) s = step(s, frozen.arm, frozen.sma, frozen.schedule, PayloadCondition{}, 1e-3);
    for (int c = 0; c < kColumns; ++c) {
        CHECK(s.temperature[c] == Approx(periodic_temperature(cfg.sma, cfg.schedule, c, 0.6)).epsilon(1e-3));
        CHECK(periodic_temperature(cfg.sma, cfg.schedule, c, 0.6) == Approx(periodic_temperature(cfg.sma, cfg.schedule, c, 0.0)));
    }
}

TEST_CASE("simulate_trial shape, range and determinism")
{
    const PlantConfig cfg;
    const auto p = default_payloads()[4];
    const auto a = simulate_trial(cfg, p, 2.0, 42);
    const auto b = simulate_trial(cfg, p, 2.0, 42);
    const auto c = simulate_trial(cfg, p, 2.0, 43);
    CHECK(a.fold_angles.rows() == 2000);
    CHECK(a.markers.rows() == 120);
    CHECK(a.fold_angles == b.fold_angles);
    CHECK(a.markers == b.markers);
    CHECK(a.fold_angles != c.fold_angles);
    CHECK(a.fold_angles.cwiseAbs().maxCoeff() < std::numbers::pi / 2);
}

TEST_CASE("camera frames that coincide with DAQ samples use the sampled state")
{
    PlantConfig cfg;
    cfg.camera = {0.0, 0.0, 0.0};
    const auto raw = simulate_trial(cfg, default_payloads()[0], 1.0, 7);
    // frame 3 is at 50 ms; the fold angles at that sample encode the same module angles
    const auto& map = cfg.map;
    ModuleArray th{};
    for (int i = 0; i < kModules; ++i) th[i] = (raw.fold_angles(50, 3 * i) - map.fold[3 * i][0]) / map.fold[3 * i][1];
    const auto mf = marker_positions(th, cfg.arm, map);
    for (int m = 0; m < kMarkers; ++m) CHECK(raw.markers(3, m) == Approx(mf.markers[m]).margin(1e-9));
}

TEST_CASE("plant errors")
{
    const PlantConfig cfg;
    PlantState s;
    CHECK_THROWS_AS(step(s, cfg.arm, cfg.sma, cfg.schedule, {}, 0.01), Error);
    ModuleArray huge{1e6, 0, 0, 0};
    try {
        run(s, cfg, {}, 100, huge);
        FAIL("expected RangeExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RangeExceeded);
    }
    PlantConfig bad = cfg;
    bad.arm.stiffness[0] = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(simulate_trial(cfg, {}, 0.0105, 1), Error);
}
