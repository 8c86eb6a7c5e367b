#pragma once

// Surrogate dynamics of the four-module soft arm: a planar hanging chain with
// one bend DOF per module, cubic stiffness, nearest-neighbour coupling,
// gravity from plates/gripper/payload, and two PWM-heated SMA columns.
//
// Units: rad, N*mm, g, mm, s. Inertia in kg*mm^2, so theta'' = 1000 * tau / J.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "prc/error.hpp"
#include "prc/rng.hpp"
#include "prc/scenario.hpp"

namespace prc::plant {

inline constexpr int kModules = 4;
inline constexpr int kPanelsPerModule = 3;
inline constexpr int kSensors = kModules * kPanelsPerModule;
inline constexpr int kMarkers = 2 * kModules + 1;
inline constexpr int kTracked = kModules + 1;
inline constexpr int kColumns = 2;
inline constexpr double kDaqRate = 1000.0;   // Hz
inline constexpr double kCameraRate = 60.0;  // Hz

using ModuleArray = std::array<double, kModules>;
using ColumnArray = std::array<double, kColumns>;
using SensorArray = std::array<double, kSensors>;
using MarkerArray = std::array<double, kMarkers>;
using TrackedArray = std::array<double, kTracked>;

struct ArmParams {
    ModuleArray stiffness{300.0, 250.0, 200.0, 150.0};         // k_i, N*mm/rad
    ModuleArray cubic_stiffness{3000.0, 3000.0, 3000.0, 3000.0}; // k3_i, N*mm/rad^3
    ModuleArray damping{60.0, 40.0, 25.0, 12.0};               // c_i, N*mm*s/rad
    ModuleArray inertia{20.0, 20.0, 20.0, 20.0};               // J_i, kg*mm^2
    double coupling = 100.0;        // kappa, N*mm/rad
    double plate_mass = 20.0;       // g, one distal plate per module
    double module_length = 40.0;    // mm
    double gripper_mass = 30.0;     // g
    double gripper_length = 40.0;   // mm
    double payload_drop = 10.0;     // mm, payload COM beyond the gripper tip
    double gravity = 9.81;          // m/s^2

    void validate() const
    {
        for (int i = 0; i < kModules; ++i) {
            if (!(stiffness[i] > 0.0)) fail(ErrorKind::ValidationError, "arm.k must be > 0");
            if (!(damping[i] > 0.0)) fail(ErrorKind::ValidationError, "arm.c must be > 0");
            if (!(inertia[i] > 0.0)) fail(ErrorKind::ValidationError, "arm.J must be > 0");
            if (!(cubic_stiffness[i] >= 0.0)) fail(ErrorKind::ValidationError, "arm.k3 must be >= 0");
        }
        if (!(module_length > 0.0)) fail(ErrorKind::ValidationError, "arm.L must be > 0");
        if (!(coupling >= 0.0)) fail(ErrorKind::ValidationError, "arm.coupling must be >= 0");
        if (!(plate_mass >= 0.0 && gripper_mass >= 0.0)) fail(ErrorKind::ValidationError, "arm masses must be >= 0");
        if (!(gripper_length >= 0.0 && payload_drop >= 0.0)) fail(ErrorKind::ValidationError, "arm gripper geometry must be >= 0");
        if (!(gravity >= 0.0)) fail(ErrorKind::ValidationError, "arm.gravity must be >= 0");
    }
};

struct SmaParams {
    double thermal_capacity = 0.1;   // C_th, J/K
    double cooling_time = 2.0;       // tau_cool, s
    double heating_power = 1.5;      // P, W
    double activation_temp = 2.0;    // T_act, K above ambient
    double torque_gain = 20.0;       // g_sma, N*mm/K
    double torque_cap = 800.0;       // N*mm
    ColumnArray column_gain{1.0, 0.5}; // projection of each column's torque onto the bend DOF

    void validate() const
    {
        if (!(thermal_capacity > 0.0 && cooling_time > 0.0 && heating_power > 0.0 && activation_temp > 0.0 &&
              torque_gain > 0.0 && torque_cap > 0.0)) {
            fail(ErrorKind::ValidationError, "sma parameters must be strictly positive");
        }
    }

    double torque(double temperature) const
    {
        return std::clamp(torque_gain * std::max(0.0, temperature - activation_temp), 0.0, torque_cap);
    }
};

/// PWM gates In1/In2: each column heats for `heat` then relaxes, column c lags by c * phase_offset.
struct ActuationSchedule {
    double heat = 0.2;          // s
    double relax = 0.4;         // s
    double phase_offset = 0.2;  // s
    double duty = 1.0;          // gate amplitude in [0, 1]
    double duration = 30.0;     // s

    double period() const { return heat + relax; }

    void validate() const
    {
        if (!(heat > 0.0 && relax > 0.0)) fail(ErrorKind::ValidationError, "schedule heat/relax must be > 0");
        if (!(phase_offset >= 0.0 && phase_offset < period())) {
            fail(ErrorKind::ValidationError, "schedule phase offset must be in [0, period)");
        }
        if (!(duty >= 0.0 && duty <= 1.0)) fail(ErrorKind::ValidationError, "schedule duty must be in [0, 1]");
        if (!(duration > 0.0)) fail(ErrorKind::ValidationError, "schedule duration must be > 0");
    }

    /// Phase of column `col` within its cycle at time t. The schedule is periodic for all t.
    double phase(int col, double t) const
    {
        const double p = std::fmod(t - col * phase_offset + 1e-9, period());
        return p < 0.0 ? p + period() : p;
    }

    double gate(int col, double t) const { return phase(col, t) < heat ? duty : 0.0; }
};

struct PayloadCondition {
    int item = 0;              // 1..5, 0 = no payload
    double mass = 0.0;         // g
    double com_offset = 0.0;   // mm, signed; negative = left-facing
    std::string label;
    tasks::Scenario scenario = tasks::Scenario::A;
};

/// Default payload table. Items 2/3 are the same hammer in opposite orientations.
inline std::array<PayloadCondition, 5> default_payloads()
{
    return {{
        {1, 50.0, 0.0, "scissor", tasks::Scenario::A},
        {2, 100.0, -15.0, "hammer-left", tasks::Scenario::B},
        {3, 100.0, 15.0, "hammer-right", tasks::Scenario::B},
        {4, 150.0, 0.0, "screwdriver", tasks::Scenario::C},
        {5, 155.0, 0.0, "plier", tasks::Scenario::C},
    }};
}

inline void validate_payloads(const std::array<PayloadCondition, 5>& table, const tasks::ScenarioThresholds& th)
{
    for (int i = 0; i < 5; ++i) {
        const auto& p = table[i];
        if (p.item != i + 1) fail(ErrorKind::ValidationError, "payload table must list items 1..5 in order");
        if (!(p.mass >= 0.0) || !std::isfinite(p.com_offset)) {
            fail(ErrorKind::ValidationError, "payload item " + std::to_string(p.item) + " has invalid mass/offset");
        }
        if (tasks::route(p.mass, th) != p.scenario) {
            fail(ErrorKind::ValidationError,
                 "payload item " + std::to_string(p.item) + " scenario inconsistent with thresholds");
        }
    }
    if (table[1].mass != table[2].mass || !(table[1].com_offset == -table[2].com_offset) || table[1].com_offset == 0.0) {
        fail(ErrorKind::ValidationError, "items 2 and 3 must share mass and have opposite non-zero offsets");
    }
}

struct PlantState {
    ModuleArray angle{};       // theta_i, rad
    ModuleArray rate{};        // theta_i', rad/s
    ColumnArray temperature{}; // K above ambient
    double time = 0.0;         // s
};

/// Panel fold angle phi = c0 + c1*theta + c2*theta^2 per panel (module-major order).
struct KinematicMap {
    std::array<std::array<double, 3>, kSensors> fold{};
    std::array<double, 2> marker_fraction{0.25, 0.75}; // along each module

    static KinematicMap defaults()
    {
        KinematicMap m;
        for (int i = 0; i < kModules; ++i) {
            m.fold[3 * i + 0] = {0.4, 2.2, 0.0};
            m.fold[3 * i + 1] = {0.4, -1.2, 0.3};
            m.fold[3 * i + 2] = {0.4, -1.2, -0.3};
        }
        return m;
    }

    /// Column 1 sits on the first panel of each module: d(phi)/d(theta) > 0 there, < 0 elsewhere.
    void validate() const
    {
        constexpr double edge = std::numbers::pi / 2;
        for (int j = 0; j < kSensors; ++j) {
            const auto& c = fold[j];
            const double lo = c[1] - 2.0 * c[2] * edge;
            const double hi = c[1] + 2.0 * c[2] * edge;
            const bool rising = (j % kPanelsPerModule) == 0;
            if (rising ? !(lo > 0.0 && hi > 0.0) : !(lo < 0.0 && hi < 0.0)) {
                fail(ErrorKind::ValidationError, "kinematic map sign convention violated on panel " + std::to_string(j + 1));
            }
        }
        for (double f : marker_fraction) {
            if (!(f >= 0.0 && f <= 1.0)) fail(ErrorKind::ValidationError, "marker fraction must be in [0, 1]");
        }
    }
};

/// Marker tracking error of the camera: white jitter plus a per-trial registration offset.
struct CameraParams {
    double jitter = 0.2;               // mm, per frame and marker
    double registration_common = 0.2;  // mm, shared by all markers of a trial
    double registration_marker = 0.1;  // mm, per marker and trial

    void validate() const
    {
        if (!(jitter >= 0.0 && registration_common >= 0.0 && registration_marker >= 0.0)) {
            fail(ErrorKind::ValidationError, "camera noise levels must be >= 0");
        }
    }
};

struct PlantConfig {
    ArmParams arm;
    SmaParams sma;
    ActuationSchedule schedule;
    KinematicMap map = KinematicMap::defaults();
    CameraParams camera;
    double reset_angle = 0.0;         // rad, inward-folded reference
    double reset_perturbation = 0.005; // rad, max |eps| of the seeded reset noise

    void validate() const
    {
        arm.validate();
        sma.validate();
        schedule.validate();
        map.validate();
        camera.validate();
        if (!(reset_perturbation >= 0.0 && reset_perturbation <= 0.005)) {
            fail(ErrorKind::ValidationError, "reset perturbation must be in [0, 0.005] rad");
        }
    }
};

/// One simulated experiment before the sensor circuit: 1 kHz fold angles, 60 fps markers.
struct RawTrial {
    Eigen::MatrixXd fold_angles; // N x 12, rad
    Eigen::MatrixXd markers;     // M x 9, mm
    PayloadCondition payload;
    std::uint64_t seed = 0;
    double duration = 0.0;
    double daq_rate = kDaqRate;
    double camera_rate = kCameraRate;
};

// ---------------------------------------------------------------------------
// Geometry

struct ChainPose {
    ModuleArray cumulative{};            // absolute link angle from vertical
    std::array<double, kModules + 1> joint_x{};
    std::array<double, kModules + 1> joint_y{};
};

inline ChainPose chain_pose(const ModuleArray& theta, double module_length)
{
    ChainPose p;
    double acc = 0.0;
    for (int i = 0; i < kModules; ++i) {
        acc += theta[i];
        p.cumulative[i] = acc;
        p.joint_x[i + 1] = p.joint_x[i] + module_length * std::sin(acc);
        p.joint_y[i + 1] = p.joint_y[i] - module_length * std::cos(acc);
    }
    return p;
}

inline SensorArray panel_fold_angles(const ModuleArray& theta, const KinematicMap& map)
{
    SensorArray phi{};
    for (int j = 0; j < kSensors; ++j) {
        const double t = theta[j / kPanelsPerModule];
        const auto& c = map.fold[j];
        phi[j] = c[0] + c[1] * t + c[2] * t * t;
    }
    return phi;
}

struct MarkerFrame {
    MarkerArray markers{}; // horizontal displacement, mm
    TrackedArray tracked{}; // x1..x4 module centres, x5 gripper
};

inline TrackedArray tracked_points(const MarkerArray& m)
{
    TrackedArray x{};
    for (int i = 0; i < kModules; ++i) {
        x[i] = (m[2 * i] + m[2 * i + 1]) / 2.0;
    }
    x[kModules] = m[2 * kModules];
    return x;
}

inline MarkerFrame marker_positions(const ModuleArray& theta, const ArmParams& arm, const KinematicMap& map)
{
    const ChainPose pose = chain_pose(theta, arm.module_length);
    MarkerFrame f;
    for (int i = 0; i < kModules; ++i) {
        const double s = std::sin(pose.cumulative[i]);
        for (int k = 0; k < 2; ++k) {
            f.markers[2 * i + k] = pose.joint_x[i] + map.marker_fraction[k] * arm.module_length * s;
        }
    }
    f.markers[2 * kModules] = pose.joint_x[kModules] + arm.gripper_length * std::sin(pose.cumulative[kModules - 1]);
    f.tracked = tracked_points(f.markers);
    return f;
}

// ---------------------------------------------------------------------------
// Dynamics

/// J_i augmented with every distal point mass, evaluated in the straight reference pose.
inline ModuleArray effective_inertia(const ArmParams& arm, const PayloadCondition& payload)
{
    const double L = arm.module_length;
    const double tip = kModules * L + arm.gripper_length + arm.payload_drop;
    ModuleArray j = arm.inertia;
    for (int i = 0; i < kModules; ++i) {
        const double base = i * L;
        double sum = 0.0;
        for (int b = i; b < kModules; ++b) {
            const double r = (b + 1) * L - base;
            sum += arm.plate_mass * r * r;
        }
        const double rg = kModules * L + arm.gripper_length / 2.0 - base;
        sum += arm.gripper_mass * rg * rg;
        const double rp = tip - base;
        sum += payload.mass * (rp * rp + payload.com_offset * payload.com_offset);
        j[i] += sum / 1000.0;
    }
    return j;
}

/// -dV/dtheta for the gravitational potential of plates, gripper and payload.
inline ModuleArray gravity_torque(const ModuleArray& theta, const ArmParams& arm, const PayloadCondition& payload)
{
    const ChainPose pose = chain_pose(theta, arm.module_length);
    const double last = pose.cumulative[kModules - 1];
    const double sx = std::sin(last);
    const double cx = std::cos(last);
    const double gripper_x = pose.joint_x[kModules] + arm.gripper_length / 2.0 * sx;
    const double payload_x = pose.joint_x[kModules] + (arm.gripper_length + arm.payload_drop) * sx + payload.com_offset * cx;
    const double g = arm.gravity / 1000.0; // grams -> kg

    ModuleArray tau{};
    for (int i = 0; i < kModules; ++i) {
        const double xi = pose.joint_x[i];
        double moment = 0.0;
        for (int b = i; b < kModules; ++b) {
            moment += arm.plate_mass * (pose.joint_x[b + 1] - xi);
        }
        moment += arm.gripper_mass * (gripper_x - xi);
        moment += payload.mass * (payload_x - xi);
        tau[i] = -g * moment;
    }
    return tau;
}

inline double gravity_potential(const ModuleArray& theta, const ArmParams& arm, const PayloadCondition& payload)
{
    const ChainPose pose = chain_pose(theta, arm.module_length);
    const double last = pose.cumulative[kModules - 1];
    const double gripper_y = pose.joint_y[kModules] - arm.gripper_length / 2.0 * std::cos(last);
    const double payload_y = pose.joint_y[kModules] - (arm.gripper_length + arm.payload_drop) * std::cos(last) +
                             payload.com_offset * std::sin(last);
    double mass_height = arm.gripper_mass * gripper_y + payload.mass * payload_y;
    for (int b = 0; b < kModules; ++b) {
        mass_height += arm.plate_mass * pose.joint_y[b + 1];
    }
    return arm.gravity / 1000.0 * mass_height;
}

/// Kinetic + elastic + coupling + gravitational energy, N*mm.
inline double mechanical_energy(const PlantState& s, const ArmParams& arm, const PayloadCondition& payload)
{
    const ModuleArray j = effective_inertia(arm, payload);
    double e = 0.0;
    for (int i = 0; i < kModules; ++i) {
        const double t = s.angle[i];
        e += 0.5 * j[i] * s.rate[i] * s.rate[i] / 1000.0;
        e += 0.5 * arm.stiffness[i] * t * t + 0.25 * arm.cubic_stiffness[i] * t * t * t * t;
    }
    for (int i = 0; i + 1 < kModules; ++i) {
        const double d = s.angle[i + 1] - s.angle[i];
        e += 0.5 * arm.coupling * d * d;
    }
    return e + gravity_potential(s.angle, arm, payload);
}

/// Steady periodic temperature of one column driven by its PWM gate (closed form of the thermal lag).
inline double periodic_temperature(const SmaParams& sma, const ActuationSchedule& sched, int col, double t)
{
    const double tau = sma.cooling_time;
    const double drive = sma.heating_power * sched.duty / sma.thermal_capacity * tau; // asymptote while heating
    const double eh = std::exp(-sched.heat / tau);
    const double er = std::exp(-sched.relax / tau);
    const double start = drive * (1.0 - eh) * er / (1.0 - eh * er);
    const double end_heat = drive + (start - drive) * eh;
    const double p = sched.phase(col, t);
    if (p < sched.heat) return drive + (start - drive) * std::exp(-p / tau);
    return end_heat * std::exp(-(p - sched.heat) / tau);
}

namespace detail {

struct Rates {
    ModuleArray angle{};
    ModuleArray rate{};
    ColumnArray temperature{};
};

struct StepContext {
    const ArmParams& arm;
    const SmaParams& sma;
    const PayloadCondition& payload;
    ModuleArray inertia;
    ColumnArray gate;
    ModuleArray external;
};

inline Rates derivative(const ModuleArray& theta, const ModuleArray& omega, const ColumnArray& temp, const StepContext& ctx)
{
    const ArmParams& arm = ctx.arm;
    Rates r;
    const ModuleArray grav = gravity_torque(theta, arm, ctx.payload);
    double actuation = 0.0;
    for (int c = 0; c < kColumns; ++c) {
        actuation += ctx.sma.column_gain[c] * ctx.sma.torque(temp[c]);
        r.temperature[c] = ctx.sma.heating_power * ctx.gate[c] / ctx.sma.thermal_capacity - temp[c] / ctx.sma.cooling_time;
    }
    for (int i = 0; i < kModules; ++i) {
        const double t = theta[i];
        double tau = -arm.stiffness[i] * t - arm.cubic_stiffness[i] * t * t * t - arm.damping[i] * omega[i];
        if (i > 0) tau += arm.coupling * (theta[i - 1] - t);
        if (i + 1 < kModules) tau += arm.coupling * (theta[i + 1] - t);
        tau += actuation + grav[i] + ctx.external[i];
        r.angle[i] = omega[i];
        r.rate[i] = 1000.0 * tau / ctx.inertia[i];
    }
    return r;
}

template <std::size_t N>
std::array<double, N> axpy(const std::array<double, N>& x, double a, const std::array<double, N>& y)
{
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + a * y[i];
    return out;
}

} // namespace detail

/// One fixed RK4 step. The PWM gate is held at its value at the start of the step.
/// `external` adds a constant torque per module (test hook; zero in normal use).
inline PlantState step(const PlantState& state, const ArmParams& arm, const SmaParams& sma, const ActuationSchedule& sched,
                       const PayloadCondition& payload, double dt, const ModuleArray& external = {})
{
    if (!(dt > 0.0 && dt <= 2e-3)) {
        fail(ErrorKind::ValidationError, "step size must be in (0, 2 ms]");
    }
    const detail::StepContext ctx{arm, sma, payload, effective_inertia(arm, payload),
                                  {sched.gate(0, state.time), sched.gate(1, state.time)}, external};

    using detail::axpy;
    const auto k1 = detail::derivative(state.angle, state.rate, state.temperature, ctx);
    const auto k2 = detail::derivative(axpy(state.angle, dt / 2, k1.angle), axpy(state.rate, dt / 2, k1.rate),
                                       axpy(state.temperature, dt / 2, k1.temperature), ctx);
    const auto k3 = detail::derivative(axpy(state.angle, dt / 2, k2.angle), axpy(state.rate, dt / 2, k2.rate),
                                       axpy(state.temperature, dt / 2, k2.temperature), ctx);
    const auto k4 = detail::derivative(axpy(state.angle, dt, k3.angle), axpy(state.rate, dt, k3.rate),
                                       axpy(state.temperature, dt, k3.temperature), ctx);

    PlantState next;
    next.time = state.time + dt;
    for (int i = 0; i < kModules; ++i) {
        next.angle[i] = state.angle[i] + dt / 6.0 * (k1.angle[i] + 2.0 * k2.angle[i] + 2.0 * k3.angle[i] + k4.angle[i]);
        next.rate[i] = state.rate[i] + dt / 6.0 * (k1.rate[i] + 2.0 * k2.rate[i] + 2.0 * k3.rate[i] + k4.rate[i]);
    }
    for (int c = 0; c < kColumns; ++c) {
        next.temperature[c] = state.temperature[c] +
            dt / 6.0 * (k1.temperature[c] + 2.0 * k2.temperature[c] + 2.0 * k3.temperature[c] + k4.temperature[c]);
    }

    for (int i = 0; i < kModules; ++i) {
        if (!std::isfinite(next.angle[i]) || !std::isfinite(next.rate[i])) {
            fail(ErrorKind::NonFinite, "plant state became non-finite");
        }
        if (std::abs(next.angle[i]) >= std::numbers::pi / 2) {
            fail(ErrorKind::RangeExceeded, "module " + std::to_string(i + 1) + " bend exceeds mechanical range");
        }
    }
    for (double t : next.temperature) {
        if (!std::isfinite(t)) fail(ErrorKind::NonFinite, "SMA temperature became non-finite");
    }
    return next;
}

namespace detail {

/// Integer count for rate * duration; rejects durations that do not land on a sample boundary.
inline Eigen::Index sample_count(double rate, double duration)
{
    const double n = rate * duration;
    const double r = std::round(n);
    if (std::abs(n - r) > 1e-6) {
        fail(ErrorKind::ValidationError, "duration is not a whole number of samples at " + std::to_string(rate) + " Hz");
    }
    return static_cast<Eigen::Index>(r);
}

inline ModuleArray hermite(const PlantState& a, const PlantState& b, double dt, double s)
{
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    ModuleArray out{};
    for (int i = 0; i < kModules; ++i) {
        out[i] = h00 * a.angle[i] + h10 * dt * a.rate[i] + h01 * b.angle[i] + h11 * dt * b.rate[i];
    }
    return out;
}

} // namespace detail

/// Initial state: reset angle plus seeded perturbation, SMA columns at their periodic steady temperature.
inline PlantState reset_state(const PlantConfig& cfg, Rng& rng)
{
    PlantState s;
    std::uniform_real_distribution<double> eps(-cfg.reset_perturbation, cfg.reset_perturbation);
    for (int i = 0; i < kModules; ++i) {
        s.angle[i] = cfg.reset_angle + (cfg.reset_perturbation > 0.0 ? eps(rng) : 0.0);
    }
    for (int c = 0; c < kColumns; ++c) {
        s.temperature[c] = periodic_temperature(cfg.sma, cfg.schedule, c, 0.0);
    }
    return s;
}

/// Integrates one trial at 1 kHz and samples the camera at 60 fps. Bit-identical for identical inputs.
inline RawTrial simulate_trial(const PlantConfig& cfg, const PayloadCondition& payload, double duration, std::uint64_t seed)
{
    if (!(duration > 0.0)) fail(ErrorKind::ValidationError, "trial duration must be > 0");
    cfg.validate();

    constexpr double dt = 1.0 / kDaqRate;
    const Eigen::Index n_daq = detail::sample_count(kDaqRate, duration);
    const Eigen::Index n_cam = detail::sample_count(kCameraRate, duration);

    Rng plant_rng(derive_seed({seed, kStreamPlant}));
    Rng camera_rng(derive_seed({seed, kStreamCamera}));

    RawTrial raw;
    raw.payload = payload;
    raw.seed = seed;
    raw.duration = duration;
    raw.fold_angles.resize(n_daq, kSensors);
    raw.markers.resize(n_cam, kMarkers);

    std::normal_distribution<double> unit(0.0, 1.0);
    const double common = cfg.camera.registration_common * unit(camera_rng);
    MarkerArray registration{};
    for (auto& r : registration) r = common + cfg.camera.registration_marker * unit(camera_rng);

    auto emit_markers = [&](Eigen::Index frame, const ModuleArray& theta) {
        const MarkerFrame mf = marker_positions(theta, cfg.arm, cfg.map);
        for (int m = 0; m < kMarkers; ++m) {
            raw.markers(frame, m) = mf.markers[m] + registration[m] + cfg.camera.jitter * unit(camera_rng);
        }
    };

    PlantState state = reset_state(cfg, plant_rng);
    Eigen::Index next_frame = 0;
    for (Eigen::Index k = 0; k < n_daq; ++k) {
        const SensorArray phi = panel_fold_angles(state.angle, cfg.map);
        for (int j = 0; j < kSensors; ++j) raw.fold_angles(k, j) = phi[j];

        PlantState next;
        try {
            next = step(state, cfg.arm, cfg.sma, cfg.schedule, payload, dt);
        } catch (const Error& e) {
            throw Error(e.kind(), e.detail() + " at t=" + std::to_string(state.time) + " s");
        }
        next.time = static_cast<double>(k + 1) * dt;

        // camera frames falling in [t_k, t_k+1): frame f is at f/60 s = 50f/3 ms
        while (next_frame < n_cam) {
            const Eigen::Index num = next_frame * 50;
            const Eigen::Index ms = num / 3;
            if (ms != k) break;
            const Eigen::Index rem = num % 3;
            if (rem == 0) {
                emit_markers(next_frame, state.angle);
            } else {
                emit_markers(next_frame, detail::hermite(state, next, dt, static_cast<double>(rem) / 3.0));
            }
            ++next_frame;
        }
        state = next;
    }
    return raw;
}

} // namespace prc::plant
