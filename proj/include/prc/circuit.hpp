#pragma once

// Bending-sensor network: three sensors in series per module, the four module
// branches in parallel, the whole network in series with one load resistor
// across the supply. Voltages are read across each sensor.

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "prc/error.hpp"
#include "prc/plant.hpp"
#include "prc/rng.hpp"

namespace prc::circuit {

using plant::kModules;
using plant::kPanelsPerModule;
using plant::kSensors;
using plant::SensorArray;

struct SensorCircuit {
    double base_resistance = 1000.0; // r0, ohm
    double alpha = 2.0;              // 1/rad
    double beta = 1.2;               // 1/rad^2
    double load_resistance = 2000.0; // ohm
    double supply_voltage = 6.0;     // V
    double noise_sigma = 0.01;       // V

    void validate() const
    {
        if (!(base_resistance > 0.0)) fail(ErrorKind::ValidationError, "circuit.r0 must be > 0");
        if (!(load_resistance > 0.0)) fail(ErrorKind::ValidationError, "circuit.load must be > 0");
        if (!(supply_voltage > 0.0)) fail(ErrorKind::ValidationError, "circuit.supply must be > 0");
        if (!(noise_sigma >= 0.0)) fail(ErrorKind::ValidationError, "circuit.noise must be >= 0");
        // r(phi) > 0 on |phi| <= pi/2: check both edges and the interior extremum
        constexpr double edge = std::numbers::pi / 2;
        auto rel = [&](double p) { return 1.0 + alpha * p + beta * p * p; };
        bool ok = rel(edge) > 0.0 && rel(-edge) > 0.0;
        if (beta > 0.0) {
            const double vertex = -alpha / (2.0 * beta);
            if (std::abs(vertex) <= edge) ok = ok && rel(vertex) > 0.0;
        }
        if (!ok) fail(ErrorKind::ValidationError, "circuit coefficients give non-positive resistance within |phi| <= pi/2");
    }
};

enum class SensorMode { Healthy, OpenCircuit, StuckZero };

struct FailureSpec {
    std::array<SensorMode, kSensors> mode{};

    static FailureSpec healthy() { return {}; }

    bool any() const
    {
        for (auto m : mode) {
            if (m != SensorMode::Healthy) return true;
        }
        return false;
    }
};

inline double resistance(double phi, const SensorCircuit& c)
{
    if (!(std::abs(phi) <= std::numbers::pi / 2)) {
        fail(ErrorKind::RangeExceeded, "fold angle outside the sensor's operating range");
    }
    const double r = c.base_resistance * (1.0 + c.alpha * phi + c.beta * phi * phi);
    if (!(r > 0.0)) fail(ErrorKind::NonPositiveResistance, "sensor resistance <= 0 at phi=" + std::to_string(phi));
    return r;
}

/// Detailed DC operating point; `solve` returns only the sensor voltages.
struct Solution {
    SensorArray voltage{};
    std::array<double, kModules> branch_resistance{};
    std::array<bool, kModules> conducting{};
    double node_voltage = 0.0;
    double total_current = 0.0; // A
};

inline Solution solve_detailed(const SensorArray& phi, const SensorCircuit& c, const FailureSpec& f = {})
{
    Solution s;
    SensorArray r{};
    for (int j = 0; j < kSensors; ++j) r[j] = resistance(phi[j], c);

    double conductance = 0.0;
    for (int b = 0; b < kModules; ++b) {
        double rb = 0.0;
        bool open = false;
        for (int k = 0; k < kPanelsPerModule; ++k) {
            const int j = b * kPanelsPerModule + k;
            rb += r[j];
            open = open || f.mode[j] == SensorMode::OpenCircuit;
        }
        s.branch_resistance[b] = rb;
        s.conducting[b] = !open;
        if (!open) conductance += 1.0 / rb;
    }

    if (conductance > 0.0) {
        const double r_net = 1.0 / conductance;
        s.node_voltage = c.supply_voltage * r_net / (r_net + c.load_resistance);
        s.total_current = s.node_voltage * conductance;
    } else {
        s.node_voltage = c.supply_voltage; // no current, nothing drops across the load
    }

    for (int b = 0; b < kModules; ++b) {
        for (int k = 0; k < kPanelsPerModule; ++k) {
            const int j = b * kPanelsPerModule + k;
            if (s.conducting[b]) {
                s.voltage[j] = s.node_voltage * r[j] / s.branch_resistance[b];
            } else {
                // a broken sensor sees the whole node voltage, its healthy neighbours carry no current
                s.voltage[j] = f.mode[j] == SensorMode::OpenCircuit ? s.node_voltage : 0.0;
            }
        }
    }
    for (int j = 0; j < kSensors; ++j) {
        if (f.mode[j] == SensorMode::StuckZero) s.voltage[j] = 0.0;
    }
    return s;
}

inline SensorArray solve(const SensorArray& phi, const SensorCircuit& c, const FailureSpec& f = {})
{
    return solve_detailed(phi, c, f).voltage;
}

/// solve() plus i.i.d. Gaussian channel noise. Twelve draws are consumed per call regardless of faults.
inline SensorArray measure(const SensorArray& phi, const SensorCircuit& c, const FailureSpec& f, Rng& rng)
{
    SensorArray v = solve(phi, c, f);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int j = 0; j < kSensors; ++j) {
        const double n = c.noise_sigma * noise(rng);
        if (f.mode[j] != SensorMode::StuckZero) v[j] += n;
    }
    return v;
}

} // namespace prc::circuit
