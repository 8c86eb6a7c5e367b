#pragma once

// Flat or sectioned `key = value` configuration.
//
//   # comment
//   [arm]
//   k = 300, 250, 200, 150      -> arm.k
//   arm.coupling = 100          (full keys work anywhere)
//
// Unknown keys are rejected; everything not mentioned keeps its default.

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "prc/experiments.hpp"
#include "prc/io/text.hpp"

namespace prc::io {

struct Paths {
    std::string data = "data";
    std::string model = "model.prc";
    std::string out = "out";
};

struct Config {
    experiments::Setup setup;
    experiments::ExperimentPlan plan;
    Paths paths;

    void validate() const
    {
        setup.validate();
        plan.validate(setup.plant.schedule.duration);
    }
};

namespace detail {

struct BadValue {
    std::string why;
};

inline double to_double(std::string_view s)
{
    const auto v = parse_double(s);
    if (!v || !std::isfinite(*v)) throw BadValue{"expected a finite number, got '" + std::string(trim(s)) + "'"};
    return *v;
}

template <class Int>
Int to_int(std::string_view s)
{
    const auto v = parse_int<Int>(s);
    if (!v) throw BadValue{"expected an integer, got '" + std::string(trim(s)) + "'"};
    return *v;
}

inline std::vector<std::string_view> list(std::string_view s)
{
    std::vector<std::string_view> out;
    for (auto p : split(s)) out.push_back(trim(p));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

template <class T>
void parse_value(std::string_view s, T& out)
{
    if constexpr (std::is_same_v<T, double>) {
        out = to_double(s);
    } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
        out = to_int<T>(s);
    } else if constexpr (std::is_same_v<T, std::string>) {
        out = std::string(trim(s));
    } else if constexpr (std::is_same_v<T, tasks::Scenario>) {
        const auto t = trim(s);
        if (t == "A") out = tasks::Scenario::A;
        else if (t == "B") out = tasks::Scenario::B;
        else if (t == "C") out = tasks::Scenario::C;
        else throw BadValue{"expected A, B or C"};
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        out.clear();
        for (auto p : list(s)) out.push_back(to_int<int>(p));
    } else {
        // std::array<double, N>; a single value is broadcast
        const auto parts = list(s);
        if (parts.size() == 1) {
            out.fill(to_double(parts[0]));
        } else if (parts.size() == out.size()) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = to_double(parts[i]);
        } else {
            throw BadValue{"expected 1 or " + std::to_string(out.size()) + " comma-separated numbers"};
        }
    }
}

template <class T>
std::string format_value(const T& v)
{
    if constexpr (std::is_same_v<T, double>) {
        return format_double(v);
    } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
        return std::to_string(v);
    } else if constexpr (std::is_same_v<T, std::string>) {
        return v;
    } else if constexpr (std::is_same_v<T, tasks::Scenario>) {
        return std::string(tasks::to_string(v));
    } else {
        std::string s;
        for (const auto& x : v) {
            if (!s.empty()) s += ", ";
            s += format_value(x);
        }
        return s;
    }
}

struct Field {
    std::string key;
    std::function<void(Config&, std::string_view)> set;
    std::function<std::string(const Config&)> get;
};

template <class Acc>
Field field(std::string key, Acc acc)
{
    return {std::move(key),
            [acc](Config& c, std::string_view v) { parse_value(v, acc(c)); },
            [acc](const Config& c) { return format_value(acc(const_cast<Config&>(c))); }};
}

inline const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        auto arm = [](Config& c) -> plant::ArmParams& { return c.setup.plant.arm; };
        f.push_back(field("arm.k", [=](Config& c) -> auto& { return arm(c).stiffness; }));
        f.push_back(field("arm.k3", [=](Config& c) -> auto& { return arm(c).cubic_stiffness; }));
        f.push_back(field("arm.c", [=](Config& c) -> auto& { return arm(c).damping; }));
        f.push_back(field("arm.J", [=](Config& c) -> auto& { return arm(c).inertia; }));
        f.push_back(field("arm.coupling", [=](Config& c) -> auto& { return arm(c).coupling; }));
        f.push_back(field("arm.plate_mass", [=](Config& c) -> auto& { return arm(c).plate_mass; }));
        f.push_back(field("arm.module_length", [=](Config& c) -> auto& { return arm(c).module_length; }));
        f.push_back(field("arm.gripper_mass", [=](Config& c) -> auto& { return arm(c).gripper_mass; }));
        f.push_back(field("arm.gripper_length", [=](Config& c) -> auto& { return arm(c).gripper_length; }));
        f.push_back(field("arm.payload_drop", [=](Config& c) -> auto& { return arm(c).payload_drop; }));
        f.push_back(field("arm.gravity", [=](Config& c) -> auto& { return arm(c).gravity; }));

        auto sma = [](Config& c) -> plant::SmaParams& { return c.setup.plant.sma; };
        f.push_back(field("sma.thermal_capacity", [=](Config& c) -> auto& { return sma(c).thermal_capacity; }));
        f.push_back(field("sma.cooling_time", [=](Config& c) -> auto& { return sma(c).cooling_time; }));
        f.push_back(field("sma.heating_power", [=](Config& c) -> auto& { return sma(c).heating_power; }));
        f.push_back(field("sma.activation_temp", [=](Config& c) -> auto& { return sma(c).activation_temp; }));
        f.push_back(field("sma.torque_gain", [=](Config& c) -> auto& { return sma(c).torque_gain; }));
        f.push_back(field("sma.torque_cap", [=](Config& c) -> auto& { return sma(c).torque_cap; }));
        f.push_back(field("sma.column_gain", [=](Config& c) -> auto& { return sma(c).column_gain; }));

        auto sched = [](Config& c) -> plant::ActuationSchedule& { return c.setup.plant.schedule; };
        f.push_back(field("schedule.heat", [=](Config& c) -> auto& { return sched(c).heat; }));
        f.push_back(field("schedule.relax", [=](Config& c) -> auto& { return sched(c).relax; }));
        f.push_back(field("schedule.phase_offset", [=](Config& c) -> auto& { return sched(c).phase_offset; }));
        f.push_back(field("schedule.duty", [=](Config& c) -> auto& { return sched(c).duty; }));
        f.push_back(field("schedule.duration", [=](Config& c) -> auto& { return sched(c).duration; }));

        for (int j = 0; j < plant::kSensors; ++j) {
            f.push_back(field("kinematics.s" + std::to_string(j + 1),
                              [j](Config& c) -> auto& { return c.setup.plant.map.fold[static_cast<std::size_t>(j)]; }));
        }
        f.push_back(field("kinematics.marker_fraction", [](Config& c) -> auto& { return c.setup.plant.map.marker_fraction; }));

        f.push_back(field("camera.jitter", [](Config& c) -> auto& { return c.setup.plant.camera.jitter; }));
        f.push_back(field("camera.registration_common", [](Config& c) -> auto& { return c.setup.plant.camera.registration_common; }));
        f.push_back(field("camera.registration_marker", [](Config& c) -> auto& { return c.setup.plant.camera.registration_marker; }));

        f.push_back(field("reset.angle", [](Config& c) -> auto& { return c.setup.plant.reset_angle; }));
        f.push_back(field("reset.perturbation", [](Config& c) -> auto& { return c.setup.plant.reset_perturbation; }));

        auto circ = [](Config& c) -> circuit::SensorCircuit& { return c.setup.circuit; };
        f.push_back(field("circuit.r0", [=](Config& c) -> auto& { return circ(c).base_resistance; }));
        f.push_back(field("circuit.alpha", [=](Config& c) -> auto& { return circ(c).alpha; }));
        f.push_back(field("circuit.beta", [=](Config& c) -> auto& { return circ(c).beta; }));
        f.push_back(field("circuit.load", [=](Config& c) -> auto& { return circ(c).load_resistance; }));
        f.push_back(field("circuit.supply", [=](Config& c) -> auto& { return circ(c).supply_voltage; }));
        f.push_back(field("circuit.noise", [=](Config& c) -> auto& { return circ(c).noise_sigma; }));

        for (int i = 0; i < 5; ++i) {
            const std::string p = "payload.item" + std::to_string(i + 1) + ".";
            auto item = [i](Config& c) -> plant::PayloadCondition& { return c.setup.payloads[static_cast<std::size_t>(i)]; };
            f.push_back(field(p + "label", [=](Config& c) -> auto& { return item(c).label; }));
            f.push_back(field(p + "mass", [=](Config& c) -> auto& { return item(c).mass; }));
            f.push_back(field(p + "offset", [=](Config& c) -> auto& { return item(c).com_offset; }));
            f.push_back(field(p + "scenario", [=](Config& c) -> auto& { return item(c).scenario; }));
        }

        f.push_back(field("thresholds.low", [](Config& c) -> auto& { return c.setup.thresholds.low; }));
        f.push_back(field("thresholds.high", [](Config& c) -> auto& { return c.setup.thresholds.high; }));

        auto plan = [](Config& c) -> experiments::ExperimentPlan& { return c.plan; };
        f.push_back(field("plan.seed", [=](Config& c) -> auto& { return plan(c).seed; }));
        f.push_back(field("plan.trials", [=](Config& c) -> auto& { return plan(c).trials; }));
        f.push_back(field("plan.repeats", [=](Config& c) -> auto& { return plan(c).repeats; }));
        f.push_back(field("plan.window", [=](Config& c) -> auto& { return plan(c).window; }));
        f.push_back(field("plan.lambda", [=](Config& c) -> auto& { return plan(c).lambda; }));
        f.push_back(field("plan.subsets", [=](Config& c) -> auto& { return plan(c).subsets; }));
        f.push_back(field("plan.windows_per_unit", [=](Config& c) -> auto& { return plan(c).windows_per_unit; }));
        f.push_back(field("plan.reduction", [=](Config& c) -> auto& { return plan(c).reduction; }));
        f.push_back(field("plan.failure", [=](Config& c) -> auto& { return plan(c).failure; }));

        f.push_back(field("paths.data", [](Config& c) -> auto& { return c.paths.data; }));
        f.push_back(field("paths.model", [](Config& c) -> auto& { return c.paths.model; }));
        f.push_back(field("paths.out", [](Config& c) -> auto& { return c.paths.out; }));
        return f;
    }();
    return table;
}

[[noreturn]] inline void parse_error(std::size_t line, std::string_view key, const std::string& why)
{
    fail(ErrorKind::ParseError, "line " + std::to_string(line) + ", key '" + std::string(key) + "': " + why);
}

} // namespace detail

inline Config parse_config(std::string_view text)
{
    Config cfg;
    std::string section;
    const auto ls = lines(text);
    for (std::size_t n = 0; n < ls.size(); ++n) {
        std::string_view l = ls[n];
        if (const auto h = l.find('#'); h != std::string_view::npos) l = l.substr(0, h);
        l = trim(l);
        if (l.empty()) continue;
        if (l.front() == '[') {
            if (l.back() != ']') detail::parse_error(n + 1, l, "unterminated section header");
            section = std::string(trim(l.substr(1, l.size() - 2)));
            continue;
        }
        const auto eq = l.find('=');
        if (eq == std::string_view::npos) detail::parse_error(n + 1, l, "expected 'key = value'");
        const auto name = trim(l.substr(0, eq));
        std::string key(name);
        if (!section.empty() && !key.starts_with(section + ".")) key = section + "." + key;
        const auto& fs = detail::fields();
        const auto it = std::find_if(fs.begin(), fs.end(), [&](const detail::Field& f) { return f.key == key; });
        if (it == fs.end()) detail::parse_error(n + 1, key, "unknown key");
        try {
            it->set(cfg, l.substr(eq + 1));
        } catch (const detail::BadValue& e) {
            detail::parse_error(n + 1, key, e.why);
        }
    }
    cfg.validate();
    return cfg;
}

inline Config load_config(const std::filesystem::path& p) { return parse_config(read_file(p)); }

/// Sectioned text that parses back to `cfg`.
inline std::string format_config(const Config& cfg)
{
    std::string out;
    std::string section;
    for (const auto& f : detail::fields()) {
        const auto dot = f.key.find('.');
        const std::string sec = f.key.substr(0, dot);
        if (sec != section) {
            if (!out.empty()) out += '\n';
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += f.key.substr(dot + 1) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

inline std::string print_defaults() { return format_config(Config{}); }

} // namespace prc::io
