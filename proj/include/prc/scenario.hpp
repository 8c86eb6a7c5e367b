#pragma once

#include <cmath>
#include <string_view>

#include "prc/error.hpp"

namespace prc::tasks {

/// Coarse payload band used to route refined classification.
enum class Scenario { A, B, C };

constexpr std::string_view to_string(Scenario s) noexcept
{
    switch (s) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
    }
    return "?";
}

struct ScenarioThresholds {
    double low = 75.0;   // g
    double high = 120.0; // g

    void validate() const
    {
        if (!(low > 0.0 && low < high && std::isfinite(high))) {
            fail(ErrorKind::ValidationError, "scenario thresholds require 0 < low < high");
        }
    }
};

/// Both boundaries belong to the middle band: A if g < low, B if low <= g <= high, C otherwise.
inline Scenario route(double grams, const ScenarioThresholds& th = {})
{
    if (!std::isfinite(grams)) {
        fail(ErrorKind::NonFinite, "weight estimate is not finite");
    }
    if (grams < th.low) return Scenario::A;
    if (grams <= th.high) return Scenario::B;
    return Scenario::C;
}

} // namespace prc::tasks
