#pragma once

#include <stdexcept>
#include <string>

namespace gkslcp {

/// Uniform grid t_m = m * h on [0, horizon], h = horizon / steps.
struct TimeGrid {
    double horizon{2.0};
    int steps{400};

    TimeGrid() = default;
    TimeGrid(double t_end, int m) : horizon(t_end), steps(m) {
        if (!(horizon > 0.0)) throw std::invalid_argument("time grid horizon must be positive");
        if (steps < 1) throw std::invalid_argument("time grid needs at least one step");
    }

    double step() const { return horizon / steps; }
    double node(int m) const { return m == steps ? horizon : m * step(); }
    int size() const { return steps + 1; }
    TimeGrid refined(int factor) const { return TimeGrid(horizon, steps * factor); }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

}  // namespace gkslcp
