#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lrdetect {

/// Uniformly sampled scalar observations.
struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
    double sample_period = 1.0;

    /// Series with times t0, t0 + period, ...
    static TimeSeries uniform(std::vector<double> values, double t0 = 1.0, double period = 1.0);

    std::size_t size() const noexcept { return values.size(); }

    /// Throws FormatError when times are not strictly increasing with a
    /// constant step equal to sample_period, or values are not finite, or the
    /// two arrays differ in length.
    void validate() const;
};

} // namespace lrdetect
