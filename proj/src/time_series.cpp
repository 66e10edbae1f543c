#include "lrdetect/time_series.hpp"

#include "lrdetect/error.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace lrdetect {

TimeSeries TimeSeries::uniform(std::vector<double> values, double t0, double period) {
    if (!(period > 0.0)) {
        throw DomainError("sample period must be positive");
    }
    TimeSeries series;
    series.times.resize(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        series.times[k] = t0 + period * static_cast<double>(k);
    }
    series.values = std::move(values);
    series.sample_period = period;
    return series;
}

void TimeSeries::validate() const {
    if (times.size() != values.size()) {
        throw LengthMismatchError("time series has " + std::to_string(times.size()) + " timestamps but " +
                                  std::to_string(values.size()) + " values");
    }
    if (!(sample_period > 0.0)) {
        throw FormatError("sample period must be positive");
    }
    const double tolerance = 1e-9 * sample_period;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) {
            throw FormatError("non-finite value at index " + std::to_string(k));
        }
        if (k > 0 && std::abs(times[k] - times[k - 1] - sample_period) > tolerance) {
            throw FormatError("timestamps are not uniform at index " + std::to_string(k));
        }
    }
}

} // namespace lrdetect
