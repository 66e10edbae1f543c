#pragma once

// Level-shift change model, residual process and the synthetic labeled
// datasets used for training and evaluation.

#include "lrdetect/lrd_core.hpp"
#include "lrdetect/time_series.hpp"
#include "lrdetect/trend_filter.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lrdetect {

/// mu on the closed interval [change_time, change_time + duration] on top of
/// sigma-scaled fGn.
struct ChangeSpec {
    double change_time = 0.0;
    double duration = 1.0;
    double magnitude = 0.0;
    double sigma = 1.0;
    HurstExponent hurst{0.5};
};

struct LabeledPath {
    TimeSeries series;
    std::vector<std::uint8_t> labels;
    std::size_t normal_duration = 0;
    std::size_t abnormal_duration = 0;
    /// Index range of the labeled change, inclusive; meaningless when
    /// abnormal_duration is 0.
    std::size_t change_first = 0;
    std::size_t change_last = 0;
    /// Noise-free seasonal component, when known.
    std::vector<double> true_trend;
    /// Continuous draws before grid snapping (synthetic paths only).
    double drawn_change_time = 0.0;
    double drawn_duration = 0.0;
    /// One no-change week preceding the series (synthetic paths only).
    std::optional<TimeSeries> history;
};

enum class Profile { Easy, Hard };

std::string to_string(Profile profile);
/// Accepts "easy" / "hard" in any case; throws DomainError otherwise.
Profile parse_profile(const std::string& text);

struct LabeledDataset {
    std::vector<LabeledPath> paths;
    std::uint64_t seed = 0;
    Profile profile = Profile::Easy;
};

/// Synthetic recipe. Defaults: one week of 5-minute samples (K = 2016,
/// t_k = k), f(t) = 1.5 sin(2 pi t / 288), sigma = 1, fGn with H = 0.95,
/// change time ~ U(288, 1728), duration ~ U(5, 100) samples, mu = 5 (Easy) or
/// 3 (Hard).
struct ArtificialConfig {
    std::size_t length = 2016;
    double amplitude = 1.5;
    double period = 288.0;
    double sigma = 1.0;
    HurstExponent hurst{0.95};
    double magnitude = 5.0;
    double change_time_low = 288.0;
    double change_time_high = 1728.0;
    double duration_low = 5.0;
    double duration_high = 100.0;
    bool with_history = true;

    static ArtificialConfig for_profile(Profile profile);
};

double seasonal_trend(const ArtificialConfig& config, double t);

/// Path i uses seed derive_seed(seed, i). From that path seed the change time
/// and duration are drawn (in that order), the noise uses
/// derive_seed(path_seed, 1) and the history noise derive_seed(path_seed, 2).
/// The change time is rounded to the grid and the duration floored, so the
/// labeled segment holds floor(duration) + 1 points. With magnitude 0 the
/// draws still happen but no point is labeled.
/// Throws DomainError when count is 0.
LabeledDataset generate_artificial(Profile profile, std::size_t count, std::uint64_t seed);
LabeledDataset generate_artificial(const ArtificialConfig& config, Profile profile, std::size_t count,
                                   std::uint64_t seed);

/// Adds magnitude to the values whose timestamps fall in the closed interval
/// [change_time, change_time + duration] and labels them. Throws
/// OutOfSpanError when the interval leaves the series and DomainError for a
/// non-positive duration or sigma.
LabeledPath inject_change(const TimeSeries& series, const ChangeSpec& change);

/// (X_t - f_hat(t)) / sigma_hat, where sigma_hat is the estimate of the
/// successful window whose centre is nearest to t. Throws
/// DegenerateInputError if that sigma_hat is not positive,
/// LengthMismatchError if trend and series differ in length.
TimeSeries compute_residuals(const TimeSeries& series, const TrendEstimate& trend);

/// Writes path_NNNN.csv (t,value,label), history_NNNN.csv (t,value) when a
/// history exists, and manifest.txt describing the dataset.
void write_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset,
                   const ArtificialConfig& config);

/// Reads a directory written by write_dataset. True trends are rebuilt from
/// the recipe recorded in the manifest.
LabeledDataset read_dataset(const std::filesystem::path& dir, ArtificialConfig* config = nullptr);

/// Builds a LabeledPath from a series and its 0/1 labels.
LabeledPath labeled_path(TimeSeries series, std::vector<std::uint8_t> labels);

} // namespace lrdetect
