#pragma once

// Logistic aggregation of lagged detector signals, the average relative error
// rate objective, its smooth surrogate and gradient training.

#include "lrdetect/evalkit.hpp"
#include "lrdetect/io.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace lrdetect {

/// a_t = sigma(sum_{k, j} weights(k, j) s^k_{t-j} - bias), j = 0..lags.
struct EnsembleModel {
    Eigen::MatrixXd weights;
    double bias = 0.0;
    std::size_t lags = 0;
    double h_a = 0.5;
    double c_inf = 1.0;
    double c_zero = 1.0;

    /// All-zero model for n detectors and lag depth p.
    static EnsembleModel zeros(std::size_t detectors, std::size_t lags);

    std::size_t detectors() const noexcept { return static_cast<std::size_t>(weights.rows()); }

    /// Throws DomainError unless h_a is in (0, 1), costs are positive and all
    /// parameters are finite.
    void validate() const;
};

/// Normalized signals of one path (detector-major) and its labels.
struct TrainingPath {
    std::vector<std::vector<double>> signals;
    std::vector<std::uint8_t> labels;
};

struct AggregatedTrajectory {
    std::vector<double> values;
    std::optional<std::size_t> stopping_index;
};

/// Lags before the first sample read as 0. Values are kept inside the open
/// interval (0, 1). Throws LengthMismatchError when the signals differ in
/// length or their count differs from the model's detector count.
AggregatedTrajectory aggregate(const EnsembleModel& model, const std::vector<std::vector<double>>& signals);

struct Detection {
    AggregatedTrajectory trajectory;
    /// Maximal runs of a_t >= h_a.
    std::vector<DetectionSegment> segments;
};

Detection detect(const EnsembleModel& model, const std::vector<std::vector<double>>& signals);

struct ArerEvaluation {
    double value = 0.0;
    /// Paths without normal or without abnormal points, left out of the mean.
    std::size_t excluded_paths = 0;
};

/// Mean over paths of c_inf * (share of normal points with a_t >= h_a)
/// + c_0 * (share of abnormal points with a_t < h_a).
ArerEvaluation arer_exact(const EnsembleModel& model, const std::vector<TrainingPath>& paths);

/// The smooth version: the indicators become sigma(k (a_t - h_a)) and
/// sigma(k (h_a - a_t)) with sharpness k (1 gives the plain logistic).
ArerEvaluation arer_surrogate(const EnsembleModel& model, const std::vector<TrainingPath>& paths,
                              double sharpness = 1.0);

struct SurrogateGradient {
    ArerEvaluation loss;
    Eigen::MatrixXd d_weights;
    double d_bias = 0.0;
};

SurrogateGradient arer_surrogate_gradient(const EnsembleModel& model, const std::vector<TrainingPath>& paths,
                                          double sharpness = 1.0);

struct TrainOptions {
    std::size_t lags = 1;
    std::size_t epochs = 200;
    double initial_step = 0.1;
    double sharpness = 1.0;
    double h_a = 0.5;
    double c_inf = 1.0;
    double c_zero = 1.0;
};

struct TrainReport {
    /// Surrogate loss after each accepted epoch; the first entry is the loss
    /// of the zero model.
    std::vector<double> loss_history;
    std::size_t excluded_paths = 0;
    std::size_t epochs_run = 0;
};

/// Full-batch gradient descent on the surrogate from the zero model with
/// h_a fixed. Each epoch backtracks (halving) from the current step until the
/// Armijo condition holds, then doubles the step for the next epoch, so the
/// loss never increases. Stops early when no step decreases the loss.
/// Throws DomainError on empty or inconsistent data and NumericalError if the
/// loss becomes non-finite.
EnsembleModel train(const std::vector<TrainingPath>& paths, const TrainOptions& options = {},
                    TrainReport* report = nullptr);

/// Stores the model under keys "ensemble.*".
void write_model(KeyValueFile& file, const EnsembleModel& model);
EnsembleModel read_model(const KeyValueFile& file);

} // namespace lrdetect
