#pragma once

// End-to-end procedures shared by the command line and the test suites:
// residuals, detector calibration, ensemble training, detection and the
// comparison of every method on a labeled dataset.

#include "lrdetect/baselines.hpp"
#include "lrdetect/change_model.hpp"
#include "lrdetect/detectors.hpp"
#include "lrdetect/ensemble.hpp"
#include "lrdetect/evalkit.hpp"
#include "lrdetect/io.hpp"
#include "lrdetect/trend_filter.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lrdetect {

struct PipelineConfig {
    TrendOptions trend;
    DetectorParams detector;
    double calibration_quantile = 0.99;
    TrainOptions train;
};

/// Trend fit followed by standardization.
TimeSeries residual_series(const TimeSeries& series, const TrendOptions& options);

/// Residuals of every path of a dataset.
std::vector<std::vector<double>> dataset_residuals(const LabeledDataset& dataset, const TrendOptions& options);

/// Reference thresholds of all five detectors from the normal points of the
/// given residual paths.
DetectorBank calibrate_bank(const std::vector<std::vector<double>>& residuals,
                            const std::vector<std::vector<std::uint8_t>>& labels, const DetectorParams& params,
                            double quantile);

struct TrainedPipeline {
    TrendOptions trend;
    DetectorBank bank;
    EnsembleModel model;
};

struct TrainingSummary {
    TrainReport report;
    std::size_t paths = 0;
};

/// Calibrates the bank and trains the ensemble on the dataset.
TrainedPipeline train_pipeline(const LabeledDataset& dataset, const PipelineConfig& config,
                               TrainingSummary* summary = nullptr);

/// Same, on residual paths already computed with config.trend.
TrainedPipeline train_pipeline_on_residuals(const std::vector<std::vector<double>>& residuals,
                                            const std::vector<std::vector<std::uint8_t>>& labels,
                                            const PipelineConfig& config, TrainingSummary* summary = nullptr);

Detection detect_series(const TrainedPipeline& pipeline, const TimeSeries& series);

/// Model file: schema_version, trend window, detector parameters, calibrated
/// thresholds and the ensemble, as key=value text.
std::string render_pipeline(const TrainedPipeline& pipeline);
TrainedPipeline parse_pipeline(const KeyValueFile& file);

/// Names of the compared procedures, in report order.
inline const std::vector<std::string> kTrendMethods = {"EWMA", "PCA", "PCA-Pretraining", "Ours"};
inline const std::vector<std::string> kDetectionMethods = {"Ours", "CUSUM", "EWMA-CUSUM", "EWMA-Threshold", "PCA",
                                                           "PCA-Pretraining"};

struct TrendAccuracy {
    std::string method;
    double trend_rrmse = 0.0;
    double forecast_rrmse = 0.0;
    /// Scale-free companions: sqrt(sum (x - x_hat)^2 / sum x^2).
    double trend_relative_rmse = 0.0;
    double forecast_relative_rmse = 0.0;
    std::size_t excluded_zero = 0;
};

struct BaselineSettings {
    double ewma_smoothing = 0.05;
    SsaOptions ssa;
    std::vector<double> cusum_deltas = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
    std::vector<double> smoothings = {0.01, 0.05, 0.1, 0.3};
    std::vector<double> threshold_levels = {1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<std::size_t> threshold_windows = {5, 10, 20, 50};
};

/// Trend and forecast accuracy of every trend method against the true trend
/// (trend column) and the observations (forecast column), pooled over paths.
/// Paths must carry true_trend; PCA-Pretraining needs a history.
std::vector<TrendAccuracy> compare_trend_accuracy(const LabeledDataset& dataset, const TrendOptions& trend,
                                                  const BaselineSettings& settings = {});

struct MethodCurves {
    std::string method;
    std::string parameters;
    std::vector<PrPoint> pr;
    std::vector<ArerPoint> arer;
    double pr_auc = 0.0;
    double arer_auc = 0.0;
};

struct EwmaChoice {
    EwmaCusumParams cusum;
    EwmaThresholdParams threshold;
};

/// Grid search of the EWMA baselines by PR-AUC on the given training paths.
EwmaChoice select_ewma_parameters(const LabeledDataset& train, const BaselineSettings& settings = {});

/// Scores every detection method on the test set. test_residuals must come
/// from pipeline.trend.
std::vector<MethodCurves> compare_detection(const TrainedPipeline& pipeline, const EwmaChoice& ewma,
                                            const LabeledDataset& test,
                                            const std::vector<std::vector<double>>& test_residuals,
                                            const BaselineSettings& settings = {});

} // namespace lrdetect
