#pragma once

// Accuracy metrics, detection segments and the precision-recall / error-rate
// curves.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lrdetect {

struct RrmseResult {
    double value = 0.0;
    std::size_t used = 0;
    /// Points skipped because |actual| < 1e-12.
    std::size_t excluded_zero = 0;
    /// Points skipped because the prediction is NaN (no forecast yet).
    std::size_t excluded_missing = 0;
};

/// sqrt(mean((actual - predicted)^2 / actual^2)) over the usable points.
/// Throws LengthMismatchError, DegenerateInputError when no point is usable.
RrmseResult rrmse(std::span<const double> actual, std::span<const double> predicted);

/// Maximal run of indices whose statistic is >= the threshold.
struct DetectionSegment {
    std::size_t start = 0;
    std::size_t end = 0;
    double peak = 0.0;

    friend bool operator==(const DetectionSegment&, const DetectionSegment&) = default;
};

/// NaN never counts as above the threshold.
std::vector<DetectionSegment> segments_from_statistic(std::span<const double> statistic, double threshold);

struct MatchResult {
    std::size_t tp = 0;
    std::size_t fp = 0;
    bool detected = false;
};

/// A segment is a true positive when it intersects [true_first, true_last]
/// and a false positive otherwise.
MatchResult match_detections(const std::vector<DetectionSegment>& segments, std::size_t true_first,
                             std::size_t true_last);

/// Statistic of one evaluated path together with its labels.
struct ScoredPath {
    std::vector<double> statistic;
    std::vector<std::uint8_t> labels;
};

struct PrPoint {
    double threshold = 0.0;
    double precision = 1.0;
    double recall = 0.0;
};

struct ArerPoint {
    double threshold = 0.0;
    double afpr = 0.0;
    double afnr = 0.0;
};

/// 101 evenly spaced thresholds from the smallest to the largest finite
/// statistic value over all paths.
std::vector<double> range_threshold_grid(const std::vector<ScoredPath>& paths, std::size_t points = 101);

/// (i + 0.5) / points, for statistics living in (0, 1).
std::vector<double> unit_threshold_grid(std::size_t points = 101);

/// Recall is the fraction of paths with a labeled change whose change is hit
/// by at least one segment; precision is TP / (TP + FP) pooled over all
/// paths, and 1 when no segment exists.
std::vector<PrPoint> pr_curve(const std::vector<ScoredPath>& paths, const std::vector<double>& thresholds);

/// Per path: afpr = c_inf * share of normal points with statistic >= h,
/// afnr = c_0 * share of abnormal points with statistic < h; averaged over
/// paths that have both kinds of points.
std::vector<ArerPoint> arer_curve(const std::vector<ScoredPath>& paths, const std::vector<double>& thresholds,
                                  double c_inf = 1.0, double c_zero = 1.0);

/// Trapezoid area under precision as a function of recall, walking the
/// points from the highest threshold to the lowest. Recall never decreases
/// along that walk, so jumps of precision at a fixed recall add no area. The
/// precision at the highest threshold is extended flat to recall 0.
double pr_auc(std::vector<PrPoint> curve);

/// Trapezoid area under afnr as a function of afpr, closed with the
/// never-alarm point (0, c_0) and the always-alarm point (c_inf, 0). Lower is
/// better.
double arer_auc(std::vector<ArerPoint> curve, double c_inf = 1.0, double c_zero = 1.0);

/// CSV text with columns threshold,precision,recall.
std::string render_pr_csv(const std::vector<PrPoint>& curve);
/// CSV text with columns threshold,afpr,afnr.
std::string render_arer_csv(const std::vector<ArerPoint>& curve);

} // namespace lrdetect
