#pragma once

// Weak sequential detectors over the residual process and their reference
// thresholds.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lrdetect {

enum class DetectorKind { Cusum, ShiryaevRoberts, Shewhart, WindowChangepoint, PosteriorProbability };

inline constexpr DetectorKind kAllDetectors[] = {DetectorKind::Cusum, DetectorKind::ShiryaevRoberts,
                                                 DetectorKind::Shewhart, DetectorKind::WindowChangepoint,
                                                 DetectorKind::PosteriorProbability};

std::string to_string(DetectorKind kind);
/// Accepts the names produced by to_string. Throws DomainError otherwise.
DetectorKind parse_detector_kind(const std::string& text);

struct DetectorParams {
    /// Post-change mean of unit-variance residuals (likelihood-based kinds).
    double delta = 3.0;
    /// Length of each of the two adjacent windows (WindowChangepoint).
    std::size_t window = 20;
    /// Per-step change probability (PosteriorProbability).
    double prior = 1.0 / 2016.0;
};

/// Gaussian log-likelihood ratio of N(delta, 1) against N(0, 1) at r.
double log_likelihood_ratio(double r, double delta);

/// Recursion state of one detector. Construct with make_detector.
struct DetectorState {
    DetectorKind kind = DetectorKind::Cusum;
    DetectorParams params;
    std::size_t steps = 0;
    /// CUSUM T_t, Shewhart |r_t|, window statistic.
    double statistic = 0.0;
    /// Shiryaev-Roberts: log R_t (R_0 = 0). Posterior: log-odds of pi_t.
    double log_state = 0.0;
    /// Last 2w residuals for the window detector, oldest first once full.
    std::vector<double> ring;
    std::size_t ring_head = 0;

    /// The detector's own statistic: T_t, R_t, |r_t|, the window statistic, or
    /// pi_t. R_t may overflow to +inf; use signal() for aggregation.
    double value() const;

    /// Statistic fed to the ensemble: value() for every kind except
    /// Shiryaev-Roberts, which reports log(1 + R_t) (same crossing times, no
    /// overflow).
    double signal() const;
};

DetectorState make_detector(DetectorKind kind, const DetectorParams& params = {});

/// Advances `state` by one residual.
void advance(DetectorState& state, double r);

/// T_t = max(0, T_{t-1} + zeta_t), zeta_t = delta (r - delta / 2).
DetectorState cusum_update(DetectorState state, double r);
/// R_t = (1 + R_{t-1}) exp(zeta_t).
DetectorState shiryaev_roberts_update(DetectorState state, double r);
/// |r_t|.
DetectorState shewhart_update(DetectorState state, double r);
/// |mean(last w) - mean(previous w)| sqrt(w / 2); 0 until 2w residuals are seen.
DetectorState window_changepoint_update(DetectorState state, double r);
/// Shiryaev posterior pi_t with likelihood ratio exp(zeta_t) and prior rate p.
DetectorState posterior_probability_update(DetectorState state, double r);

/// CUSUM driven directly by log-likelihood increments.
DetectorState cusum_update_llr(DetectorState state, double zeta);
DetectorState shiryaev_roberts_update_llr(DetectorState state, double zeta);
DetectorState posterior_probability_update_llr(DetectorState state, double zeta);

/// signal() after each residual.
std::vector<double> run_detector(DetectorKind kind, const DetectorParams& params, std::span<const double> residuals);

struct SignalTrajectory {
    std::vector<double> raw;
    std::vector<double> normalized;
    double reference_threshold = 1.0;
};

/// s = S / h. Throws DomainError unless h > 0.
SignalTrajectory normalize_signal(std::vector<double> raw, double reference_threshold);

/// Type-7 sample quantile of the statistic over all points labeled 0.
/// Throws DomainError unless 0 < q <= 1, LengthMismatchError for misaligned
/// inputs, DegenerateInputError when no normal point exists or the quantile
/// is not positive.
double calibrate_reference_threshold(const std::vector<std::vector<double>>& statistics,
                                     const std::vector<std::vector<std::uint8_t>>& labels, double q);

/// A calibrated detector inside a bank.
struct BankEntry {
    DetectorKind kind = DetectorKind::Cusum;
    double threshold = 1.0;
};

struct DetectorBank {
    DetectorParams params;
    std::vector<BankEntry> entries;

    /// All five kinds with thresholds 1.
    static DetectorBank standard(const DetectorParams& params = {});

    /// Normalized signals of every entry, detector-major.
    std::vector<std::vector<double>> signals(std::span<const double> residuals) const;
};

} // namespace lrdetect
