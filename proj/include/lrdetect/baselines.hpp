#pragma once

// Comparison procedures: EWMA residual detectors and the SSA/PCA subspace
// method.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace lrdetect {

struct EwmaState {
    double mean = 0.0;
    double variance = 0.0;
    double smoothing = 0.05;
    std::size_t steps = 0;
};

/// Trajectories of an EWMA pass over a series.
struct EwmaResult {
    /// mu_hat_t after observing X_t.
    std::vector<double> mean;
    /// R_t = (X_t - mu_hat_{t-1}) / sigma_hat_{t-1}; 0 at t = 0.
    std::vector<double> residuals;
    /// Steps t >= 1 whose sigma_hat_{t-1} was 0 (residual set to 0).
    std::size_t zero_scale_steps = 0;
};

/// Feeds one observation; returns the residual against the state before the
/// update. The first observation initializes the mean with zero variance.
double ewma_update(EwmaState& state, double x, bool* zero_scale = nullptr);

/// Throws DomainError unless 0 < smoothing < 1.
EwmaResult ewma_filter(std::span<const double> values, double smoothing);

/// One-step forecasts mu_hat_{t-1}; NaN at t = 0.
std::vector<double> ewma_forecast(std::span<const double> values, double smoothing);

struct EwmaThresholdParams {
    double level = 2.0;
    std::size_t window = 10;
    double smoothing = 0.05;
};

/// S_k = number of i in [k - window, k] (clipped at 0) with R_i >= level.
std::vector<double> ewma_threshold_statistic(std::span<const double> values, const EwmaThresholdParams& params);

struct EwmaCusumParams {
    double delta = 3.0;
    double smoothing = 0.05;
};

/// CUSUM of the EWMA residuals with zeta = delta (R - delta / 2).
std::vector<double> ewma_cusum_statistic(std::span<const double> values, const EwmaCusumParams& params);

struct SsaModel {
    std::size_t window = 0;
    std::size_t rank = 0;
    /// window x rank, orthonormal columns, each with its largest-magnitude
    /// entry positive.
    Eigen::MatrixXd basis;
    /// All singular values of the trajectory matrix, descending.
    std::vector<double> singular_values;
    /// Set when the requested rank exceeded the numerical rank.
    bool rank_reduced = false;
};

struct SsaOptions {
    std::size_t window = 288;
    /// 0 picks the smallest rank reaching `mass` of the squared singular
    /// values, capped at max_rank.
    std::size_t rank = 0;
    double mass = 0.9;
    std::size_t max_rank = 10;
};

/// Hankel embedding of `history` with the given window, SVD, leading left
/// singular vectors. Throws TooShortError when the history is shorter than
/// 2 * window, DomainError for window < 2.
SsaModel ssa_fit(std::span<const double> history, const SsaOptions& options = {});

/// Share of squared singular mass in the leading `rank` values.
double captured_mass(const SsaModel& model, std::size_t rank);

/// Component of `v` (length window) orthogonal to the basis.
Eigen::VectorXd orthogonal_residual(const SsaModel& model, const Eigen::VectorXd& v);

struct PcaStatistic {
    /// P_t for t >= first_valid, NaN before.
    std::vector<double> values;
    std::size_t first_valid = 0;
};

/// P_t = norm of the orthogonal residual of the trailing window ending at t.
PcaStatistic pca_residual_statistic(const SsaModel& model, std::span<const double> series);

/// Diagonal-averaged reconstruction of `series` from its projection on the
/// basis. Throws TooShortError when the series is shorter than the window.
std::vector<double> ssa_reconstruct(const SsaModel& model, std::span<const double> series);

/// One-step forecasts by the linear recurrence of the basis applied to the
/// projected window of the `window` points before t; NaN for t < window.
/// Throws NumericalError when the basis spans the last coordinate (no
/// recurrence exists).
std::vector<double> ssa_forecast(const SsaModel& model, std::span<const double> series);

} // namespace lrdetect
