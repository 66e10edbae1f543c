#pragma once

// Maximum-likelihood estimation of a polynomial drift observed in fBm noise,
// and the sliding-window trend extractor built on it.

#include "lrdetect/lrd_core.hpp"
#include "lrdetect/time_series.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace lrdetect {

inline constexpr int kMaxFilterDegree = 6;

/// Constants of the ML filter for one Hurst exponent.
///
/// beta and alpha are indexed from 0 so that beta[i] and alpha(i, j) carry
/// their natural indices; the i = 0 entries are zero.
struct FilterCoefficients {
    HurstExponent hurst{0.5};
    double lambda_h = 1.0;
    double kappa_h = 1.0;
    std::vector<double> beta;
    Eigen::MatrixXd alpha;

    int max_degree() const noexcept { return static_cast<int>(beta.size()) - 1; }
};

/// lambda_H = 2H G(3-2H) G(1/2+H) / G(3/2-H), kappa_H = 2H G(3/2-H) G(1/2+H),
/// beta_H(i) and alpha_H(i, j) = beta(i) beta(j) (2-2H) / (lambda_H (i+j-2H))
/// for 1 <= i, j <= max_degree, all through lgamma.
/// Throws DomainError for max_degree outside [1, 6] and NumericalError if a
/// coefficient is not finite.
FilterCoefficients compute_coefficients(HurstExponent hurst, int max_degree);

/// R_H(t)_{ij} = alpha(i, j) t^(i+j-2H), 1 <= i, j <= max_degree.
Eigen::MatrixXd analytic_normal_matrix(const FilterCoefficients& coeffs, double t);

/// Increments of M^H_t = kappa^-1 int_0^t s^(1/2-H) (t-s)^(1/2-H) dX_s on the
/// window grid, with time shifted so the window starts at 0. Element k-1 is
/// M(t_k) - M(t_{k-1}). The kernel is evaluated at the midpoint of each
/// subinterval. Throws TooShortError below 5 points.
std::vector<double> discretize_martingale(std::span<const double> values, std::span<const double> times,
                                          HurstExponent hurst);

/// Polynomial sum_i theta[i] (t - origin)^i fitted on [window_start, window_end].
struct DriftEstimate {
    std::vector<double> theta;
    double origin = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;

    double evaluate(double t) const;

    /// The same polynomial expanded about another origin.
    DriftEstimate reexpress(double new_origin) const;
};

inline constexpr std::size_t kMinMlPoints = 12;

/// ML estimate of theta_1..theta_degree with theta_0 anchored to the first
/// observation and time measured from the first timestamp.
///
/// Time is rescaled to [0, 1] internally. psi_i uses the exact average of
/// s^(i-1) over each subinterval, and theta solves against
/// D_ij = psi_i[s^j], the discrete counterpart of R_H; D converges to R_H as
/// the grid refines and makes noiseless polynomials exactly recoverable.
///
/// Throws TooShortError below kMinMlPoints, LengthMismatchError, DomainError
/// for non-increasing times, SingularSystemError when R_H(1) or D has
/// condition number above 1e12.
DriftEstimate ml_estimate(std::span<const double> values, std::span<const double> times, HurstExponent hurst,
                          int degree = 3);

/// Precomputed ML weights for an evenly spaced grid of n points on [0, 1].
/// theta_1..theta_degree = gain() * diff(values).
class UniformMlFilter {
public:
    UniformMlFilter(std::size_t n, HurstExponent hurst, int degree);

    std::size_t points() const noexcept { return n_; }
    HurstExponent hurst() const noexcept { return hurst_; }
    int degree() const noexcept { return degree_; }
    const Eigen::MatrixXd& gain() const noexcept { return gain_; }

    /// Coefficients theta_1..theta_degree in unit time, values.size() == n.
    Eigen::VectorXd solve(std::span<const double> values) const;

private:
    std::size_t n_;
    HurstExponent hurst_;
    int degree_;
    Eigen::MatrixXd gain_;
};

struct TrendOptions {
    std::size_t window = 96;
    /// 0 means window / 4.
    std::size_t stride = 0;
    HurstExponent h_init{0.5};
    /// Re-estimate H per window from standardized residuals and refit.
    bool correct_hurst = true;
};

struct WindowFit {
    std::size_t start = 0;
    double sigma_hat = 0.0;
    HurstExponent hurst_hat{0.5};
    bool ok = false;
};

struct TrendEstimate {
    std::vector<double> fitted;
    std::vector<std::size_t> window_counts;
    std::vector<WindowFit> windows;
    std::size_t window = 0;
    std::size_t failed_windows = 0;
};

/// Fit of one window of observations: cumulative sums are fitted with
/// powers 1..4 and differenced back, which yields a cubic trend in the
/// observations themselves while the noise of the cumulated window is fBm.
struct WindowTrend {
    std::vector<double> fitted;
    /// Trend one step past the window.
    double next = 0.0;
    double sigma_hat = 0.0;
    HurstExponent hurst_hat{0.5};
};

/// Steps on one window: fit with h_init, residual scale, DFA Hurst estimate
/// of the standardized residuals (kept at h_init below kMinDfaLength points or
/// when DFA refuses), refit with the estimate and recompute the scale.
WindowTrend fit_window(std::span<const double> values, HurstExponent h_init, bool correct_hurst = true);

/// Sliding-window trend. Windows start every stride samples and the last one
/// is aligned with the series end; each point gets the mean of the fits of
/// the windows covering it. Windows that throw are skipped and counted.
/// Throws TooShortError when the series is shorter than the window.
TrendEstimate extract_trend(const TimeSeries& series, const TrendOptions& options = {});

struct Forecast {
    /// NaN where no forecast exists.
    std::vector<double> values;
    std::size_t first_valid = 0;
};

/// Causal one-step forecasts: the value at t comes from the window of the
/// `window` points before t, extrapolated one step. The first `window` points
/// carry none.
Forecast forecast_one_ahead(const TimeSeries& series, const TrendOptions& options = {});

} // namespace lrdetect
