#include "lrdetect/trend_filter.hpp"

#include "lrdetect/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <tuple>

namespace lrdetect {

FilterCoefficients compute_coefficients(HurstExponent hurst, int max_degree) {
    if (max_degree < 1 || max_degree > kMaxFilterDegree) {
        throw DomainError("filter degree must be in [1, " + std::to_string(kMaxFilterDegree) + "], got " +
                          std::to_string(max_degree));
    }
    const double h = hurst.value();
    FilterCoefficients c;
    c.hurst = hurst;
    c.lambda_h = 2.0 * h * std::exp(std::lgamma(3.0 - 2.0 * h) + std::lgamma(0.5 + h) - std::lgamma(1.5 - h));
    c.kappa_h = 2.0 * h * std::exp(std::lgamma(1.5 - h) + std::lgamma(0.5 + h));
    c.beta.assign(static_cast<std::size_t>(max_degree) + 1, 0.0);
    for (int i = 1; i <= max_degree; ++i) {
        const double di = i;
        const double log_ratio = std::lgamma(3.0 - 2.0 * h) - std::lgamma(2.0 - 2.0 * h + di) +
                                 std::lgamma(0.5 - h + di) - std::lgamma(1.5 - h);
        c.beta[static_cast<std::size_t>(i)] = di * (1.0 - 2.0 * h + di) / (2.0 - 2.0 * h) * std::exp(log_ratio);
    }
    c.alpha = Eigen::MatrixXd::Zero(max_degree + 1, max_degree + 1);
    for (int i = 1; i <= max_degree; ++i) {
        for (int j = 1; j <= max_degree; ++j) {
            c.alpha(i, j) = c.beta[static_cast<std::size_t>(i)] * c.beta[static_cast<std::size_t>(j)] *
                            (2.0 - 2.0 * h) / (c.lambda_h * (i + j - 2.0 * h));
        }
    }
    const bool finite = std::isfinite(c.lambda_h) && std::isfinite(c.kappa_h) && c.alpha.allFinite() &&
                        std::all_of(c.beta.begin(), c.beta.end(), [](double b) { return std::isfinite(b); });
    if (!finite) {
        throw NumericalError("filter coefficients overflow at H=" + std::to_string(h));
    }
    return c;
}

Eigen::MatrixXd analytic_normal_matrix(const FilterCoefficients& coeffs, double t) {
    const int d = coeffs.max_degree();
    const double h = coeffs.hurst.value();
    Eigen::MatrixXd r(d, d);
    for (int i = 1; i <= d; ++i) {
        for (int j = 1; j <= d; ++j) {
            r(i - 1, j - 1) = coeffs.alpha(i, j) * std::pow(t, i + j - 2.0 * h);
        }
    }
    return r;
}

std::vector<double> discretize_martingale(std::span<const double> values, std::span<const double> times,
                                          HurstExponent hurst) {
    if (values.size() != times.size()) {
        throw LengthMismatchError("window has " + std::to_string(values.size()) + " values and " +
                                  std::to_string(times.size()) + " times");
    }
    const std::size_t n = values.size();
    if (n < 5) {
        throw TooShortError("martingale discretization needs at least 5 points, got " + std::to_string(n));
    }
    const double a = 0.5 - hurst.value();
    const double inv_kappa = 1.0 / compute_coefficients(hurst, 1).kappa_h;
    std::vector<double> mid(n - 1);
    for (std::size_t m = 1; m < n; ++m) {
        if (!(times[m] > times[m - 1])) {
            throw DomainError("window times must be strictly increasing");
        }
        mid[m - 1] = 0.5 * (times[m] + times[m - 1]) - times[0];
    }
    std::vector<double> level(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double s = times[k] - times[0];
        double acc = 0.0;
        for (std::size_t m = 1; m <= k; ++m) {
            const double dx = values[m] - values[m - 1];
            acc += std::pow(mid[m - 1], a) * std::pow(s - mid[m - 1], a) * dx;
        }
        level[k] = inv_kappa * acc;
    }
    std::vector<double> increments(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
        increments[k - 1] = level[k] - level[k - 1];
    }
    return increments;
}

double DriftEstimate::evaluate(double t) const {
    const double s = t - origin;
    double acc = 0.0;
    for (std::size_t i = theta.size(); i-- > 0;) {
        acc = acc * s + theta[i];
    }
    return acc;
}

DriftEstimate DriftEstimate::reexpress(double new_origin) const {
    // sum_i theta_i (s + d)^i with s = t - new_origin, d = new_origin - origin.
    const double d = new_origin - origin;
    const std::size_t n = theta.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double binom = 1.0;
        for (std::size_t k = 0; k <= i; ++k) {
            out[k] += theta[i] * binom * std::pow(d, static_cast<double>(i - k));
            binom = binom * static_cast<double>(i - k) / static_cast<double>(k + 1);
        }
    }
    DriftEstimate moved = *this;
    moved.theta = std::move(out);
    moved.origin = new_origin;
    return moved;
}

namespace {

constexpr double kMaxCondition = 1e12;

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    if (!(smallest > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return sv(0) / smallest;
}

void check_analytic_conditioning(const FilterCoefficients& coeffs) {
    const double cond = condition_number(analytic_normal_matrix(coeffs, 1.0));
    if (!(cond <= kMaxCondition)) {
        throw SingularSystemError("R_H is numerically singular (cond " + std::to_string(cond) + ")");
    }
}

// Weights w (degree x n-1) with psi = w * diff(X), for the grid u[0..n) on
// [0, 1]. kernel(k, m) is the kernel of M(u_k) on increment m (1-based).
template <typename Kernel>
Eigen::MatrixXd psi_weights(std::span<const double> u, const FilterCoefficients& coeffs, Kernel kernel) {
    const std::size_t n = u.size();
    const int degree = coeffs.max_degree();
    // cell(i, k): mean of s^(i-1) over [u_{k-1}, u_k].
    Eigen::MatrixXd cell(degree, static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) {
        const double du = u[k] - u[k - 1];
        for (int i = 1; i <= degree; ++i) {
            cell(i - 1, static_cast<Eigen::Index>(k)) = (std::pow(u[k], i) - std::pow(u[k - 1], i)) / (i * du);
        }
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(degree, static_cast<Eigen::Index>(n - 1));
    for (std::size_t m = 1; m < n; ++m) {
        double previous = 0.0;
        for (std::size_t k = m; k < n; ++k) {
            const double current = kernel(k, m);
            const double dk = current - previous;
            previous = current;
            for (int i = 0; i < degree; ++i) {
                w(i, static_cast<Eigen::Index>(m - 1)) += cell(i, static_cast<Eigen::Index>(k)) * dk;
            }
        }
    }
    for (int i = 1; i <= degree; ++i) {
        w.row(i - 1) *= coeffs.beta[static_cast<std::size_t>(i)];
    }
    return w;
}

Eigen::MatrixXd solve_gain(std::span<const double> u, const FilterCoefficients& coeffs, const Eigen::MatrixXd& w) {
    const int degree = coeffs.max_degree();
    const std::size_t n = u.size();
    Eigen::MatrixXd powers_diff(static_cast<Eigen::Index>(n - 1), degree);
    for (std::size_t m = 1; m < n; ++m) {
        for (int j = 1; j <= degree; ++j) {
            powers_diff(static_cast<Eigen::Index>(m - 1), j - 1) = std::pow(u[m], j) - std::pow(u[m - 1], j);
        }
    }
    const Eigen::MatrixXd d = w * powers_diff;
    const double cond = condition_number(d);
    if (!(cond <= kMaxCondition)) {
        throw SingularSystemError("discrete normal matrix is numerically singular (cond " + std::to_string(cond) +
                                  ")");
    }
    return d.fullPivLu().solve(w);
}

Eigen::MatrixXd general_gain(std::span<const double> u, const FilterCoefficients& coeffs) {
    const double a = 0.5 - coeffs.hurst.value();
    const double inv_kappa = 1.0 / coeffs.kappa_h;
    const auto kernel = [&](std::size_t k, std::size_t m) {
        const double mid = 0.5 * (u[m] + u[m - 1]);
        return inv_kappa * std::pow(mid, a) * std::pow(u[k] - mid, a);
    };
    return solve_gain(u, coeffs, psi_weights(u, coeffs, kernel));
}

std::vector<double> unit_grid(std::size_t n) {
    std::vector<double> u(n);
    const double step = 1.0 / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        u[k] = static_cast<double>(k) * step;
    }
    u[n - 1] = 1.0;
    return u;
}

bool is_uniform(std::span<const double> times) {
    const double span = times.back() - times.front();
    const double step = span / static_cast<double>(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - times[k - 1] - step) > 1e-9 * span) {
            return false;
        }
    }
    return true;
}

} // namespace

UniformMlFilter::UniformMlFilter(std::size_t n, HurstExponent hurst, int degree)
    : n_(n), hurst_(hurst), degree_(degree) {
    if (n < kMinMlPoints) {
        throw TooShortError("ML filter needs at least " + std::to_string(kMinMlPoints) + " points, got " +
                            std::to_string(n));
    }
    const FilterCoefficients coeffs = compute_coefficients(hurst, degree);
    check_analytic_conditioning(coeffs);
    const std::vector<double> u = unit_grid(n);
    const double step = 1.0 / static_cast<double>(n - 1);
    const double a = 0.5 - hurst.value();
    // On an even grid mid_m = (m - 1/2) h and u_k - mid_m = (k - m + 1/2) h,
    // so the kernel factors into two tables of n - 1 powers each.
    std::vector<double> head(n);
    std::vector<double> tail(n);
    for (std::size_t m = 1; m < n; ++m) {
        head[m] = std::pow((static_cast<double>(m) - 0.5) * step, a) / coeffs.kappa_h;
        tail[m - 1] = std::pow((static_cast<double>(m - 1) + 0.5) * step, a);
    }
    const auto kernel = [&](std::size_t k, std::size_t m) { return head[m] * tail[k - m]; };
    gain_ = solve_gain(u, coeffs, psi_weights(u, coeffs, kernel));
}

Eigen::VectorXd UniformMlFilter::solve(std::span<const double> values) const {
    if (values.size() != n_) {
        throw LengthMismatchError("filter built for " + std::to_string(n_) + " points, got " +
                                  std::to_string(values.size()));
    }
    Eigen::VectorXd dx(static_cast<Eigen::Index>(n_ - 1));
    for (std::size_t k = 1; k < n_; ++k) {
        dx(static_cast<Eigen::Index>(k - 1)) = values[k] - values[k - 1];
    }
    return gain_ * dx;
}

DriftEstimate ml_estimate(std::span<const double> values, std::span<const double> times, HurstExponent hurst,
                          int degree) {
    if (values.size() != times.size()) {
        throw LengthMismatchError("window has " + std::to_string(values.size()) + " values and " +
                                  std::to_string(times.size()) + " times");
    }
    const std::size_t n = values.size();
    if (n < kMinMlPoints) {
        throw TooShortError("ML estimate needs at least " + std::to_string(kMinMlPoints) + " points, got " +
                            std::to_string(n));
    }
    for (std::size_t k = 1; k < n; ++k) {
        if (!(times[k] > times[k - 1])) {
            throw DomainError("window times must be strictly increasing");
        }
    }
    const double length = times.back() - times.front();

    Eigen::VectorXd unit_theta;
    if (is_uniform(times)) {
        unit_theta = UniformMlFilter(n, hurst, degree).solve(values);
    } else {
        const FilterCoefficients coeffs = compute_coefficients(hurst, degree);
        check_analytic_conditioning(coeffs);
        std::vector<double> u(n);
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = (times[k] - times.front()) / length;
        }
        Eigen::VectorXd dx(static_cast<Eigen::Index>(n - 1));
        for (std::size_t k = 1; k < n; ++k) {
            dx(static_cast<Eigen::Index>(k - 1)) = values[k] - values[k - 1];
        }
        unit_theta = general_gain(u, coeffs) * dx;
    }

    DriftEstimate estimate;
    estimate.theta.assign(static_cast<std::size_t>(degree) + 1, 0.0);
    estimate.theta[0] = values.front();
    for (int i = 1; i <= degree; ++i) {
        estimate.theta[static_cast<std::size_t>(i)] = unit_theta(i - 1) / std::pow(length, i);
    }
    estimate.origin = times.front();
    estimate.window_start = times.front();
    estimate.window_end = times.back();
    return estimate;
}

namespace {

constexpr int kWindowDegree = 4;

std::shared_ptr<const UniformMlFilter> cached_filter(std::size_t n, HurstExponent hurst) {
    thread_local std::map<std::pair<std::size_t, double>, std::shared_ptr<const UniformMlFilter>> cache;
    const auto key = std::make_pair(n, hurst.value());
    if (auto it = cache.find(key); it != cache.end()) {
        return it->second;
    }
    if (cache.size() >= 256) {
        cache.clear();
    }
    auto filter = std::make_shared<const UniformMlFilter>(n, hurst, kWindowDegree);
    cache.emplace(key, filter);
    return filter;
}

struct CumulativeFit {
    std::vector<double> fitted;
    double next = 0.0;
};

CumulativeFit fit_cumulated(std::span<const double> values, HurstExponent hurst) {
    const std::size_t w = values.size();
    std::vector<double> cumulated(w + 1, 0.0);
    std::partial_sum(values.begin(), values.end(), cumulated.begin() + 1);
    const auto filter = cached_filter(w + 1, hurst);
    const Eigen::VectorXd theta = filter->solve(cumulated);
    const auto level = [&](double u) {
        double acc = 0.0;
        for (Eigen::Index i = theta.size(); i-- > 0;) {
            acc = (acc + theta(i)) * u;
        }
        return acc;
    };
    CumulativeFit fit;
    fit.fitted.resize(w);
    const double step = 1.0 / static_cast<double>(w);
    double previous = 0.0;
    for (std::size_t k = 1; k <= w; ++k) {
        const double current = level(static_cast<double>(k) * step);
        fit.fitted[k - 1] = current - previous;
        previous = current;
    }
    fit.next = level(static_cast<double>(w + 1) * step) - previous;
    return fit;
}

double residual_scale(std::span<const double> values, const std::vector<double>& fitted,
                      std::vector<double>* residuals) {
    const std::size_t n = values.size();
    residuals->resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        (*residuals)[k] = values[k] - fitted[k];
    }
    const double mean = std::accumulate(residuals->begin(), residuals->end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double r : *residuals) {
        ss += (r - mean) * (r - mean);
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

} // namespace

WindowTrend fit_window(std::span<const double> values, HurstExponent h_init, bool correct_hurst) {
    CumulativeFit fit = fit_cumulated(values, h_init);
    std::vector<double> residuals;
    double sigma = residual_scale(values, fit.fitted, &residuals);
    HurstExponent hurst = h_init;
    if (correct_hurst && values.size() >= kMinDfaLength && sigma > 0.0) {
        for (double& r : residuals) {
            r /= sigma;
        }
        try {
            hurst = estimate_hurst_dfa(residuals);
        } catch (const DegenerateInputError&) {
            hurst = h_init;
        }
        if (!(hurst == h_init)) {
            fit = fit_cumulated(values, hurst);
            sigma = residual_scale(values, fit.fitted, &residuals);
        }
    }
    return WindowTrend{std::move(fit.fitted), fit.next, sigma, hurst};
}

namespace {

std::size_t checked_window(const TimeSeries& series, const TrendOptions& options) {
    series.validate();
    if (options.window + 1 < kMinMlPoints) {
        throw DomainError("trend window must be at least " + std::to_string(kMinMlPoints - 1) + " samples");
    }
    if (series.size() < options.window) {
        throw TooShortError("series of " + std::to_string(series.size()) + " points is shorter than the window of " +
                            std::to_string(options.window));
    }
    return options.window;
}

} // namespace

TrendEstimate extract_trend(const TimeSeries& series, const TrendOptions& options) {
    const std::size_t w = checked_window(series, options);
    const std::size_t n = series.size();
    const std::size_t stride = options.stride > 0 ? options.stride : std::max<std::size_t>(w / 4, 1);

    std::vector<std::size_t> starts;
    for (std::size_t a = 0; a + w <= n; a += stride) {
        starts.push_back(a);
    }
    if (starts.back() != n - w) {
        starts.push_back(n - w);
    }

    TrendEstimate trend;
    trend.window = w;
    trend.fitted.assign(n, 0.0);
    trend.window_counts.assign(n, 0);
    const std::span<const double> values(series.values);
    for (std::size_t a : starts) {
        WindowFit diag;
        diag.start = a;
        try {
            const WindowTrend fit = fit_window(values.subspan(a, w), options.h_init, options.correct_hurst);
            for (std::size_t k = 0; k < w; ++k) {
                trend.fitted[a + k] += fit.fitted[k];
                ++trend.window_counts[a + k];
            }
            diag.sigma_hat = fit.sigma_hat;
            diag.hurst_hat = fit.hurst_hat;
            diag.ok = true;
        } catch (const Error&) {
            ++trend.failed_windows;
        }
        trend.windows.push_back(diag);
    }
    for (std::size_t k = 0; k < n; ++k) {
        trend.fitted[k] = trend.window_counts[k] > 0 ? trend.fitted[k] / static_cast<double>(trend.window_counts[k])
                                                     : std::numeric_limits<double>::quiet_NaN();
    }
    return trend;
}

Forecast forecast_one_ahead(const TimeSeries& series, const TrendOptions& options) {
    const std::size_t w = checked_window(series, options);
    const std::size_t n = series.size();
    Forecast forecast;
    forecast.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    forecast.first_valid = w;
    const std::span<const double> values(series.values);
    for (std::size_t t = w; t < n; ++t) {
        try {
            forecast.values[t] = fit_window(values.subspan(t - w, w), options.h_init, options.correct_hurst).next;
        } catch (const Error&) {
            // leave the point without a forecast
        }
    }
    return forecast;
}

} // namespace lrdetect
