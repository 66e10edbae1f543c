#include "lrdetect/lrd_core.hpp"

#include "lrdetect/error.hpp"
#include "lrdetect/random.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

namespace lrdetect {

HurstExponent::HurstExponent(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
        throw DomainError("Hurst exponent must lie in (0, 1), got " + std::to_string(value));
    }
}

double fbm_covariance(double s, double t, HurstExponent hurst) {
    if (!(s >= 0.0 && t >= 0.0)) {
        throw DomainError("fbm_covariance requires non-negative times");
    }
    const double two_h = 2.0 * hurst.value();
    return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_autocovariance(std::size_t lag, HurstExponent hurst) {
    const double two_h = 2.0 * hurst.value();
    const double k = static_cast<double>(lag);
    if (lag == 0) {
        return 1.0;
    }
    return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

namespace {

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

} // namespace

std::vector<double> circulant_eigenvalues(std::size_t n, HurstExponent hurst) {
    if (n == 0) {
        throw DomainError("circulant embedding needs n >= 1");
    }
    const std::size_t half = next_power_of_two(n);
    const std::size_t m = 2 * half;
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= half; ++k) {
        row[k] = fgn_autocovariance(k, hurst);
    }
    for (std::size_t k = half + 1; k < m; ++k) {
        row[k] = row[m - k];
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, row);
    std::vector<double> eigenvalues(m);
    std::transform(spectrum.begin(), spectrum.end(), eigenvalues.begin(),
                   [](const std::complex<double>& z) { return z.real(); });
    return eigenvalues;
}

FgnSample simulate_fgn(std::size_t n, HurstExponent hurst, std::uint64_t seed) {
    if (n == 0) {
        throw DomainError("simulate_fgn needs n >= 1");
    }
    std::vector<double> eigenvalues = circulant_eigenvalues(n, hurst);
    const double largest = *std::max_element(eigenvalues.begin(), eigenvalues.end());
    const double tolerance = 1e-10 * largest;
    if (std::any_of(eigenvalues.begin(), eigenvalues.end(),
                    [&](double v) { return v < -tolerance; })) {
        return simulate_fgn_cholesky(n, hurst, seed);
    }

    const std::size_t m = eigenvalues.size();
    Rng rng(seed);
    std::vector<std::complex<double>> weights(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double scale = std::sqrt(std::max(eigenvalues[k], 0.0) / static_cast<double>(m));
        const double re = rng.normal();
        const double im = rng.normal();
        weights[k] = {scale * re, scale * im};
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> mixed;
    fft.fwd(mixed, weights);

    FgnSample sample{std::vector<double>(n), hurst, seed};
    for (std::size_t i = 0; i < n; ++i) {
        sample.values[i] = mixed[i].real();
    }
    return sample;
}

FgnSample simulate_fgn_cholesky(std::size_t n, HurstExponent hurst, std::uint64_t seed) {
    if (n == 0) {
        throw DomainError("simulate_fgn needs n >= 1");
    }
    std::vector<double> gamma(n);
    for (std::size_t k = 0; k < n; ++k) {
        gamma[k] = fgn_autocovariance(k, hurst);
    }
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd cov(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = 0; j < size; ++j) {
            cov(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("fGn covariance is not positive definite (n=" + std::to_string(n) + ")");
    }
    Rng rng(seed);
    Eigen::VectorXd z(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        z(i) = rng.normal();
    }
    const Eigen::VectorXd x = llt.matrixL() * z;
    return FgnSample{std::vector<double>(x.data(), x.data() + size), hurst, seed};
}

std::vector<double> cumulate_to_fbm(const FgnSample& sample) {
    std::vector<double> path(sample.values.size());
    std::partial_sum(sample.values.begin(), sample.values.end(), path.begin());
    return path;
}

std::vector<std::size_t> dfa_box_sizes(std::size_t n) {
    std::vector<std::size_t> sizes;
    const double largest = static_cast<double>(n) / 4.0;
    for (int k = 0;; ++k) {
        const double raw = 8.0 * std::exp2(k / 4.0);
        if (raw > largest + 1e-9) {
            break;
        }
        const auto size = static_cast<std::size_t>(std::lround(raw));
        if (sizes.empty() || sizes.back() != size) {
            sizes.push_back(size);
        }
    }
    return sizes;
}

namespace {

// Mean squared residual of a least-squares line through y[0..len) against 0..len-1.
double detrended_sum_of_squares(const double* y, std::size_t len) {
    const double n = static_cast<double>(len);
    const double x_mean = (n - 1.0) / 2.0;
    double y_mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        y_mean += y[i];
    }
    y_mean /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double dx = static_cast<double>(i) - x_mean;
        sxx += dx * dx;
        sxy += dx * (y[i] - y_mean);
    }
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double r = y[i] - y_mean - slope * (static_cast<double>(i) - x_mean);
        ss += r * r;
    }
    return ss;
}

} // namespace

HurstExponent estimate_hurst_dfa(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < kMinDfaLength) {
        throw TooShortError("DFA needs at least " + std::to_string(kMinDfaLength) +
                            " points, got " + std::to_string(n));
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*hi > *lo)) {
        throw DegenerateInputError("DFA input has zero variance");
    }

    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    std::vector<double> profile(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += values[i] - mean;
        profile[i] = running;
    }

    const std::vector<std::size_t> sizes = dfa_box_sizes(n);
    std::vector<double> log_size;
    std::vector<double> log_fluct;
    for (std::size_t size : sizes) {
        const std::size_t boxes = n / size;
        double ss = 0.0;
        for (std::size_t b = 0; b < boxes; ++b) {
            ss += detrended_sum_of_squares(profile.data() + b * size, size);
        }
        const double fluct = std::sqrt(ss / static_cast<double>(boxes * size));
        if (!(fluct > 0.0)) {
            throw DegenerateInputError("DFA fluctuation vanished at box size " + std::to_string(size));
        }
        log_size.push_back(std::log(static_cast<double>(size)));
        log_fluct.push_back(std::log(fluct));
    }

    const double m = static_cast<double>(log_size.size());
    const double x_mean = std::accumulate(log_size.begin(), log_size.end(), 0.0) / m;
    const double y_mean = std::accumulate(log_fluct.begin(), log_fluct.end(), 0.0) / m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < log_size.size(); ++i) {
        sxx += (log_size[i] - x_mean) * (log_size[i] - x_mean);
        sxy += (log_size[i] - x_mean) * (log_fluct[i] - y_mean);
    }
    const double slope = sxy / sxx;
    return HurstExponent(std::clamp(slope, 0.01, 0.99));
}

} // namespace lrdetect
