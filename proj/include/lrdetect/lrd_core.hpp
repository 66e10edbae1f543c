#pragma once

// Fractional Brownian motion / fractional Gaussian noise: covariances, exact
// simulation and detrended fluctuation analysis.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lrdetect {

/// Hurst exponent, always strictly inside (0, 1). 0.5 is the independent case.
class HurstExponent {
public:
    /// Throws DomainError unless 0 < value < 1.
    explicit HurstExponent(double value);

    double value() const noexcept { return value_; }

    friend bool operator==(HurstExponent, HurstExponent) = default;

private:
    double value_;
};

/// Unit-variance fGn increments together with the parameters that produced
/// them. Identical (length, hurst, seed) reproduce identical values.
struct FgnSample {
    std::vector<double> values;
    HurstExponent hurst{0.5};
    std::uint64_t seed = 0;
};

/// E[B_s B_t] = 0.5 (t^2H + s^2H - |t-s|^2H). Throws DomainError for s, t < 0.
double fbm_covariance(double s, double t, HurstExponent hurst);

/// Autocovariance of unit-spacing fGn at lag k:
/// 0.5 (|k+1|^2H - 2|k|^2H + |k-1|^2H).
double fgn_autocovariance(std::size_t lag, HurstExponent hurst);

/// Eigenvalues of the minimal power-of-two circulant embedding of the first
/// `n` fGn autocovariances. Size is 2N with N the smallest power of two >= n.
std::vector<double> circulant_eigenvalues(std::size_t n, HurstExponent hurst);

/// Exact fGn simulation by circulant embedding (Davies-Harte). If the
/// embedding has a negative eigenvalue the dense Cholesky sampler below is used
/// instead. Throws NumericalError if both fail.
FgnSample simulate_fgn(std::size_t n, HurstExponent hurst, std::uint64_t seed);

/// Exact fGn simulation via Cholesky factorization of the n x n Toeplitz
/// covariance. O(n^3); used as the fallback of simulate_fgn.
FgnSample simulate_fgn_cholesky(std::size_t n, HurstExponent hurst, std::uint64_t seed);

/// Prefix sums: a discrete fBm path with the implied B_0 = 0 dropped.
std::vector<double> cumulate_to_fbm(const FgnSample& sample);

/// Shortest series accepted by estimate_hurst_dfa.
inline constexpr std::size_t kMinDfaLength = 128;

/// Hurst exponent by first-order detrended fluctuation analysis.
///
/// The profile is the cumulative sum of the demeaned input. Box sizes form the
/// geometric grid round(8 * 2^(k/4)) up to n/4; each size splits the profile
/// into non-overlapping boxes from the start, removes a least-squares line per
/// box and takes the RMS of what is left. The estimate is the least-squares
/// slope of log F(size) against log size, clamped to [0.01, 0.99].
///
/// Throws TooShortError below kMinDfaLength points and DegenerateInputError
/// for constant input.
HurstExponent estimate_hurst_dfa(std::span<const double> values);

/// Box sizes used by estimate_hurst_dfa for a series of length n.
std::vector<std::size_t> dfa_box_sizes(std::size_t n);

} // namespace lrdetect
