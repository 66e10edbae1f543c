#include "lrdetect/error.hpp"
#include "lrdetect/lrd_core.hpp"
#include "lrdetect/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace lrdetect;

namespace {

// Uncentered lag-k autocovariance; the process mean is known to be zero.
double autocov(const std::vector<double>& x, std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = lag; i < x.size(); ++i) {
        acc += x[i] * x[i - lag];
    }
    return acc / static_cast<double>(x.size() - lag);
}

} // namespace

TEST(Hurst, RejectsOutsideOpenInterval) {
    EXPECT_THROW(HurstExponent(0.0), DomainError);
    EXPECT_THROW(HurstExponent(1.0), DomainError);
    EXPECT_THROW(HurstExponent(-0.2), DomainError);
    EXPECT_THROW(HurstExponent(std::nan("")), DomainError);
    EXPECT_NO_THROW(HurstExponent(0.5));
}

TEST(FbmCovariance, Examples) {
    EXPECT_DOUBLE_EQ(fbm_covariance(3.5, 3.5, HurstExponent(0.5)), 3.5);
    for (double h : {0.1, 0.3, 0.7, 0.95}) {
        EXPECT_DOUBLE_EQ(fbm_covariance(1.0, 1.0, HurstExponent(h)), 1.0);
    }
    EXPECT_NEAR(fbm_covariance(1.0, 2.0, HurstExponent(0.8)), std::pow(2.0, 0.6), 1e-12);
    EXPECT_NEAR(fbm_covariance(1.0, 2.0, HurstExponent(0.8)), 1.515717, 1e-6);
    EXPECT_THROW(fbm_covariance(-1.0, 2.0, HurstExponent(0.8)), DomainError);
}

TEST(FbmCovariance, Symmetric) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double s = rng.uniform(0.0, 50.0);
        const double t = rng.uniform(0.0, 50.0);
        const HurstExponent h(rng.uniform(0.01, 0.99));
        EXPECT_EQ(fbm_covariance(s, t, h), fbm_covariance(t, s, h));
    }
}

TEST(FgnAutocovariance, Examples) {
    for (double h : {0.2, 0.5, 0.9}) {
        EXPECT_EQ(fgn_autocovariance(0, HurstExponent(h)), 1.0);
    }
    for (std::size_t k = 1; k < 20; ++k) {
        EXPECT_NEAR(fgn_autocovariance(k, HurstExponent(0.5)), 0.0, 1e-15);
    }
    EXPECT_NEAR(fgn_autocovariance(1, HurstExponent(0.95)), 0.5 * (std::pow(2.0, 1.9) - 2.0), 1e-12);
    EXPECT_NEAR(fgn_autocovariance(1, HurstExponent(0.95)), 0.866066, 1e-6);
}

TEST(FgnAutocovariance, DoubleSumIsFbmVariance) {
    for (int hi = 1; hi <= 9; ++hi) {
        const HurstExponent h(hi / 10.0);
        for (std::size_t n = 1; n <= 64; ++n) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    total += fgn_autocovariance(j > k ? j - k : k - j, h);
                }
            }
            const double expected = fbm_covariance(static_cast<double>(n), static_cast<double>(n), h);
            EXPECT_NEAR(total, expected, 1e-9 * expected) << "H=" << h.value() << " n=" << n;
        }
    }
}

TEST(SimulateFgn, DeterministicPerSeed) {
    const auto a = simulate_fgn(1000, HurstExponent(0.7), 11);
    const auto b = simulate_fgn(1000, HurstExponent(0.7), 11);
    const auto c = simulate_fgn(1000, HurstExponent(0.7), 12);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    EXPECT_EQ(a.values.size(), 1000u);
    EXPECT_EQ(a.seed, 11u);
    EXPECT_EQ(a.hurst, HurstExponent(0.7));
}

TEST(SimulateFgn, IndependentCaseMoments) {
    const auto s = simulate_fgn(4096, HurstExponent(0.5), 7);
    const double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / 4096.0;
    const double band = 4.0 / std::sqrt(4096.0);
    EXPECT_LT(std::abs(mean), band);
    EXPECT_LT(std::abs(autocov(s.values, 1) / autocov(s.values, 0)), band);
}

TEST(SimulateFgn, Lag1AutocovarianceMonteCarlo) {
    const HurstExponent h(0.8);
    std::vector<double> estimates;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        estimates.push_back(autocov(simulate_fgn(4096, h, derive_seed(7, seed)).values, 1));
    }
    const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / 100.0;
    double ss = 0.0;
    for (double e : estimates) {
        ss += (e - mean) * (e - mean);
    }
    const double se = std::sqrt(ss / 99.0) / 10.0;
    EXPECT_LT(std::abs(mean - fgn_autocovariance(1, h)), 3.0 * se);
}

TEST(SimulateFgn, CovarianceMatchesAtSmallN) {
    // Exactness check at a non power-of-two length for lags 0..8.
    const std::size_t n = 100;
    const int reps = 4000;
    for (double hv : {0.3, 0.9}) {
        const HurstExponent h(hv);
        for (std::size_t lag = 0; lag <= 8; ++lag) {
            double sum = 0.0;
            double sum_sq = 0.0;
            for (int r = 0; r < reps; ++r) {
                const auto x = simulate_fgn(n, h, derive_seed(100 + lag, static_cast<std::uint64_t>(r))).values;
                const double v = x[0] * x[lag];
                sum += v;
                sum_sq += v * v;
            }
            const double mean = sum / reps;
            const double se = std::sqrt((sum_sq / reps - mean * mean) / reps);
            EXPECT_LT(std::abs(mean - fgn_autocovariance(lag, h)), 3.5 * se) << "H=" << hv << " lag=" << lag;
        }
    }
}

TEST(SimulateFgn, CirculantEmbeddingNonNegative) {
    for (double hv : {0.05, 0.3, 0.5, 0.8, 0.95, 0.99}) {
        const auto ev = circulant_eigenvalues(2016, HurstExponent(hv));
        EXPECT_EQ(ev.size(), 4096u);
        for (double v : ev) {
            EXPECT_GT(v, -1e-9);
        }
    }
}

TEST(SimulateFgn, CholeskyAgreesInDistribution) {
    const HurstExponent h(0.8);
    double sum = 0.0;
    for (int r = 0; r < 2000; ++r) {
        const auto x = simulate_fgn_cholesky(16, h, static_cast<std::uint64_t>(r)).values;
        sum += x[0] * x[1];
    }
    EXPECT_NEAR(sum / 2000.0, fgn_autocovariance(1, h), 0.08);
    EXPECT_THROW(simulate_fgn(0, h, 1), DomainError);
}

TEST(CumulateToFbm, PrefixSums) {
    FgnSample s{{1.0, -1.0, 2.0}, HurstExponent(0.5), 0};
    EXPECT_EQ(cumulate_to_fbm(s), (std::vector<double>{1.0, 0.0, 2.0}));
    FgnSample z{std::vector<double>(5, 0.0), HurstExponent(0.5), 0};
    EXPECT_EQ(cumulate_to_fbm(z), std::vector<double>(5, 0.0));
}

TEST(CumulateToFbm, EndpointVarianceMatchesFbm) {
    const HurstExponent h(0.8);
    const std::size_t n = 256;
    double sum_sq = 0.0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        const double end = cumulate_to_fbm(simulate_fgn(n, h, derive_seed(5, static_cast<std::uint64_t>(r)))).back();
        sum_sq += end * end;
    }
    const double expected = fbm_covariance(256.0, 256.0, h);
    EXPECT_NEAR(expected, std::pow(256.0, 1.6), 1e-6 * expected);
    EXPECT_NEAR(sum_sq / reps, expected, 0.1 * expected);
}

TEST(Dfa, BoxSizes) {
    const auto sizes = dfa_box_sizes(128);
    EXPECT_EQ(sizes.front(), 8u);
    EXPECT_EQ(sizes.back(), 32u);
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        EXPECT_GT(sizes[i], sizes[i - 1]);
    }
}

TEST(Dfa, Errors) {
    EXPECT_THROW(estimate_hurst_dfa(std::vector<double>(127, 1.0)), TooShortError);
    EXPECT_THROW(estimate_hurst_dfa(std::vector<double>(500, 3.0)), DegenerateInputError);
}

TEST(Dfa, AffineInvariant) {
    const auto x = simulate_fgn(2000, HurstExponent(0.7), 9).values;
    std::vector<double> y(x.size());
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = 4.0 * x[i] + 10.0;
        z[i] = -0.5 * x[i] - 3.0;
    }
    const double h = estimate_hurst_dfa(x).value();
    EXPECT_NEAR(estimate_hurst_dfa(y).value(), h, 1e-12);
    EXPECT_NEAR(estimate_hurst_dfa(z).value(), h, 1e-12);
}

TEST(Dfa, MonteCarloCalibration) {
    int hits_half = 0;
    int hits_high = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double h_half = estimate_hurst_dfa(simulate_fgn(8192, HurstExponent(0.5), derive_seed(1, seed)).values).value();
        const double h_high = estimate_hurst_dfa(simulate_fgn(8192, HurstExponent(0.8), derive_seed(2, seed)).values).value();
        hits_half += (h_half >= 0.45 && h_half <= 0.55) ? 1 : 0;
        hits_high += (h_high >= 0.72 && h_high <= 0.88) ? 1 : 0;
    }
    EXPECT_GE(hits_half, 90);
    EXPECT_GE(hits_high, 90);
}
