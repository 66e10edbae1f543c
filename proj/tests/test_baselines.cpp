#include "lrdetect/baselines.hpp"
#include "lrdetect/error.hpp"
#include "lrdetect/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lrdetect;

namespace {

std::vector<double> sine(std::size_t n, double period, double phase = 0.3) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = 2.0 * std::sin(2.0 * M_PI * static_cast<double>(k) / period + phase);
    }
    return x;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) {
        v = rng.normal();
    }
    return x;
}

SsaOptions ssa_options(std::size_t window, std::size_t rank) {
    SsaOptions o;
    o.window = window;
    o.rank = rank;
    return o;
}

} // namespace

TEST(Ewma, RecursionByHand) {
    const std::vector<double> x = {1.0, 3.0, 2.0, 5.0};
    const double a = 0.5;
    const auto fit = ewma_filter(x, a);
    // t = 0 seeds the mean; sigma is 0 at t = 1.
    EXPECT_EQ(fit.residuals[0], 0.0);
    EXPECT_EQ(fit.residuals[1], 0.0);
    EXPECT_EQ(fit.zero_scale_steps, 1u);
    double mean = 1.0;
    double var = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double dev = x[t] - mean;
        if (t >= 2) {
            EXPECT_NEAR(fit.residuals[t], dev / std::sqrt(var), 1e-15);
        }
        var = (1 - a) * var + a * dev * dev;
        mean = (1 - a) * mean + a * x[t];
        EXPECT_NEAR(fit.mean[t], mean, 1e-15);
    }
}

TEST(Ewma, ForecastIsPreviousMean) {
    const auto x = noise(50, 2);
    const auto fit = ewma_filter(x, 0.1);
    const auto f = ewma_forecast(x, 0.1);
    EXPECT_TRUE(std::isnan(f[0]));
    for (std::size_t t = 1; t < x.size(); ++t) {
        EXPECT_EQ(f[t], fit.mean[t - 1]);
    }
}

TEST(Ewma, ScaleEquivariantAndCausal) {
    const auto x = noise(300, 3);
    const auto base = ewma_filter(x, 0.05);
    for (double c : {-2.0, 0.5, 10.0}) {
        std::vector<double> y(x);
        for (auto& v : y) {
            v *= c;
        }
        const auto scaled = ewma_filter(y, 0.05);
        for (std::size_t t = 0; t < x.size(); ++t) {
            EXPECT_NEAR(scaled.mean[t], c * base.mean[t], 1e-12 * std::abs(c));
            EXPECT_NEAR(scaled.residuals[t], (c > 0 ? 1.0 : -1.0) * base.residuals[t], 1e-9);
        }
    }
    const auto part = ewma_filter(std::span<const double>(x).first(120), 0.05);
    for (std::size_t t = 0; t < 120; ++t) {
        EXPECT_EQ(part.residuals[t], base.residuals[t]);
    }
}

TEST(Ewma, RejectsBadSmoothing) {
    const std::vector<double> x = {1, 2};
    EXPECT_THROW(ewma_filter(x, 0.0), DomainError);
    EXPECT_THROW(ewma_filter(x, 1.0), DomainError);
}

TEST(EwmaThreshold, ConstantSeriesGivesZero) {
    const std::vector<double> x(100, 4.2);
    for (double v : ewma_threshold_statistic(x, {})) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(EwmaThreshold, InclusiveWindowCount) {
    // Alternating noise sets the scale; then a runaway ramp keeps every
    // residual far above the level.
    std::vector<double> x;
    for (int k = 0; k < 40; ++k) {
        x.push_back(k % 2 == 0 ? 0.1 : -0.1);
    }
    for (int k = 0; k < 30; ++k) {
        x.push_back(1000.0 * std::pow(2.0, k));
    }
    EwmaThresholdParams params;
    params.level = 2.0;
    params.window = 10;
    params.smoothing = 0.05;
    const auto s = ewma_threshold_statistic(x, params);
    const auto r = ewma_filter(x, 0.05).residuals;
    for (std::size_t k = 50; k < x.size(); ++k) {
        ASSERT_GE(r[k], 2.0);
        EXPECT_EQ(s[k], 11.0);
    }
    // Direct count for every k.
    for (std::size_t k = 0; k < x.size(); ++k) {
        double c = 0;
        for (std::size_t i = k >= 10 ? k - 10 : 0; i <= k; ++i) {
            c += r[i] >= 2.0 ? 1 : 0;
        }
        EXPECT_EQ(s[k], c);
    }
    params.window = 0;
    EXPECT_THROW(ewma_threshold_statistic(x, params), DomainError);
}

TEST(EwmaCusum, ZeroResidualsAndLinearGrowth) {
    const std::vector<double> flat(60, 1.0);
    for (double v : ewma_cusum_statistic(flat, {})) {
        EXPECT_EQ(v, 0.0);
    }
    // Same recursion as CUSUM on the EWMA residuals.
    const auto x = noise(200, 4);
    const auto r = ewma_filter(x, 0.1).residuals;
    EwmaCusumParams params;
    params.delta = 1.5;
    params.smoothing = 0.1;
    const auto s = ewma_cusum_statistic(x, params);
    double t_stat = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        t_stat = std::max(0.0, t_stat + 1.5 * (r[t] - 0.75));
        EXPECT_NEAR(s[t], t_stat, 1e-12);
    }
}

TEST(Ssa, SineIsRankTwo) {
    const auto x = sine(400, 24.0);
    const auto m = ssa_fit(x, ssa_options(48, 2));
    EXPECT_GE(captured_mass(m, 2), 0.99);
    EXPECT_EQ(m.rank, 2u);
}

TEST(Ssa, WhiteNoiseSpreadsMass) {
    const auto m = ssa_fit(noise(2000, 5), ssa_options(48, 2));
    EXPECT_LT(captured_mass(m, 2), 0.5);
}

TEST(Ssa, BasisOrthonormalAndSignNormalized) {
    const auto x = sine(1000, 288.0);
    auto y = noise(1000, 6);
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] = x[k] + 0.3 * y[k];
    }
    const auto m = ssa_fit(y, ssa_options(100, 4));
    const Eigen::MatrixXd gram = m.basis.transpose() * m.basis;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index c = 0; c < m.basis.cols(); ++c) {
        Eigen::Index at = 0;
        m.basis.col(c).cwiseAbs().maxCoeff(&at);
        EXPECT_GT(m.basis(at, c), 0.0);
    }
    const auto again = ssa_fit(y, ssa_options(100, 4));
    EXPECT_EQ(again.basis, m.basis);
}

TEST(Ssa, AutomaticRankUsesMassAndCap) {
    auto x = sine(1500, 288.0);
    const auto n = noise(1500, 7);
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] += 0.05 * n[k];
    }
    SsaOptions o;
    o.window = 100;
    const auto m = ssa_fit(x, o);
    EXPECT_EQ(m.rank, 2u);
    o.mass = 1.0;
    o.max_rank = 7;
    EXPECT_EQ(ssa_fit(x, o).rank, 7u);
}

TEST(Ssa, RankReducedOnDeficientHistory) {
    const auto x = sine(400, 24.0);
    const auto m = ssa_fit(x, ssa_options(48, 6));
    EXPECT_TRUE(m.rank_reduced);
    EXPECT_EQ(m.rank, 2u);
}

TEST(Ssa, Errors) {
    EXPECT_THROW(ssa_fit(noise(100, 1), ssa_options(60, 2)), TooShortError);
    EXPECT_THROW(ssa_fit(noise(100, 1), ssa_options(1, 0)), DomainError);
    EXPECT_THROW(ssa_fit(noise(100, 1), ssa_options(10, 10)), DomainError);
    EXPECT_THROW(ssa_fit(std::vector<double>(100, 0.0), ssa_options(10, 2)), DegenerateInputError);
}

TEST(Ssa, ProjectorIdempotent) {
    const auto m = ssa_fit(noise(600, 8), ssa_options(50, 5));
    const Eigen::MatrixXd p = m.basis * m.basis.transpose();
    EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(50, -1.0, 2.0);
    const Eigen::VectorXd r1 = orthogonal_residual(m, v);
    const Eigen::VectorXd r2 = orthogonal_residual(m, r1);
    EXPECT_LT((r1 - r2).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_THROW(orthogonal_residual(m, Eigen::VectorXd::Zero(3)), LengthMismatchError);
}

TEST(PcaStatistic, SpanSeriesIsAnnihilated) {
    const auto x = sine(600, 24.0);
    const auto m = ssa_fit(x, ssa_options(48, 2));
    const auto p = pca_residual_statistic(m, sine(300, 24.0, 1.1));
    EXPECT_EQ(p.first_valid, 47u);
    for (std::size_t t = 0; t < 47; ++t) {
        EXPECT_TRUE(std::isnan(p.values[t]));
    }
    for (std::size_t t = 47; t < 300; ++t) {
        EXPECT_LT(p.values[t], 1e-8);
    }
}

TEST(PcaStatistic, SpikeAppearsWithItsOrthogonalPart) {
    const auto m = ssa_fit(sine(600, 24.0), ssa_options(48, 2));
    auto x = sine(200, 24.0);
    const double c = 3.0;
    x[120] += c;
    const auto p = pca_residual_statistic(m, x);
    for (std::size_t t = 120; t < 120 + 48; ++t) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(48);
        e(static_cast<Eigen::Index>(120 + 47 - t)) = c;
        EXPECT_NEAR(p.values[t], orthogonal_residual(m, e).norm(), 1e-8);
        EXPECT_GT(p.values[t], 0.0);
    }
    EXPECT_LT(p.values[119], 1e-8);
}

TEST(PcaStatistic, InvariantToSpanShift) {
    const auto m = ssa_fit(noise(800, 9), ssa_options(40, 3));
    const auto x = noise(40, 10);
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), 40);
    const Eigen::VectorXd shift = m.basis * Eigen::Vector3d(1.0, -2.0, 0.5);
    EXPECT_NEAR(orthogonal_residual(m, v).norm(), orthogonal_residual(m, v + shift).norm(), 1e-10);
}

TEST(SsaReconstruct, RecoversSpanSeriesExactly) {
    const auto x = sine(500, 24.0);
    const auto m = ssa_fit(x, ssa_options(48, 2));
    const auto r = ssa_reconstruct(m, x);
    for (std::size_t k = 0; k < x.size(); ++k) {
        EXPECT_NEAR(r[k], x[k], 1e-9);
    }
    EXPECT_THROW(ssa_reconstruct(m, std::vector<double>(10, 0.0)), TooShortError);
}

TEST(SsaReconstruct, MatchesHandRolledDiagonalAverage) {
    const auto x = noise(60, 11);
    const auto m = ssa_fit(x, ssa_options(10, 9));
    const auto r = ssa_reconstruct(m, x);
    std::vector<double> sum(60, 0.0), count(60, 0.0);
    for (std::size_t j = 0; j + 10 <= 60; ++j) {
        Eigen::VectorXd v(10);
        for (std::size_t i = 0; i < 10; ++i) {
            v(static_cast<Eigen::Index>(i)) = x[i + j];
        }
        const Eigen::VectorXd proj = v - orthogonal_residual(m, v);
        for (std::size_t i = 0; i < 10; ++i) {
            sum[i + j] += proj(static_cast<Eigen::Index>(i));
            count[i + j] += 1.0;
        }
    }
    for (std::size_t k = 0; k < 60; ++k) {
        EXPECT_NEAR(r[k], sum[k] / count[k], 1e-12);
    }
}

TEST(SsaForecast, ContinuesSpanSeries) {
    const auto x = sine(500, 24.0);
    const auto m = ssa_fit(x, ssa_options(48, 2));
    const auto f = ssa_forecast(m, x);
    for (std::size_t t = 0; t < 48; ++t) {
        EXPECT_TRUE(std::isnan(f[t]));
    }
    for (std::size_t t = 48; t < x.size(); ++t) {
        EXPECT_NEAR(f[t], x[t], 1e-8);
    }
}

TEST(SsaForecast, Causal) {
    const auto x = noise(400, 12);
    const auto m = ssa_fit(x, ssa_options(30, 4));
    const auto full = ssa_forecast(m, x);
    auto altered = x;
    altered[200] += 50.0;
    const auto other = ssa_forecast(m, altered);
    for (std::size_t t = 30; t <= 200; ++t) {
        EXPECT_EQ(full[t], other[t]);
    }
    EXPECT_NE(full[201], other[201]);
}
