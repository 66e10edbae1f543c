#include "lrdetect/baselines.hpp"

#include "lrdetect/detectors.hpp"
#include "lrdetect/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lrdetect {

namespace {

void check_smoothing(double smoothing) {
    if (!(smoothing > 0.0 && smoothing < 1.0)) {
        throw DomainError("EWMA smoothing factor must lie in (0, 1)");
    }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

double ewma_update(EwmaState& state, double x, bool* zero_scale) {
    if (zero_scale) {
        *zero_scale = false;
    }
    if (state.steps++ == 0) {
        state.mean = x;
        state.variance = 0.0;
        return 0.0;
    }
    const double deviation = x - state.mean;
    const double sd = std::sqrt(state.variance);
    double residual = 0.0;
    if (sd > 0.0) {
        residual = deviation / sd;
    } else if (zero_scale) {
        *zero_scale = true;
    }
    const double a = state.smoothing;
    state.variance = (1.0 - a) * state.variance + a * deviation * deviation;
    state.mean = (1.0 - a) * state.mean + a * x;
    return residual;
}

EwmaResult ewma_filter(std::span<const double> values, double smoothing) {
    check_smoothing(smoothing);
    EwmaState state;
    state.smoothing = smoothing;
    EwmaResult out;
    out.mean.reserve(values.size());
    out.residuals.reserve(values.size());
    for (double x : values) {
        bool zero = false;
        out.residuals.push_back(ewma_update(state, x, &zero));
        out.zero_scale_steps += zero ? 1 : 0;
        out.mean.push_back(state.mean);
    }
    return out;
}

std::vector<double> ewma_forecast(std::span<const double> values, double smoothing) {
    const auto fit = ewma_filter(values, smoothing);
    std::vector<double> out(values.size(), kNaN);
    for (std::size_t t = 1; t < values.size(); ++t) {
        out[t] = fit.mean[t - 1];
    }
    return out;
}

std::vector<double> ewma_threshold_statistic(std::span<const double> values, const EwmaThresholdParams& params) {
    if (params.window < 1) {
        throw DomainError("EWMA-Threshold window must be at least 1");
    }
    const auto fit = ewma_filter(values, params.smoothing);
    std::vector<double> out(values.size());
    std::size_t count = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        count += fit.residuals[k] >= params.level ? 1 : 0;
        if (k > params.window) {
            count -= fit.residuals[k - params.window - 1] >= params.level ? 1 : 0;
        }
        out[k] = static_cast<double>(count);
    }
    return out;
}

std::vector<double> ewma_cusum_statistic(std::span<const double> values, const EwmaCusumParams& params) {
    const auto fit = ewma_filter(values, params.smoothing);
    DetectorParams dp;
    dp.delta = params.delta;
    return run_detector(DetectorKind::Cusum, dp, fit.residuals);
}

namespace {

Eigen::MatrixXd trajectory_matrix(std::span<const double> x, std::size_t window) {
    const std::size_t columns = x.size() - window + 1;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(columns));
    for (std::size_t j = 0; j < columns; ++j) {
        for (std::size_t i = 0; i < window; ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[i + j];
        }
    }
    return m;
}

} // namespace

SsaModel ssa_fit(std::span<const double> history, const SsaOptions& options) {
    const std::size_t window = options.window;
    if (window < 2) {
        throw DomainError("SSA window must be at least 2");
    }
    if (history.size() < 2 * window) {
        throw TooShortError("SSA needs at least " + std::to_string(2 * window) + " points, got " +
                            std::to_string(history.size()));
    }
    if (options.rank >= window) {
        throw DomainError("SSA rank must be smaller than the window");
    }
    if (!(options.mass > 0.0 && options.mass <= 1.0) || options.max_rank == 0) {
        throw DomainError("SSA mass must lie in (0, 1] and max_rank must be positive");
    }
    const Eigen::MatrixXd traj = trajectory_matrix(history, window);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(traj, Eigen::ComputeThinU);
    const Eigen::VectorXd sv = svd.singularValues();

    SsaModel model;
    model.window = window;
    model.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double total = sv.squaredNorm();
    if (!(total > 0.0)) {
        throw DegenerateInputError("SSA history is identically zero");
    }

    std::size_t rank = options.rank;
    if (rank == 0) {
        const std::size_t cap = std::min(options.max_rank, window - 1);
        double acc = 0.0;
        rank = cap;
        for (std::size_t r = 0; r < cap; ++r) {
            acc += sv(static_cast<Eigen::Index>(r)) * sv(static_cast<Eigen::Index>(r));
            if (acc >= options.mass * total) {
                rank = r + 1;
                break;
            }
        }
    }
    std::size_t numerical = 0;
    while (numerical < static_cast<std::size_t>(sv.size()) &&
           sv(static_cast<Eigen::Index>(numerical)) > 1e-12 * sv(0)) {
        ++numerical;
    }
    if (rank > numerical) {
        rank = numerical;
        model.rank_reduced = true;
    }
    model.rank = rank;
    model.basis = svd.matrixU().leftCols(static_cast<Eigen::Index>(rank));
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c) {
        Eigen::Index at = 0;
        model.basis.col(c).cwiseAbs().maxCoeff(&at);
        if (model.basis(at, c) < 0.0) {
            model.basis.col(c) *= -1.0;
        }
    }
    return model;
}

double captured_mass(const SsaModel& model, std::size_t rank) {
    double total = 0.0;
    double head = 0.0;
    for (std::size_t i = 0; i < model.singular_values.size(); ++i) {
        const double s2 = model.singular_values[i] * model.singular_values[i];
        total += s2;
        head += i < rank ? s2 : 0.0;
    }
    return head / total;
}

Eigen::VectorXd orthogonal_residual(const SsaModel& model, const Eigen::VectorXd& v) {
    if (v.size() != static_cast<Eigen::Index>(model.window)) {
        throw LengthMismatchError("vector length differs from the SSA window");
    }
    return v - model.basis * (model.basis.transpose() * v);
}

PcaStatistic pca_residual_statistic(const SsaModel& model, std::span<const double> series) {
    const std::size_t window = model.window;
    PcaStatistic out;
    out.values.assign(series.size(), kNaN);
    out.first_valid = window - 1;
    Eigen::VectorXd v(static_cast<Eigen::Index>(window));
    for (std::size_t t = window - 1; t < series.size(); ++t) {
        for (std::size_t i = 0; i < window; ++i) {
            v(static_cast<Eigen::Index>(i)) = series[t + 1 - window + i];
        }
        out.values[t] = orthogonal_residual(model, v).norm();
    }
    return out;
}

std::vector<double> ssa_reconstruct(const SsaModel& model, std::span<const double> series) {
    const std::size_t window = model.window;
    if (series.size() < window) {
        throw TooShortError("series is shorter than the SSA window");
    }
    const Eigen::MatrixXd traj = trajectory_matrix(series, window);
    const Eigen::MatrixXd projected = model.basis * (model.basis.transpose() * traj);
    std::vector<double> sum(series.size(), 0.0);
    std::vector<double> count(series.size(), 0.0);
    for (Eigen::Index j = 0; j < projected.cols(); ++j) {
        for (Eigen::Index i = 0; i < projected.rows(); ++i) {
            sum[static_cast<std::size_t>(i + j)] += projected(i, j);
            count[static_cast<std::size_t>(i + j)] += 1.0;
        }
    }
    for (std::size_t k = 0; k < sum.size(); ++k) {
        sum[k] /= count[k];
    }
    return sum;
}

std::vector<double> ssa_forecast(const SsaModel& model, std::span<const double> series) {
    const std::size_t window = model.window;
    const auto last = static_cast<Eigen::Index>(window - 1);
    const Eigen::VectorXd pi = model.basis.row(last).transpose();
    const double nu2 = pi.squaredNorm();
    if (!(nu2 < 1.0 - 1e-12)) {
        throw NumericalError("SSA basis admits no linear recurrence (verticality coefficient 1)");
    }
    // x_L = sum_{j < L-1} coeff_j x_j for vectors in the span.
    const Eigen::VectorXd coeff = model.basis.topRows(last) * pi / (1.0 - nu2);

    std::vector<double> out(series.size(), kNaN);
    Eigen::VectorXd v(static_cast<Eigen::Index>(window));
    for (std::size_t t = window; t < series.size(); ++t) {
        for (std::size_t i = 0; i < window; ++i) {
            v(static_cast<Eigen::Index>(i)) = series[t - window + i];
        }
        const Eigen::VectorXd projected = model.basis * (model.basis.transpose() * v);
        // The next value continues the projected window: its last L-1 entries
        // feed the recurrence.
        out[t] = coeff.dot(projected.tail(last));
    }
    return out;
}

} // namespace lrdetect
