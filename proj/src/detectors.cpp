#include "lrdetect/detectors.hpp"

#include "lrdetect/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrdetect {

std::string to_string(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::Cusum:
        return "cusum";
    case DetectorKind::ShiryaevRoberts:
        return "shiryaev_roberts";
    case DetectorKind::Shewhart:
        return "shewhart";
    case DetectorKind::WindowChangepoint:
        return "window_changepoint";
    case DetectorKind::PosteriorProbability:
        return "posterior_probability";
    }
    return "unknown";
}

DetectorKind parse_detector_kind(const std::string& text) {
    for (DetectorKind kind : kAllDetectors) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw DomainError("unknown detector '" + text + "'");
}

double log_likelihood_ratio(double r, double delta) {
    return delta * (r - 0.5 * delta);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
    if (a == kNegInf) {
        return b;
    }
    if (b == kNegInf) {
        return a;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

double logistic(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

void require_kind(const DetectorState& state, DetectorKind kind) {
    if (state.kind != kind) {
        throw DomainError("detector state is " + to_string(state.kind) + ", expected " + to_string(kind));
    }
}

} // namespace

double DetectorState::value() const {
    switch (kind) {
    case DetectorKind::ShiryaevRoberts:
        return std::exp(log_state);
    case DetectorKind::PosteriorProbability:
        return logistic(log_state);
    default:
        return statistic;
    }
}

double DetectorState::signal() const {
    if (kind == DetectorKind::ShiryaevRoberts) {
        return log_add_exp(0.0, log_state);
    }
    return value();
}

DetectorState make_detector(DetectorKind kind, const DetectorParams& params) {
    if (!(params.delta > 0.0) || !std::isfinite(params.delta)) {
        throw DomainError("detector delta must be positive");
    }
    if (params.window == 0) {
        throw DomainError("window detector needs w >= 1");
    }
    if (!(params.prior > 0.0 && params.prior < 1.0)) {
        throw DomainError("posterior prior must lie in (0, 1)");
    }
    DetectorState state;
    state.kind = kind;
    state.params = params;
    if (kind == DetectorKind::ShiryaevRoberts || kind == DetectorKind::PosteriorProbability) {
        state.log_state = kNegInf;
    }
    if (kind == DetectorKind::WindowChangepoint) {
        state.ring.assign(2 * params.window, 0.0);
    }
    return state;
}

namespace {

void step_llr(DetectorState& s, double zeta) {
    switch (s.kind) {
    case DetectorKind::Cusum:
        s.statistic = std::max(0.0, s.statistic + zeta);
        break;
    case DetectorKind::ShiryaevRoberts:
        // log R_t = zeta + log(1 + R_{t-1}).
        s.log_state = zeta + log_add_exp(0.0, s.log_state);
        break;
    case DetectorKind::PosteriorProbability:
        // odds_t = L_t (odds_{t-1} + p) / (1 - p).
        s.log_state = zeta + log_add_exp(s.log_state, std::log(s.params.prior)) - std::log1p(-s.params.prior);
        break;
    default:
        throw DomainError(to_string(s.kind) + " is not driven by likelihood ratios");
    }
    ++s.steps;
}

void step_window(DetectorState& s, double r) {
    const std::size_t w = s.params.window;
    s.ring[s.ring_head] = r;
    s.ring_head = (s.ring_head + 1) % (2 * w);
    ++s.steps;
    if (s.steps < 2 * w) {
        s.statistic = 0.0;
        return;
    }
    // ring_head now points at the oldest residual.
    double older = 0.0;
    double recent = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        older += s.ring[(s.ring_head + i) % (2 * w)];
        recent += s.ring[(s.ring_head + w + i) % (2 * w)];
    }
    const double dw = static_cast<double>(w);
    s.statistic = std::abs(recent / dw - older / dw) * std::sqrt(dw / 2.0);
}

} // namespace

void advance(DetectorState& state, double r) {
    switch (state.kind) {
    case DetectorKind::Shewhart:
        state.statistic = std::abs(r);
        ++state.steps;
        break;
    case DetectorKind::WindowChangepoint:
        step_window(state, r);
        break;
    default:
        step_llr(state, log_likelihood_ratio(r, state.params.delta));
        break;
    }
}

DetectorState cusum_update(DetectorState state, double r) {
    require_kind(state, DetectorKind::Cusum);
    advance(state, r);
    return state;
}

DetectorState shiryaev_roberts_update(DetectorState state, double r) {
    require_kind(state, DetectorKind::ShiryaevRoberts);
    advance(state, r);
    return state;
}

DetectorState shewhart_update(DetectorState state, double r) {
    require_kind(state, DetectorKind::Shewhart);
    advance(state, r);
    return state;
}

DetectorState window_changepoint_update(DetectorState state, double r) {
    require_kind(state, DetectorKind::WindowChangepoint);
    advance(state, r);
    return state;
}

DetectorState posterior_probability_update(DetectorState state, double r) {
    require_kind(state, DetectorKind::PosteriorProbability);
    advance(state, r);
    return state;
}

DetectorState cusum_update_llr(DetectorState state, double zeta) {
    require_kind(state, DetectorKind::Cusum);
    step_llr(state, zeta);
    return state;
}

DetectorState shiryaev_roberts_update_llr(DetectorState state, double zeta) {
    require_kind(state, DetectorKind::ShiryaevRoberts);
    step_llr(state, zeta);
    return state;
}

DetectorState posterior_probability_update_llr(DetectorState state, double zeta) {
    require_kind(state, DetectorKind::PosteriorProbability);
    step_llr(state, zeta);
    return state;
}

std::vector<double> run_detector(DetectorKind kind, const DetectorParams& params, std::span<const double> residuals) {
    DetectorState state = make_detector(kind, params);
    std::vector<double> out;
    out.reserve(residuals.size());
    for (double r : residuals) {
        advance(state, r);
        out.push_back(state.signal());
    }
    return out;
}

SignalTrajectory normalize_signal(std::vector<double> raw, double reference_threshold) {
    if (!(reference_threshold > 0.0) || !std::isfinite(reference_threshold)) {
        throw DomainError("reference threshold must be positive and finite");
    }
    SignalTrajectory out;
    out.normalized.resize(raw.size());
    std::transform(raw.begin(), raw.end(), out.normalized.begin(),
                   [&](double s) { return s / reference_threshold; });
    out.raw = std::move(raw);
    out.reference_threshold = reference_threshold;
    return out;
}

double calibrate_reference_threshold(const std::vector<std::vector<double>>& statistics,
                                     const std::vector<std::vector<std::uint8_t>>& labels, double q) {
    if (!(q > 0.0 && q <= 1.0)) {
        throw DomainError("calibration quantile must lie in (0, 1]");
    }
    if (statistics.size() != labels.size()) {
        throw LengthMismatchError("statistics and labels cover different numbers of paths");
    }
    std::vector<double> pool;
    for (std::size_t i = 0; i < statistics.size(); ++i) {
        if (statistics[i].size() != labels[i].size()) {
            throw LengthMismatchError("path " + std::to_string(i) + ": statistic and labels differ in length");
        }
        for (std::size_t t = 0; t < labels[i].size(); ++t) {
            if (!labels[i][t]) {
                pool.push_back(statistics[i][t]);
            }
        }
    }
    if (pool.empty()) {
        throw DegenerateInputError("no normal-labeled points to calibrate on");
    }
    std::sort(pool.begin(), pool.end());
    const double pos = q * static_cast<double>(pool.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, pool.size() - 1);
    const double h = pool[lo] + (pos - static_cast<double>(lo)) * (pool[hi] - pool[lo]);
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw DegenerateInputError("calibrated threshold is " + std::to_string(h) + "; it must be positive");
    }
    return h;
}

DetectorBank DetectorBank::standard(const DetectorParams& params) {
    DetectorBank bank;
    bank.params = params;
    for (DetectorKind kind : kAllDetectors) {
        bank.entries.push_back({kind, 1.0});
    }
    return bank;
}

std::vector<std::vector<double>> DetectorBank::signals(std::span<const double> residuals) const {
    std::vector<std::vector<double>> out;
    out.reserve(entries.size());
    for (const auto& entry : entries) {
        auto raw = run_detector(entry.kind, params, residuals);
        for (double& s : raw) {
            s /= entry.threshold;
        }
        out.push_back(std::move(raw));
    }
    return out;
}

} // namespace lrdetect
