#include "lrdetect/ensemble.hpp"

#include "lrdetect/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lrdetect {

EnsembleModel EnsembleModel::zeros(std::size_t detectors, std::size_t lags) {
    if (detectors == 0) {
        throw DomainError("ensemble needs at least one detector");
    }
    EnsembleModel model;
    model.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(detectors), static_cast<Eigen::Index>(lags + 1));
    model.lags = lags;
    return model;
}

void EnsembleModel::validate() const {
    if (!(h_a > 0.0 && h_a < 1.0)) {
        throw DomainError("ensemble threshold h_A must lie in (0, 1)");
    }
    if (!(c_inf > 0.0) || !(c_zero > 0.0)) {
        throw DomainError("error costs must be positive");
    }
    if (weights.cols() != static_cast<Eigen::Index>(lags + 1) || weights.rows() == 0) {
        throw DomainError("weight matrix must be detectors x (lags + 1)");
    }
    if (!weights.allFinite() || !std::isfinite(bias)) {
        throw DomainError("ensemble parameters must be finite");
    }
}

namespace {

double logistic(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// sigma(x) (1 - sigma(x)) without cancellation.
double logistic_slope(double x) {
    const double e = std::exp(-std::abs(x));
    return e / ((1.0 + e) * (1.0 + e));
}

constexpr double kLowest = std::numeric_limits<double>::min();
constexpr double kHighest = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

void check_signals(const EnsembleModel& model, const std::vector<std::vector<double>>& signals) {
    if (signals.size() != model.detectors()) {
        throw LengthMismatchError("model expects " + std::to_string(model.detectors()) + " signals, got " +
                                  std::to_string(signals.size()));
    }
    for (const auto& s : signals) {
        if (s.size() != signals.front().size()) {
            throw LengthMismatchError("detector signals differ in length");
        }
    }
}

// z_t = sum_{k,j} w(k, j) s^k_{t-j} - bias.
std::vector<double> linear_scores(const EnsembleModel& model, const std::vector<std::vector<double>>& signals) {
    const std::size_t length = signals.front().size();
    std::vector<double> z(length, -model.bias);
    for (std::size_t k = 0; k < signals.size(); ++k) {
        const auto& s = signals[k];
        for (std::size_t j = 0; j <= model.lags; ++j) {
            const double w = model.weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
            if (w == 0.0) {
                continue;
            }
            for (std::size_t t = j; t < length; ++t) {
                z[t] += w * s[t - j];
            }
        }
    }
    return z;
}

double bounded(double a) {
    return std::min(std::max(a, kLowest), kHighest);
}

struct PathWeights {
    double normal = 0.0;
    double abnormal = 0.0;
};

// c_inf / T_inf and c_0 / T_0 for a path, or nullopt when it must be left out.
std::optional<PathWeights> path_weights(const EnsembleModel& model, const TrainingPath& path) {
    std::size_t abnormal = 0;
    for (auto y : path.labels) {
        abnormal += y ? 1 : 0;
    }
    const std::size_t normal = path.labels.size() - abnormal;
    if (normal == 0 || abnormal == 0) {
        return std::nullopt;
    }
    return PathWeights{model.c_inf / static_cast<double>(normal), model.c_zero / static_cast<double>(abnormal)};
}

void check_path(const EnsembleModel& model, const TrainingPath& path) {
    check_signals(model, path.signals);
    if (path.signals.front().size() != path.labels.size()) {
        throw LengthMismatchError("signals and labels differ in length");
    }
}

} // namespace

AggregatedTrajectory aggregate(const EnsembleModel& model, const std::vector<std::vector<double>>& signals) {
    model.validate();
    check_signals(model, signals);
    AggregatedTrajectory out;
    const auto z = linear_scores(model, signals);
    out.values.resize(z.size());
    for (std::size_t t = 0; t < z.size(); ++t) {
        out.values[t] = bounded(logistic(z[t]));
        if (!out.stopping_index && out.values[t] >= model.h_a) {
            out.stopping_index = t;
        }
    }
    return out;
}

Detection detect(const EnsembleModel& model, const std::vector<std::vector<double>>& signals) {
    Detection d;
    d.trajectory = aggregate(model, signals);
    d.segments = segments_from_statistic(d.trajectory.values, model.h_a);
    return d;
}

ArerEvaluation arer_exact(const EnsembleModel& model, const std::vector<TrainingPath>& paths) {
    ArerEvaluation out;
    double total = 0.0;
    std::size_t used = 0;
    for (const auto& path : paths) {
        check_path(model, path);
        const auto pw = path_weights(model, path);
        if (!pw) {
            ++out.excluded_paths;
            continue;
        }
        const auto a = aggregate(model, path.signals).values;
        double term = 0.0;
        for (std::size_t t = 0; t < a.size(); ++t) {
            if (path.labels[t]) {
                term += a[t] < model.h_a ? pw->abnormal : 0.0;
            } else {
                term += a[t] >= model.h_a ? pw->normal : 0.0;
            }
        }
        total += term;
        ++used;
    }
    if (used == 0) {
        throw DegenerateInputError("no path has both normal and abnormal points");
    }
    out.value = total / static_cast<double>(used);
    return out;
}

SurrogateGradient arer_surrogate_gradient(const EnsembleModel& model, const std::vector<TrainingPath>& paths,
                                          double sharpness) {
    model.validate();
    if (!(sharpness > 0.0)) {
        throw DomainError("surrogate sharpness must be positive");
    }
    SurrogateGradient out;
    out.d_weights = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
    double total = 0.0;
    std::size_t used = 0;
    for (const auto& path : paths) {
        check_path(model, path);
        const auto pw = path_weights(model, path);
        if (!pw) {
            ++out.loss.excluded_paths;
            continue;
        }
        const auto z = linear_scores(model, path.signals);
        const std::size_t length = z.size();
        // dL/dz_t for this path.
        std::vector<double> dz(length);
        for (std::size_t t = 0; t < length; ++t) {
            const double a = bounded(logistic(z[t]));
            const double da = logistic_slope(z[t]);
            const double x = sharpness * (a - model.h_a);
            if (path.labels[t]) {
                total += pw->abnormal * logistic(-x);
                dz[t] = -pw->abnormal * sharpness * logistic_slope(x) * da;
            } else {
                total += pw->normal * logistic(x);
                dz[t] = pw->normal * sharpness * logistic_slope(x) * da;
            }
        }
        for (std::size_t k = 0; k < path.signals.size(); ++k) {
            const auto& s = path.signals[k];
            for (std::size_t j = 0; j <= model.lags; ++j) {
                double g = 0.0;
                for (std::size_t t = j; t < length; ++t) {
                    g += dz[t] * s[t - j];
                }
                out.d_weights(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) += g;
            }
        }
        for (double d : dz) {
            out.d_bias -= d;
        }
        ++used;
    }
    if (used == 0) {
        throw DegenerateInputError("no path has both normal and abnormal points");
    }
    const double scale = 1.0 / static_cast<double>(used);
    out.loss.value = total * scale;
    out.d_weights *= scale;
    out.d_bias *= scale;
    return out;
}

ArerEvaluation arer_surrogate(const EnsembleModel& model, const std::vector<TrainingPath>& paths, double sharpness) {
    return arer_surrogate_gradient(model, paths, sharpness).loss;
}

EnsembleModel train(const std::vector<TrainingPath>& paths, const TrainOptions& options, TrainReport* report) {
    if (paths.empty() || paths.front().signals.empty()) {
        throw DomainError("training needs at least one path with at least one signal");
    }
    EnsembleModel model = EnsembleModel::zeros(paths.front().signals.size(), options.lags);
    model.h_a = options.h_a;
    model.c_inf = options.c_inf;
    model.c_zero = options.c_zero;
    model.validate();

    TrainReport local;
    TrainReport& rep = report ? *report : local;
    rep = TrainReport{};

    auto current = arer_surrogate_gradient(model, paths, options.sharpness);
    rep.excluded_paths = current.loss.excluded_paths;
    if (!std::isfinite(current.loss.value)) {
        throw NumericalError("initial surrogate loss is not finite");
    }
    rep.loss_history.push_back(current.loss.value);
    double step = options.initial_step;
    constexpr double kArmijo = 1e-4;
    constexpr double kMinStep = 1e-14;

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        const double grad_sq = current.d_weights.squaredNorm() + current.d_bias * current.d_bias;
        if (!(grad_sq > 0.0)) {
            break;
        }
        bool accepted = false;
        while (step >= kMinStep) {
            EnsembleModel candidate = model;
            candidate.weights -= step * current.d_weights;
            candidate.bias -= step * current.d_bias;
            auto next = arer_surrogate_gradient(candidate, paths, options.sharpness);
            if (!std::isfinite(next.loss.value)) {
                throw NumericalError("surrogate loss became non-finite at epoch " + std::to_string(epoch));
            }
            if (next.loss.value <= current.loss.value - kArmijo * step * grad_sq) {
                model = std::move(candidate);
                current = std::move(next);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        rep.loss_history.push_back(current.loss.value);
        ++rep.epochs_run;
        step *= 2.0;
    }
    return model;
}

void write_model(KeyValueFile& file, const EnsembleModel& model) {
    model.validate();
    file.set("ensemble.detectors", static_cast<std::uint64_t>(model.detectors()));
    file.set("ensemble.lags", static_cast<std::uint64_t>(model.lags));
    file.set("ensemble.h_a", model.h_a);
    file.set("ensemble.c_inf", model.c_inf);
    file.set("ensemble.c_zero", model.c_zero);
    file.set("ensemble.bias", model.bias);
    std::string weights;
    for (Eigen::Index k = 0; k < model.weights.rows(); ++k) {
        for (Eigen::Index j = 0; j < model.weights.cols(); ++j) {
            if (!weights.empty()) {
                weights += ',';
            }
            weights += format_double(model.weights(k, j));
        }
    }
    file.set("ensemble.weights", weights);
}

EnsembleModel read_model(const KeyValueFile& file) {
    const std::size_t n = parse_u64(file.at("ensemble.detectors"), "ensemble.detectors");
    const std::size_t p = parse_u64(file.at("ensemble.lags"), "ensemble.lags");
    EnsembleModel model = EnsembleModel::zeros(n, p);
    model.h_a = parse_double(file.at("ensemble.h_a"), "ensemble.h_a");
    model.c_inf = parse_double(file.at("ensemble.c_inf"), "ensemble.c_inf");
    model.c_zero = parse_double(file.at("ensemble.c_zero"), "ensemble.c_zero");
    model.bias = parse_double(file.at("ensemble.bias"), "ensemble.bias");
    std::istringstream in(file.at("ensemble.weights"));
    std::string item;
    std::size_t count = 0;
    while (std::getline(in, item, ',')) {
        if (count >= n * (p + 1)) {
            throw FormatError("ensemble.weights has more than " + std::to_string(n * (p + 1)) + " entries");
        }
        model.weights(static_cast<Eigen::Index>(count / (p + 1)), static_cast<Eigen::Index>(count % (p + 1))) =
            parse_double(item, "ensemble.weights");
        ++count;
    }
    if (count != n * (p + 1)) {
        throw FormatError("ensemble.weights has " + std::to_string(count) + " entries, expected " +
                          std::to_string(n * (p + 1)));
    }
    model.validate();
    return model;
}

} // namespace lrdetect
