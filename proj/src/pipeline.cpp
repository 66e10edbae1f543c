#include "lrdetect/pipeline.hpp"

#include "lrdetect/error.hpp"

#include <cmath>
#include <limits>

namespace lrdetect {

TimeSeries residual_series(const TimeSeries& series, const TrendOptions& options) {
    return compute_residuals(series, extract_trend(series, options));
}

std::vector<std::vector<double>> dataset_residuals(const LabeledDataset& dataset, const TrendOptions& options) {
    std::vector<std::vector<double>> out;
    out.reserve(dataset.paths.size());
    for (const auto& path : dataset.paths) {
        out.push_back(residual_series(path.series, options).values);
    }
    return out;
}

DetectorBank calibrate_bank(const std::vector<std::vector<double>>& residuals,
                            const std::vector<std::vector<std::uint8_t>>& labels, const DetectorParams& params,
                            double quantile) {
    DetectorBank bank = DetectorBank::standard(params);
    for (auto& entry : bank.entries) {
        std::vector<std::vector<double>> stats;
        stats.reserve(residuals.size());
        for (const auto& r : residuals) {
            stats.push_back(run_detector(entry.kind, params, r));
        }
        entry.threshold = calibrate_reference_threshold(stats, labels, quantile);
    }
    return bank;
}

namespace {

std::vector<std::vector<std::uint8_t>> dataset_labels(const LabeledDataset& dataset) {
    std::vector<std::vector<std::uint8_t>> labels;
    for (const auto& p : dataset.paths) {
        labels.push_back(p.labels);
    }
    return labels;
}

} // namespace

TrainedPipeline train_pipeline_on_residuals(const std::vector<std::vector<double>>& residuals,
                                            const std::vector<std::vector<std::uint8_t>>& labels,
                                            const PipelineConfig& config, TrainingSummary* summary) {
    if (residuals.empty()) {
        throw DomainError("training needs at least one path");
    }
    TrainedPipeline pipeline;
    pipeline.trend = config.trend;
    pipeline.bank = calibrate_bank(residuals, labels, config.detector, config.calibration_quantile);
    std::vector<TrainingPath> paths;
    paths.reserve(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        paths.push_back({pipeline.bank.signals(residuals[i]), labels[i]});
    }
    TrainReport report;
    pipeline.model = train(paths, config.train, &report);
    if (summary) {
        summary->report = std::move(report);
        summary->paths = paths.size();
    }
    return pipeline;
}

TrainedPipeline train_pipeline(const LabeledDataset& dataset, const PipelineConfig& config,
                               TrainingSummary* summary) {
    return train_pipeline_on_residuals(dataset_residuals(dataset, config.trend), dataset_labels(dataset), config,
                                       summary);
}

Detection detect_series(const TrainedPipeline& pipeline, const TimeSeries& series) {
    const auto residuals = residual_series(series, pipeline.trend);
    return detect(pipeline.model, pipeline.bank.signals(residuals.values));
}

std::string render_pipeline(const TrainedPipeline& pipeline) {
    KeyValueFile file;
    file.set("schema_version", 1);
    file.set("kind", "model");
    file.set("trend.window", static_cast<std::uint64_t>(pipeline.trend.window));
    file.set("trend.stride", static_cast<std::uint64_t>(pipeline.trend.stride));
    file.set("trend.h_init", pipeline.trend.h_init.value());
    file.set("trend.correct_hurst", pipeline.trend.correct_hurst ? 1 : 0);
    file.set("detectors.delta", pipeline.bank.params.delta);
    file.set("detectors.window", static_cast<std::uint64_t>(pipeline.bank.params.window));
    file.set("detectors.prior", pipeline.bank.params.prior);
    file.set("detectors.count", static_cast<std::uint64_t>(pipeline.bank.entries.size()));
    for (std::size_t k = 0; k < pipeline.bank.entries.size(); ++k) {
        const std::string prefix = "detectors." + std::to_string(k);
        file.set(prefix + ".kind", to_string(pipeline.bank.entries[k].kind));
        file.set(prefix + ".threshold", pipeline.bank.entries[k].threshold);
    }
    write_model(file, pipeline.model);
    return file.render();
}

TrainedPipeline parse_pipeline(const KeyValueFile& file) {
    if (file.at("kind") != "model") {
        throw FormatError("not a model file (kind=" + file.at("kind") + ")");
    }
    if (file.at("schema_version") != "1") {
        throw FormatError("unsupported model schema_version " + file.at("schema_version"));
    }
    TrainedPipeline p;
    p.trend.window = parse_u64(file.at("trend.window"), "trend.window");
    p.trend.stride = parse_u64(file.at("trend.stride"), "trend.stride");
    p.trend.h_init = HurstExponent(parse_double(file.at("trend.h_init"), "trend.h_init"));
    p.trend.correct_hurst = file.at("trend.correct_hurst") == "1";
    p.bank.params.delta = parse_double(file.at("detectors.delta"), "detectors.delta");
    p.bank.params.window = parse_u64(file.at("detectors.window"), "detectors.window");
    p.bank.params.prior = parse_double(file.at("detectors.prior"), "detectors.prior");
    const std::size_t count = parse_u64(file.at("detectors.count"), "detectors.count");
    for (std::size_t k = 0; k < count; ++k) {
        const std::string prefix = "detectors." + std::to_string(k);
        BankEntry entry;
        entry.kind = parse_detector_kind(file.at(prefix + ".kind"));
        entry.threshold = parse_double(file.at(prefix + ".threshold"), prefix + ".threshold");
        if (!(entry.threshold > 0.0)) {
            throw FormatError(prefix + ".threshold must be positive");
        }
        p.bank.entries.push_back(entry);
    }
    p.model = read_model(file);
    if (p.model.detectors() != p.bank.entries.size()) {
        throw FormatError("model has " + std::to_string(p.model.detectors()) + " weight rows for " +
                          std::to_string(count) + " detectors");
    }
    return p;
}

namespace {

struct Pool {
    std::vector<double> actual;
    std::vector<double> predicted;

    void add(const std::vector<double>& a, const std::vector<double>& p) {
        actual.insert(actual.end(), a.begin(), a.end());
        predicted.insert(predicted.end(), p.begin(), p.end());
    }
};

double relative_rmse(const Pool& pool) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < pool.actual.size(); ++k) {
        if (std::isnan(pool.predicted[k])) {
            continue;
        }
        num += (pool.actual[k] - pool.predicted[k]) * (pool.actual[k] - pool.predicted[k]);
        den += pool.actual[k] * pool.actual[k];
    }
    return std::sqrt(num / den);
}

std::vector<double> tail(const std::vector<double>& v, std::size_t n) {
    return std::vector<double>(v.end() - static_cast<std::ptrdiff_t>(n), v.end());
}

} // namespace

std::vector<TrendAccuracy> compare_trend_accuracy(const LabeledDataset& dataset, const TrendOptions& trend,
                                                  const BaselineSettings& settings) {
    std::vector<Pool> trend_pool(kTrendMethods.size());
    std::vector<Pool> forecast_pool(kTrendMethods.size());
    for (const auto& path : dataset.paths) {
        if (path.true_trend.size() != path.series.size()) {
            throw DomainError("trend accuracy needs the true trend of every path");
        }
        if (!path.history) {
            throw DomainError("PCA-Pretraining needs a history for every path");
        }
        const auto& x = path.series.values;
        const std::size_t n = x.size();

        const auto ewma = ewma_filter(x, settings.ewma_smoothing);
        trend_pool[0].add(path.true_trend, ewma.mean);
        forecast_pool[0].add(x, ewma_forecast(x, settings.ewma_smoothing));

        const SsaModel own = ssa_fit(x, settings.ssa);
        trend_pool[1].add(path.true_trend, ssa_reconstruct(own, x));
        forecast_pool[1].add(x, ssa_forecast(own, x));

        std::vector<double> joined = path.history->values;
        joined.insert(joined.end(), x.begin(), x.end());
        const SsaModel pre = ssa_fit(joined, settings.ssa);
        trend_pool[2].add(path.true_trend, tail(ssa_reconstruct(pre, joined), n));
        forecast_pool[2].add(x, tail(ssa_forecast(pre, joined), n));

        trend_pool[3].add(path.true_trend, extract_trend(path.series, trend).fitted);
        forecast_pool[3].add(x, forecast_one_ahead(path.series, trend).values);
    }
    std::vector<TrendAccuracy> out;
    for (std::size_t m = 0; m < kTrendMethods.size(); ++m) {
        TrendAccuracy acc;
        acc.method = kTrendMethods[m];
        const auto tr = rrmse(trend_pool[m].actual, trend_pool[m].predicted);
        const auto fc = rrmse(forecast_pool[m].actual, forecast_pool[m].predicted);
        acc.trend_rrmse = tr.value;
        acc.forecast_rrmse = fc.value;
        acc.excluded_zero = tr.excluded_zero + fc.excluded_zero;
        acc.trend_relative_rmse = relative_rmse(trend_pool[m]);
        acc.forecast_relative_rmse = relative_rmse(forecast_pool[m]);
        out.push_back(acc);
    }
    return out;
}

namespace {

std::vector<ScoredPath> scored(const LabeledDataset& dataset, const std::vector<std::vector<double>>& stats) {
    std::vector<ScoredPath> out;
    for (std::size_t i = 0; i < dataset.paths.size(); ++i) {
        out.push_back({stats[i], dataset.paths[i].labels});
    }
    return out;
}

double range_pr_auc(const std::vector<ScoredPath>& paths) {
    return pr_auc(pr_curve(paths, range_threshold_grid(paths)));
}

std::string format_params(std::initializer_list<std::pair<const char*, double>> items) {
    std::string out;
    for (const auto& [k, v] : items) {
        if (!out.empty()) {
            out += ';';
        }
        out += k;
        out += '=';
        out += format_double(v);
    }
    return out;
}

MethodCurves curves(std::string method, std::string parameters, const std::vector<ScoredPath>& paths,
                    const std::vector<double>& grid, double c_inf, double c_zero) {
    MethodCurves m;
    m.method = std::move(method);
    m.parameters = std::move(parameters);
    m.pr = pr_curve(paths, grid);
    m.arer = arer_curve(paths, grid, c_inf, c_zero);
    m.pr_auc = pr_auc(m.pr);
    m.arer_auc = arer_auc(m.arer, c_inf, c_zero);
    return m;
}

} // namespace

EwmaChoice select_ewma_parameters(const LabeledDataset& train, const BaselineSettings& settings) {
    EwmaChoice choice;
    double best_cusum = -1.0;
    double best_threshold = -1.0;
    for (double a : settings.smoothings) {
        std::vector<std::vector<double>> residuals;
        for (const auto& p : train.paths) {
            residuals.push_back(ewma_filter(p.series.values, a).residuals);
        }
        for (double delta : settings.cusum_deltas) {
            DetectorParams dp;
            dp.delta = delta;
            std::vector<std::vector<double>> stats;
            for (const auto& r : residuals) {
                stats.push_back(run_detector(DetectorKind::Cusum, dp, r));
            }
            const double auc = range_pr_auc(scored(train, stats));
            if (auc > best_cusum) {
                best_cusum = auc;
                choice.cusum = {delta, a};
            }
        }
        for (double level : settings.threshold_levels) {
            for (std::size_t window : settings.threshold_windows) {
                const EwmaThresholdParams params{level, window, a};
                std::vector<std::vector<double>> stats;
                for (const auto& p : train.paths) {
                    stats.push_back(ewma_threshold_statistic(p.series.values, params));
                }
                const double auc = range_pr_auc(scored(train, stats));
                if (auc > best_threshold) {
                    best_threshold = auc;
                    choice.threshold = EwmaThresholdParams{level, window, a};
                }
            }
        }
    }
    return choice;
}

std::vector<MethodCurves> compare_detection(const TrainedPipeline& pipeline, const EwmaChoice& ewma,
                                            const LabeledDataset& test,
                                            const std::vector<std::vector<double>>& test_residuals,
                                            const BaselineSettings& settings) {
    if (test_residuals.size() != test.paths.size()) {
        throw LengthMismatchError("residuals do not match the test paths");
    }
    const double c_inf = pipeline.model.c_inf;
    const double c_zero = pipeline.model.c_zero;
    std::vector<MethodCurves> out;

    std::vector<std::vector<double>> ours;
    std::vector<std::vector<double>> cusum;
    for (const auto& r : test_residuals) {
        ours.push_back(detect(pipeline.model, pipeline.bank.signals(r)).trajectory.values);
        cusum.push_back(run_detector(DetectorKind::Cusum, pipeline.bank.params, r));
    }
    out.push_back(curves("Ours", "lags=" + std::to_string(pipeline.model.lags), scored(test, ours),
                         unit_threshold_grid(), c_inf, c_zero));
    const auto cusum_paths = scored(test, cusum);
    out.push_back(curves("CUSUM", format_params({{"delta", pipeline.bank.params.delta}}), cusum_paths,
                         range_threshold_grid(cusum_paths), c_inf, c_zero));

    std::vector<std::vector<double>> ec;
    std::vector<std::vector<double>> et;
    std::vector<std::vector<double>> pca;
    std::vector<std::vector<double>> pca_pre;
    for (const auto& p : test.paths) {
        const auto& x = p.series.values;
        ec.push_back(ewma_cusum_statistic(x, ewma.cusum));
        et.push_back(ewma_threshold_statistic(x, ewma.threshold));
        pca.push_back(pca_residual_statistic(ssa_fit(x, settings.ssa), x).values);
        if (p.history) {
            pca_pre.push_back(pca_residual_statistic(ssa_fit(p.history->values, settings.ssa), x).values);
        }
    }
    const auto ec_paths = scored(test, ec);
    out.push_back(curves("EWMA-CUSUM",
                         format_params({{"delta", ewma.cusum.delta}, {"smoothing", ewma.cusum.smoothing}}), ec_paths,
                         range_threshold_grid(ec_paths), c_inf, c_zero));
    const auto et_paths = scored(test, et);
    out.push_back(curves("EWMA-Threshold",
                         format_params({{"level", ewma.threshold.level},
                                        {"window", static_cast<double>(ewma.threshold.window)},
                                        {"smoothing", ewma.threshold.smoothing}}),
                         et_paths, range_threshold_grid(et_paths), c_inf, c_zero));
    const auto pca_paths = scored(test, pca);
    out.push_back(curves("PCA", format_params({{"window", static_cast<double>(settings.ssa.window)}}), pca_paths,
                         range_threshold_grid(pca_paths), c_inf, c_zero));
    if (pca_pre.size() == test.paths.size()) {
        const auto pre_paths = scored(test, pca_pre);
        out.push_back(curves("PCA-Pretraining", format_params({{"window", static_cast<double>(settings.ssa.window)}}),
                             pre_paths, range_threshold_grid(pre_paths), c_inf, c_zero));
    }
    return out;
}

} // namespace lrdetect
