#include "lrdetect/error.hpp"
#include "lrdetect/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lrdetect;

namespace {

PipelineConfig quick_config() {
    PipelineConfig c;
    c.train.epochs = 20;
    return c;
}

BaselineSettings small_grid() {
    BaselineSettings s;
    s.cusum_deltas = {1.0, 3.0};
    s.smoothings = {0.05, 0.3};
    s.threshold_levels = {2.0};
    s.threshold_windows = {5, 20};
    return s;
}

} // namespace

TEST(Pipeline, ResidualSeriesMatchesManualSteps) {
    const auto ds = generate_artificial(Profile::Hard, 1, 3);
    const auto& s = ds.paths[0].series;
    const auto r = residual_series(s, TrendOptions{});
    const auto manual = compute_residuals(s, extract_trend(s, TrendOptions{}));
    EXPECT_EQ(r.values, manual.values);
}

TEST(Pipeline, CalibratedBankMapsQuantileToOne) {
    const auto ds = generate_artificial(Profile::Hard, 6, 4);
    const auto residuals = dataset_residuals(ds, TrendOptions{});
    std::vector<std::vector<std::uint8_t>> labels;
    for (const auto& p : ds.paths) {
        labels.push_back(p.labels);
    }
    const auto bank = calibrate_bank(residuals, labels, DetectorParams{}, 1.0);
    ASSERT_EQ(bank.entries.size(), 5u);
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        const auto sig = bank.signals(residuals[i]);
        for (std::size_t k = 0; k < 5; ++k) {
            EXPECT_GT(bank.entries[k].threshold, 0.0);
            for (std::size_t t = 0; t < sig[k].size(); ++t) {
                if (!labels[i][t]) {
                    EXPECT_LE(sig[k][t], 1.0 + 1e-12);
                }
            }
        }
    }
}

TEST(Pipeline, TrainDetectAndPersist) {
    const auto train_set = generate_artificial(Profile::Hard, 8, 10);
    TrainingSummary summary;
    const auto pipeline = train_pipeline(train_set, quick_config(), &summary);
    EXPECT_EQ(summary.paths, 8u);
    EXPECT_EQ(summary.report.excluded_paths, 0u);
    EXPECT_LT(summary.report.loss_history.back(), summary.report.loss_history.front());

    const auto text = render_pipeline(pipeline);
    const auto back = parse_pipeline(KeyValueFile::parse(text, "model.txt"));
    EXPECT_EQ(render_pipeline(back), text);
    EXPECT_EQ(back.model.weights, pipeline.model.weights);
    EXPECT_EQ(back.bank.entries.size(), pipeline.bank.entries.size());
    for (std::size_t k = 0; k < back.bank.entries.size(); ++k) {
        EXPECT_EQ(back.bank.entries[k].threshold, pipeline.bank.entries[k].threshold);
        EXPECT_EQ(back.bank.entries[k].kind, pipeline.bank.entries[k].kind);
    }

    const auto test_set = generate_artificial(Profile::Hard, 2, 11);
    for (const auto& p : test_set.paths) {
        const auto a = detect_series(pipeline, p.series);
        const auto b = detect_series(back, p.series);
        EXPECT_EQ(a.trajectory.values, b.trajectory.values);
        EXPECT_EQ(a.segments, b.segments);
        EXPECT_EQ(a.trajectory.values.size(), p.series.size());
    }
}

TEST(Pipeline, ParseRejectsBrokenFiles) {
    const auto pipeline = train_pipeline(generate_artificial(Profile::Hard, 3, 12), quick_config());
    auto file = KeyValueFile::parse(render_pipeline(pipeline), "m");
    file.set("schema_version", 2);
    EXPECT_THROW(parse_pipeline(file), FormatError);
    file = KeyValueFile::parse(render_pipeline(pipeline), "m");
    file.set("kind", "dataset");
    EXPECT_THROW(parse_pipeline(file), FormatError);
    file = KeyValueFile::parse(render_pipeline(pipeline), "m");
    file.set("detectors.2.threshold", 0.0);
    EXPECT_THROW(parse_pipeline(file), FormatError);
    file = KeyValueFile::parse(render_pipeline(pipeline), "m");
    file.set("detectors.count", 4);
    EXPECT_THROW(parse_pipeline(file), FormatError);
    file = KeyValueFile::parse(render_pipeline(pipeline), "m");
    file.set("detectors.0.kind", "glr");
    EXPECT_THROW(parse_pipeline(file), DomainError);
}

TEST(Pipeline, TrendAccuracyReportsEveryMethod) {
    const auto ds = generate_artificial(Profile::Easy, 2, 13);
    const auto acc = compare_trend_accuracy(ds, TrendOptions{});
    ASSERT_EQ(acc.size(), kTrendMethods.size());
    for (std::size_t m = 0; m < acc.size(); ++m) {
        EXPECT_EQ(acc[m].method, kTrendMethods[m]);
        EXPECT_GT(acc[m].trend_rrmse, 0.0);
        EXPECT_GT(acc[m].forecast_rrmse, 0.0);
        EXPECT_TRUE(std::isfinite(acc[m].trend_relative_rmse));
        EXPECT_TRUE(std::isfinite(acc[m].forecast_relative_rmse));
    }
    auto no_history = ds;
    no_history.paths[1].history.reset();
    EXPECT_THROW(compare_trend_accuracy(no_history, TrendOptions{}), DomainError);
}

TEST(Pipeline, DetectionComparisonCoversAllMethods) {
    const auto train_set = generate_artificial(Profile::Hard, 6, 14);
    const auto test_set = generate_artificial(Profile::Hard, 4, 15);
    const auto pipeline = train_pipeline(train_set, quick_config());
    const auto settings = small_grid();
    const auto ewma = select_ewma_parameters(train_set, settings);
    EXPECT_TRUE(ewma.cusum.delta == 1.0 || ewma.cusum.delta == 3.0);
    EXPECT_EQ(ewma.threshold.level, 2.0);
    const auto curves = compare_detection(pipeline, ewma, test_set, dataset_residuals(test_set, pipeline.trend),
                                          settings);
    ASSERT_EQ(curves.size(), kDetectionMethods.size());
    for (std::size_t m = 0; m < curves.size(); ++m) {
        EXPECT_EQ(curves[m].method, kDetectionMethods[m]);
        EXPECT_EQ(curves[m].pr.size(), 101u);
        EXPECT_EQ(curves[m].arer.size(), 101u);
        EXPECT_GE(curves[m].pr_auc, 0.0);
        EXPECT_LE(curves[m].pr_auc, 1.0);
        EXPECT_GE(curves[m].arer_auc, 0.0);
        EXPECT_LE(curves[m].arer_auc, 1.0);
    }
    EXPECT_THROW(compare_detection(pipeline, ewma, test_set, {}, settings), LengthMismatchError);
}

TEST(Pipeline, DeterministicTraining) {
    const auto ds = generate_artificial(Profile::Hard, 4, 16);
    const auto a = render_pipeline(train_pipeline(ds, quick_config()));
    const auto b = render_pipeline(train_pipeline(ds, quick_config()));
    EXPECT_EQ(a, b);
}
