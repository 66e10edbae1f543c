#include "lrdetect/cli.hpp"
#include "lrdetect/io.hpp"
#include "lrdetect/lrd_core.hpp"
#include "lrdetect/pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>

using namespace lrdetect;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("lrdetect_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string at(const std::string& name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        out_ = out.str();
        err_ = err.str();
        return code;
    }

    std::map<std::string, std::string> snapshot(const std::string& name) const {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::directory_iterator(dir_ / name)) {
            files[e.path().filename().string()] = read_file(e.path());
        }
        return files;
    }

    fs::path dir_;
    std::string out_;
    std::string err_;
};

std::size_t lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_F(CliTest, SimulateWritesDatasetAndRerunIsIdentical) {
    ASSERT_EQ(run({"simulate", "--profile", "hard", "--count", "10", "--seed", "42", "--out", at("d")}), 0) << err_;
    const auto first = snapshot("d");
    // 10 paths, 10 histories, dataset manifest, run manifest.
    EXPECT_EQ(first.size(), 22u);
    EXPECT_TRUE(first.count("path_0009.csv"));
    EXPECT_EQ(first.at("path_0000.csv").substr(0, 14), "t,value,label\n");
    ASSERT_EQ(run({"simulate", "--profile", "hard", "--count", "10", "--seed", "42", "--out", at("d")}), 0);
    EXPECT_EQ(snapshot("d"), first);
    const auto dataset = read_dataset(at("d"));
    EXPECT_EQ(dataset.paths.size(), 10u);
    EXPECT_EQ(dataset.seed, 42u);
    EXPECT_EQ(dataset.profile, Profile::Hard);
}

TEST_F(CliTest, CountZeroIsUsageError) {
    EXPECT_EQ(run({"simulate", "--count", "0", "--out", at("d")}), kExitUsage);
    EXPECT_EQ(lines(err_), 1u);
    EXPECT_EQ(err_.rfind("lrdetect: error code=usage message=", 0), 0u);
    EXPECT_FALSE(fs::exists(at("d")));
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}), kExitUsage);
    EXPECT_EQ(run({"frobnicate"}), kExitUsage);
    EXPECT_EQ(run({"simulate", "--out", at("d"), "--hurst", "1"}), kExitUsage);
    EXPECT_EQ(run({"simulate", "--out", at("d"), "--length", "100"}), kExitUsage);
    EXPECT_EQ(run({"train", "--out", at("m")}), kExitUsage);
    EXPECT_EQ(run({"detect", "--out", at("x"), "--model", at("missing.txt"), "--input", at("missing.csv")}),
              kExitUsage);
    EXPECT_EQ(lines(err_), 1u);
    EXPECT_EQ(run({"--help"}), kExitOk);
    EXPECT_NE(out_.find("simulate"), std::string::npos);
}

TEST_F(CliTest, ConfigFileWithFlagsWinning) {
    write_file_atomic(at("cfg.txt"), "# run settings\n[simulate]\ncount=3\nseed=9\nprofile=hard\nno-history=true\n");
    ASSERT_EQ(run({"simulate", "--config", at("cfg.txt"), "--count", "2", "--out", at("d")}), 0) << err_;
    const auto manifest = KeyValueFile::load(at("d") + "/run_manifest.txt");
    EXPECT_EQ(manifest.at("simulate.count"), "2");
    EXPECT_EQ(manifest.at("simulate.seed"), "9");
    EXPECT_EQ(manifest.at("simulate.profile"), "hard");
    EXPECT_EQ(manifest.at("simulate.no-history"), "true");
    EXPECT_FALSE(fs::exists(at("d") + "/history_0000.csv"));

    write_file_atomic(at("bad.txt"), "colour=blue\n");
    EXPECT_EQ(run({"simulate", "--config", at("bad.txt"), "--out", at("e")}), kExitUsage);
    EXPECT_NE(err_.find("colour"), std::string::npos);
}

TEST_F(CliTest, ManifestServesAsConfig) {
    ASSERT_EQ(run({"simulate", "--count", "2", "--seed", "5", "--magnitude", "4", "--out", at("a")}), 0);
    ASSERT_EQ(run({"simulate", "--config", at("a") + "/run_manifest.txt", "--out", at("b")}), 0) << err_;
    auto a = snapshot("a");
    auto b = snapshot("b");
    a.erase("run_manifest.txt");
    b.erase("run_manifest.txt");
    EXPECT_EQ(a, b);
}

TEST_F(CliTest, TrainThenDetectMatchesInProcess) {
    ASSERT_EQ(run({"simulate", "--profile", "hard", "--count", "5", "--seed", "3", "--out", at("tr")}), 0);
    ASSERT_EQ(run({"simulate", "--profile", "hard", "--count", "2", "--seed", "4", "--out", at("te")}), 0);
    ASSERT_EQ(run({"train", "--data", at("tr"), "--epochs", "25", "--out", at("m")}), 0) << err_;
    ASSERT_EQ(run({"detect", "--model", at("m") + "/model.txt", "--input", at("te") + "/path_0000.csv",
                   at("te") + "/path_0001.csv", "--out", at("det")}),
              0)
        << err_;

    PipelineConfig config;
    config.train.epochs = 25;
    const auto pipeline = train_pipeline(read_dataset(at("tr")), config);
    EXPECT_EQ(read_file(at("m") + "/model.txt"), render_pipeline(pipeline));
    for (const std::string stem : {"path_0000", "path_0001"}) {
        const auto csv = read_series_csv(at("te") + "/" + stem + ".csv");
        const auto found = detect_series(pipeline, csv.series);
        std::vector<double> s, e, p;
        for (const auto& seg : found.segments) {
            s.push_back(csv.series.times[seg.start]);
            e.push_back(csv.series.times[seg.end]);
            p.push_back(seg.peak);
        }
        EXPECT_EQ(read_file(at("det") + "/" + stem + ".segments.csv"), render_csv({"start", "end", "peak"}, {s, e, p}));
    }
}

TEST_F(CliTest, DetectWithoutCrossingsWritesHeaderOnly) {
    ASSERT_EQ(run({"simulate", "--count", "3", "--seed", "8", "--out", at("tr")}), 0);
    auto pipeline = train_pipeline(read_dataset(at("tr")), PipelineConfig{});
    pipeline.model.weights.setZero();
    pipeline.model.bias = 50.0;
    write_file_atomic(at("quiet.txt"), render_pipeline(pipeline));
    ASSERT_EQ(run({"detect", "--model", at("quiet.txt"), "--input", at("tr") + "/path_0000.csv", "--out", at("det")}),
              0)
        << err_;
    EXPECT_EQ(read_file(at("det") + "/path_0000.segments.csv"), "start,end,peak\n");
}

TEST_F(CliTest, InputErrorsNameFileAndColumn) {
    write_file_atomic(at("nolabel.csv"), "t,value\n1,0\n2,1\n");
    EXPECT_EQ(run({"train", "--input", at("nolabel.csv"), "--out", at("m")}), kExitFailure);
    EXPECT_NE(err_.find("nolabel.csv"), std::string::npos);
    EXPECT_NE(err_.find("'label'"), std::string::npos);
    EXPECT_NE(err_.find("code=format"), std::string::npos);
    EXPECT_EQ(lines(err_), 1u);

    write_file_atomic(at("model.txt"), "kind=model\nschema_version=7\n");
    write_file_atomic(at("s.csv"), "t,value\n1,0\n");
    EXPECT_EQ(run({"detect", "--model", at("model.txt"), "--input", at("s.csv"), "--out", at("x")}), kExitFailure);
    EXPECT_NE(err_.find("schema_version"), std::string::npos);
}

TEST_F(CliTest, EvaluateSummaryCoversEveryMethod) {
    ASSERT_EQ(run({"simulate", "--profile", "hard", "--count", "4", "--seed", "1", "--out", at("tr")}), 0);
    ASSERT_EQ(run({"simulate", "--profile", "hard", "--count", "3", "--seed", "2", "--out", at("te")}), 0);
    ASSERT_EQ(run({"evaluate", "--train", at("tr"), "--test", at("te"), "--epochs", "10", "--out", at("ev")}), 0)
        << err_;
    const auto summary = KeyValueFile::load(at("ev") + "/summary.txt");
    for (const auto& m : kTrendMethods) {
        EXPECT_TRUE(summary.contains("rrmse.trend." + m)) << m;
        EXPECT_TRUE(summary.contains("rrmse.forecast." + m)) << m;
    }
    for (const auto& m : kDetectionMethods) {
        EXPECT_TRUE(summary.contains("pr_auc." + m)) << m;
        EXPECT_TRUE(summary.contains("arer_auc." + m)) << m;
    }
    EXPECT_EQ(read_file(at("ev") + "/pr_ours.csv").substr(0, 26), "threshold,precision,recall");
    EXPECT_EQ(read_file(at("ev") + "/arer_ewma-cusum.csv").substr(0, 20), "threshold,afpr,afnr\n");
    const auto first = snapshot("ev");
    ASSERT_EQ(run({"evaluate", "--train", at("tr"), "--test", at("te"), "--epochs", "10", "--out", at("ev")}), 0);
    EXPECT_EQ(snapshot("ev"), first);
}

TEST_F(CliTest, FgnCommand) {
    ASSERT_EQ(run({"fgn", "--length", "300", "--hurst", "0.7", "--seed", "11", "--out", at("f")}), 0) << err_;
    const auto csv = read_series_csv(at("f") + "/fgn.csv");
    EXPECT_EQ(csv.series.values, simulate_fgn(300, HurstExponent(0.7), 11).values);
}
