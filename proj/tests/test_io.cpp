#include "lrdetect/error.hpp"
#include "lrdetect/io.hpp"
#include "lrdetect/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace lrdetect;

namespace {

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::filesystem::path write(const TempDir& dir, const std::string& name, const std::string& text) {
    const auto p = dir.path() / name;
    write_file_atomic(p, text);
    return p;
}

std::string error_of(const std::filesystem::path& p) {
    try {
        read_series_csv(p);
    } catch (const FormatError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Numbers, ShortestRoundTrip) {
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-300, 300));
        EXPECT_EQ(parse_double(format_double(x), "x"), x);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(3.0), "3");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_TRUE(std::isnan(parse_double("nan", "x")));
    EXPECT_EQ(parse_double("-inf", "x"), -std::numeric_limits<double>::infinity());
}

TEST(Numbers, RejectsGarbage) {
    EXPECT_THROW(parse_double("", "ctx"), FormatError);
    EXPECT_THROW(parse_double("1.5x", "ctx"), FormatError);
    EXPECT_THROW(parse_u64("-3", "ctx"), FormatError);
    EXPECT_THROW(parse_u64("3.5", "ctx"), FormatError);
    EXPECT_EQ(parse_u64("42", "ctx"), 42u);
    try {
        parse_double("abc", "model key 'bias'");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("model key 'bias'"), std::string::npos);
    }
}

TEST(KeyValue, RenderParseRoundTrip) {
    KeyValueFile f;
    f.set("b", 1.25);
    f.set("a", "text with spaces");
    f.set("n", std::uint64_t{7});
    f.set("b", 2.5);  // overwrite keeps position
    const auto back = KeyValueFile::parse(f.render(), "mem");
    ASSERT_EQ(back.entries().size(), 3u);
    EXPECT_EQ(back.entries()[0].first, "b");
    EXPECT_EQ(back.at("b"), "2.5");
    EXPECT_EQ(back.at("a"), "text with spaces");
    EXPECT_EQ(back.at("n"), "7");
    EXPECT_EQ(back.render(), f.render());
}

TEST(KeyValue, CommentsSectionsAndErrors) {
    const auto f = KeyValueFile::parse("# comment\n; other\n\nseed = 4\n[train]\nlags=2\n", "cfg.txt");
    EXPECT_EQ(f.at("seed"), "4");
    EXPECT_EQ(f.at("train.lags"), "2");
    EXPECT_FALSE(f.contains("lags"));
    EXPECT_FALSE(f.find("missing").has_value());
    try {
        (void)f.at("missing");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("cfg.txt"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
    }
    EXPECT_THROW(KeyValueFile::parse("novalue\n", "x"), FormatError);
    EXPECT_THROW(KeyValueFile::parse("=3\n", "x"), FormatError);
}

TEST(Files, AtomicWriteReplaces) {
    TempDir dir("lrdetect_io_atomic");
    const auto p = write(dir, "out.txt", "first");
    write_file_atomic(p, "second");
    EXPECT_EQ(read_file(p), "second");
    EXPECT_FALSE(std::filesystem::exists(p.string() + ".tmp"));
    EXPECT_THROW(read_file(dir.path() / "absent.txt"), IoError);
    EXPECT_THROW(write_file_atomic(dir.path() / "no" / "such" / "dir.txt", "x"), IoError);
}

TEST(Csv, ReadsSeriesWithLabels) {
    TempDir dir("lrdetect_io_csv");
    const auto p = write(dir, "s.csv", "t,value,label\n1,0.5,0\n2,1.5,1\n3,-2,0\n");
    const auto csv = read_series_csv(p);
    EXPECT_EQ(csv.series.values, (std::vector<double>{0.5, 1.5, -2}));
    EXPECT_EQ(csv.series.times, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(csv.series.sample_period, 1.0);
    ASSERT_TRUE(csv.labels.has_value());
    EXPECT_EQ(*csv.labels, (std::vector<std::uint8_t>{0, 1, 0}));
}

TEST(Csv, ColumnOrderAndNoLabels) {
    TempDir dir("lrdetect_io_csv2");
    const auto p = write(dir, "s.csv", "value,t\n3,300\n4,600\n");
    const auto csv = read_series_csv(p);
    EXPECT_FALSE(csv.labels.has_value());
    EXPECT_EQ(csv.series.sample_period, 300.0);
    EXPECT_EQ(csv.series.values, (std::vector<double>{3, 4}));
}

TEST(Csv, ErrorsNameFileAndRow) {
    TempDir dir("lrdetect_io_csv3");
    EXPECT_NE(error_of(write(dir, "gap.csv", "t,value\n1,0\n2,0\n4,0\n")).find("gap"), std::string::npos);
    EXPECT_NE(error_of(write(dir, "dup.csv", "t,value\n1,0\n1,0\n")).find("duplicate"), std::string::npos);
    const auto bad = error_of(write(dir, "bad.csv", "t,value\n1,0\n2,oops\n"));
    EXPECT_NE(bad.find("bad.csv"), std::string::npos);
    EXPECT_NE(bad.find("3"), std::string::npos);
    EXPECT_NE(error_of(write(dir, "lab.csv", "t,value,label\n1,0,2\n")).find("label"), std::string::npos);
    EXPECT_NE(error_of(write(dir, "head.csv", "time,value\n1,0\n")).find("'t'"), std::string::npos);
    EXPECT_NE(error_of(write(dir, "empty.csv", "")).find("empty"), std::string::npos);
    EXPECT_NE(error_of(write(dir, "rows.csv", "t,value\n")).find("no data"), std::string::npos);
    EXPECT_NE(error_of(write(dir, "nan.csv", "t,value\n1,nan\n")).find("non-finite"), std::string::npos);
}

TEST(Csv, RenderRoundTrip) {
    TempDir dir("lrdetect_io_csv4");
    const std::vector<double> t = {1, 2, 3};
    const std::vector<double> v = {0.1, 1.0 / 3.0, -7e-300};
    const auto p = write(dir, "r.csv", render_csv({"t", "value"}, {t, v}));
    const auto csv = read_series_csv(p);
    EXPECT_EQ(csv.series.values, v);
    EXPECT_THROW(render_csv({"a"}, {t, v}), LengthMismatchError);
    EXPECT_THROW(render_csv({"a", "b"}, {t, {1.0}}), LengthMismatchError);
}
