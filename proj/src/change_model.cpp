#include "lrdetect/change_model.hpp"

#include "lrdetect/error.hpp"
#include "lrdetect/io.hpp"
#include "lrdetect/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace lrdetect {

std::string to_string(Profile profile) {
    return profile == Profile::Easy ? "easy" : "hard";
}

Profile parse_profile(const std::string& text) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "easy") {
        return Profile::Easy;
    }
    if (lower == "hard") {
        return Profile::Hard;
    }
    throw DomainError("unknown profile '" + text + "' (expected easy or hard)");
}

ArtificialConfig ArtificialConfig::for_profile(Profile profile) {
    ArtificialConfig config;
    config.magnitude = profile == Profile::Easy ? 5.0 : 3.0;
    return config;
}

double seasonal_trend(const ArtificialConfig& config, double t) {
    return config.amplitude * std::sin(2.0 * std::numbers::pi * t / config.period);
}

LabeledPath labeled_path(TimeSeries series, std::vector<std::uint8_t> labels) {
    if (labels.size() != series.size()) {
        throw LengthMismatchError("series has " + std::to_string(series.size()) + " points but " +
                                  std::to_string(labels.size()) + " labels");
    }
    LabeledPath path;
    path.series = std::move(series);
    path.labels = std::move(labels);
    bool seen = false;
    for (std::size_t k = 0; k < path.labels.size(); ++k) {
        if (path.labels[k]) {
            ++path.abnormal_duration;
            if (!seen) {
                path.change_first = k;
                seen = true;
            }
            path.change_last = k;
        }
    }
    path.normal_duration = path.labels.size() - path.abnormal_duration;
    return path;
}

LabeledPath inject_change(const TimeSeries& series, const ChangeSpec& change) {
    if (!(change.duration > 0.0)) {
        throw DomainError("change duration must be positive");
    }
    if (!(change.sigma > 0.0)) {
        throw DomainError("noise scale must be positive");
    }
    if (series.size() == 0) {
        throw OutOfSpanError("empty series");
    }
    const double tolerance = 1e-9 * series.sample_period;
    const double begin = change.change_time;
    const double end = change.change_time + change.duration;
    if (begin < series.times.front() - tolerance || end > series.times.back() + tolerance) {
        throw OutOfSpanError("change interval [" + format_double(begin) + ", " + format_double(end) +
                             "] leaves the series span [" + format_double(series.times.front()) + ", " +
                             format_double(series.times.back()) + "]");
    }
    TimeSeries shifted = series;
    std::vector<std::uint8_t> labels(series.size(), 0);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double t = series.times[k];
        if (t >= begin - tolerance && t <= end + tolerance) {
            labels[k] = 1;
            shifted.values[k] += change.magnitude;
        }
    }
    return labeled_path(std::move(shifted), std::move(labels));
}

namespace {

std::vector<double> seasonal_noise(const ArtificialConfig& config, double t0, std::uint64_t seed,
                                   std::vector<double>* times, std::vector<double>* trend) {
    const auto noise = simulate_fgn(config.length, config.hurst, seed).values;
    std::vector<double> values(config.length);
    times->resize(config.length);
    trend->resize(config.length);
    for (std::size_t k = 0; k < config.length; ++k) {
        const double t = t0 + static_cast<double>(k);
        (*times)[k] = t;
        (*trend)[k] = seasonal_trend(config, t);
        values[k] = (*trend)[k] + config.sigma * noise[k];
    }
    return values;
}

LabeledPath artificial_path(const ArtificialConfig& config, std::uint64_t path_seed) {
    Rng rng(path_seed);
    const double change_time = rng.uniform(config.change_time_low, config.change_time_high);
    const double duration = rng.uniform(config.duration_low, config.duration_high);

    std::vector<double> times;
    std::vector<double> trend;
    TimeSeries series;
    series.values = seasonal_noise(config, 1.0, derive_seed(path_seed, 1), &times, &trend);
    series.times = std::move(times);
    series.sample_period = 1.0;

    ChangeSpec change;
    change.change_time = std::round(change_time);
    change.duration = std::floor(duration);
    change.magnitude = config.magnitude;
    change.sigma = config.sigma;
    change.hurst = config.hurst;
    // A zero-magnitude change is no change at all: nothing to label.
    LabeledPath path = config.magnitude == 0.0
                           ? labeled_path(series, std::vector<std::uint8_t>(series.size(), 0))
                           : inject_change(series, change);
    path.true_trend = std::move(trend);
    path.drawn_change_time = change_time;
    path.drawn_duration = duration;

    if (config.with_history) {
        TimeSeries history;
        std::vector<double> history_trend;
        history.values = seasonal_noise(config, 1.0 - static_cast<double>(config.length), derive_seed(path_seed, 2),
                                        &history.times, &history_trend);
        history.sample_period = 1.0;
        path.history = std::move(history);
    }
    return path;
}

} // namespace

LabeledDataset generate_artificial(Profile profile, std::size_t count, std::uint64_t seed) {
    return generate_artificial(ArtificialConfig::for_profile(profile), profile, count, seed);
}

LabeledDataset generate_artificial(const ArtificialConfig& config, Profile profile, std::size_t count,
                                   std::uint64_t seed) {
    if (count == 0) {
        throw DomainError("dataset needs at least one path");
    }
    if (config.change_time_high + config.duration_high > static_cast<double>(config.length)) {
        throw DomainError("change window does not fit in a path of " + std::to_string(config.length) + " points");
    }
    LabeledDataset dataset;
    dataset.seed = seed;
    dataset.profile = profile;
    dataset.paths.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        dataset.paths.push_back(artificial_path(config, derive_seed(seed, i)));
    }
    return dataset;
}

TimeSeries compute_residuals(const TimeSeries& series, const TrendEstimate& trend) {
    if (trend.fitted.size() != series.size()) {
        throw LengthMismatchError("trend has " + std::to_string(trend.fitted.size()) + " points, series has " +
                                  std::to_string(series.size()));
    }
    std::vector<const WindowFit*> usable;
    for (const auto& w : trend.windows) {
        if (w.ok) {
            usable.push_back(&w);
        }
    }
    if (usable.empty()) {
        throw DegenerateInputError("no successful trend window to take the noise scale from");
    }
    TimeSeries residuals = series;
    const double half = static_cast<double>(trend.window - 1) / 2.0;
    std::size_t nearest = 0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double t = static_cast<double>(k);
        // Window centres increase, so the nearest index only moves forward.
        while (nearest + 1 < usable.size() &&
               std::abs(static_cast<double>(usable[nearest + 1]->start) + half - t) <=
                   std::abs(static_cast<double>(usable[nearest]->start) + half - t)) {
            ++nearest;
        }
        const double sigma = usable[nearest]->sigma_hat;
        if (!(sigma > 0.0)) {
            throw DegenerateInputError("noise scale estimate is " + format_double(sigma) + " near index " +
                                       std::to_string(k));
        }
        if (!std::isfinite(trend.fitted[k])) {
            throw NumericalError("trend is undefined at index " + std::to_string(k));
        }
        residuals.values[k] = (series.values[k] - trend.fitted[k]) / sigma;
    }
    return residuals;
}

namespace {

std::string numbered(const char* stem, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04zu.csv", stem, i);
    return buf;
}

} // namespace

void write_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset, const ArtificialConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string());
    }
    KeyValueFile manifest;
    manifest.set("schema_version", 1);
    manifest.set("kind", "dataset");
    manifest.set("profile", to_string(dataset.profile));
    manifest.set("seed", dataset.seed);
    manifest.set("count", static_cast<std::uint64_t>(dataset.paths.size()));
    manifest.set("recipe.length", static_cast<std::uint64_t>(config.length));
    manifest.set("recipe.amplitude", config.amplitude);
    manifest.set("recipe.period", config.period);
    manifest.set("recipe.sigma", config.sigma);
    manifest.set("recipe.hurst", config.hurst.value());
    manifest.set("recipe.magnitude", config.magnitude);
    manifest.set("recipe.change_time_low", config.change_time_low);
    manifest.set("recipe.change_time_high", config.change_time_high);
    manifest.set("recipe.duration_low", config.duration_low);
    manifest.set("recipe.duration_high", config.duration_high);
    manifest.set("recipe.with_history", config.with_history ? 1 : 0);
    for (std::size_t i = 0; i < dataset.paths.size(); ++i) {
        const auto& path = dataset.paths[i];
        const std::string prefix = "path." + std::to_string(i);
        const std::string file = numbered("path", i);
        std::vector<double> labels(path.labels.begin(), path.labels.end());
        write_file_atomic(dir / file,
                          render_csv({"t", "value", "label"}, {path.series.times, path.series.values, labels}));
        manifest.set(prefix + ".file", file);
        manifest.set(prefix + ".change_time", path.drawn_change_time);
        manifest.set(prefix + ".duration", path.drawn_duration);
        if (path.history) {
            const std::string hfile = numbered("history", i);
            write_file_atomic(dir / hfile, render_csv({"t", "value"}, {path.history->times, path.history->values}));
            manifest.set(prefix + ".history", hfile);
        }
    }
    write_file_atomic(dir / "manifest.txt", manifest.render());
}

LabeledDataset read_dataset(const std::filesystem::path& dir, ArtificialConfig* config_out) {
    const auto manifest = KeyValueFile::load(dir / "manifest.txt");
    const std::string src = (dir / "manifest.txt").string();
    if (manifest.at("kind") != "dataset") {
        throw FormatError(src + ": not a dataset manifest");
    }
    LabeledDataset dataset;
    dataset.profile = parse_profile(manifest.at("profile"));
    dataset.seed = parse_u64(manifest.at("seed"), src + " key 'seed'");
    const std::size_t count = parse_u64(manifest.at("count"), src + " key 'count'");

    ArtificialConfig config = ArtificialConfig::for_profile(dataset.profile);
    const bool has_recipe = manifest.contains("recipe.amplitude");
    if (has_recipe) {
        config.length = parse_u64(manifest.at("recipe.length"), src);
        config.amplitude = parse_double(manifest.at("recipe.amplitude"), src);
        config.period = parse_double(manifest.at("recipe.period"), src);
        config.sigma = parse_double(manifest.at("recipe.sigma"), src);
        config.hurst = HurstExponent(parse_double(manifest.at("recipe.hurst"), src));
        config.magnitude = parse_double(manifest.at("recipe.magnitude"), src);
        config.change_time_low = parse_double(manifest.at("recipe.change_time_low"), src);
        config.change_time_high = parse_double(manifest.at("recipe.change_time_high"), src);
        config.duration_low = parse_double(manifest.at("recipe.duration_low"), src);
        config.duration_high = parse_double(manifest.at("recipe.duration_high"), src);
        config.with_history = manifest.at("recipe.with_history") == "1";
    }
    for (std::size_t i = 0; i < count; ++i) {
        const std::string prefix = "path." + std::to_string(i);
        const auto file = dir / manifest.at(prefix + ".file");
        CsvSeries csv = read_series_csv(file);
        if (!csv.labels) {
            throw FormatError(file.string() + ": missing column 'label'");
        }
        LabeledPath path = labeled_path(std::move(csv.series), std::move(*csv.labels));
        if (auto ct = manifest.find(prefix + ".change_time")) {
            path.drawn_change_time = parse_double(*ct, src);
        }
        if (auto d = manifest.find(prefix + ".duration")) {
            path.drawn_duration = parse_double(*d, src);
        }
        if (has_recipe) {
            path.true_trend.resize(path.series.size());
            for (std::size_t k = 0; k < path.series.size(); ++k) {
                path.true_trend[k] = seasonal_trend(config, path.series.times[k]);
            }
        }
        if (auto h = manifest.find(prefix + ".history")) {
            path.history = read_series_csv(dir / *h).series;
        }
        dataset.paths.push_back(std::move(path));
    }
    if (config_out) {
        *config_out = config;
    }
    return dataset;
}

} // namespace lrdetect
