#include "lrdetect/cli.hpp"

#include "lrdetect/error.hpp"
#include "lrdetect/io.hpp"
#include "lrdetect/lrd_core.hpp"
#include "lrdetect/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace lrdetect {
namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

// Option values that parse but make no sense together.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("usage", what) {}
};

std::string quoted(const std::string& text) {
    std::string q = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') {
            q += '\\';
            q += c;
        } else if (c == '\n') {
            q += "\\n";
        } else {
            q += c;
        }
    }
    return q + "\"";
}

void report(std::ostream& err, const std::string& code, const std::string& message) {
    err << "lrdetect: error code=" << code << " message=" << quoted(message) << '\n';
}

std::string flag_text(bool value) {
    return value ? "true" : "false";
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

// Runs `fn`, turning domain errors raised while resolving options into usage
// errors.
template <typename Fn>
auto resolving(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Shared model options.

struct ModelArgs {
    std::size_t window = 96;
    std::size_t stride = 0;
    double h_init = 0.5;
    bool no_hurst_correction = false;
    double delta = 3.0;
    std::size_t changepoint_window = 20;
    double prior = 1.0 / 2016.0;
    double quantile = 0.99;
    std::size_t lags = 1;
    std::size_t epochs = 200;
    double step = 0.1;
    double sharpness = 1.0;
    double h_a = 0.5;
    double c_inf = 1.0;
    double c_zero = 1.0;
};

void add_model_options(CLI::App* app, ModelArgs& m) {
    const auto open_unit = CLI::Range(0.0, 1.0);
    app->add_option("--window", m.window, "Trend window width in samples")->check(CLI::PositiveNumber);
    app->add_option("--stride", m.stride, "Window stride; 0 means window/4");
    app->add_option("--h-init", m.h_init, "Hurst exponent of the first fit")->check(open_unit);
    app->add_flag("--no-hurst-correction", m.no_hurst_correction, "Keep h-init instead of the DFA estimate");
    app->add_option("--delta", m.delta, "Post-change mean of the likelihood detectors")->check(CLI::PositiveNumber);
    app->add_option("--changepoint-window", m.changepoint_window, "Half width of the window detector")
        ->check(CLI::PositiveNumber);
    app->add_option("--prior", m.prior, "Per-step change probability of the posterior detector")->check(open_unit);
    app->add_option("--quantile", m.quantile, "Normal-point quantile used as reference threshold")
        ->check(open_unit);
    app->add_option("--lags", m.lags, "Lagged signals per detector");
    app->add_option("--epochs", m.epochs, "Gradient descent epochs");
    app->add_option("--step", m.step, "Initial step size")->check(CLI::PositiveNumber);
    app->add_option("--sharpness", m.sharpness, "Slope of the smoothed indicator")->check(CLI::PositiveNumber);
    app->add_option("--h-a", m.h_a, "Alarm level of the ensemble")->check(open_unit);
    app->add_option("--c-inf", m.c_inf, "Cost of false alarms")->check(CLI::NonNegativeNumber);
    app->add_option("--c-zero", m.c_zero, "Cost of missed abnormal points")->check(CLI::NonNegativeNumber);
}

PipelineConfig resolve(const ModelArgs& m) {
    return resolving([&] {
        if (m.quantile <= 0.0 || m.quantile > 1.0) {
            throw DomainError("--quantile must lie in (0, 1]");
        }
        if (m.prior <= 0.0 || m.prior >= 1.0 || m.h_a <= 0.0 || m.h_a >= 1.0) {
            throw DomainError("--prior and --h-a must lie in (0, 1)");
        }
        if (m.c_inf + m.c_zero <= 0.0) {
            throw DomainError("--c-inf and --c-zero cannot both be 0");
        }
        PipelineConfig c;
        c.trend.window = m.window;
        c.trend.stride = m.stride;
        c.trend.h_init = HurstExponent(m.h_init);
        c.trend.correct_hurst = !m.no_hurst_correction;
        c.detector.delta = m.delta;
        c.detector.window = m.changepoint_window;
        c.detector.prior = m.prior;
        c.calibration_quantile = m.quantile;
        c.train.lags = m.lags;
        c.train.epochs = m.epochs;
        c.train.initial_step = m.step;
        c.train.sharpness = m.sharpness;
        c.train.h_a = m.h_a;
        c.train.c_inf = m.c_inf;
        c.train.c_zero = m.c_zero;
        return c;
    });
}

void record(KeyValueFile& f, const std::string& cmd, const ModelArgs& m) {
    const std::string p = cmd + ".";
    f.set(p + "window", static_cast<std::uint64_t>(m.window));
    f.set(p + "stride", static_cast<std::uint64_t>(m.stride));
    f.set(p + "h-init", m.h_init);
    f.set(p + "no-hurst-correction", flag_text(m.no_hurst_correction));
    f.set(p + "delta", m.delta);
    f.set(p + "changepoint-window", static_cast<std::uint64_t>(m.changepoint_window));
    f.set(p + "prior", m.prior);
    f.set(p + "quantile", m.quantile);
    f.set(p + "lags", static_cast<std::uint64_t>(m.lags));
    f.set(p + "epochs", static_cast<std::uint64_t>(m.epochs));
    f.set(p + "step", m.step);
    f.set(p + "sharpness", m.sharpness);
    f.set(p + "h-a", m.h_a);
    f.set(p + "c-inf", m.c_inf);
    f.set(p + "c-zero", m.c_zero);
}

// Run manifest: the resolved options under "<command>.", so the file can be
// passed back through --config, plus the outputs written.
class Manifest {
public:
    Manifest(const std::string& command, const std::string& config_path) : command_(command) {
        file_.set("run.tool", "lrdetect");
        file_.set("run.version", kVersion);
        file_.set("run.command", command);
        if (!config_path.empty()) {
            file_.set("run.config", config_path);
        }
    }

    KeyValueFile& file() { return file_; }
    const std::string& command() const { return command_; }

    void output(const std::string& name) { file_.set("outputs." + std::to_string(outputs_++), name); }

    void write(const fs::path& dir) {
        file_.set("outputs.count", static_cast<std::uint64_t>(outputs_));
        write_file_atomic(dir / "run_manifest.txt", file_.render());
    }

private:
    std::string command_;
    KeyValueFile file_;
    std::size_t outputs_ = 0;
};

// ---------------------------------------------------------------------------
// Commands.

struct CommonArgs {
    std::string config;
    std::string out;
};

struct SimulateArgs {
    CommonArgs common;
    std::string profile = "easy";
    std::size_t count = 1;
    std::uint64_t seed = 0;
    std::size_t length = 2016;
    double hurst = 0.95;
    std::optional<double> magnitude;
    bool no_history = false;
};

void run_simulate(const SimulateArgs& a) {
    const Profile profile = resolving([&] { return parse_profile(a.profile); });
    ArtificialConfig config = ArtificialConfig::for_profile(profile);
    resolving([&] {
        config.hurst = HurstExponent(a.hurst);
        if (static_cast<double>(a.length) < config.change_time_high + config.duration_high + 1.0) {
            throw DomainError("--length must exceed the latest possible change end (" +
                              format_double(config.change_time_high + config.duration_high) + ")");
        }
        return 0;
    });
    config.length = a.length;
    if (a.magnitude) {
        config.magnitude = *a.magnitude;
    }
    config.with_history = !a.no_history;

    const auto dataset = generate_artificial(config, profile, a.count, a.seed);
    make_dir(a.common.out);
    write_dataset(a.common.out, dataset, config);

    Manifest m("simulate", a.common.config);
    auto& f = m.file();
    f.set("simulate.profile", lower(to_string(profile)));
    f.set("simulate.count", static_cast<std::uint64_t>(a.count));
    f.set("simulate.seed", a.seed);
    f.set("simulate.out", a.common.out);
    f.set("simulate.length", static_cast<std::uint64_t>(a.length));
    f.set("simulate.hurst", a.hurst);
    f.set("simulate.magnitude", config.magnitude);
    f.set("simulate.no-history", flag_text(a.no_history));
    f.set("seeds.path", "derive_seed(seed, i)");
    f.set("seeds.noise", "derive_seed(path_seed, 1)");
    f.set("seeds.history", "derive_seed(path_seed, 2)");
    m.output("manifest.txt");
    char name[32];
    for (std::size_t i = 0; i < dataset.paths.size(); ++i) {
        std::snprintf(name, sizeof name, "path_%04zu.csv", i);
        m.output(name);
        if (dataset.paths[i].history) {
            std::snprintf(name, sizeof name, "history_%04zu.csv", i);
            m.output(name);
        }
    }
    m.write(a.common.out);
}

struct FgnArgs {
    CommonArgs common;
    std::size_t length = 2016;
    double hurst = 0.8;
    std::uint64_t seed = 0;
};

void run_fgn(const FgnArgs& a) {
    const HurstExponent h = resolving([&] { return HurstExponent(a.hurst); });
    const auto sample = simulate_fgn(a.length, h, a.seed);
    std::vector<double> t(a.length);
    for (std::size_t k = 0; k < a.length; ++k) {
        t[k] = static_cast<double>(k);
    }
    make_dir(a.common.out);
    write_file_atomic(fs::path(a.common.out) / "fgn.csv", render_csv({"t", "value"}, {t, sample.values}));

    Manifest m("fgn", a.common.config);
    m.file().set("fgn.length", static_cast<std::uint64_t>(a.length));
    m.file().set("fgn.hurst", a.hurst);
    m.file().set("fgn.seed", a.seed);
    m.file().set("fgn.out", a.common.out);
    m.output("fgn.csv");
    m.write(a.common.out);
}

struct TrainArgs {
    CommonArgs common;
    std::string data;
    std::vector<std::string> inputs;
    ModelArgs model;
};

LabeledPath labeled_csv(const std::string& file) {
    auto csv = read_series_csv(file);
    if (!csv.labels) {
        throw FormatError(file + ": missing column 'label'");
    }
    return labeled_path(std::move(csv.series), std::move(*csv.labels));
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& i : items) {
        s += (s.empty() ? "" : " ") + i;
    }
    return s;
}

void run_train(const TrainArgs& a) {
    const PipelineConfig config = resolve(a.model);
    if (a.data.empty() && a.inputs.empty()) {
        throw UsageError("train needs --data or --input");
    }
    LabeledDataset dataset;
    if (!a.data.empty()) {
        dataset = read_dataset(a.data);
    }
    for (const auto& file : a.inputs) {
        dataset.paths.push_back(labeled_csv(file));
    }

    TrainingSummary summary;
    const auto pipeline = train_pipeline(dataset, config, &summary);
    make_dir(a.common.out);
    const fs::path out(a.common.out);
    write_file_atomic(out / "model.txt", render_pipeline(pipeline));

    KeyValueFile report;
    report.set("kind", "training");
    report.set("paths", static_cast<std::uint64_t>(summary.paths));
    report.set("excluded_paths", static_cast<std::uint64_t>(summary.report.excluded_paths));
    report.set("epochs_run", static_cast<std::uint64_t>(summary.report.epochs_run));
    report.set("loss.initial", summary.report.loss_history.front());
    report.set("loss.final", summary.report.loss_history.back());
    write_file_atomic(out / "training.txt", report.render());

    Manifest m("train", a.common.config);
    if (!a.data.empty()) {
        m.file().set("train.data", a.data);
    }
    if (!a.inputs.empty()) {
        m.file().set("train.input", join(a.inputs));
    }
    m.file().set("train.out", a.common.out);
    record(m.file(), "train", a.model);
    m.output("model.txt");
    m.output("training.txt");
    m.write(out);
}

struct DetectArgs {
    CommonArgs common;
    std::string model;
    std::vector<std::string> inputs;
    bool trajectory = false;
};

void run_detect(const DetectArgs& a) {
    std::set<std::string> stems;
    for (const auto& file : a.inputs) {
        if (!stems.insert(fs::path(file).stem().string()).second) {
            throw UsageError("two inputs share the file name " + fs::path(file).stem().string());
        }
    }
    const auto pipeline = parse_pipeline(KeyValueFile::load(a.model));
    make_dir(a.common.out);
    const fs::path out(a.common.out);

    Manifest m("detect", a.common.config);
    m.file().set("detect.model", a.model);
    m.file().set("detect.input", join(a.inputs));
    m.file().set("detect.out", a.common.out);
    m.file().set("detect.trajectory", flag_text(a.trajectory));
    for (const auto& file : a.inputs) {
        const auto csv = read_series_csv(file);
        const auto found = detect_series(pipeline, csv.series);
        std::vector<double> start, end, peak;
        for (const auto& s : found.segments) {
            start.push_back(csv.series.times[s.start]);
            end.push_back(csv.series.times[s.end]);
            peak.push_back(s.peak);
        }
        const std::string stem = fs::path(file).stem().string();
        write_file_atomic(out / (stem + ".segments.csv"), render_csv({"start", "end", "peak"}, {start, end, peak}));
        m.output(stem + ".segments.csv");
        m.file().set("result." + stem + ".segments", static_cast<std::uint64_t>(found.segments.size()));
        if (found.trajectory.stopping_index) {
            m.file().set("result." + stem + ".first_alarm", csv.series.times[*found.trajectory.stopping_index]);
        }
        if (a.trajectory) {
            write_file_atomic(out / (stem + ".trajectory.csv"),
                              render_csv({"t", "a"}, {csv.series.times, found.trajectory.values}));
            m.output(stem + ".trajectory.csv");
        }
    }
    m.write(out);
}

struct EvaluateArgs {
    CommonArgs common;
    std::string train;
    std::string test;
    std::string model_file;
    ModelArgs model;
    std::size_t ssa_window = 288;
    std::size_t ssa_rank = 0;
    double ewma_smoothing = 0.05;
    bool no_trend_table = false;
};

std::string slug(const std::string& method) {
    return lower(method);
}

void run_evaluate(const EvaluateArgs& a) {
    const PipelineConfig config = resolve(a.model);
    BaselineSettings settings;
    settings.ssa.window = a.ssa_window;
    settings.ssa.rank = a.ssa_rank;
    settings.ewma_smoothing = a.ewma_smoothing;

    const auto train_set = read_dataset(a.train);
    const auto test_set = read_dataset(a.test);
    make_dir(a.common.out);
    const fs::path out(a.common.out);

    Manifest m("evaluate", a.common.config);
    TrainedPipeline pipeline;
    if (!a.model_file.empty()) {
        pipeline = parse_pipeline(KeyValueFile::load(a.model_file));
    } else {
        pipeline = train_pipeline(train_set, config);
        write_file_atomic(out / "model.txt", render_pipeline(pipeline));
        m.output("model.txt");
    }

    KeyValueFile summary;
    summary.set("schema_version", 1);
    summary.set("kind", "summary");
    summary.set("train.paths", static_cast<std::uint64_t>(train_set.paths.size()));
    summary.set("test.paths", static_cast<std::uint64_t>(test_set.paths.size()));

    if (!a.no_trend_table) {
        for (const auto& row : compare_trend_accuracy(test_set, pipeline.trend, settings)) {
            summary.set("rrmse.trend." + row.method, row.trend_rrmse);
            summary.set("rrmse.forecast." + row.method, row.forecast_rrmse);
            summary.set("relative_rmse.trend." + row.method, row.trend_relative_rmse);
            summary.set("relative_rmse.forecast." + row.method, row.forecast_relative_rmse);
            summary.set("rrmse.excluded_zero." + row.method, static_cast<std::uint64_t>(row.excluded_zero));
        }
    }

    const auto ewma = select_ewma_parameters(train_set, settings);
    const auto residuals = dataset_residuals(test_set, pipeline.trend);
    for (const auto& c : compare_detection(pipeline, ewma, test_set, residuals, settings)) {
        summary.set("pr_auc." + c.method, c.pr_auc);
        summary.set("arer_auc." + c.method, c.arer_auc);
        summary.set("parameters." + c.method, c.parameters);
        const std::string pr = "pr_" + slug(c.method) + ".csv";
        const std::string arer = "arer_" + slug(c.method) + ".csv";
        write_file_atomic(out / pr, render_pr_csv(c.pr));
        write_file_atomic(out / arer, render_arer_csv(c.arer));
        m.output(pr);
        m.output(arer);
    }
    write_file_atomic(out / "summary.txt", summary.render());
    m.output("summary.txt");

    m.file().set("evaluate.train", a.train);
    m.file().set("evaluate.test", a.test);
    if (!a.model_file.empty()) {
        m.file().set("evaluate.model", a.model_file);
    }
    m.file().set("evaluate.out", a.common.out);
    record(m.file(), "evaluate", a.model);
    m.file().set("evaluate.ssa-window", static_cast<std::uint64_t>(a.ssa_window));
    m.file().set("evaluate.ssa-rank", static_cast<std::uint64_t>(a.ssa_rank));
    m.file().set("evaluate.ewma-smoothing", a.ewma_smoothing);
    m.file().set("evaluate.no-trend-table", flag_text(a.no_trend_table));
    m.write(out);
}

// ---------------------------------------------------------------------------
// Config file merging.

std::optional<std::string> config_argument(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) {
            return args[i].substr(9);
        }
    }
    return std::nullopt;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::vector<std::string> words(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string w; in >> w;) {
        out.push_back(w);
    }
    return out;
}

// Inserts the config file's values for `command` as flags right after the
// subcommand name. Keys already given on the command line are skipped, so
// flags win. Keys "<command>.<name>" and "<name>" both apply; keys prefixed
// with another name are ignored, which lets a run manifest serve as config.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
    const auto config = config_argument(args);
    if (!config) {
        return args;
    }
    auto sub_pos = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return app.get_subcommand_no_throw(a) != nullptr;
    });
    if (sub_pos == args.end()) {
        return args;
    }
    CLI::App* sub = app.get_subcommand(*sub_pos);
    const std::string command = sub->get_name();
    const auto file = KeyValueFile::load(*config);

    std::vector<std::string> order;
    std::map<std::string, std::string> values;
    for (const auto& [full, value] : file.entries()) {
        std::string key = full;
        const auto dot = key.find('.');
        if (dot != std::string::npos) {
            if (key.substr(0, dot) != command) {
                continue;
            }
            key = key.substr(dot + 1);
        }
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config" || key == "help") {
            throw UsageError(*config + ": unknown key '" + full + "' for " + command);
        }
        if (!values.count(key)) {
            order.push_back(key);
        }
        values[key] = value;
    }

    std::vector<std::string> injected;
    for (const auto& key : order) {
        const std::string flag = "--" + key;
        if (given(args, flag)) {
            continue;
        }
        const CLI::Option* opt = sub->get_option("--" + key);
        const std::string& value = values[key];
        if (opt->get_type_size() == 0) {
            const std::string v = lower(value);
            if (v == "true" || v == "1" || v == "yes" || v == "on") {
                injected.push_back(flag);
            } else if (!(v == "false" || v == "0" || v == "no" || v == "off")) {
                throw UsageError(*config + ": key '" + key + "' expects true or false");
            }
            continue;
        }
        const auto tokens = words(value);
        if (tokens.size() == 1) {
            injected.push_back(flag + "=" + tokens[0]);
        } else {
            injected.push_back(flag);
            injected.insert(injected.end(), tokens.begin(), tokens.end());
        }
    }
    std::vector<std::string> merged(args.begin(), sub_pos + 1);
    merged.insert(merged.end(), injected.begin(), injected.end());
    merged.insert(merged.end(), sub_pos + 1, args.end());
    return merged;
}

void add_common(CLI::App* sub, CommonArgs& c) {
    sub->add_option("--config", c.config, "key=value file; flags given on the command line win");
    sub->add_option("--out", c.out, "Output directory")->required();
}

int guarded(std::ostream& err, const std::function<void()>& fn) {
    try {
        fn();
        return kExitOk;
    } catch (const UsageError& e) {
        report(err, e.code(), e.what());
        return kExitUsage;
    } catch (const Error& e) {
        report(err, e.code(), e.what());
        return kExitFailure;
    } catch (const std::exception& e) {
        report(err, "internal", e.what());
        return kExitFailure;
    }
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Change detection in long-range-dependent telemetry", "lrdetect"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    app.option_defaults()->always_capture_default();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic labeled dataset");
    add_common(simulate, sim.common);
    simulate->add_option("--profile", sim.profile, "easy or hard")
        ->check(CLI::IsMember({"easy", "hard"}, CLI::ignore_case));
    simulate->add_option("--count", sim.count, "Number of paths")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "Base seed; path i uses derive_seed(seed, i)");
    simulate->add_option("--length", sim.length, "Samples per path");
    simulate->add_option("--hurst", sim.hurst, "Hurst exponent of the noise")->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--magnitude", sim.magnitude, "Level shift (profile default when absent)");
    simulate->add_flag("--no-history", sim.no_history, "Skip the preceding no-change week");

    FgnArgs fg;
    auto* fgn = app.add_subcommand("fgn", "Write one fractional Gaussian noise sample");
    add_common(fgn, fg.common);
    fgn->add_option("--length", fg.length, "Number of increments")->check(CLI::PositiveNumber);
    fgn->add_option("--hurst", fg.hurst, "Hurst exponent")->check(CLI::Range(0.0, 1.0));
    fgn->add_option("--seed", fg.seed, "Seed");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Calibrate the detector bank and fit the ensemble");
    add_common(train, tr.common);
    train->add_option("--data", tr.data, "Dataset directory written by simulate")->check(CLI::ExistingDirectory);
    train->add_option("--input", tr.inputs, "Labeled CSV files with columns t,value,label")
        ->check(CLI::ExistingFile);
    add_model_options(train, tr.model);

    DetectArgs de;
    auto* detect = app.add_subcommand("detect", "Flag change segments in telemetry series");
    add_common(detect, de.common);
    detect->add_option("--model", de.model, "Model file written by train")->required()->check(CLI::ExistingFile);
    detect->add_option("--input", de.inputs, "CSV files with columns t,value")
        ->required()
        ->check(CLI::ExistingFile);
    detect->add_flag("--trajectory", de.trajectory, "Also write the ensemble output per point");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Compare every method on a labeled test set");
    add_common(evaluate, ev.common);
    evaluate->add_option("--train", ev.train, "Training dataset directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    evaluate->add_option("--test", ev.test, "Test dataset directory")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--model", ev.model_file, "Use this model instead of training one")
        ->check(CLI::ExistingFile);
    add_model_options(evaluate, ev.model);
    evaluate->add_option("--ssa-window", ev.ssa_window, "Embedding window of the PCA baselines")
        ->check(CLI::PositiveNumber);
    evaluate->add_option("--ssa-rank", ev.ssa_rank, "Subspace rank; 0 picks by captured mass");
    evaluate->add_option("--ewma-smoothing", ev.ewma_smoothing, "Smoothing of the EWMA trend")
        ->check(CLI::Range(0.0, 1.0));
    evaluate->add_flag("--no-trend-table", ev.no_trend_table, "Skip the trend accuracy rows");

    try {
        auto merged = merge_config(args, app);
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report(err, "usage", e.what());
        return kExitUsage;
    } catch (const UsageError& e) {
        report(err, e.code(), e.what());
        return kExitUsage;
    } catch (const Error& e) {
        report(err, e.code(), e.what());
        return kExitFailure;
    }

    if (simulate->parsed()) {
        return guarded(err, [&] { run_simulate(sim); });
    }
    if (fgn->parsed()) {
        return guarded(err, [&] { run_fgn(fg); });
    }
    if (train->parsed()) {
        return guarded(err, [&] { run_train(tr); });
    }
    if (detect->parsed()) {
        return guarded(err, [&] { run_detect(de); });
    }
    return guarded(err, [&] { run_evaluate(ev); });
}

} // namespace lrdetect
