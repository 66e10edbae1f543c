#include "lrdetect/evalkit.hpp"

#include "lrdetect/error.hpp"
#include "lrdetect/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrdetect {

RrmseResult rrmse(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw LengthMismatchError("rrmse: " + std::to_string(actual.size()) + " actual vs " +
                                  std::to_string(predicted.size()) + " predicted values");
    }
    RrmseResult out;
    double acc = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        if (std::isnan(predicted[k])) {
            ++out.excluded_missing;
            continue;
        }
        if (std::abs(actual[k]) < 1e-12) {
            ++out.excluded_zero;
            continue;
        }
        const double rel = (actual[k] - predicted[k]) / actual[k];
        acc += rel * rel;
        ++out.used;
    }
    if (out.used == 0) {
        throw DegenerateInputError("rrmse: no usable points");
    }
    out.value = std::sqrt(acc / static_cast<double>(out.used));
    return out;
}

std::vector<DetectionSegment> segments_from_statistic(std::span<const double> statistic, double threshold) {
    std::vector<DetectionSegment> out;
    bool open = false;
    for (std::size_t t = 0; t < statistic.size(); ++t) {
        const bool above = statistic[t] >= threshold;
        if (above && !open) {
            out.push_back({t, t, statistic[t]});
            open = true;
        } else if (above) {
            out.back().end = t;
            out.back().peak = std::max(out.back().peak, statistic[t]);
        } else {
            open = false;
        }
    }
    return out;
}

MatchResult match_detections(const std::vector<DetectionSegment>& segments, std::size_t true_first,
                             std::size_t true_last) {
    MatchResult out;
    for (const auto& s : segments) {
        if (s.end >= true_first && s.start <= true_last) {
            ++out.tp;
        } else {
            ++out.fp;
        }
    }
    out.detected = out.tp > 0;
    return out;
}

std::vector<double> range_threshold_grid(const std::vector<ScoredPath>& paths, std::size_t points) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& p : paths) {
        for (double s : p.statistic) {
            if (std::isfinite(s)) {
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
        }
    }
    if (!(lo <= hi)) {
        throw DegenerateInputError("no finite statistic values to span a threshold grid");
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    grid.back() = hi;
    return grid;
}

std::vector<double> unit_threshold_grid(std::size_t points) {
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    }
    return grid;
}

namespace {

struct LabelSpan {
    bool has_change = false;
    std::size_t first = 0;
    std::size_t last = 0;
};

LabelSpan label_span(const ScoredPath& p) {
    if (p.statistic.size() != p.labels.size()) {
        throw LengthMismatchError("scored path: statistic and labels differ in length");
    }
    LabelSpan span;
    for (std::size_t t = 0; t < p.labels.size(); ++t) {
        if (p.labels[t]) {
            if (!span.has_change) {
                span.first = t;
                span.has_change = true;
            }
            span.last = t;
        }
    }
    return span;
}

} // namespace

std::vector<PrPoint> pr_curve(const std::vector<ScoredPath>& paths, const std::vector<double>& thresholds) {
    std::vector<LabelSpan> spans;
    std::size_t with_change = 0;
    for (const auto& p : paths) {
        spans.push_back(label_span(p));
        with_change += spans.back().has_change ? 1 : 0;
    }
    std::vector<PrPoint> curve;
    curve.reserve(thresholds.size());
    for (double h : thresholds) {
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t detected = 0;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            const auto segments = segments_from_statistic(paths[i].statistic, h);
            if (spans[i].has_change) {
                const auto m = match_detections(segments, spans[i].first, spans[i].last);
                tp += m.tp;
                fp += m.fp;
                detected += m.detected ? 1 : 0;
            } else {
                fp += segments.size();
            }
        }
        PrPoint point;
        point.threshold = h;
        point.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        point.recall = with_change == 0 ? 0.0 : static_cast<double>(detected) / static_cast<double>(with_change);
        curve.push_back(point);
    }
    return curve;
}

std::vector<ArerPoint> arer_curve(const std::vector<ScoredPath>& paths, const std::vector<double>& thresholds,
                                  double c_inf, double c_zero) {
    std::vector<ArerPoint> curve;
    curve.reserve(thresholds.size());
    for (double h : thresholds) {
        double fpr = 0.0;
        double fnr = 0.0;
        std::size_t used = 0;
        for (const auto& p : paths) {
            label_span(p);
            std::size_t normal = 0;
            std::size_t abnormal = 0;
            std::size_t alarms = 0;
            std::size_t silences = 0;
            for (std::size_t t = 0; t < p.labels.size(); ++t) {
                const bool alarm = p.statistic[t] >= h;
                if (p.labels[t]) {
                    ++abnormal;
                    silences += alarm ? 0 : 1;
                } else {
                    ++normal;
                    alarms += alarm ? 1 : 0;
                }
            }
            if (normal == 0 || abnormal == 0) {
                continue;
            }
            fpr += static_cast<double>(alarms) / static_cast<double>(normal);
            fnr += static_cast<double>(silences) / static_cast<double>(abnormal);
            ++used;
        }
        if (used == 0) {
            throw DegenerateInputError("no path has both normal and abnormal points");
        }
        curve.push_back({h, c_inf * fpr / static_cast<double>(used), c_zero * fnr / static_cast<double>(used)});
    }
    return curve;
}

double pr_auc(std::vector<PrPoint> curve) {
    if (curve.empty()) {
        return 0.0;
    }
    std::stable_sort(curve.begin(), curve.end(), [](const PrPoint& a, const PrPoint& b) {
        return a.threshold > b.threshold;
    });
    double area = curve.front().recall * curve.front().precision;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].recall - curve[i - 1].recall) * 0.5 * (curve[i].precision + curve[i - 1].precision);
    }
    return area;
}

double arer_auc(std::vector<ArerPoint> curve, double c_inf, double c_zero) {
    curve.push_back({std::numeric_limits<double>::infinity(), 0.0, c_zero});
    curve.push_back({-std::numeric_limits<double>::infinity(), c_inf, 0.0});
    std::stable_sort(curve.begin(), curve.end(), [](const ArerPoint& a, const ArerPoint& b) {
        return a.afpr < b.afpr || (a.afpr == b.afpr && a.afnr > b.afnr);
    });
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].afpr - curve[i - 1].afpr) * 0.5 * (curve[i].afnr + curve[i - 1].afnr);
    }
    return area;
}

std::string render_pr_csv(const std::vector<PrPoint>& curve) {
    std::vector<double> h, p, r;
    for (const auto& c : curve) {
        h.push_back(c.threshold);
        p.push_back(c.precision);
        r.push_back(c.recall);
    }
    return render_csv({"threshold", "precision", "recall"}, {h, p, r});
}

std::string render_arer_csv(const std::vector<ArerPoint>& curve) {
    std::vector<double> h, fp, fn;
    for (const auto& c : curve) {
        h.push_back(c.threshold);
        fp.push_back(c.afpr);
        fn.push_back(c.afnr);
    }
    return render_csv({"threshold", "afpr", "afnr"}, {h, fp, fn});
}

} // namespace lrdetect
