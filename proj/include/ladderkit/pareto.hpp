#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/core_model.hpp"
#include "ladderkit/interp.hpp"

namespace ladderkit {

struct FrontPoint {
    double log_rate = 0.0;
    double vmaf = 0.0;
    int qp = 0;
    Resolution resolution = Resolution::p2160;
    double bitrate_kbps = 0.0;  // exact measured rate when the point is a real encode

    friend bool operator==(const FrontPoint&, const FrontPoint&) = default;
};

/// Non-dominated envelope, ascending in log-rate and strictly increasing in VMAF.
struct ParetoFront {
    std::vector<FrontPoint> points;
};

/// Filters the union of all curves to the non-dominated set. Exact ties in
/// (log_rate, vmaf) keep the higher resolution.
ParetoFront pareto_front(std::span<const std::vector<FrontPoint>> curves);
ParetoFront pareto_front(std::span<const FrontPoint> points);

/// Front points of a curve's measured samples.
std::vector<FrontPoint> front_points(const RQCurve& curve);
/// Front points of a fitted curve evaluated at every integer QP of its span.
std::vector<FrontPoint> front_points(const FittedCurve& curve);

enum class QpRounding { nearest, floor, ceil };

QpRounding parse_rounding(std::string_view text);

struct CrossoverPair {
    Resolution high_res = Resolution::p2160;
    Resolution low_res = Resolution::p1080;
    int qp_high_s = 0;   // high-QP end of the higher resolution
    int qp_low_s1 = 0;   // low-QP end of the lower resolution
    double log_rate = 0.0;       // crossing log-rate
    double qp_high_exact = 0.0;  // unrounded QPs at the crossing
    double qp_low_exact = 0.0;
};

struct CrossoverResult {
    std::optional<CrossoverPair> pair;
    std::string diagnostic;  // reason when no pair is reported
    std::vector<std::string> warnings;
};

/// Cross-over of two fitted curves of adjacent resolutions (high first).
/// Throws NoOverlapError when the rate spans do not overlap.
CrossoverResult crossover_qps(const FittedCurve& high, const FittedCurve& low, double grid_step = 0.1,
                              QpRounding rounding = QpRounding::nearest);

}  // namespace ladderkit
