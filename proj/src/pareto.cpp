#include "ladderkit/pareto.hpp"

#include <algorithm>
#include <cmath>

#include "ladderkit/errors.hpp"

namespace ladderkit {

ParetoFront pareto_front(std::span<const FrontPoint> points) {
    if (points.empty()) throw ValidationError("pareto_front: no points");
    std::vector<FrontPoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), [](const FrontPoint& a, const FrontPoint& b) {
        if (a.log_rate != b.log_rate) return a.log_rate < b.log_rate;
        if (a.vmaf != b.vmaf) return a.vmaf > b.vmaf;
        if (a.resolution != b.resolution) return a.resolution > b.resolution;
        return a.qp < b.qp;
    });
    ParetoFront pf;
    for (const auto& p : sorted)
        if (pf.points.empty() || p.vmaf > pf.points.back().vmaf) pf.points.push_back(p);
    return pf;
}

ParetoFront pareto_front(std::span<const std::vector<FrontPoint>> curves) {
    std::vector<FrontPoint> all;
    for (const auto& c : curves) all.insert(all.end(), c.begin(), c.end());
    return pareto_front(std::span<const FrontPoint>(all));
}

std::vector<FrontPoint> front_points(const RQCurve& curve) {
    std::vector<FrontPoint> out;
    out.reserve(curve.samples.size());
    for (const auto& s : curve.samples) out.push_back({s.log_rate, s.vmaf, s.qp, curve.resolution, s.bitrate_kbps});
    return out;
}

std::vector<FrontPoint> front_points(const FittedCurve& curve) {
    std::vector<FrontPoint> out;
    const int lo = static_cast<int>(std::ceil(curve.log_rate.x_min()));
    const int hi = static_cast<int>(std::floor(curve.log_rate.x_max()));
    for (int qp = lo; qp <= hi; ++qp) {
        const double lr = curve.log_rate(qp);
        out.push_back({lr, curve.vmaf(qp), qp, curve.resolution, std::exp(lr)});
    }
    return out;
}

QpRounding parse_rounding(std::string_view text) {
    if (text == "nearest") return QpRounding::nearest;
    if (text == "floor") return QpRounding::floor;
    if (text == "ceil") return QpRounding::ceil;
    throw ConfigError("unknown rounding '" + std::string(text) + "'");
}

namespace {

int round_qp(double qp, QpRounding mode) {
    switch (mode) {
        case QpRounding::floor: return static_cast<int>(std::floor(qp + 1e-9));
        case QpRounding::ceil: return static_cast<int>(std::ceil(qp - 1e-9));
        case QpRounding::nearest: break;
    }
    return static_cast<int>(std::lround(qp));
}

// VMAF of a fitted curve at a given log-rate, via the inverse of qp -> log_rate.
double vmaf_at(const FittedCurve& c, double log_rate) { return c.vmaf(c.log_rate.inverse(log_rate)); }

}  // namespace

CrossoverResult crossover_qps(const FittedCurve& high, const FittedCurve& low, double grid_step,
                              QpRounding rounding) {
    if (!(grid_step > 0.0)) throw DomainError("crossover grid step must be positive");
    if (lower_neighbour(high.resolution) != low.resolution)
        throw ValidationError("crossover_qps: resolutions must be adjacent, higher first");

    auto span_of = [](const FittedCurve& c) {
        const double a = c.log_rate(c.log_rate.x_min()), b = c.log_rate(c.log_rate.x_max());
        return std::pair{std::min(a, b), std::max(a, b)};
    };
    const auto [h_lo, h_hi] = span_of(high);
    const auto [l_lo, l_hi] = span_of(low);
    const double lo = std::max(h_lo, l_lo), hi = std::min(h_hi, l_hi);
    if (!(lo < hi)) throw NoOverlapError("crossover_qps: rate spans do not overlap");

    // Shared log-rate grid: both densified traces restricted to the overlap.
    std::vector<double> grid{lo, hi};
    for (const auto* c : {&high, &low})
        for (const auto& p : densify(*c, grid_step))
            if (p.log_rate > lo && p.log_rate < hi) grid.push_back(p.log_rate);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> diff;
    diff.reserve(grid.size());
    double max_abs = 0.0;
    for (double r : grid) {
        diff.push_back(vmaf_at(high, r) - vmaf_at(low, r));
        max_abs = std::max(max_abs, std::abs(diff.back()));
    }

    CrossoverResult result;
    if (max_abs < 1e-9) {
        result.diagnostic = "degenerate: curves coincide";
        return result;
    }

    // Sign changes, treating exact zeros as belonging to the following sample.
    std::vector<std::size_t> flips;
    int last_sign = 0;
    std::size_t last_idx = 0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        const int s = (diff[i] > 0.0) - (diff[i] < 0.0);
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) flips.push_back(last_idx);
        last_sign = s;
        last_idx = i;
    }
    if (flips.empty()) {
        result.diagnostic = "dominated: one curve is above the other over the shared span";
        return result;
    }
    if (flips.size() > 1)
        result.warnings.push_back("multiple intersections (" + std::to_string(flips.size()) +
                                  "); using the highest-rate crossing");

    // Bracket [grid[i], next non-zero sample] around the highest crossing.
    const std::size_t i = flips.back();
    std::size_t j = i + 1;
    while (diff[j] == 0.0) ++j;
    double a = grid[i], b = grid[j];
    const double fa = diff[i];
    while (b - a > 1e-12) {
        const double m = 0.5 * (a + b);
        const double fm = vmaf_at(high, m) - vmaf_at(low, m);
        if (fm == 0.0) {
            a = b = m;
            break;
        }
        if ((fm > 0.0) == (fa > 0.0))
            a = m;
        else
            b = m;
    }
    const double r_star = 0.5 * (a + b);

    CrossoverPair pair;
    pair.high_res = high.resolution;
    pair.low_res = low.resolution;
    pair.log_rate = r_star;
    pair.qp_high_exact = high.log_rate.inverse(r_star);
    pair.qp_low_exact = low.log_rate.inverse(r_star);
    pair.qp_high_s = round_qp(pair.qp_high_exact, rounding);
    pair.qp_low_s1 = round_qp(pair.qp_low_exact, rounding);
    result.pair = pair;
    return result;
}

}  // namespace ladderkit
