#include "ladderkit/kneedle.hpp"

#include <cmath>

#include "ladderkit/errors.hpp"

namespace ladderkit {

std::optional<std::size_t> kneedle(std::span<const Point2> points, double sensitivity, KneeShape) {
    const std::size_t n = points.size();
    if (n < 3) throw InsufficientDataError("kneedle needs at least 3 points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(points[i].x > points[i - 1].x)) throw ValidationError("kneedle: x must be strictly increasing");

    double y_min = points[0].y, y_max = points[0].y;
    for (const auto& p : points) {
        y_min = std::min(y_min, p.y);
        y_max = std::max(y_max, p.y);
    }
    const double x_min = points.front().x, x_span = points.back().x - x_min;
    const double y_span = y_max - y_min;
    if (!(y_span > 0.0)) return std::nullopt;

    std::vector<double> xn(n), diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        xn[i] = (points[i].x - x_min) / x_span;
        diff[i] = (points[i].y - y_min) / y_span - xn[i];
    }
    // Mean spacing of the normalised abscissa.
    const double mean_dx = (xn.back() - xn.front()) / static_cast<double>(n - 1);

    auto is_local_max = [&](std::size_t i) {
        return i > 0 && i + 1 < n && diff[i] > diff[i - 1] && diff[i] >= diff[i + 1];
    };

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!is_local_max(i)) continue;
        const double threshold = diff[i] - sensitivity * mean_dx;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (diff[j] <= threshold) return i;
            if (is_local_max(j) && diff[j] > diff[i]) break;  // superseded by a higher candidate
        }
    }
    return std::nullopt;
}

KneePlane parse_knee_plane(std::string_view text) {
    if (text == "log_rate" || text == "log-rate") return KneePlane::log_rate_vmaf;
    if (text == "rate") return KneePlane::rate_vmaf;
    if (text == "qp") return KneePlane::qp_vmaf;
    throw ConfigError("unknown knee plane '" + std::string(text) + "'");
}

KneePoint knee_qp(const FittedCurve& curve, double sensitivity, KneePlane plane) {
    const int lo = static_cast<int>(std::ceil(curve.log_rate.x_min()));
    const int hi = static_cast<int>(std::floor(curve.log_rate.x_max()));
    std::vector<Point2> pts;
    std::vector<int> qps;
    // Increasing rate means decreasing QP.
    for (int qp = hi; qp >= lo; --qp) {
        const double lr = curve.log_rate(qp);
        double x = lr;
        if (plane == KneePlane::rate_vmaf) x = std::exp(lr);
        if (plane == KneePlane::qp_vmaf) x = -qp;
        pts.push_back({x, curve.vmaf(qp)});
        qps.push_back(qp);
    }
    const auto idx = kneedle(pts, sensitivity);
    if (!idx)
        throw NoKneeError("no knee on " + curve.sequence_id + " " + std::string(label(curve.resolution)));
    const int qp = qps[*idx];
    return {qp, curve.log_rate(qp), curve.vmaf(qp), curve.resolution};
}

int knee_prior_qp(Resolution r) noexcept {
    switch (r) {
        case Resolution::p2160: return 30;
        case Resolution::p1080: return 25;
        case Resolution::p720: return 25;
        case Resolution::p540: return 23;
    }
    return 30;
}

KneePoint knee_qp_or_prior(const FittedCurve& curve, double sensitivity, KneePlane plane,
                           std::vector<std::string>& warnings) {
    try {
        return knee_qp(curve, sensitivity, plane);
    } catch (const NoKneeError& e) {
        const int qp = curve.log_rate.x_min() <= knee_prior_qp(curve.resolution) &&
                               curve.log_rate.x_max() >= knee_prior_qp(curve.resolution)
                           ? knee_prior_qp(curve.resolution)
                           : static_cast<int>(std::lround(curve.log_rate.x_min()));
        warnings.push_back(std::string(e.what()) + "; using prior knee qp " + std::to_string(qp));
        return {qp, curve.log_rate(qp), curve.vmaf(qp), curve.resolution};
    }
}

}  // namespace ladderkit
