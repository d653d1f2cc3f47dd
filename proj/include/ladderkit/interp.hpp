#pragma once

#include <span>
#include <string>
#include <vector>

#include "ladderkit/core_model.hpp"

namespace ladderkit {

/// Fritsch-Carlson limited slopes (harmonic mean in the interior, shape-preserving
/// three-point rule at the ends). Needs >= 2 knots with strictly increasing x.
std::vector<double> pchip_slopes(std::span<const double> x, std::span<const double> y);

/// Monotone piecewise cubic Hermite interpolant. Evaluation outside
/// [x_min, x_max] is a DomainError; there is no extrapolation.
class InterpolatedCurve {
public:
    InterpolatedCurve() = default;
    InterpolatedCurve(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    std::vector<double> operator()(std::span<const double> xs) const;

    /// x such that f(x) = value, by bisection; the curve must be monotone.
    double inverse(double value, double tol = 1e-9) const;

    double x_min() const noexcept { return x_.front(); }
    double x_max() const noexcept { return x_.back(); }
    const std::vector<double>& knots_x() const noexcept { return x_; }
    const std::vector<double>& knots_y() const noexcept { return y_; }
    const std::vector<double>& slopes() const noexcept { return m_; }

private:
    std::vector<double> x_, y_, m_;
};

inline double pchip_eval(const InterpolatedCurve& curve, double x) { return curve(x); }
inline std::vector<double> pchip_eval(const InterpolatedCurve& curve, std::span<const double> xs) {
    return curve(xs);
}

/// Both coordinates of a rate-quality curve interpolated against QP.
struct FittedCurve {
    std::string sequence_id;
    Resolution resolution = Resolution::p2160;
    InterpolatedCurve log_rate;
    InterpolatedCurve vmaf;

    int qp_min() const noexcept { return static_cast<int>(log_rate.x_min()); }
    int qp_max() const noexcept { return static_cast<int>(log_rate.x_max()); }
};

FittedCurve fit_rq_curve(std::span<const EncodeRecord> records);
FittedCurve fit_rq_curve(const RQCurve& curve);

/// Point of a densified curve.
struct CurvePoint {
    double qp = 0.0;
    double log_rate = 0.0;
    double vmaf = 0.0;
};

/// Evaluates the fitted curve on qp_min, qp_min + step, ..., qp_max.
std::vector<CurvePoint> densify(const FittedCurve& curve, double step);

}  // namespace ladderkit
