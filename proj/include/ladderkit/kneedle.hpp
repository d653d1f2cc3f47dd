#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/core_model.hpp"
#include "ladderkit/interp.hpp"

namespace ladderkit {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

enum class KneeShape { concave_increasing };

/// Kneedle knee detection. Points must be sorted by strictly increasing x.
/// Returns the index of the first confirmed knee, or nullopt when the
/// difference curve has no confirmed local maximum.
std::optional<std::size_t> kneedle(std::span<const Point2> points, double sensitivity = 1.0,
                                   KneeShape shape = KneeShape::concave_increasing);

/// Plane on which rate-quality knees are detected.
enum class KneePlane { log_rate_vmaf, rate_vmaf, qp_vmaf };

KneePlane parse_knee_plane(std::string_view text);

struct KneePoint {
    int qp = 0;
    double log_rate = 0.0;
    double vmaf = 0.0;
    Resolution resolution = Resolution::p2160;
};

/// Knee of a fitted curve evaluated at every integer QP of its span. Throws
/// NoKneeError when Kneedle finds nothing.
KneePoint knee_qp(const FittedCurve& curve, double sensitivity = 1.0,
                  KneePlane plane = KneePlane::log_rate_vmaf);

/// Typical knee QP per resolution, used as the fallback for curves without a knee.
int knee_prior_qp(Resolution r) noexcept;

/// knee_qp, falling back to the resolution prior with a warning.
KneePoint knee_qp_or_prior(const FittedCurve& curve, double sensitivity, KneePlane plane,
                           std::vector<std::string>& warnings);

}  // namespace ladderkit
