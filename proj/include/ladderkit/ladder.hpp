#pragma once

#include <span>
#include <string>
#include <vector>

#include "ladderkit/core_model.hpp"
#include "ladderkit/pareto.hpp"

namespace ladderkit {

struct Rung {
    double rate_kbps = 0.0;
    double vmaf = 0.0;
    int qp = 0;
    Resolution resolution = Resolution::p2160;
    bool below_front = false;  // target undercut the whole front; lowest point used

    friend bool operator==(const Rung&, const Rung&) = default;
};

struct Ladder {
    std::string sequence_id;
    std::vector<double> target_rates;
    std::vector<Rung> rungs;  // ascending rate

    friend bool operator==(const Ladder&, const Ladder&) = default;
};

/// Slope threshold used by default: 0.01 VMAF per Mbps, expressed per kbps.
inline constexpr double kDefaultEpsilonPerKbps = 0.01 / 1000.0;
inline constexpr double kDefaultVHigh = 97.0;

struct LadderParams {
    double r_min_kbps = 150.0;
    double r_max_kbps = 25000.0;
    double v_high = kDefaultVHigh;
    double epsilon_per_kbps = kDefaultEpsilonPerKbps;
};

/// Doubling rungs {r_min * 2^i <= r_max}.
std::vector<double> target_rates(double r_min_kbps, double r_max_kbps);

/// For each target the front point with the largest rate not above it (the
/// lowest front point, flagged, when none qualifies). Targets hitting an
/// already selected point are dropped.
std::vector<Rung> sample_front(const ParetoFront& pf, std::span<const double> targets);

/// Drops rung i when the previous kept rung exceeds v_high and the slope
/// (V_i - V_prev) / (R_i - R_prev) is at most epsilon.
std::vector<Rung> prune_saturated(std::span<const Rung> rungs, double v_high, double epsilon_per_kbps);

Ladder build_ladder(const ParetoFront& pf, std::span<const double> targets, double v_high = kDefaultVHigh,
                    double epsilon_per_kbps = kDefaultEpsilonPerKbps);

/// Low-to-high scan keeping the earlier rung of any conflict in rate, VMAF,
/// resolution or per-resolution QP ordering.
Ladder enforce_monotonicity(Ladder ladder);

/// Human-readable list of broken ladder invariants; empty when valid.
std::vector<std::string> ladder_violations(const Ladder& ladder);

}  // namespace ladderkit
