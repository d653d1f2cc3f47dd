#pragma once

#include <array>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ladderkit/core_model.hpp"
#include "ladderkit/encode_backend.hpp"
#include "ladderkit/kneedle.hpp"
#include "ladderkit/ladder.hpp"
#include "ladderkit/pareto.hpp"

namespace ladderkit {

enum class Method { rl, nil, cil, fl };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view text);

struct FlParams {
    int qp_m = 30;
    int delta = 5;
};

struct MethodConfig {
    Method method = Method::cil;
    int cil_n = 5;
    PerResolution<int> cil_offsets;          // t_s
    PerResolution<std::vector<int>> nil_qps;  // seven per resolution by default
    FlParams fl_2160{30, 5};
    FlParams fl_540{38, 2};
    QpRange qp_range;
    LadderParams ladder;
    double knee_sensitivity = 1.0;
    KneePlane knee_plane = KneePlane::log_rate_vmaf;

    MethodConfig();
    std::vector<double> targets() const { return target_rates(ladder.r_min_kbps, ladder.r_max_kbps); }
};

/// Maximum number of distinct encodes a method may request for one sequence.
std::size_t method_budget(Method m, const MethodConfig& cfg, std::size_t n_targets);

/// Predicted cross-over QPs in chain order:
/// (2160p high, 1080p low), (1080p high, 720p low), (720p high, 540p low).
struct CrossoverQps {
    std::array<double, 6> values{};

    double qp_high(Resolution r) const;  // high-QP end of r (r > 540p)
    double qp_low(Resolution r) const;   // low-QP end of r (r < 2160p)
};

struct EstimateResult {
    std::string sequence_id;
    Method method = Method::rl;
    Ladder ladder;
    std::size_t tally = 0;  // distinct encodes requested by this run
    PerResolution<std::vector<int>> initial_qps;
    std::vector<std::string> warnings;
};

/// Exhaustive reference ladder over every QP of the range and all resolutions.
EstimateResult estimate_rl(EncodeSession& session, const std::string& sequence, const MethodConfig& cfg);

/// Naive interpolation: fixed QPs per resolution, PCHIP densification, rung encodes.
EstimateResult estimate_nil(EncodeSession& session, const std::string& sequence, const MethodConfig& cfg);

/// n QPs evenly spread over [knee + offset, qp_max], rounded, de-duplicated.
std::vector<int> cil_qp_set(int knee_qp, int offset, int n, int qp_max, QpRange range = {});

/// Knee-guided interpolation; knees are real-valued per-resolution QPs.
EstimateResult estimate_cil(EncodeSession& session, const std::string& sequence,
                            const PerResolution<double>& knees, const MethodConfig& cfg);

/// Extra QP that completes a two-point line: predicted - delta when the
/// prediction is at least qp_m, predicted + delta otherwise.
int fl_extra_qp(int predicted_qp, int qp_m, int delta, QpRange range = {});

/// Cross-over-driven ladder with per-resolution linear QP(log-rate) models.
EstimateResult estimate_fl(EncodeSession& session, const std::string& sequence, const CrossoverQps& crossovers,
                           const MethodConfig& cfg);

/// Ground-truth knees of a sequence: Kneedle on curves fitted to all measured samples.
PerResolution<double> measured_knees(const MeasurementSet& set, const std::string& sequence,
                                     const MethodConfig& cfg, std::vector<std::string>* warnings = nullptr);

/// Ground-truth cross-overs of a sequence; throws DegenerateError when a pair has none.
CrossoverQps measured_crossovers(const MeasurementSet& set, const std::string& sequence,
                                 double grid_step = 0.1, QpRounding rounding = QpRounding::nearest);

}  // namespace ladderkit
