#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ladderkit/encode_backend.hpp"
#include "ladderkit/estimators.hpp"
#include "ladderkit/ladder.hpp"

namespace ladderkit {

/// Ladder JSON: {sequence, rungs: [{rate_kbps, vmaf, qp, resolution}]}.
void save_ladder_json(const Ladder& ladder, const std::filesystem::path& path);
Ladder load_ladder_json(const std::filesystem::path& path);

/// Every *.json ladder in a directory, keyed by sequence. A run directory
/// holding a ladders/ subdirectory is accepted as well.
std::map<std::string, Ladder> load_ladder_dir(const std::filesystem::path& dir);

/// CSV mirror: sequence,rung,rate_kbps,vmaf,qp,resolution.
void save_ladders_csv(const std::vector<Ladder>& ladders, const std::filesystem::path& path);
std::vector<Ladder> load_ladders_csv(const std::filesystem::path& path);

using KneeTable = std::map<std::string, PerResolution<double>>;
using CrossoverTable = std::map<std::string, CrossoverQps>;

/// sequence,knee_2160p,knee_1080p,knee_720p,knee_540p
void save_knee_table(const KneeTable& knees, const std::filesystem::path& path);
KneeTable load_knee_table(const std::filesystem::path& path);

/// sequence,qp_high_2160p,qp_low_1080p,qp_high_1080p,qp_low_720p,qp_high_720p,qp_low_540p
void save_crossover_table(const CrossoverTable& xs, const std::filesystem::path& path);
CrossoverTable load_crossover_table(const std::filesystem::path& path);

/// sequence,tally
void save_tally_csv(const std::map<std::string, std::size_t>& tally, const std::filesystem::path& path);
std::map<std::string, std::size_t> load_tally_csv(const std::filesystem::path& path);

/// Ground-truth curve parameters of a synthetic corpus.
void save_synthetic_params(const std::map<std::string, SyntheticCurveParams>& params,
                           const std::filesystem::path& path);
std::map<std::string, SyntheticCurveParams> load_synthetic_params(const std::filesystem::path& path);

/// Per-run estimator report: method, configuration, tally, ladder and QP sets.
void save_estimate_report(const EstimateResult& result, const MethodConfig& cfg, const std::filesystem::path& path);

}  // namespace ladderkit
