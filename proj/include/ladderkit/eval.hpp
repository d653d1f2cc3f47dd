#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/ladder.hpp"

namespace ladderkit {

struct RatePoint {
    double rate_kbps = 0.0;
    double vmaf = 0.0;
};

enum class BdFit { cubic, piecewise_linear };

struct BDResult {
    double bd_rate_percent = 0.0;
    double vmaf_lo = 0.0;  // overlap used for the integration
    double vmaf_hi = 0.0;
    BdFit test_fit = BdFit::cubic;
    BdFit reference_fit = BdFit::cubic;
    std::vector<std::string> diagnostics;
};

/// Average rate difference of test against reference over the common VMAF
/// range. Log-rate is fitted as a cubic in VMAF; sets with fewer than four
/// points, ill-conditioned fits or non-monotone cubics use a piecewise-linear
/// fit. Positive values mean the test set needs more rate.
BDResult bd_rate(std::span<const RatePoint> test, std::span<const RatePoint> reference);

std::vector<RatePoint> rate_points(const Ladder& ladder);

/// Percentage of reference rungs whose (resolution, QP) appears in the estimate.
double rl_hits(const Ladder& estimated, const Ladder& reference);

struct SequenceResult {
    std::string sequence_id;
    double bd_rate_percent = 0.0;
    double rl_hits_percent = 0.0;
    std::size_t tally = 0;
};

struct Histogram {
    std::vector<double> edges;  // bins + 1 edges
    std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, std::size_t bins);

struct CorpusReport {
    std::vector<SequenceResult> sequences;
    double mean_bd_rate = 0.0;
    double mad_bd_rate = 0.0;  // mean absolute deviation about the mean
    double mean_rl_hits = 0.0;
    std::size_t max_tally = 0;
    std::size_t rl_tally = 0;
    double encode_reduction_percent = 0.0;
    Histogram bd_histogram;
};

CorpusReport corpus_report(std::vector<SequenceResult> results, std::size_t rl_tally, std::size_t bins = 20);

double mean_of(std::span<const double> v);
double mad_of(std::span<const double> v);

void write_report_json(const CorpusReport& report, const std::filesystem::path& path);
void write_histogram_csv(const Histogram& h, const std::filesystem::path& path);

}  // namespace ladderkit
