#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ladderkit/core_model.hpp"

namespace ladderkit {

/// Luma plane of one frame, row-major.
struct FrameLuma {
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    std::vector<std::uint16_t> samples;

    FrameLuma() = default;
    FrameLuma(int w, int h, int depth, std::uint16_t fill = 0);

    int max_value() const noexcept { return (1 << bit_depth) - 1; }
    std::uint16_t at(int x, int y) const noexcept { return samples[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t& at(int x, int y) noexcept { return samples[static_cast<std::size_t>(y) * width + x]; }
};

/// Throws ValidationError when sizes or sample values are inconsistent.
void check_frame(const FrameLuma& f);

inline constexpr int kFeatureCount = 17;

/// Column names of F1..F17 in the feature table.
const std::array<std::string, kFeatureCount>& feature_names();

struct FeatureVector {
    std::string sequence_id;
    std::array<double, kFeatureCount> values{};
    std::vector<std::string> flags;  // degenerate statistics forced to a fixed value
};

struct GlcmDescriptors {
    double contrast = 0.0;
    double correlation = 0.0;
    double homogeneity = 0.0;
    double energy = 0.0;
    double entropy = 0.0;
    bool correlation_degenerate = false;
};

struct Offset {
    int dx = 0;
    int dy = 0;
};

inline constexpr std::array<Offset, 4> kGlcmOffsets = {{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};

/// Quantizes luma uniformly over the full code range.
int quantize_level(std::uint16_t v, int bit_depth, int levels) noexcept;

/// Symmetric, normalized co-occurrence matrix (levels x levels, row-major).
std::vector<double> glcm_matrix(const FrameLuma& frame, int levels, std::span<const Offset> offsets);

GlcmDescriptors glcm_descriptors(const FrameLuma& frame, int levels = 32,
                                 std::span<const Offset> offsets = kGlcmOffsets);

/// Mean, std, skewness, kurtosis (excess) and histogram entropy of a sample.
struct DistributionStats {
    double mean = 0.0;
    double std = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double entropy = 0.0;
    bool degenerate = false;  // zero spread: skewness and kurtosis forced to 0
};

/// Population moments; entropy in bits of a bins-bin histogram over [lo, hi].
DistributionStats distribution_stats(std::span<const double> values, double lo = -1.0, double hi = 1.0,
                                     int bins = 64);

/// Zero-lag normalized correlation of co-located blocks of two frames.
std::vector<double> tc_values(const FrameLuma& a, const FrameLuma& b, int block, bool* degenerate = nullptr);

/// Temporal coherence statistics, averaged over consecutive frame pairs.
DistributionStats tc_stats(std::span<const FrameLuma> frames, int block = 32);

/// Global normalized cross-correlation of b displaced by (dx, dy) against a,
/// over the overlapping region.
double ncc_at(const FrameLuma& a, const FrameLuma& b, int dx, int dy, bool* degenerate = nullptr);

/// NCC over every displacement of [-radius, radius]^2, row by row (dy outer).
std::vector<double> ncc_values(const FrameLuma& a, const FrameLuma& b, int radius, bool* degenerate = nullptr);

DistributionStats ncc_stats(std::span<const FrameLuma> frames, int radius = 8);

/// Separable Lanczos-3 resampling with normalized weights and edge clamping.
FrameLuma lanczos3_resample(const FrameLuma& frame, int out_w, int out_h);

double lanczos3_kernel(double x) noexcept;

double mse(const FrameLuma& a, const FrameLuma& b);

/// Down- then up-scaling error of a native 2160p frame.
double rsmse(const FrameLuma& frame, Resolution target);

/// Same operation for any input size; the target size is scaled from 2160p.
double rsmse_scaled(const FrameLuma& frame, Resolution target);

struct YuvFormat {
    int width = 3840;
    int height = 2160;
    int bit_depth = 10;
    std::optional<int> frames;  // all frames of the file when unset
};

/// Reads the luma planes of a planar 4:2:0 file (8-bit, or 16-bit little-endian words).
std::vector<FrameLuma> read_yuv420_luma(const std::filesystem::path& path, const YuvFormat& fmt);

/// Writes luma planes with mid-grey chroma, mainly for fixtures.
void write_yuv420(const std::filesystem::path& path, std::span<const FrameLuma> frames);

struct FeatureConfig {
    int glcm_levels = 32;
    int tc_block = 32;
    int ncc_radius = 8;
    int ncc_max_width = 960;  // NCC runs on luma downscaled to at most this width
};

FeatureVector extract_features(const std::string& sequence_id, std::span<const FrameLuma> frames,
                               const FeatureConfig& cfg = {});

/// Feature table CSV: sequence column followed by the F1..F17 columns.
void save_feature_table(const std::vector<FeatureVector>& rows, const std::filesystem::path& path);
std::vector<FeatureVector> load_feature_table(const std::filesystem::path& path);

}  // namespace ladderkit
