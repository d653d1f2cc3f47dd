#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "ladderkit/core_model.hpp"

namespace ladderkit {

/// One resolution of the parametric rate-quality model:
/// log_rate(qp) = a - b*qp + c*(qp - 30)^2 and V(logR) = v_max / (1 + exp(-(logR - mu) / sigma_s)).
/// The curvature c keeps log-rate from being exactly linear in QP.
struct LogisticCurve {
    double v_max = 100.0;
    double mu = 8.0;
    double sigma_s = 0.7;
    double a = 12.0;
    double b = 0.14;
    double c = 0.0;

    static constexpr double kPivotQp = 30.0;
    static constexpr double kMaxQp = 51.0;  // log-rate must fall up to here

    double log_rate(double qp) const noexcept { return a - b * qp + c * (qp - kPivotQp) * (qp - kPivotQp); }
    double vmaf_at_log_rate(double log_rate) const noexcept;
    double vmaf(double qp) const noexcept { return vmaf_at_log_rate(log_rate(qp)); }

    friend bool operator==(const LogisticCurve&, const LogisticCurve&) = default;
};

struct SyntheticCurveParams {
    PerResolution<LogisticCurve> curves;
    double noise_sigma = 0.0;  // additive VMAF noise
    std::uint64_t seed = 0;

    friend bool operator==(const SyntheticCurveParams&, const SyntheticCurveParams&) = default;
};

/// Throws ConfigError for non-positive slopes/scales or v_max outside (0,100].
void check_params(const SyntheticCurveParams& p);

/// Deterministic record for one triple; the noise draw depends only on
/// (seed, sequence, resolution, qp) so request order never matters.
EncodeRecord evaluate_synthetic(const SyntheticCurveParams& p, const std::string& sequence, Resolution r,
                                int qp);

class EncodeBackend {
public:
    virtual ~EncodeBackend() = default;
    virtual EncodeRecord encode(const std::string& sequence, Resolution r, int qp) = 0;
    virtual std::string kind() const = 0;
};

class ReplayBackend final : public EncodeBackend {
public:
    explicit ReplayBackend(std::shared_ptr<const MeasurementSet> set) : set_(std::move(set)) {}
    EncodeRecord encode(const std::string& sequence, Resolution r, int qp) override;
    std::string kind() const override { return "replay"; }

private:
    std::shared_ptr<const MeasurementSet> set_;
};

class SyntheticBackend final : public EncodeBackend {
public:
    explicit SyntheticBackend(std::map<std::string, SyntheticCurveParams> params);
    EncodeRecord encode(const std::string& sequence, Resolution r, int qp) override;
    std::string kind() const override { return "synthetic"; }

    const std::map<std::string, SyntheticCurveParams>& params() const noexcept { return params_; }

private:
    std::map<std::string, SyntheticCurveParams> params_;
};

/// Runs `<program> <sequence> <resolution_label> <qp>`; the program prints
/// `bitrate_kbps vmaf` on stdout.
class ExternalCommandBackend final : public EncodeBackend {
public:
    explicit ExternalCommandBackend(std::string program) : program_(std::move(program)) {}
    EncodeRecord encode(const std::string& sequence, Resolution r, int qp) override;
    std::string kind() const override { return "external"; }

    static EncodeRecord parse_output(const std::string& output, const std::string& sequence, Resolution r,
                                     int qp);

private:
    std::string program_;
};

/// Caching front of a backend that counts distinct requested triples.
/// Thread-safe; concurrent requests for one triple share a single backend call.
class EncodeSession {
public:
    explicit EncodeSession(std::shared_ptr<EncodeBackend> backend, QpRange range = {});

    EncodeRecord encode(const std::string& sequence, Resolution r, int qp);

    /// Distinct triples requested through this session.
    std::size_t tally() const;
    std::size_t tally(const std::string& sequence) const;
    /// Calls that actually reached the backend (preloaded entries excluded).
    std::size_t backend_calls() const;

    /// Seeds the cache with records from an earlier run.
    void preload(const std::vector<EncodeRecord>& records);
    std::vector<EncodeRecord> cached_records() const;
    void save_cache(const std::filesystem::path& csv_path) const;

    const QpRange& qp_range() const noexcept { return range_; }
    std::string backend_kind() const { return backend_->kind(); }

private:
    using Key = std::tuple<std::string, Resolution, int>;

    std::shared_ptr<EncodeBackend> backend_;
    QpRange range_;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_future<EncodeRecord>> requested_;
    std::map<Key, EncodeRecord> preloaded_;
    std::map<std::string, std::size_t> per_sequence_;
    std::size_t tally_ = 0;
    std::size_t backend_calls_ = 0;
};

struct UniformRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Distribution of sequence parameters for the synthetic corpus. Quality curves
/// are specified in QP space (centre and width of the logistic) and converted to
/// the log-rate parametrisation. Rate offsets and peak qualities of the lower
/// resolutions follow from a sampled crossing point with the next higher
/// resolution: the QP of the higher one and the QP gap to the lower one.
struct ParamSampler {
    UniformRange rate_qp30_2160_kbps{9000.0, 22000.0};  // sampled log-uniformly
    UniformRange slope{0.12, 0.16};                        // b, shared by the resolutions
    UniformRange curvature{0.001, 0.0025};                 // c, shared by the resolutions
    PerResolution<UniformRange> centre_qp{{{{29.5, 32.5}, {32.5, 35.5}, {31.5, 34.5}, {39.5, 42.5}}}};
    PerResolution<UniformRange> width_qp{{{{5.5, 6.5}, {5.0, 6.0}, {4.5, 5.5}, {4.5, 5.5}}}};
    UniformRange v_max_2160{97.5, 100.0};
    // indexed by the higher resolution of each adjacent pair
    PerResolution<UniformRange> crossover_qp{{{{0.0, 0.0}, {37.0, 40.0}, {31.0, 34.0}, {30.0, 33.0}}}};
    PerResolution<UniformRange> crossover_gap{{{{0.0, 0.0}, {1.0, 2.5}, {1.5, 3.0}, {6.0, 8.0}}}};
    double min_v_max = 20.0;
    double noise_sigma = 0.0;
    int max_rejections = 10000;
};

/// True when each adjacent pair of noise-free curves has exactly one crossing
/// inside the shared rate span of the QP range.
bool has_single_crossovers(const SyntheticCurveParams& p, QpRange range = {});

struct SyntheticCorpus {
    MeasurementSet measurements;
    std::map<std::string, SyntheticCurveParams> params;  // ground truth per sequence
};

/// Samples n sequences and evaluates them on every QP of the range. Draws whose
/// adjacent-resolution curves do not cross exactly once inside the QP range are
/// rejected, so every sequence has a full set of cross-overs.
SyntheticCorpus generate_corpus(int n_sequences, const ParamSampler& sampler, std::uint64_t seed,
                                QpRange range = {});

std::string sequence_name(int index, int total);

}  // namespace ladderkit
