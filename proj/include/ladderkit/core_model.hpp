#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ladderkit {

// Ordered lowest to highest so that comparison operators follow spatial size.
enum class Resolution : int { p540 = 0, p720 = 1, p1080 = 2, p2160 = 3 };

inline constexpr std::array<Resolution, 4> kResolutions = {
    Resolution::p540, Resolution::p720, Resolution::p1080, Resolution::p2160};

// Highest resolution first; the order of sequential prediction and cross-over pairs.
inline constexpr std::array<Resolution, 4> kResolutionsDescending = {
    Resolution::p2160, Resolution::p1080, Resolution::p720, Resolution::p540};

constexpr std::size_t index_of(Resolution r) noexcept { return static_cast<std::size_t>(r); }

std::string_view label(Resolution r) noexcept;
Resolution parse_resolution(std::string_view text);
int width_of(Resolution r) noexcept;
int height_of(Resolution r) noexcept;

/// Next lower resolution; nullopt for 540p.
std::optional<Resolution> lower_neighbour(Resolution r) noexcept;

/// Fixed-size map keyed by Resolution.
template <typename T>
struct PerResolution {
    std::array<T, 4> values{};

    T& operator[](Resolution r) noexcept { return values[index_of(r)]; }
    const T& operator[](Resolution r) const noexcept { return values[index_of(r)]; }

    friend bool operator==(const PerResolution&, const PerResolution&) = default;
};

/// Inclusive range of admissible QPs.
struct QpRange {
    int min = 15;
    int max = 45;

    bool contains(int qp) const noexcept { return qp >= min && qp <= max; }
    int size() const noexcept { return max - min + 1; }
    int clamp(int qp) const noexcept { return qp < min ? min : (qp > max ? max : qp); }
    std::vector<int> all() const;

    friend bool operator==(const QpRange&, const QpRange&) = default;
};

struct EncodeRecord {
    std::string sequence_id;
    Resolution resolution = Resolution::p2160;
    int qp = 0;
    double bitrate_kbps = 0.0;
    double vmaf = 0.0;

    friend bool operator==(const EncodeRecord&, const EncodeRecord&) = default;
};

/// Throws ValidationError when a record breaks the bitrate/VMAF/QP bounds.
void check_record(const EncodeRecord& rec, const QpRange& range);

struct RQSample {
    int qp = 0;
    double bitrate_kbps = 0.0;
    double log_rate = 0.0;  // natural log of kbps
    double vmaf = 0.0;

    friend bool operator==(const RQSample&, const RQSample&) = default;
};

struct RQCurve {
    std::string sequence_id;
    Resolution resolution = Resolution::p2160;
    std::vector<RQSample> samples;  // ascending qp

    std::vector<EncodeRecord> records() const;
    const RQSample* find(int qp) const;

    friend bool operator==(const RQCurve&, const RQCurve&) = default;
};

struct CurveIssue {
    int qp = 0;
    std::string reason;
};

struct ValidationReport {
    std::vector<CurveIssue> violations;  // samples breaking monotonicity
    std::vector<int> removed_qps;        // filled only when repairing

    bool clean() const noexcept { return violations.empty(); }
};

/// Checks (and optionally repairs) the monotone rate-quality behaviour of a curve.
/// Repair keeps the lower-QP sample of any conflicting pair, so violators are
/// dropped on the high-QP side.
std::pair<RQCurve, ValidationReport> validate_curve(const RQCurve& curve, bool repair);

struct CurveKey {
    std::string sequence_id;
    Resolution resolution;

    friend auto operator<=>(const CurveKey&, const CurveKey&) = default;
};

/// Immutable collection of per-(sequence, resolution) curves.
class MeasurementSet {
public:
    MeasurementSet() = default;

    /// Groups records into curves. Duplicate (sequence, resolution, qp) keys
    /// raise ConflictError; out-of-range values raise ValidationError.
    static MeasurementSet from_records(std::vector<EncodeRecord> records, QpRange range = {});

    const QpRange& qp_range() const noexcept { return range_; }
    std::string_view rate_unit() const noexcept { return "kbps"; }

    const std::map<CurveKey, RQCurve>& curves() const noexcept { return curves_; }
    const RQCurve* find(const std::string& sequence, Resolution r) const;
    std::optional<EncodeRecord> find(const std::string& sequence, Resolution r, int qp) const;

    std::vector<std::string> sequences() const;
    std::vector<EncodeRecord> records() const;
    std::size_t record_count() const noexcept;
    bool empty() const noexcept { return curves_.empty(); }

    const std::map<CurveKey, ValidationReport>& reports() const noexcept { return reports_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    QpRange range_;
    std::map<CurveKey, RQCurve> curves_;
    std::map<CurveKey, ValidationReport> reports_;
    std::vector<std::string> warnings_;
};

enum class TableFormat { csv, json };

TableFormat format_from_path(const std::filesystem::path& path);

MeasurementSet load_measurements(const std::filesystem::path& path, TableFormat format,
                                 QpRange range = {});
MeasurementSet load_measurements(const std::filesystem::path& path, QpRange range = {});

void save_measurements(const MeasurementSet& set, const std::filesystem::path& path,
                       TableFormat format);
void save_records_csv(const std::vector<EncodeRecord>& records, const std::filesystem::path& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace ladderkit
