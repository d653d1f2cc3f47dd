#include "ladderkit/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "csv.hpp"
#include "ladderkit/errors.hpp"

namespace ladderkit {

std::string_view label(Resolution r) noexcept {
    switch (r) {
        case Resolution::p540: return "540p";
        case Resolution::p720: return "720p";
        case Resolution::p1080: return "1080p";
        case Resolution::p2160: return "2160p";
    }
    return "?";
}

Resolution parse_resolution(std::string_view text) {
    for (Resolution r : kResolutions)
        if (label(r) == text) return r;
    throw ValidationError("unknown resolution '" + std::string(text) + "'");
}

int width_of(Resolution r) noexcept {
    constexpr std::array<int, 4> w = {960, 1280, 1920, 3840};
    return w[index_of(r)];
}

int height_of(Resolution r) noexcept {
    constexpr std::array<int, 4> h = {540, 720, 1080, 2160};
    return h[index_of(r)];
}

std::optional<Resolution> lower_neighbour(Resolution r) noexcept {
    if (r == Resolution::p540) return std::nullopt;
    return static_cast<Resolution>(static_cast<int>(r) - 1);
}

std::vector<int> QpRange::all() const {
    std::vector<int> out;
    for (int q = min; q <= max; ++q) out.push_back(q);
    return out;
}

void check_record(const EncodeRecord& rec, const QpRange& range) {
    if (!(rec.bitrate_kbps > 0.0) || !std::isfinite(rec.bitrate_kbps))
        throw ValidationError("bitrate must be positive for " + rec.sequence_id + " " +
                              std::string(label(rec.resolution)) + " qp " + std::to_string(rec.qp));
    if (!(rec.vmaf >= 0.0 && rec.vmaf <= 100.0))
        throw ValidationError("vmaf " + format_double(rec.vmaf) + " outside [0,100] for " +
                              rec.sequence_id + " " + std::string(label(rec.resolution)) + " qp " +
                              std::to_string(rec.qp));
    if (!range.contains(rec.qp))
        throw ValidationError("qp " + std::to_string(rec.qp) + " outside [" + std::to_string(range.min) +
                              "," + std::to_string(range.max) + "]");
}

std::vector<EncodeRecord> RQCurve::records() const {
    std::vector<EncodeRecord> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({sequence_id, resolution, s.qp, s.bitrate_kbps, s.vmaf});
    return out;
}

const RQSample* RQCurve::find(int qp) const {
    auto it = std::lower_bound(samples.begin(), samples.end(), qp,
                               [](const RQSample& s, int q) { return s.qp < q; });
    return it != samples.end() && it->qp == qp ? &*it : nullptr;
}

std::pair<RQCurve, ValidationReport> validate_curve(const RQCurve& curve, bool repair) {
    if (curve.samples.size() < 2)
        throw InsufficientDataError("curve " + curve.sequence_id + " " + std::string(label(curve.resolution)) +
                                    " has fewer than 2 samples");
    ValidationReport report;
    RQCurve out = curve;
    out.samples.clear();
    out.samples.push_back(curve.samples.front());

    for (std::size_t i = 1; i < curve.samples.size(); ++i) {
        const RQSample& s = curve.samples[i];
        // Against the previous sample when only reporting, against the last kept one when repairing.
        const RQSample& ref = repair ? out.samples.back() : curve.samples[i - 1];
        std::string reason;
        if (s.vmaf > ref.vmaf) reason = "vmaf increases with qp";
        if (!(s.log_rate < ref.log_rate)) reason += reason.empty() ? "rate not decreasing" : "; rate not decreasing";
        if (reason.empty()) {
            out.samples.push_back(s);
            continue;
        }
        report.violations.push_back({s.qp, reason});
        if (repair)
            report.removed_qps.push_back(s.qp);
        else
            out.samples.push_back(s);
    }
    return {std::move(out), std::move(report)};
}

MeasurementSet MeasurementSet::from_records(std::vector<EncodeRecord> records, QpRange range) {
    MeasurementSet set;
    set.range_ = range;
    std::set<std::tuple<std::string, Resolution, int>> seen;
    for (auto& rec : records) {
        check_record(rec, range);
        if (!seen.emplace(rec.sequence_id, rec.resolution, rec.qp).second)
            throw ConflictError("duplicate measurement for " + rec.sequence_id + " " +
                                std::string(label(rec.resolution)) + " qp " + std::to_string(rec.qp));
        auto& curve = set.curves_[CurveKey{rec.sequence_id, rec.resolution}];
        curve.sequence_id = rec.sequence_id;
        curve.resolution = rec.resolution;
        curve.samples.push_back({rec.qp, rec.bitrate_kbps, std::log(rec.bitrate_kbps), rec.vmaf});
    }
    for (auto& [key, curve] : set.curves_) {
        std::sort(curve.samples.begin(), curve.samples.end(),
                  [](const RQSample& a, const RQSample& b) { return a.qp < b.qp; });
        if (curve.samples.size() < 2) {
            set.warnings_.push_back("curve " + key.sequence_id + " " + std::string(label(key.resolution)) +
                                    " has a single sample");
            continue;
        }
        auto report = validate_curve(curve, false).second;
        if (!report.clean()) set.reports_.emplace(key, std::move(report));
    }
    if (set.curves_.empty()) set.warnings_.emplace_back("empty corpus: no measurement rows");
    return set;
}

const RQCurve* MeasurementSet::find(const std::string& sequence, Resolution r) const {
    auto it = curves_.find(CurveKey{sequence, r});
    return it == curves_.end() ? nullptr : &it->second;
}

std::optional<EncodeRecord> MeasurementSet::find(const std::string& sequence, Resolution r, int qp) const {
    const RQCurve* c = find(sequence, r);
    if (!c) return std::nullopt;
    const RQSample* s = c->find(qp);
    if (!s) return std::nullopt;
    return EncodeRecord{sequence, r, qp, s->bitrate_kbps, s->vmaf};
}

std::vector<std::string> MeasurementSet::sequences() const {
    std::vector<std::string> out;
    for (const auto& [key, _] : curves_)
        if (out.empty() || out.back() != key.sequence_id) out.push_back(key.sequence_id);
    return out;
}

std::vector<EncodeRecord> MeasurementSet::records() const {
    std::vector<EncodeRecord> out;
    for (const auto& [_, curve] : curves_) {
        auto r = curve.records();
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::size_t MeasurementSet::record_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, c] : curves_) n += c.samples.size();
    return n;
}

TableFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".json" ? TableFormat::json : TableFormat::csv;
}

namespace {

MeasurementSet load_csv(const std::filesystem::path& path, QpRange range) {
    const csv::Table t = csv::read(path);
    const int c_seq = t.require("sequence");
    const int c_res = t.require("resolution");
    const int c_qp = t.require("qp");
    const int c_rate = t.require("bitrate_kbps");
    const int c_vmaf = t.require("vmaf");

    std::vector<EncodeRecord> records;
    std::set<std::tuple<std::string, Resolution, int>> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.line_numbers[i];
        EncodeRecord rec;
        rec.sequence_id = row[c_seq];
        if (rec.sequence_id.empty()) throw ParseError("empty sequence id", line);
        try {
            rec.resolution = parse_resolution(row[c_res]);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line);
        }
        rec.qp = csv::to_int(row[c_qp], line, "qp");
        rec.bitrate_kbps = csv::to_double(row[c_rate], line, "bitrate_kbps");
        rec.vmaf = csv::to_double(row[c_vmaf], line, "vmaf");
        try {
            check_record(rec, range);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " (line " + std::to_string(line) + ")");
        }
        if (!seen.emplace(rec.sequence_id, rec.resolution, rec.qp).second)
            throw ConflictError("duplicate measurement " + rec.sequence_id + " " +
                                std::string(label(rec.resolution)) + " qp " + std::to_string(rec.qp) +
                                " (line " + std::to_string(line) + ")");
        records.push_back(std::move(rec));
    }
    return MeasurementSet::from_records(std::move(records), range);
}

MeasurementSet load_json(const std::filesystem::path& path, QpRange range) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), 0);
    }
    const nlohmann::json& rows = doc.is_array() ? doc : doc.at("records");
    std::vector<EncodeRecord> records;
    std::size_t index = 0;
    for (const auto& row : rows) {
        ++index;
        EncodeRecord rec;
        try {
            rec.sequence_id = row.at("sequence").get<std::string>();
            rec.resolution = parse_resolution(row.at("resolution").get<std::string>());
            rec.qp = row.at("qp").get<int>();
            rec.bitrate_kbps = row.at("bitrate_kbps").get<double>();
            rec.vmaf = row.at("vmaf").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("record ") + e.what(), index);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), index);
        }
        try {
            check_record(rec, range);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " (record " + std::to_string(index) + ")");
        }
        records.push_back(std::move(rec));
    }
    return MeasurementSet::from_records(std::move(records), range);
}

}  // namespace

MeasurementSet load_measurements(const std::filesystem::path& path, TableFormat format, QpRange range) {
    return format == TableFormat::csv ? load_csv(path, range) : load_json(path, range);
}

MeasurementSet load_measurements(const std::filesystem::path& path, QpRange range) {
    return load_measurements(path, format_from_path(path), range);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void save_records_csv(const std::vector<EncodeRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "sequence,resolution,qp,bitrate_kbps,vmaf\n";
    for (const auto& r : records)
        out << r.sequence_id << ',' << label(r.resolution) << ',' << r.qp << ',' << format_double(r.bitrate_kbps)
            << ',' << format_double(r.vmaf) << '\n';
}

void save_measurements(const MeasurementSet& set, const std::filesystem::path& path, TableFormat format) {
    if (format == TableFormat::csv) {
        save_records_csv(set.records(), path);
        return;
    }
    nlohmann::json doc;
    doc["rate_unit"] = "kbps";
    doc["qp_range"] = {set.qp_range().min, set.qp_range().max};
    auto& rows = doc["records"] = nlohmann::json::array();
    for (const auto& r : set.records())
        rows.push_back({{"sequence", r.sequence_id},
                        {"resolution", label(r.resolution)},
                        {"qp", r.qp},
                        {"bitrate_kbps", r.bitrate_kbps},
                        {"vmaf", r.vmaf}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

}  // namespace ladderkit
