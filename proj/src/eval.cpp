#include "ladderkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <Eigen/Dense>
#include <json.hpp>

#include "ladderkit/errors.hpp"

namespace ladderkit {

namespace {

constexpr double kMaxCondition = 1e10;

// log-rate as a function of VMAF over one rate-quality set
class LogRateFit {
public:
    explicit LogRateFit(std::span<const RatePoint> pts, std::vector<std::string>& diag, const char* name) {
        if (pts.size() < 2) throw InsufficientDataError(std::string(name) + " set needs at least 2 points");
        std::vector<std::pair<double, double>> vr;  // (vmaf, log_rate)
        for (const auto& p : pts) {
            if (!(p.rate_kbps > 0.0) || !std::isfinite(p.rate_kbps) || !std::isfinite(p.vmaf))
                throw ValidationError(std::string(name) + " set has a non-positive or non-finite point");
            vr.emplace_back(p.vmaf, std::log(p.rate_kbps));
        }
        std::sort(vr.begin(), vr.end());
        // equal VMAF values collapse to their mean log-rate
        for (std::size_t i = 0; i < vr.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < vr.size() && vr[j].first == vr[i].first) sum += vr[j++].second;
            v_.push_back(vr[i].first);
            lr_.push_back(sum / static_cast<double>(j - i));
            i = j;
        }
        if (v_.size() < 2) throw InsufficientDataError(std::string(name) + " set has a single distinct VMAF value");
        lo_ = v_.front();
        hi_ = v_.back();

        if (v_.size() < 4) {
            diag.push_back(std::string(name) + ": fewer than 4 distinct points, piecewise-linear fit");
            return;
        }
        centre_ = 0.5 * (lo_ + hi_);
        scale_ = 0.5 * (hi_ - lo_);
        Eigen::MatrixXd A(vr.size(), 4);
        Eigen::VectorXd b(vr.size());
        for (std::size_t i = 0; i < vr.size(); ++i) {
            const double t = (vr[i].first - centre_) / scale_;
            A(i, 0) = 1.0;
            A(i, 1) = t;
            A(i, 2) = t * t;
            A(i, 3) = t * t * t;
            b(i) = vr[i].second;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
        if (!(cond < kMaxCondition)) {
            diag.push_back(std::string(name) + ": ill-conditioned cubic fit, piecewise-linear fit");
            return;
        }
        const Eigen::VectorXd c = svd.solve(b);
        for (int k = 0; k < 4; ++k) coef_[k] = c(k);
        cubic_ = true;
    }

    // The cubic must not decrease over the interval that gets integrated.
    void require_monotone(double lo, double hi, std::vector<std::string>& diag, const char* name) {
        if (!cubic_) return;
        auto slope = [&](double v) {
            const double t = (v - centre_) / scale_;
            return coef_[1] + 2.0 * coef_[2] * t + 3.0 * coef_[3] * t * t;
        };
        std::vector<double> at = {lo, hi};
        if (coef_[3] != 0.0) {
            const double t_vertex = -coef_[2] / (3.0 * coef_[3]);
            const double v = centre_ + t_vertex * scale_;
            if (v > lo && v < hi) at.push_back(v);
        }
        for (double v : at)
            if (slope(v) < 0.0) {
                diag.push_back(std::string(name) + ": cubic fit not monotone, piecewise-linear fit");
                cubic_ = false;
                return;
            }
    }

    double integral(double lo, double hi) const {
        if (cubic_) {
            auto prim = [&](double v) {
                const double t = (v - centre_) / scale_;
                return scale_ * t * (coef_[0] + t * (coef_[1] / 2.0 + t * (coef_[2] / 3.0 + t * coef_[3] / 4.0)));
            };
            return prim(hi) - prim(lo);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < v_.size(); ++i) {
            const double a = std::max(lo, v_[i]), b = std::min(hi, v_[i + 1]);
            if (!(b > a)) continue;
            const double k = (lr_[i + 1] - lr_[i]) / (v_[i + 1] - v_[i]);
            const double fa = lr_[i] + k * (a - v_[i]), fb = lr_[i] + k * (b - v_[i]);
            sum += 0.5 * (fa + fb) * (b - a);
        }
        return sum;
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    BdFit kind() const { return cubic_ ? BdFit::cubic : BdFit::piecewise_linear; }

private:
    std::vector<double> v_, lr_;
    double lo_ = 0.0, hi_ = 0.0;
    double centre_ = 0.0, scale_ = 1.0;
    std::array<double, 4> coef_{};
    bool cubic_ = false;
};

}  // namespace

BDResult bd_rate(std::span<const RatePoint> test, std::span<const RatePoint> reference) {
    BDResult res;
    LogRateFit ft(test, res.diagnostics, "test");
    LogRateFit fr(reference, res.diagnostics, "reference");
    res.vmaf_lo = std::max(ft.lo(), fr.lo());
    res.vmaf_hi = std::min(ft.hi(), fr.hi());
    if (!(res.vmaf_hi > res.vmaf_lo))
        throw NoOverlapError("no VMAF overlap between the two rate-quality sets");
    ft.require_monotone(res.vmaf_lo, res.vmaf_hi, res.diagnostics, "test");
    fr.require_monotone(res.vmaf_lo, res.vmaf_hi, res.diagnostics, "reference");
    res.test_fit = ft.kind();
    res.reference_fit = fr.kind();
    const double span = res.vmaf_hi - res.vmaf_lo;
    const double diff = (ft.integral(res.vmaf_lo, res.vmaf_hi) - fr.integral(res.vmaf_lo, res.vmaf_hi)) / span;
    res.bd_rate_percent = (std::exp(diff) - 1.0) * 100.0;
    return res;
}

std::vector<RatePoint> rate_points(const Ladder& ladder) {
    std::vector<RatePoint> out;
    for (const auto& r : ladder.rungs) out.push_back({r.rate_kbps, r.vmaf});
    return out;
}

double rl_hits(const Ladder& estimated, const Ladder& reference) {
    if (reference.rungs.empty()) return 0.0;
    std::set<std::pair<Resolution, int>> ref;
    for (const auto& r : reference.rungs) ref.emplace(r.resolution, r.qp);
    std::set<std::pair<Resolution, int>> hits;
    for (const auto& r : estimated.rungs)
        if (ref.count({r.resolution, r.qp})) hits.emplace(r.resolution, r.qp);
    return 100.0 * static_cast<double>(hits.size()) / static_cast<double>(reference.rungs.size());
}

double mean_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double mad_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += std::abs(x - m);
    return s / static_cast<double>(v.size());
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
    Histogram h;
    if (bins == 0) bins = 1;
    double lo = 0.0, hi = 1.0;
    if (!values.empty()) {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = *mx;
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + w * static_cast<double>(i));
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double x : values) {
        auto k = static_cast<std::size_t>((x - lo) / w);
        if (k >= bins) k = bins - 1;
        ++h.counts[k];
    }
    return h;
}

CorpusReport corpus_report(std::vector<SequenceResult> results, std::size_t rl_tally, std::size_t bins) {
    if (results.empty()) throw InsufficientDataError("corpus report needs at least one sequence");
    std::sort(results.begin(), results.end(),
              [](const SequenceResult& a, const SequenceResult& b) { return a.sequence_id < b.sequence_id; });
    CorpusReport rep;
    std::vector<double> bd, hits;
    for (const auto& r : results) {
        bd.push_back(r.bd_rate_percent);
        hits.push_back(r.rl_hits_percent);
        rep.max_tally = std::max(rep.max_tally, r.tally);
    }
    rep.mean_bd_rate = mean_of(bd);
    rep.mad_bd_rate = mad_of(bd);
    rep.mean_rl_hits = mean_of(hits);
    rep.rl_tally = rl_tally;
    rep.encode_reduction_percent =
        rl_tally ? (1.0 - static_cast<double>(rep.max_tally) / static_cast<double>(rl_tally)) * 100.0 : 0.0;
    rep.bd_histogram = histogram(bd, bins);
    rep.sequences = std::move(results);
    return rep;
}

void write_report_json(const CorpusReport& report, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["sequences"] = nlohmann::json::array();
    for (const auto& s : report.sequences)
        doc["sequences"].push_back({{"sequence", s.sequence_id},
                                    {"bd_rate_percent", s.bd_rate_percent},
                                    {"rl_hits_percent", s.rl_hits_percent},
                                    {"tally", s.tally}});
    doc["mean"] = report.mean_bd_rate;
    doc["mad"] = report.mad_bd_rate;
    doc["mean_rl_hits"] = report.mean_rl_hits;
    doc["max_tally"] = report.max_tally;
    doc["rl_tally"] = report.rl_tally;
    doc["encode_reduction_percent"] = report.encode_reduction_percent;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

void write_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
}

}  // namespace ladderkit
