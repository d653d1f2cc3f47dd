#include "ladderkit/interp.hpp"

#include <algorithm>
#include <cmath>

#include "ladderkit/errors.hpp"

namespace ladderkit {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double end_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(m) != sign(d0))
        m = 0.0;
    else if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0))
        m = 3.0 * d0;
    return m;
}

}  // namespace

std::vector<double> pchip_slopes(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw ValidationError("pchip: x and y sizes differ");
    if (n < 2) throw InsufficientDataError("pchip needs at least 2 knots");
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        if (!(h[k] > 0.0)) throw ValidationError("pchip: abscissae must be strictly increasing");
        delta[k] = (y[k + 1] - y[k]) / h[k];
    }
    std::vector<double> m(n, 0.0);
    if (n == 2) {
        m[0] = m[1] = delta[0];
        return m;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) continue;
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return m;
}

InterpolatedCurve::InterpolatedCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    m_ = pchip_slopes(x_, y_);
}

double InterpolatedCurve::operator()(double x) const {
    if (x_.empty()) throw DomainError("evaluating an empty interpolant");
    if (!(x >= x_.front() && x <= x_.back()))
        throw DomainError("interpolant evaluated outside its knot span");
    if (x == x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
}

std::vector<double> InterpolatedCurve::operator()(std::span<const double> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back((*this)(x));
    return out;
}

double InterpolatedCurve::inverse(double value, double tol) const {
    double lo = x_.front(), hi = x_.back();
    const bool increasing = y_.back() >= y_.front();
    const double f_lo = y_.front(), f_hi = y_.back();
    if (value < std::min(f_lo, f_hi) || value > std::max(f_lo, f_hi))
        throw DomainError("inverse lookup outside the interpolant's range");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double f = (*this)(mid);
        if ((f < value) == increasing)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

FittedCurve fit_rq_curve(std::span<const EncodeRecord> records) {
    if (records.size() < 2) throw InsufficientDataError("fit_rq_curve needs at least 2 records");
    std::vector<EncodeRecord> sorted(records.begin(), records.end());
    for (const auto& r : sorted) {
        if (r.resolution != sorted.front().resolution)
            throw ValidationError("fit_rq_curve: records mix resolutions");
        if (r.sequence_id != sorted.front().sequence_id)
            throw ValidationError("fit_rq_curve: records mix sequences");
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.qp < b.qp; });
    std::vector<double> qp, lr, vm;
    for (const auto& r : sorted) {
        if (!qp.empty() && qp.back() == r.qp) throw ValidationError("fit_rq_curve: duplicate qp");
        qp.push_back(r.qp);
        lr.push_back(std::log(r.bitrate_kbps));
        vm.push_back(r.vmaf);
    }
    FittedCurve fc;
    fc.sequence_id = sorted.front().sequence_id;
    fc.resolution = sorted.front().resolution;
    fc.log_rate = InterpolatedCurve(qp, lr);
    fc.vmaf = InterpolatedCurve(std::move(qp), std::move(vm));
    return fc;
}

FittedCurve fit_rq_curve(const RQCurve& curve) {
    const auto records = curve.records();
    return fit_rq_curve(records);
}

std::vector<CurvePoint> densify(const FittedCurve& curve, double step) {
    if (!(step > 0.0)) throw DomainError("densify step must be positive");
    const double lo = curve.log_rate.x_min(), hi = curve.log_rate.x_max();
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<CurvePoint> out;
    out.reserve(n + 2);
    for (std::size_t i = 0; i <= n; ++i) {
        const double q = std::min(hi, lo + static_cast<double>(i) * step);
        out.push_back({q, curve.log_rate(q), curve.vmaf(q)});
    }
    if (out.back().qp < hi) out.push_back({hi, curve.log_rate(hi), curve.vmaf(hi)});
    return out;
}

}  // namespace ladderkit
