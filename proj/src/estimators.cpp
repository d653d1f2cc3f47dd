#include "ladderkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ladderkit/errors.hpp"
#include "ladderkit/interp.hpp"

namespace ladderkit {

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::rl: return "rl";
        case Method::nil: return "nil";
        case Method::cil: return "cil";
        case Method::fl: return "fl";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    for (Method m : {Method::rl, Method::nil, Method::cil, Method::fl})
        if (method_name(m) == text) return m;
    throw ConfigError("unknown method '" + std::string(text) + "'");
}

MethodConfig::MethodConfig() {
    cil_offsets[Resolution::p2160] = -4;
    cil_offsets[Resolution::p1080] = -4;
    cil_offsets[Resolution::p720] = 6;
    cil_offsets[Resolution::p540] = 10;
    for (Resolution r : kResolutions) nil_qps[r] = {15, 20, 25, 30, 35, 40, 45};
}

std::size_t method_budget(Method m, const MethodConfig& cfg, std::size_t n_targets) {
    switch (m) {
        case Method::rl: return 4 * static_cast<std::size_t>(cfg.qp_range.size());
        case Method::nil: {
            std::size_t n = 0;
            for (Resolution r : kResolutions) n += cfg.nil_qps[r].size();
            return n + n_targets;
        }
        case Method::cil: return 4 * static_cast<std::size_t>(cfg.cil_n) + n_targets;
        case Method::fl: return 8 + n_targets;
    }
    return 0;
}

double CrossoverQps::qp_high(Resolution r) const {
    switch (r) {
        case Resolution::p2160: return values[0];
        case Resolution::p1080: return values[2];
        case Resolution::p720: return values[4];
        case Resolution::p540: break;
    }
    throw ValidationError("540p has no high-QP cross-over");
}

double CrossoverQps::qp_low(Resolution r) const {
    switch (r) {
        case Resolution::p1080: return values[1];
        case Resolution::p720: return values[3];
        case Resolution::p540: return values[5];
        case Resolution::p2160: break;
    }
    throw ValidationError("2160p has no low-QP cross-over");
}

namespace {

// Session front that remembers which triples this estimator run asked for.
class RunEncoder {
public:
    RunEncoder(EncodeSession& session, std::string sequence) : session_(session), sequence_(std::move(sequence)) {}

    EncodeRecord operator()(Resolution r, int qp) {
        requested_.emplace(r, qp);
        return session_.encode(sequence_, r, qp);
    }

    std::size_t tally() const noexcept { return requested_.size(); }
    const QpRange& range() const noexcept { return session_.qp_range(); }

private:
    EncodeSession& session_;
    std::string sequence_;
    std::set<std::pair<Resolution, int>> requested_;
};

Rung to_rung(const EncodeRecord& rec) { return {rec.bitrate_kbps, rec.vmaf, rec.qp, rec.resolution, false}; }

Ladder finish_ladder(const std::string& sequence, std::vector<Rung> rungs, const MethodConfig& cfg) {
    std::stable_sort(rungs.begin(), rungs.end(), [](const Rung& a, const Rung& b) { return a.rate_kbps < b.rate_kbps; });
    Ladder ladder;
    ladder.sequence_id = sequence;
    ladder.target_rates = cfg.targets();
    ladder.rungs = prune_saturated(rungs, cfg.ladder.v_high, cfg.ladder.epsilon_per_kbps);
    return enforce_monotonicity(std::move(ladder));
}

// Shared NIL/CIL flow: initial encodes, PCHIP densification, estimated front,
// then real encodes at the selected (resolution, QP) pairs.
EstimateResult interpolated_ladder(EncodeSession& session, const std::string& sequence,
                                   const PerResolution<std::vector<int>>& initial, Method method,
                                   const MethodConfig& cfg) {
    RunEncoder enc(session, sequence);
    EstimateResult res;
    res.sequence_id = sequence;
    res.method = method;
    res.initial_qps = initial;

    std::vector<std::vector<FrontPoint>> estimated;
    for (Resolution r : kResolutionsDescending) {
        std::vector<EncodeRecord> recs;
        for (int qp : initial[r]) recs.push_back(enc(r, qp));
        estimated.push_back(front_points(fit_rq_curve(recs)));
    }
    const ParetoFront pf = pareto_front(std::span<const std::vector<FrontPoint>>(estimated));
    const auto targets = cfg.targets();
    std::vector<Rung> rungs;
    for (const Rung& pick : sample_front(pf, targets)) {
        Rung r = to_rung(enc(pick.resolution, pick.qp));
        r.below_front = pick.below_front;
        rungs.push_back(r);
    }
    res.ladder = finish_ladder(sequence, std::move(rungs), cfg);
    res.tally = enc.tally();
    return res;
}

}  // namespace

EstimateResult estimate_rl(EncodeSession& session, const std::string& sequence, const MethodConfig& cfg) {
    RunEncoder enc(session, sequence);
    std::vector<FrontPoint> points;
    for (Resolution r : kResolutionsDescending)
        for (int qp = cfg.qp_range.min; qp <= cfg.qp_range.max; ++qp) {
            const EncodeRecord rec = enc(r, qp);
            points.push_back({std::log(rec.bitrate_kbps), rec.vmaf, qp, r, rec.bitrate_kbps});
        }
    EstimateResult res;
    res.sequence_id = sequence;
    res.method = Method::rl;
    for (Resolution r : kResolutions) res.initial_qps[r] = cfg.qp_range.all();
    const auto targets = cfg.targets();
    res.ladder = build_ladder(pareto_front(std::span<const FrontPoint>(points)), targets, cfg.ladder.v_high,
                              cfg.ladder.epsilon_per_kbps);
    res.ladder.sequence_id = sequence;
    res.tally = enc.tally();
    return res;
}

EstimateResult estimate_nil(EncodeSession& session, const std::string& sequence, const MethodConfig& cfg) {
    for (Resolution r : kResolutions) {
        if (cfg.nil_qps[r].size() < 2) throw ConfigError("NIL needs at least 2 QPs per resolution");
        for (int qp : cfg.nil_qps[r])
            if (!cfg.qp_range.contains(qp)) throw ConfigError("NIL QP outside the QP range");
    }
    return interpolated_ladder(session, sequence, cfg.nil_qps, Method::nil, cfg);
}

std::vector<int> cil_qp_set(int knee_qp, int offset, int n, int qp_max, QpRange range) {
    if (n < 2) throw ConfigError("CIL needs n >= 2");
    qp_max = range.clamp(qp_max);
    const int lo = range.clamp(knee_qp + offset);
    if (!(lo < qp_max))
        throw ConfigError("CIL range [" + std::to_string(knee_qp + offset) + "," + std::to_string(qp_max) +
                          "] is empty");
    if (qp_max - lo + 1 < n)
        throw ConfigError("CIL range [" + std::to_string(lo) + "," + std::to_string(qp_max) + "] holds fewer than " +
                          std::to_string(n) + " QPs");
    const double step = static_cast<double>(qp_max - lo) / (n - 1);
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        int v = static_cast<int>(std::lround(lo + i * step));
        if (std::find(out.begin(), out.end(), v) != out.end()) {
            // Nearest free integer inside the range, upward first on ties.
            for (int d = 1;; ++d) {
                if (v + d <= qp_max && std::find(out.begin(), out.end(), v + d) == out.end()) {
                    v += d;
                    break;
                }
                if (v - d >= lo && std::find(out.begin(), out.end(), v - d) == out.end()) {
                    v -= d;
                    break;
                }
            }
        }
        out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

EstimateResult estimate_cil(EncodeSession& session, const std::string& sequence, const PerResolution<double>& knees,
                            const MethodConfig& cfg) {
    if (cfg.cil_n < 2) throw ConfigError("CIL needs n >= 2");
    PerResolution<std::vector<int>> initial;
    for (Resolution r : kResolutions) {
        if (!std::isfinite(knees[r])) throw ValidationError("missing knee prediction for " + std::string(label(r)));
        const int knee = static_cast<int>(std::lround(knees[r]));
        initial[r] = cil_qp_set(knee, cfg.cil_offsets[r], cfg.cil_n, cfg.qp_range.max, cfg.qp_range);
    }
    return interpolated_ladder(session, sequence, initial, Method::cil, cfg);
}

int fl_extra_qp(int predicted_qp, int qp_m, int delta, QpRange range) {
    return range.clamp(predicted_qp >= qp_m ? predicted_qp - delta : predicted_qp + delta);
}

namespace {

// QP = alpha + beta * log_rate through two encodes.
struct QpLine {
    double alpha = 0.0;
    double beta = 0.0;

    static QpLine through(const EncodeRecord& p, const EncodeRecord& q) {
        const double x1 = std::log(p.bitrate_kbps), x2 = std::log(q.bitrate_kbps);
        if (x1 == x2)
            throw DegenerateError("degenerate line: two " + std::string(label(p.resolution)) +
                                  " encodes share the same log-rate");
        QpLine line;
        line.beta = (q.qp - p.qp) / (x2 - x1);
        line.alpha = p.qp - line.beta * x1;
        return line;
    }

    double operator()(double log_rate) const { return alpha + beta * log_rate; }
};

}  // namespace

EstimateResult estimate_fl(EncodeSession& session, const std::string& sequence, const CrossoverQps& crossovers,
                           const MethodConfig& cfg) {
    RunEncoder enc(session, sequence);
    EstimateResult res;
    res.sequence_id = sequence;
    res.method = Method::fl;
    const QpRange& range = cfg.qp_range;

    auto qp_of = [&](double v) {
        if (!std::isfinite(v)) throw ValidationError("missing cross-over prediction");
        return range.clamp(static_cast<int>(std::lround(v)));
    };
    const int hi_2160 = qp_of(crossovers.qp_high(Resolution::p2160));
    const int lo_1080 = qp_of(crossovers.qp_low(Resolution::p1080));
    const int hi_1080_pred = qp_of(crossovers.qp_high(Resolution::p1080));
    const int lo_720 = qp_of(crossovers.qp_low(Resolution::p720));
    const int hi_720_pred = qp_of(crossovers.qp_high(Resolution::p720));
    const int lo_540 = qp_of(crossovers.qp_low(Resolution::p540));
    // A line needs two distinct QPs; a coinciding second point moves one QP
    // away, which keeps the initial set at eight encodes.
    auto distinct = [&](int other, int qp) {
        if (qp != other) return qp;
        return qp + 1 <= range.max ? qp + 1 : qp - 1;
    };
    const int extra_2160 = distinct(hi_2160, fl_extra_qp(hi_2160, cfg.fl_2160.qp_m, cfg.fl_2160.delta, range));
    const int extra_540 = distinct(lo_540, fl_extra_qp(lo_540, cfg.fl_540.qp_m, cfg.fl_540.delta, range));
    const int hi_1080 = distinct(lo_1080, hi_1080_pred);
    const int hi_720 = distinct(lo_720, hi_720_pred);

    const EncodeRecord x_2160 = enc(Resolution::p2160, hi_2160);
    const EncodeRecord x_1080_lo = enc(Resolution::p1080, lo_1080);
    const EncodeRecord x_1080_hi = enc(Resolution::p1080, hi_1080);
    const EncodeRecord x_720_lo = enc(Resolution::p720, lo_720);
    const EncodeRecord x_720_hi = enc(Resolution::p720, hi_720);
    const EncodeRecord x_540 = enc(Resolution::p540, lo_540);
    const EncodeRecord e_2160 = enc(Resolution::p2160, extra_2160);
    const EncodeRecord e_540 = enc(Resolution::p540, extra_540);

    res.initial_qps[Resolution::p2160] = {hi_2160, extra_2160};
    res.initial_qps[Resolution::p1080] = {lo_1080, hi_1080};
    res.initial_qps[Resolution::p720] = {lo_720, hi_720};
    res.initial_qps[Resolution::p540] = {lo_540, extra_540};
    for (auto& q : res.initial_qps.values) std::sort(q.begin(), q.end());

    PerResolution<QpLine> lines;
    lines[Resolution::p2160] = QpLine::through(x_2160, e_2160);
    lines[Resolution::p1080] = QpLine::through(x_1080_lo, x_1080_hi);
    lines[Resolution::p720] = QpLine::through(x_720_lo, x_720_hi);
    lines[Resolution::p540] = QpLine::through(x_540, e_540);

    // Switch rates: midpoint in log-rate of each pair's two cross-over encodes.
    auto mid = [](const EncodeRecord& a, const EncodeRecord& b) {
        return 0.5 * (std::log(a.bitrate_kbps) + std::log(b.bitrate_kbps));
    };
    const double switch_2160 = mid(x_2160, x_1080_lo);
    const double switch_1080 = mid(x_1080_hi, x_720_lo);
    const double switch_720 = mid(x_720_hi, x_540);

    std::vector<Rung> rungs;
    std::set<std::pair<Resolution, int>> chosen;
    for (double target : cfg.targets()) {
        const double lr = std::log(target);
        Resolution r = Resolution::p540;
        if (lr >= switch_2160)
            r = Resolution::p2160;
        else if (lr >= switch_1080)
            r = Resolution::p1080;
        else if (lr >= switch_720)
            r = Resolution::p720;
        const int qp = range.clamp(static_cast<int>(std::lround(lines[r](lr))));
        if (!chosen.emplace(r, qp).second) continue;
        rungs.push_back(to_rung(enc(r, qp)));
    }
    res.ladder = finish_ladder(sequence, std::move(rungs), cfg);
    res.tally = enc.tally();
    return res;
}

PerResolution<double> measured_knees(const MeasurementSet& set, const std::string& sequence,
                                     const MethodConfig& cfg, std::vector<std::string>* warnings) {
    PerResolution<double> out;
    std::vector<std::string> local;
    for (Resolution r : kResolutions) {
        const RQCurve* c = set.find(sequence, r);
        if (!c) throw MissingMeasurementError("no " + std::string(label(r)) + " curve for " + sequence);
        out[r] = knee_qp_or_prior(fit_rq_curve(*c), cfg.knee_sensitivity, cfg.knee_plane, local).qp;
    }
    if (warnings) warnings->insert(warnings->end(), local.begin(), local.end());
    return out;
}

CrossoverQps measured_crossovers(const MeasurementSet& set, const std::string& sequence, double grid_step,
                                 QpRounding rounding) {
    CrossoverQps out;
    std::size_t slot = 0;
    for (Resolution hi : {Resolution::p2160, Resolution::p1080, Resolution::p720}) {
        const Resolution lo = *lower_neighbour(hi);
        const RQCurve* ch = set.find(sequence, hi);
        const RQCurve* cl = set.find(sequence, lo);
        if (!ch || !cl) throw MissingMeasurementError("missing curves for cross-over of " + sequence);
        const auto result = crossover_qps(fit_rq_curve(*ch), fit_rq_curve(*cl), grid_step, rounding);
        if (!result.pair)
            throw DegenerateError("no " + std::string(label(hi)) + "/" + std::string(label(lo)) + " cross-over for " +
                                  sequence + ": " + result.diagnostic);
        out.values[slot++] = result.pair->qp_high_s;
        out.values[slot++] = result.pair->qp_low_s1;
    }
    return out;
}

}  // namespace ladderkit
