#include "ladderkit/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ladderkit/errors.hpp"

namespace ladderkit {

std::vector<double> target_rates(double r_min_kbps, double r_max_kbps) {
    if (!(r_min_kbps > 0.0)) throw ConfigError("r_min must be positive");
    if (r_max_kbps < r_min_kbps) throw ConfigError("r_max must not be below r_min");
    std::vector<double> out;
    for (double r = r_min_kbps; r <= r_max_kbps; r *= 2.0) out.push_back(r);
    return out;
}

std::vector<Rung> sample_front(const ParetoFront& pf, std::span<const double> targets) {
    if (pf.points.empty()) throw ValidationError("cannot sample an empty Pareto front");
    std::vector<Rung> rungs;
    const FrontPoint* last = nullptr;
    for (double target : targets) {
        const FrontPoint* pick = nullptr;
        bool below = false;
        for (const auto& p : pf.points)
            if (p.bitrate_kbps <= target) pick = &p;  // ascending rate: keeps the largest
        if (!pick) {
            pick = &pf.points.front();
            below = true;
        }
        if (pick == last) continue;
        last = pick;
        rungs.push_back({pick->bitrate_kbps, pick->vmaf, pick->qp, pick->resolution, below});
    }
    return rungs;
}

std::vector<Rung> prune_saturated(std::span<const Rung> rungs, double v_high, double epsilon_per_kbps) {
    std::vector<Rung> out;
    for (const auto& r : rungs) {
        if (!out.empty()) {
            const Rung& prev = out.back();
            const double dr = r.rate_kbps - prev.rate_kbps;
            if (prev.vmaf > v_high && dr > 0.0 && (r.vmaf - prev.vmaf) / dr <= epsilon_per_kbps) continue;
        }
        out.push_back(r);
    }
    return out;
}

Ladder build_ladder(const ParetoFront& pf, std::span<const double> targets, double v_high,
                    double epsilon_per_kbps) {
    if (pf.points.empty()) throw ValidationError("cannot build a ladder from an empty Pareto front");
    Ladder ladder;
    ladder.target_rates.assign(targets.begin(), targets.end());
    ladder.rungs = prune_saturated(sample_front(pf, targets), v_high, epsilon_per_kbps);
    return enforce_monotonicity(std::move(ladder));
}

Ladder enforce_monotonicity(Ladder ladder) {
    std::stable_sort(ladder.rungs.begin(), ladder.rungs.end(),
                     [](const Rung& a, const Rung& b) { return a.rate_kbps < b.rate_kbps; });
    std::vector<Rung> kept;
    std::map<Resolution, int> last_qp;
    for (const auto& r : ladder.rungs) {
        if (!kept.empty()) {
            const Rung& prev = kept.back();
            if (!(r.rate_kbps > prev.rate_kbps) || r.vmaf < prev.vmaf || r.resolution < prev.resolution) continue;
        }
        if (auto it = last_qp.find(r.resolution); it != last_qp.end() && r.qp > it->second) continue;
        kept.push_back(r);
        last_qp[r.resolution] = r.qp;
    }
    ladder.rungs = std::move(kept);
    return ladder;
}

std::vector<std::string> ladder_violations(const Ladder& ladder) {
    std::vector<std::string> out;
    if (ladder.rungs.empty()) out.emplace_back("ladder has no rungs");
    if (!ladder.target_rates.empty() && ladder.rungs.size() > ladder.target_rates.size())
        out.emplace_back("more rungs than target rates");
    std::map<Resolution, int> last_qp;
    for (std::size_t i = 0; i < ladder.rungs.size(); ++i) {
        const Rung& r = ladder.rungs[i];
        const std::string at = "rung " + std::to_string(i);
        if (i > 0) {
            const Rung& p = ladder.rungs[i - 1];
            if (!(r.rate_kbps > p.rate_kbps)) out.push_back(at + ": rate not strictly increasing");
            if (r.vmaf < p.vmaf) out.push_back(at + ": vmaf decreasing");
            if (r.resolution < p.resolution) out.push_back(at + ": resolution decreasing");
        }
        if (auto it = last_qp.find(r.resolution); it != last_qp.end() && r.qp > it->second)
            out.push_back(at + ": qp increases within " + std::string(label(r.resolution)));
        last_qp[r.resolution] = r.qp;
    }
    return out;
}

}  // namespace ladderkit
