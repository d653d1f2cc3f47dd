#include "ladderkit/encode_backend.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>

#include "ladderkit/errors.hpp"

namespace ladderkit {

double LogisticCurve::vmaf_at_log_rate(double log_rate) const noexcept {
    return v_max / (1.0 + std::exp(-(log_rate - mu) / sigma_s));
}

void check_params(const SyntheticCurveParams& p) {
    for (Resolution r : kResolutions) {
        const LogisticCurve& c = p.curves[r];
        if (!(c.v_max > 0.0 && c.v_max <= 100.0))
            throw ConfigError("v_max must lie in (0,100] for " + std::string(label(r)));
        if (!(c.sigma_s > 0.0)) throw ConfigError("sigma_s must be positive for " + std::string(label(r)));
        if (!(c.b > 0.0)) throw ConfigError("rate slope b must be positive for " + std::string(label(r)));
        // slope -b + 2c(qp - pivot) must stay negative on [0, kMaxQp]
        const double reach = c.c > 0.0 ? LogisticCurve::kMaxQp - LogisticCurve::kPivotQp : LogisticCurve::kPivotQp;
        if (!(c.b > 2.0 * std::abs(c.c) * reach))
            throw ConfigError("rate curvature too strong for a falling rate curve at " + std::string(label(r)));
    }
    if (!(p.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t triple_seed(std::uint64_t seed, const std::string& sequence, Resolution r, int qp) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, &seed, sizeof seed);
    h = fnv1a(h, sequence.data(), sequence.size());
    const int ri = static_cast<int>(r);
    h = fnv1a(h, &ri, sizeof ri);
    return fnv1a(h, &qp, sizeof qp);
}

}  // namespace

EncodeRecord evaluate_synthetic(const SyntheticCurveParams& p, const std::string& sequence, Resolution r,
                                int qp) {
    const LogisticCurve& c = p.curves[r];
    const double log_rate = c.log_rate(qp);
    double vmaf = c.vmaf_at_log_rate(log_rate);
    if (p.noise_sigma > 0.0) {
        std::mt19937_64 rng(triple_seed(p.seed, sequence, r, qp));
        std::normal_distribution<double> noise(0.0, p.noise_sigma);
        vmaf = std::clamp(vmaf + noise(rng), 0.0, 100.0);
    }
    return {sequence, r, qp, std::exp(log_rate), vmaf};
}

EncodeRecord ReplayBackend::encode(const std::string& sequence, Resolution r, int qp) {
    auto rec = set_->find(sequence, r, qp);
    if (!rec)
        throw MissingMeasurementError("no measurement for " + sequence + " " + std::string(label(r)) + " qp " +
                                      std::to_string(qp));
    return *rec;
}

SyntheticBackend::SyntheticBackend(std::map<std::string, SyntheticCurveParams> params)
    : params_(std::move(params)) {
    for (const auto& [_, p] : params_) check_params(p);
}

EncodeRecord SyntheticBackend::encode(const std::string& sequence, Resolution r, int qp) {
    auto it = params_.find(sequence);
    if (it == params_.end()) throw MissingMeasurementError("no synthetic parameters for " + sequence);
    return evaluate_synthetic(it->second, sequence, r, qp);
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

}  // namespace

EncodeRecord ExternalCommandBackend::parse_output(const std::string& output, const std::string& sequence,
                                                  Resolution r, int qp) {
    std::istringstream in(output);
    EncodeRecord rec{sequence, r, qp, 0.0, 0.0};
    std::string rate_text, vmaf_text;
    if (!(in >> rate_text >> vmaf_text))
        throw BackendError("external command output is not 'bitrate_kbps vmaf': " + output);
    try {
        std::size_t used = 0;
        rec.bitrate_kbps = std::stod(rate_text, &used);
        if (used != rate_text.size()) throw std::invalid_argument(rate_text);
        rec.vmaf = std::stod(vmaf_text, &used);
        if (used != vmaf_text.size()) throw std::invalid_argument(vmaf_text);
    } catch (const std::logic_error&) {
        throw BackendError("external command output is not numeric: " + output);
    }
    std::string extra;
    if (in >> extra) throw BackendError("unexpected trailing output from external command: " + output);
    if (!(rec.bitrate_kbps > 0.0) || !(rec.vmaf >= 0.0 && rec.vmaf <= 100.0))
        throw BackendError("external command returned out-of-range values: " + output);
    return rec;
}

EncodeRecord ExternalCommandBackend::encode(const std::string& sequence, Resolution r, int qp) {
    const std::string cmd = shell_quote(program_) + ' ' + shell_quote(sequence) + ' ' +
                            std::string(label(r)) + ' ' + std::to_string(qp) + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw BackendError("cannot start external command " + program_);
    std::string output;
    std::array<char, 512> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    if (status != 0)
        throw BackendError("external command failed (status " + std::to_string(status) + "): " + output);
    return parse_output(output, sequence, r, qp);
}

EncodeSession::EncodeSession(std::shared_ptr<EncodeBackend> backend, QpRange range)
    : backend_(std::move(backend)), range_(range) {}

EncodeRecord EncodeSession::encode(const std::string& sequence, Resolution r, int qp) {
    if (!range_.contains(qp))
        throw DomainError("qp " + std::to_string(qp) + " outside the session QP range");
    Key key{sequence, r, qp};
    std::promise<EncodeRecord> promise;
    std::shared_future<EncodeRecord> future;
    bool owner = false;
    std::optional<EncodeRecord> preloaded;
    {
        std::lock_guard lock(mutex_);
        auto it = requested_.find(key);
        if (it != requested_.end()) {
            future = it->second;
        } else {
            owner = true;
            future = promise.get_future().share();
            requested_.emplace(key, future);
            if (auto p = preloaded_.find(key); p != preloaded_.end())
                preloaded = p->second;
            else
                ++backend_calls_;
        }
    }
    if (owner) {
        try {
            EncodeRecord rec = preloaded ? *preloaded : backend_->encode(sequence, r, qp);
            check_record(rec, range_);
            {
                std::lock_guard lock(mutex_);
                ++tally_;
                ++per_sequence_[sequence];
            }
            promise.set_value(std::move(rec));
        } catch (...) {
            promise.set_exception(std::current_exception());
            // A failed triple may be retried later.
            std::lock_guard lock(mutex_);
            requested_.erase(key);
        }
    }
    return future.get();
}

std::size_t EncodeSession::tally() const {
    std::lock_guard lock(mutex_);
    return tally_;
}

std::size_t EncodeSession::tally(const std::string& sequence) const {
    std::lock_guard lock(mutex_);
    auto it = per_sequence_.find(sequence);
    return it == per_sequence_.end() ? 0 : it->second;
}

std::size_t EncodeSession::backend_calls() const {
    std::lock_guard lock(mutex_);
    return backend_calls_;
}

void EncodeSession::preload(const std::vector<EncodeRecord>& records) {
    std::lock_guard lock(mutex_);
    for (const auto& rec : records) preloaded_[Key{rec.sequence_id, rec.resolution, rec.qp}] = rec;
}

std::vector<EncodeRecord> EncodeSession::cached_records() const {
    std::map<Key, EncodeRecord> all;
    std::vector<std::shared_future<EncodeRecord>> futures;
    {
        std::lock_guard lock(mutex_);
        all = preloaded_;
        for (const auto& [_, f] : requested_) futures.push_back(f);
    }
    for (auto& f : futures) {
        // Only completed, successful entries belong in a persisted cache.
        if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
        try {
            EncodeRecord rec = f.get();
            all[Key{rec.sequence_id, rec.resolution, rec.qp}] = rec;
        } catch (const std::exception&) {
        }
    }
    std::vector<EncodeRecord> out;
    out.reserve(all.size());
    for (auto& [_, rec] : all) out.push_back(rec);
    return out;
}

void EncodeSession::save_cache(const std::filesystem::path& csv_path) const {
    save_records_csv(cached_records(), csv_path);
}

std::string sequence_name(int index, int total) {
    int digits = 3;
    for (int t = total - 1; t >= 1000; t /= 10) ++digits;
    std::string n = std::to_string(index);
    return "seq" + std::string(digits > static_cast<int>(n.size()) ? digits - n.size() : 0, '0') + n;
}

namespace {

void check_range(const UniformRange& r, const char* name, bool positive) {
    if (!(r.lo <= r.hi)) throw ConfigError(std::string("empty parameter range for ") + name);
    if (positive && !(r.lo > 0.0)) throw ConfigError(std::string("parameter range must be positive for ") + name);
}

}  // namespace

bool has_single_crossovers(const SyntheticCurveParams& p, QpRange range) {
    for (Resolution hi : {Resolution::p2160, Resolution::p1080, Resolution::p720}) {
        const LogisticCurve& h = p.curves[hi];
        const LogisticCurve& l = p.curves[*lower_neighbour(hi)];
        const double lo_lr = std::max(h.log_rate(range.max), l.log_rate(range.max));
        const double hi_lr = std::min(h.log_rate(range.min), l.log_rate(range.min));
        if (!(hi_lr > lo_lr)) return false;
        constexpr int kSteps = 2000;
        int flips = 0;
        double prev = 0.0;
        for (int k = 0; k <= kSteps; ++k) {
            const double lr = lo_lr + (hi_lr - lo_lr) * k / kSteps;
            const double d = h.vmaf_at_log_rate(lr) - l.vmaf_at_log_rate(lr);
            if (k > 0 && ((d > 0.0) != (prev > 0.0))) ++flips;
            prev = d;
        }
        // lower resolution ahead at the low end, higher resolution at the top
        if (flips != 1 || !(prev > 0.0)) return false;
    }
    return true;
}

SyntheticCorpus generate_corpus(int n_sequences, const ParamSampler& s, std::uint64_t seed, QpRange range) {
    if (n_sequences < 1) throw ConfigError("corpus needs at least one sequence");
    check_range(s.rate_qp30_2160_kbps, "rate_qp30_2160_kbps", true);
    check_range(s.slope, "slope", true);
    check_range(s.curvature, "curvature", false);
    check_range(s.v_max_2160, "v_max_2160", true);
    for (Resolution r : kResolutions) {
        check_range(s.centre_qp[r], "centre_qp", false);
        check_range(s.width_qp[r], "width_qp", true);
        if (r != Resolution::p540) {
            check_range(s.crossover_qp[r], "crossover_qp", false);
            check_range(s.crossover_gap[r], "crossover_gap", false);
        }
    }
    if (!(s.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");

    std::mt19937_64 rng(seed);
    auto draw = [&rng](const UniformRange& r) {
        return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
    };
    auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };

    // nullopt when the draw gives no usable quality ordering
    auto sample = [&]() -> std::optional<SyntheticCurveParams> {
        SyntheticCurveParams p;
        p.noise_sigma = s.noise_sigma;
        p.seed = rng();
        const double b = draw(s.slope);
        const double curv = draw(s.curvature);
        const double log_r30 = draw({std::log(s.rate_qp30_2160_kbps.lo), std::log(s.rate_qp30_2160_kbps.hi)});
        PerResolution<double> centre, width;
        for (Resolution r : kResolutions) {
            centre[r] = draw(s.centre_qp[r]);
            width[r] = draw(s.width_qp[r]);
        }
        for (Resolution r : kResolutions) {
            LogisticCurve& c = p.curves[r];
            c.b = b;
            c.c = curv;
            c.sigma_s = width[r] * b;
        }
        auto place = [&](Resolution r, double a) {
            LogisticCurve& c = p.curves[r];
            c.a = a;
            c.mu = c.log_rate(centre[r]);
        };
        place(Resolution::p2160, log_r30 + 30.0 * b);
        p.curves[Resolution::p2160].v_max = std::min(100.0, draw(s.v_max_2160));
        for (Resolution hi : {Resolution::p2160, Resolution::p1080, Resolution::p720}) {
            const Resolution lo = *lower_neighbour(hi);
            LogisticCurve& ch = p.curves[hi];
            LogisticCurve& cl = p.curves[lo];
            const double qp_hi = draw(s.crossover_qp[hi]);
            const double qp_lo = qp_hi - draw(s.crossover_gap[hi]);
            // equal rate and equal quality at (qp_hi, qp_lo)
            place(lo, 0.0);
            place(lo, ch.log_rate(qp_hi) - cl.log_rate(qp_lo));
            cl.v_max = 1.0;
            cl.v_max = ch.vmaf(qp_hi) / cl.vmaf(qp_lo);
            if (!(cl.v_max < ch.v_max) || cl.v_max < s.min_v_max) return std::nullopt;
        }
        check_params(p);
        if (!has_single_crossovers(p, range)) return std::nullopt;
        return p;
    };

    SyntheticCorpus corpus;
    std::vector<EncodeRecord> records;
    for (int i = 0; i < n_sequences; ++i) {
        const std::string name = sequence_name(i, n_sequences);
        std::optional<SyntheticCurveParams> p = sample();
        for (int tries = 0; !p; ++tries) {
            if (tries >= s.max_rejections)
                throw ConfigError("sampler rarely produces ordered, crossing curves; check the parameter ranges");
            p = sample();
        }
        for (Resolution r : kResolutions)
            for (int qp = range.min; qp <= range.max; ++qp) records.push_back(evaluate_synthetic(*p, name, r, qp));
        corpus.params.emplace(name, *p);
    }
    corpus.measurements = MeasurementSet::from_records(std::move(records), range);
    return corpus;
}

}  // namespace ladderkit
