#include "ladderkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "csv.hpp"
#include "ladderkit/errors.hpp"
#include "parallel.hpp"

namespace ladderkit {

FrameLuma::FrameLuma(int w, int h, int depth, std::uint16_t fill)
    : width(w), height(h), bit_depth(depth), samples(static_cast<std::size_t>(w) * h, fill) {}

void check_frame(const FrameLuma& f) {
    if (f.width < 1 || f.height < 1) throw ValidationError("frame dimensions must be positive");
    if (f.bit_depth != 8 && f.bit_depth != 10) throw ValidationError("bit depth must be 8 or 10");
    if (f.samples.size() != static_cast<std::size_t>(f.width) * f.height)
        throw ValidationError("frame sample count does not match its dimensions");
    const int mx = f.max_value();
    for (auto v : f.samples)
        if (v > mx) throw ValidationError("luma sample " + std::to_string(v) + " exceeds the bit depth");
}

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "F1_meanGLCM_con", "F2_meanGLCM_cor",  "F3_meanGLCM_hom",  "F4_meanGLCM_enr",  "F5_meanGLCM_ent",
        "F6_meanTC_mean",  "F7_meanTC_std",    "F8_meanTC_skw",    "F9_meanTC_kur",    "F10_meanTC_entr",
        "F11_meanNCC_mean", "F12_meanNCC_std", "F13_meanNCC_skw", "F14_meanNCC_kur", "F15_meanNCC_entr",
        "F16_RsMSE_1080p", "F17_RsMSE_720p"};
    return names;
}

int quantize_level(std::uint16_t v, int bit_depth, int levels) noexcept {
    const long long q = static_cast<long long>(v) * levels >> bit_depth;
    return static_cast<int>(std::min<long long>(q, levels - 1));
}

std::vector<double> glcm_matrix(const FrameLuma& frame, int levels, std::span<const Offset> offsets) {
    if (levels < 2) throw DomainError("GLCM needs at least 2 levels");
    if (offsets.empty()) throw DomainError("GLCM needs at least one offset");
    std::vector<int> q(frame.samples.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantize_level(frame.samples[i], frame.bit_depth, levels);

    std::vector<double> m(static_cast<std::size_t>(levels) * levels, 0.0);
    double total = 0.0;
    for (const Offset& o : offsets) {
        const int x0 = std::max(0, -o.dx), x1 = std::min(frame.width, frame.width - o.dx);
        const int y0 = std::max(0, -o.dy), y1 = std::min(frame.height, frame.height - o.dy);
        if (x1 <= x0 || y1 <= y0)
            throw DomainError("frame of " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                              " is smaller than the GLCM offset span");
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) {
                const int i = q[static_cast<std::size_t>(y) * frame.width + x];
                const int j = q[static_cast<std::size_t>(y + o.dy) * frame.width + x + o.dx];
                m[static_cast<std::size_t>(i) * levels + j] += 1.0;
                m[static_cast<std::size_t>(j) * levels + i] += 1.0;
                total += 2.0;
            }
    }
    for (auto& v : m) v /= total;
    return m;
}

GlcmDescriptors glcm_descriptors(const FrameLuma& frame, int levels, std::span<const Offset> offsets) {
    const std::vector<double> p = glcm_matrix(frame, levels, offsets);
    GlcmDescriptors d;
    double mu = 0.0;
    for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j) mu += i * p[static_cast<std::size_t>(i) * levels + j];
    double var = 0.0, cov = 0.0;
    for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j) {
            const double pij = p[static_cast<std::size_t>(i) * levels + j];
            if (pij == 0.0) continue;
            const double diff = i - j;
            d.contrast += diff * diff * pij;
            d.homogeneity += pij / (1.0 + std::abs(diff));
            d.energy += pij * pij;
            d.entropy -= pij * std::log2(pij);
            var += (i - mu) * (i - mu) * pij;
            cov += (i - mu) * (j - mu) * pij;
        }
    // symmetric matrix: both marginals share mean and variance
    if (var > 0.0) {
        d.correlation = cov / var;
    } else {
        d.correlation = 0.0;
        d.correlation_degenerate = true;
    }
    return d;
}

DistributionStats distribution_stats(std::span<const double> values, double lo, double hi, int bins) {
    if (values.empty()) throw InsufficientDataError("statistics of an empty sample");
    if (!(hi > lo) || bins < 1) throw DomainError("bad histogram support");
    DistributionStats s;
    const double n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.std = std::sqrt(m2);
    if (s.std <= 1e-12 * std::max(1.0, std::abs(s.mean))) {
        s.std = 0.0;
        s.degenerate = true;
    } else {
        s.skewness = m3 / (m2 * s.std);
        s.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
        int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        k = std::clamp(k, 0, bins - 1);
        count[static_cast<std::size_t>(k)] += 1.0;
    }
    for (double c : count)
        if (c > 0.0) s.entropy -= (c / n) * std::log2(c / n);
    return s;
}

namespace {

// Mean-subtracted normalized correlation of two equally sized regions.
// Constant regions give 1 when both are the same constant, 0 otherwise.
template <typename GetA, typename GetB>
double region_ncc(int w, int h, GetA a, GetB b, bool& degenerate) {
    double sa = 0.0, sb = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            sa += a(x, y);
            sb += b(x, y);
        }
    const double n = static_cast<double>(w) * h;
    const double ma = sa / n, mb = sb / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double da = a(x, y) - ma, db = b(x, y) - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
    if (saa == 0.0 || sbb == 0.0) {
        degenerate = true;
        return saa == 0.0 && sbb == 0.0 && ma == mb ? 1.0 : 0.0;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

void require_same_shape(const FrameLuma& a, const FrameLuma& b) {
    if (a.width != b.width || a.height != b.height) throw ValidationError("frames differ in size");
}

DistributionStats average_stats(const std::vector<DistributionStats>& per_pair) {
    DistributionStats out;
    for (const auto& s : per_pair) {
        out.mean += s.mean;
        out.std += s.std;
        out.skewness += s.skewness;
        out.kurtosis += s.kurtosis;
        out.entropy += s.entropy;
        out.degenerate = out.degenerate || s.degenerate;
    }
    const double n = static_cast<double>(per_pair.size());
    out.mean /= n;
    out.std /= n;
    out.skewness /= n;
    out.kurtosis /= n;
    out.entropy /= n;
    return out;
}

}  // namespace

std::vector<double> tc_values(const FrameLuma& a, const FrameLuma& b, int block, bool* degenerate) {
    require_same_shape(a, b);
    if (block < 4) throw DomainError("TC block must be at least 4");
    const int bx = a.width / block, by = a.height / block;
    if (bx == 0 || by == 0) throw DomainError("frame smaller than one TC block");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(bx) * by);
    bool flag = false;
    for (int j = 0; j < by; ++j)
        for (int i = 0; i < bx; ++i) {
            const int x0 = i * block, y0 = j * block;
            out.push_back(region_ncc(
                block, block, [&](int x, int y) { return static_cast<double>(a.at(x0 + x, y0 + y)); },
                [&](int x, int y) { return static_cast<double>(b.at(x0 + x, y0 + y)); }, flag));
        }
    if (degenerate) *degenerate = flag;
    return out;
}

DistributionStats tc_stats(std::span<const FrameLuma> frames, int block) {
    if (frames.size() < 2) throw InsufficientDataError("TC needs at least 2 frames");
    std::vector<DistributionStats> per_pair(frames.size() - 1);
    detail::parallel_for(per_pair.size(), 0, [&](std::size_t k) {
        bool flag = false;
        const auto v = tc_values(frames[k], frames[k + 1], block, &flag);
        per_pair[k] = distribution_stats(v);
        per_pair[k].degenerate = per_pair[k].degenerate || flag;
    });
    return average_stats(per_pair);
}

double ncc_at(const FrameLuma& a, const FrameLuma& b, int dx, int dy, bool* degenerate) {
    require_same_shape(a, b);
    const int x0 = std::max(0, -dx), x1 = std::min(a.width, a.width - dx);
    const int y0 = std::max(0, -dy), y1 = std::min(a.height, a.height - dy);
    if (x1 <= x0 || y1 <= y0) throw DomainError("displacement exceeds the frame size");
    bool flag = false;
    const double v = region_ncc(
        x1 - x0, y1 - y0, [&](int x, int y) { return static_cast<double>(a.at(x0 + x, y0 + y)); },
        [&](int x, int y) { return static_cast<double>(b.at(x0 + x + dx, y0 + y + dy)); }, flag);
    if (degenerate) *degenerate = *degenerate || flag;
    return v;
}

std::vector<double> ncc_values(const FrameLuma& a, const FrameLuma& b, int radius, bool* degenerate) {
    if (radius < 1) throw DomainError("NCC radius must be at least 1");
    if (radius >= a.width || radius >= a.height) throw DomainError("NCC radius exceeds the frame size");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) out.push_back(ncc_at(a, b, dx, dy, degenerate));
    return out;
}

DistributionStats ncc_stats(std::span<const FrameLuma> frames, int radius) {
    if (frames.size() < 2) throw InsufficientDataError("NCC needs at least 2 frames");
    std::vector<DistributionStats> per_pair(frames.size() - 1);
    detail::parallel_for(per_pair.size(), 0, [&](std::size_t k) {
        bool flag = false;
        const auto v = ncc_values(frames[k], frames[k + 1], radius, &flag);
        per_pair[k] = distribution_stats(v);
        per_pair[k].degenerate = per_pair[k].degenerate || flag;
    });
    return average_stats(per_pair);
}

double lanczos3_kernel(double x) noexcept {
    x = std::abs(x);
    if (x < 1e-12) return 1.0;
    if (x >= 3.0) return 0.0;
    const double px = std::numbers::pi * x;
    return 3.0 * std::sin(px) * std::sin(px / 3.0) / (px * px);
}

namespace {

struct Taps {
    std::vector<int> first;  // first source index per output sample (before clamping)
    std::vector<std::vector<double>> weights;
};

Taps make_taps(int in, int out) {
    const double scale = static_cast<double>(in) / out;
    const double stretch = std::max(1.0, scale);  // widen the kernel when downscaling
    const double support = 3.0 * stretch;
    Taps t;
    t.first.resize(static_cast<std::size_t>(out));
    t.weights.resize(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
        const double centre = (o + 0.5) * scale - 0.5;
        const int lo = static_cast<int>(std::floor(centre - support)) + 1;
        const int hi = static_cast<int>(std::ceil(centre + support)) - 1;
        auto& w = t.weights[static_cast<std::size_t>(o)];
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double k = lanczos3_kernel((i - centre) / stretch);
            w.push_back(k);
            sum += k;
        }
        for (auto& v : w) v /= sum;
        t.first[static_cast<std::size_t>(o)] = lo;
    }
    return t;
}

}  // namespace

FrameLuma lanczos3_resample(const FrameLuma& frame, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw DomainError("output dimensions must be positive");
    const Taps tx = make_taps(frame.width, out_w);
    const Taps ty = make_taps(frame.height, out_h);

    std::vector<double> tmp(static_cast<std::size_t>(out_w) * frame.height);
    for (int y = 0; y < frame.height; ++y)
        for (int o = 0; o < out_w; ++o) {
            const auto& w = tx.weights[static_cast<std::size_t>(o)];
            double acc = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                const int x = std::clamp(tx.first[static_cast<std::size_t>(o)] + static_cast<int>(k), 0,
                                         frame.width - 1);
                acc += w[k] * frame.at(x, y);
            }
            tmp[static_cast<std::size_t>(y) * out_w + o] = acc;
        }

    FrameLuma out(out_w, out_h, frame.bit_depth);
    const double mx = frame.max_value();
    for (int o = 0; o < out_h; ++o) {
        const auto& w = ty.weights[static_cast<std::size_t>(o)];
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) {
                const int y = std::clamp(ty.first[static_cast<std::size_t>(o)] + static_cast<int>(k), 0,
                                         frame.height - 1);
                acc += w[k] * tmp[static_cast<std::size_t>(y) * out_w + x];
            }
            out.at(x, o) = static_cast<std::uint16_t>(std::clamp(std::round(acc), 0.0, mx));
        }
    }
    return out;
}

double mse(const FrameLuma& a, const FrameLuma& b) {
    require_same_shape(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const double d = static_cast<double>(a.samples[i]) - b.samples[i];
        s += d * d;
    }
    return s / static_cast<double>(a.samples.size());
}

double rsmse(const FrameLuma& frame, Resolution target) {
    if (frame.width != width_of(Resolution::p2160) || frame.height != height_of(Resolution::p2160))
        throw DomainError("RsMSE needs a native 2160p frame, got " + std::to_string(frame.width) + "x" +
                          std::to_string(frame.height));
    if (target != Resolution::p1080 && target != Resolution::p720)
        throw DomainError("RsMSE target must be 1080p or 720p");
    return rsmse_scaled(frame, target);
}

double rsmse_scaled(const FrameLuma& frame, Resolution target) {
    const double f = static_cast<double>(height_of(target)) / height_of(Resolution::p2160);
    const int w = std::max(1, static_cast<int>(std::lround(frame.width * f)));
    const int h = std::max(1, static_cast<int>(std::lround(frame.height * f)));
    const FrameLuma down = lanczos3_resample(frame, w, h);
    return mse(frame, lanczos3_resample(down, frame.width, frame.height));
}

std::vector<FrameLuma> read_yuv420_luma(const std::filesystem::path& path, const YuvFormat& fmt) {
    if (fmt.width < 2 || fmt.height < 2 || fmt.width % 2 || fmt.height % 2)
        throw ValidationError("4:2:0 dimensions must be even and at least 2");
    if (fmt.bit_depth != 8 && fmt.bit_depth != 10) throw ValidationError("bit depth must be 8 or 10");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::size_t bps = fmt.bit_depth > 8 ? 2 : 1;
    const std::size_t luma = static_cast<std::size_t>(fmt.width) * fmt.height;
    const std::size_t chroma = 2 * (luma / 4);
    std::vector<FrameLuma> frames;
    std::vector<unsigned char> buf(luma * bps);
    for (int k = 0; !fmt.frames || k < *fmt.frames; ++k) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        const auto got = static_cast<std::size_t>(in.gcount());
        if (got == 0 && !fmt.frames) break;
        if (got != buf.size()) throw IoError("truncated luma plane in frame " + std::to_string(k));
        FrameLuma f(fmt.width, fmt.height, fmt.bit_depth);
        for (std::size_t i = 0; i < luma; ++i)
            f.samples[i] = bps == 1 ? buf[i] : static_cast<std::uint16_t>(buf[2 * i] | (buf[2 * i + 1] << 8));
        check_frame(f);
        in.ignore(static_cast<std::streamsize>(chroma * bps));
        if (static_cast<std::size_t>(in.gcount()) != chroma * bps)
            throw IoError("truncated chroma planes in frame " + std::to_string(k));
        frames.push_back(std::move(f));
    }
    if (frames.empty()) throw IoError("no frames in " + path.string());
    return frames;
}

void write_yuv420(const std::filesystem::path& path, std::span<const FrameLuma> frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& f : frames) {
        const bool wide = f.bit_depth > 8;
        auto put = [&](std::uint16_t v) {
            out.put(static_cast<char>(v & 0xff));
            if (wide) out.put(static_cast<char>(v >> 8));
        };
        for (auto v : f.samples) put(v);
        const auto grey = static_cast<std::uint16_t>(1 << (f.bit_depth - 1));
        for (std::size_t i = 0; i < 2 * (f.samples.size() / 4); ++i) put(grey);
    }
}

FeatureVector extract_features(const std::string& sequence_id, std::span<const FrameLuma> frames,
                               const FeatureConfig& cfg) {
    if (frames.size() < 2) throw InsufficientDataError("feature extraction needs at least 2 frames");
    for (const auto& f : frames) {
        check_frame(f);
        require_same_shape(frames.front(), f);
    }
    FeatureVector fv;
    fv.sequence_id = sequence_id;
    auto& v = fv.values;

    std::vector<GlcmDescriptors> glcm(frames.size());
    detail::parallel_for(frames.size(), 0,
                         [&](std::size_t k) { glcm[k] = glcm_descriptors(frames[k], cfg.glcm_levels); });
    bool cor_flag = false;
    for (const auto& g : glcm) {
        v[0] += g.contrast;
        v[1] += g.correlation;
        v[2] += g.homogeneity;
        v[3] += g.energy;
        v[4] += g.entropy;
        cor_flag = cor_flag || g.correlation_degenerate;
    }
    for (int i = 0; i < 5; ++i) v[static_cast<std::size_t>(i)] /= static_cast<double>(frames.size());
    if (cor_flag) fv.flags.push_back("F2: constant frame, correlation set to 0");

    const DistributionStats tc = tc_stats(frames, cfg.tc_block);
    v[5] = tc.mean;
    v[6] = tc.std;
    v[7] = tc.skewness;
    v[8] = tc.kurtosis;
    v[9] = tc.entropy;
    if (tc.degenerate) fv.flags.push_back("F6-F10: constant blocks or zero spread");

    std::vector<FrameLuma> small;
    std::span<const FrameLuma> ncc_frames = frames;
    if (frames.front().width > cfg.ncc_max_width) {
        const double f = static_cast<double>(cfg.ncc_max_width) / frames.front().width;
        const int h = std::max(1, static_cast<int>(std::lround(frames.front().height * f)));
        small.resize(frames.size());
        detail::parallel_for(frames.size(), 0,
                             [&](std::size_t k) { small[k] = lanczos3_resample(frames[k], cfg.ncc_max_width, h); });
        ncc_frames = small;
    }
    const DistributionStats ncc = ncc_stats(ncc_frames, cfg.ncc_radius);
    v[10] = ncc.mean;
    v[11] = ncc.std;
    v[12] = ncc.skewness;
    v[13] = ncc.kurtosis;
    v[14] = ncc.entropy;
    if (ncc.degenerate) fv.flags.push_back("F11-F15: constant overlap or zero spread");

    v[15] = rsmse_scaled(frames.front(), Resolution::p1080);
    v[16] = rsmse_scaled(frames.front(), Resolution::p720);
    return fv;
}

void save_feature_table(const std::vector<FeatureVector>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "sequence";
    for (const auto& n : feature_names()) out << ',' << n;
    out << '\n';
    for (const auto& r : rows) {
        out << r.sequence_id;
        for (double x : r.values) out << ',' << format_double(x);
        out << '\n';
    }
}

std::vector<FeatureVector> load_feature_table(const std::filesystem::path& path) {
    const csv::Table t = csv::read(path);
    const int c_seq = t.require("sequence");
    std::array<int, kFeatureCount> cols{};
    for (int i = 0; i < kFeatureCount; ++i) cols[static_cast<std::size_t>(i)] = t.require(feature_names()[static_cast<std::size_t>(i)]);
    std::vector<FeatureVector> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        FeatureVector fv;
        fv.sequence_id = t.rows[r][static_cast<std::size_t>(c_seq)];
        for (int i = 0; i < kFeatureCount; ++i)
            fv.values[static_cast<std::size_t>(i)] =
                csv::to_double(t.rows[r][static_cast<std::size_t>(cols[static_cast<std::size_t>(i)])],
                               t.line_numbers[r], feature_names()[static_cast<std::size_t>(i)]);
        out.push_back(std::move(fv));
    }
    return out;
}

}  // namespace ladderkit
