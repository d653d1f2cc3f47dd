#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "ladderkit/encode_backend.hpp"
#include "ladderkit/errors.hpp"
#include "ladderkit/interp.hpp"

using namespace ladderkit;

namespace {

std::vector<double> dense(double lo, double hi, int n) {
    std::vector<double> xs;
    for (int i = 0; i <= n; ++i) xs.push_back(lo + (hi - lo) * i / n);
    xs.back() = hi;
    return xs;
}

}  // namespace

TEST_SUITE("interp") {
    TEST_CASE("two knots give the secant") {
        const std::vector<double> x{1.0, 3.0}, y{2.0, 8.0};
        const auto m = pchip_slopes(x, y);
        CHECK(m[0] == 3.0);
        CHECK(m[1] == 3.0);
        InterpolatedCurve c(x, y);
        CHECK(c(2.0) == doctest::Approx(5.0).epsilon(1e-14));
    }

    TEST_CASE("flat interval forces zero slopes beside it") {
        const std::vector<double> x{0, 1, 2, 3}, y{0, 1, 1, 2};
        const auto m = pchip_slopes(x, y);
        CHECK(m[1] == 0.0);
        CHECK(m[2] == 0.0);
        InterpolatedCurve c(x, y);
        for (double t : dense(1.0, 2.0, 100)) CHECK(c(t) == 1.0);
    }

    TEST_CASE("cubic samples match the textbook routine") {
        const std::vector<double> x{-2, -1, 0, 1, 2};
        std::vector<double> y;
        for (double v : x) y.push_back(v * v * v);
        const auto m = pchip_slopes(x, y);
        const auto ref = oracle::pchip_slopes(x, y);
        for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(m[i] - ref[i]) <= 1e-12);
    }

    TEST_CASE("random knot sets agree with the textbook routine") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.1, 2.0), s(-3.0, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> x{0.0}, y{s(rng)};
            for (int i = 0; i < 8; ++i) {
                x.push_back(x.back() + u(rng));
                y.push_back(s(rng));
            }
            const auto m = pchip_slopes(x, y);
            const auto ref = oracle::pchip_slopes(x, y);
            InterpolatedCurve c(x, y);
            for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(m[i] - ref[i]) <= 1e-12);
            for (double t : dense(x.front(), x.back(), 200))
                CHECK(std::abs(c(t) - oracle::hermite(x, y, ref, t)) <= 1e-12);
        }
    }

    TEST_CASE("knots are reproduced exactly and collinear knots stay linear") {
        const std::vector<double> x{15, 20, 26, 31, 36, 40, 45}, y{96, 93, 88, 80, 71, 62, 50};
        InterpolatedCurve c(x, y);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(c(x[i]) == y[i]);

        std::vector<double> yl;
        for (double v : x) yl.push_back(7.0 - 0.25 * v);
        InterpolatedCurve lin(x, yl);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double mid = 0.5 * (x[i] + x[i + 1]);
            CHECK(std::abs(lin(mid) - (7.0 - 0.25 * mid)) <= 1e-12);
        }
    }

    TEST_CASE("monotone knots never overshoot") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> gap(0.05, 3.0), step(0.0, 1.0);
        std::bernoulli_distribution flat(0.2);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const bool increasing = trial % 2 == 0;
            std::vector<double> x{0.0}, y{0.0};
            for (int i = 0; i < 10; ++i) {
                x.push_back(x.back() + gap(rng));
                const double d = flat(rng) ? 0.0 : step(rng) * step(rng) * 10.0;
                y.push_back(y.back() + (increasing ? d : -d));
            }
            InterpolatedCurve c(x, y);
            const auto xs = dense(x.front(), x.back(), 10000);
            const auto ys = c(std::span<const double>(xs));
            for (std::size_t i = 1; i < ys.size(); ++i) {
                const double back = increasing ? ys[i - 1] - ys[i] : ys[i] - ys[i - 1];
                worst = std::max(worst, back);
            }
            // Bracketing bound per interval.
            for (std::size_t i = 0; i < xs.size(); ++i) {
                std::size_t k = 0;
                while (k + 2 < x.size() && xs[i] > x[k + 1]) ++k;
                const double lo = std::min(y[k], y[k + 1]), hi = std::max(y[k], y[k + 1]);
                worst = std::max({worst, lo - ys[i], ys[i] - hi});
            }
        }
        CHECK(worst <= 1e-12);
    }

    TEST_CASE("perturbing a knot is local") {
        const std::vector<double> x{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
        std::vector<double> y{0, 0.5, 1.5, 2.0, 4.0, 4.1, 5.0, 7.0, 7.5, 9.0};
        InterpolatedCurve before(x, y);
        y[5] += 0.6;
        InterpolatedCurve after(x, y);
        for (double t : dense(0.0, 9.0, 900)) {
            if (t >= 3.0 && t <= 7.0) continue;
            CHECK(before(t) == after(t));
        }
    }

    TEST_CASE("domain and input errors") {
        CHECK_THROWS_AS(pchip_slopes(std::vector<double>{0, 1, 1}, std::vector<double>{0, 1, 2}), ValidationError);
        CHECK_THROWS_AS(pchip_slopes(std::vector<double>{0}, std::vector<double>{0}), InsufficientDataError);
        InterpolatedCurve c({0, 1, 2}, {0, 1, 4});
        CHECK_THROWS_AS(c(-0.001), DomainError);
        CHECK_THROWS_AS(c(2.001), DomainError);
        CHECK(c.inverse(1.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK_THROWS_AS(c.inverse(5.0), DomainError);
    }

    TEST_CASE("fitting encode records") {
        SyntheticCurveParams p;
        p.curves[Resolution::p1080] = {98.0, 7.8, 0.6, 12.5, 0.14, 0.002};

        SUBCASE("seven records cover every universe QP inside their span") {
            std::vector<EncodeRecord> recs;
            for (int qp : {15, 20, 25, 30, 35, 40, 45}) recs.push_back(evaluate_synthetic(p, "s", Resolution::p1080, qp));
            const auto fit = fit_rq_curve(recs);
            CHECK(fit.qp_min() == 15);
            CHECK(fit.qp_max() == 45);
            for (int qp = 15; qp <= 45; ++qp) CHECK(std::isfinite(fit.vmaf(qp)));
            const auto pts = densify(fit, 0.1);
            CHECK(pts.size() == 301);
            CHECK(pts.back().qp == 45.0);
        }
        SUBCASE("two records are linear in both coordinates") {
            std::vector<EncodeRecord> recs{evaluate_synthetic(p, "s", Resolution::p1080, 20),
                                           evaluate_synthetic(p, "s", Resolution::p1080, 40)};
            const auto fit = fit_rq_curve(recs);
            const double lr = 0.5 * (std::log(recs[0].bitrate_kbps) + std::log(recs[1].bitrate_kbps));
            CHECK(std::abs(fit.log_rate(30.0) - lr) <= 1e-12);
            CHECK(std::abs(fit.vmaf(30.0) - 0.5 * (recs[0].vmaf + recs[1].vmaf)) <= 1e-12);
        }
        SUBCASE("five records track the parametric model between knots") {
            auto max_err = [](const SyntheticCurveParams& q, const std::string& seq, Resolution r) {
                std::vector<EncodeRecord> recs;
                for (int qp : {26, 31, 36, 40, 45}) recs.push_back(evaluate_synthetic(q, seq, r, qp));
                const auto fit = fit_rq_curve(recs);
                double worst = 0.0;
                for (int qp = 26; qp <= 45; ++qp) worst = std::max(worst, std::abs(fit.vmaf(qp) - q.curves[r].vmaf(qp)));
                return worst;
            };
            // A five-QP gap across the steep middle of a logistic about five QP
            // wide costs up to about 0.8 VMAF; typical curves stay under 0.5.
            SyntheticCurveParams d;
            CHECK(max_err(d, "s", Resolution::p2160) < 1.0);
            const auto corpus = generate_corpus(30, ParamSampler{}, 9);
            std::vector<double> errs;
            for (const auto& [seq, q] : corpus.params)
                for (Resolution r : kResolutions) errs.push_back(max_err(q, seq, r));
            std::sort(errs.begin(), errs.end());
            CHECK(errs[errs.size() / 2] < 0.5);
            CHECK(errs.back() < 1.0);
        }
        SUBCASE("mixed resolutions are rejected") {
            std::vector<EncodeRecord> recs{evaluate_synthetic(p, "s", Resolution::p1080, 20),
                                           evaluate_synthetic(p, "s", Resolution::p720, 30)};
            CHECK_THROWS_AS(fit_rq_curve(recs), ValidationError);
        }
    }
}
