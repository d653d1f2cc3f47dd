#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "ladderkit/encode_backend.hpp"
#include "ladderkit/errors.hpp"
#include "ladderkit/kneedle.hpp"

using namespace ladderkit;

namespace {

std::vector<Point2> sample(const std::function<double(double)>& f, int n, double lo = 0.0, double hi = 1.0) {
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * i / (n - 1);
        pts.push_back({x, f(x)});
    }
    return pts;
}

// Index of the largest normalised difference y_n - x_n.
std::size_t diff_argmax(const std::vector<Point2>& pts) {
    double ymin = pts[0].y, ymax = pts[0].y;
    for (const auto& p : pts) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    std::size_t best = 0;
    double best_d = -1e300;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = (pts[i].y - ymin) / (ymax - ymin) -
                         (pts[i].x - pts.front().x) / (pts.back().x - pts.front().x);
        if (d > best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

FittedCurve fitted(const SyntheticCurveParams& p, Resolution r) {
    std::vector<EncodeRecord> recs;
    for (int qp = 15; qp <= 45; ++qp) recs.push_back(evaluate_synthetic(p, "s", r, qp));
    return fit_rq_curve(recs);
}

}  // namespace

TEST_SUITE("kneedle") {
    TEST_CASE("straight line has no knee") {
        const auto pts = sample([](double x) { return x; }, 11);
        CHECK_FALSE(kneedle(pts).has_value());
        const auto affine = sample([](double x) { return 3.0 * x - 7.0; }, 11, 2.0, 9.0);
        CHECK_FALSE(kneedle(affine).has_value());
    }

    TEST_CASE("right angle puts the knee on the corner") {
        const std::vector<Point2> pts{{0, 0}, {0.5, 1}, {1, 1}};
        REQUIRE(kneedle(pts).has_value());
        CHECK(*kneedle(pts) == 1);
    }

    TEST_CASE("saturating exponential peaks where the difference curve peaks") {
        const auto pts = sample([](double x) { return 1.0 - std::exp(-5.0 * x); }, 101);
        const auto k = kneedle(pts, 1.0);
        REQUIRE(k.has_value());
        CHECK(*k == diff_argmax(pts));
    }

    TEST_CASE("symmetric logistic knee matches the difference-curve scan") {
        const auto pts = sample([](double x) { return 1.0 / (1.0 + std::exp(-10.0 * (x - 0.5))); }, 101);
        const auto k = kneedle(pts, 1.0);
        REQUIRE(k.has_value());
        CHECK(*k == diff_argmax(pts));
    }

    TEST_CASE("affine rescaling leaves the index unchanged") {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(0.5, 20.0);
        for (int trial = 0; trial < 20; ++trial) {
            const double rate = 2.0 + trial * 0.3;
            const auto pts = sample([&](double x) { return 1.0 - std::exp(-rate * x); }, 60);
            auto scaled = pts;
            const double ax = u(rng), bx = u(rng) - 10.0, ay = u(rng), by = u(rng) - 10.0;
            for (auto& p : scaled) p = {ax * p.x + bx, ay * p.y + by};
            CHECK(kneedle(pts) == kneedle(scaled));
        }
    }

    TEST_CASE("larger sensitivity never confirms earlier") {
        const auto pts = sample([](double x) { return std::log1p(20.0 * x) + 0.05 * std::sin(30.0 * x); }, 80);
        std::optional<std::size_t> prev;
        for (double s : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            const auto k = kneedle(pts, s);
            if (prev && k) CHECK(*k >= *prev);
            if (k) {
                CHECK(*k < pts.size());
                prev = k;
            }
        }
    }

    TEST_CASE("input checks") {
        CHECK_THROWS_AS(kneedle(std::vector<Point2>{{0, 0}, {1, 1}}), InsufficientDataError);
        CHECK_THROWS_AS(kneedle(std::vector<Point2>{{0, 0}, {1, 1}, {1, 2}}), ValidationError);
        CHECK(parse_knee_plane("rate") == KneePlane::rate_vmaf);
        CHECK_THROWS_AS(parse_knee_plane("bogus"), ConfigError);
    }

    TEST_CASE("knee of a 2160p curve placed at QP 30") {
        SyntheticCurveParams p;
        // The knee sits about 7 QP below the logistic centre at this width, so
        // the centre goes at QP 37.
        p.curves[Resolution::p2160] = {98.0, 8.0 - 7 * 0.14, 0.55, 12.2, 0.14, 0.0};
        const auto curve = fitted(p, Resolution::p2160);
        const auto knee = knee_qp(curve);
        // Dense scan of the normalised difference curve on the parametric model.
        std::vector<Point2> pts;
        for (int i = 0; i <= 3000; ++i) {
            const double qp = 45.0 - i * 0.01;
            pts.push_back({p.curves[Resolution::p2160].log_rate(qp), p.curves[Resolution::p2160].vmaf(qp)});
        }
        const double oracle_qp = 45.0 - diff_argmax(pts) * 0.01;
        CHECK(std::abs(knee.qp - oracle_qp) <= 1.0);
        CHECK(std::abs(knee.qp - 30) <= 1);
        CHECK(knee.vmaf == curve.vmaf(knee.qp));
        CHECK(knee.log_rate == curve.log_rate(knee.qp));
    }

    TEST_CASE("flat curve falls back to the prior with a warning") {
        SyntheticCurveParams p;
        // Saturated at v_max over the whole span: the difference curve is a line.
        p.curves[Resolution::p720] = {90.0, -40.0, 0.5, 12.0, 0.14, 0.0};
        const auto curve = fitted(p, Resolution::p720);
        CHECK_THROWS_AS(knee_qp(curve), NoKneeError);
        std::vector<std::string> warnings;
        const auto k = knee_qp_or_prior(curve, 1.0, KneePlane::log_rate_vmaf, warnings);
        CHECK(k.qp == knee_prior_qp(Resolution::p720));
        CHECK(warnings.size() == 1);
    }
}
