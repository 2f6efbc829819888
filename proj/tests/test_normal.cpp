#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "volq/errors.hpp"
#include "volq/normal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace volq;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// High-precision references (40-digit evaluation, rounded to double).
constexpr double kPhi0 = 0.3989422804014326779;   // 1/sqrt(2 pi)
constexpr double kPhi1 = 0.2419707245191433498;   // exp(-1/2)/sqrt(2 pi)
constexpr double kCdf01 = 0.5398278372770289815;  // Phi(0.1)
constexpr double kCdfM99 = 2.0813752194932135184e-23; // Phi(-9.9)

double brute_moment(int j, double lo, double hi) {
    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto f = [j](double z) { return std::pow(z, j) * norm_pdf(z); };
    return Quad::integrate(f, lo, hi, 12, 1e-14);
}

} // namespace

TEST_CASE("density at reference points") {
    CHECK(norm_pdf(0.0) == doctest::Approx(kPhi0).epsilon(1e-15));
    CHECK(norm_pdf(1.0) == doctest::Approx(kPhi1).epsilon(1e-15));
    CHECK(norm_pdf(kInf) == 0.0);
    CHECK(norm_pdf(-kInf) == 0.0);
}

TEST_CASE("density symmetry") {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> x(-8.0, 8.0);
    for (int i = 0; i < 200; ++i) {
        double v = x(rng);
        CHECK(norm_pdf(v) == norm_pdf(-v));
    }
}

TEST_CASE("cdf at reference points") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(kInf) == 1.0);
    CHECK(norm_cdf(-kInf) == 0.0);
    CHECK(norm_cdf(0.1) == doctest::Approx(kCdf01).epsilon(1e-15));
    // Left-tail relative accuracy matters for mass-at-zero estimates.
    CHECK(norm_cdf(-9.9) == doctest::Approx(kCdfM99).epsilon(1e-13));
}

TEST_CASE("cdf is nondecreasing and complementary") {
    double prev = 0.0;
    for (int i = 0; i <= 600; ++i) {
        double x = -15.0 + i * 0.05;
        double c = norm_cdf(x);
        CHECK(c >= prev);
        CHECK(c + norm_cdf(-x) == doctest::Approx(1.0).epsilon(1e-15));
        prev = c;
    }
}

TEST_CASE("density is the cdf derivative") {
    for (int i = -12; i <= 12; ++i) {
        double x = i * 0.5; // |x| <= 6
        double h = 1e-5;
        double fd = (norm_cdf(x + h) - norm_cdf(x - h)) / (2.0 * h);
        CHECK(fd == doctest::Approx(norm_pdf(x)).epsilon(1e-8));
    }
}

TEST_CASE("whole-line moments") {
    SegmentMoments m = segment_moments(2, -kInf, kInf);
    REQUIRE(m.moments.size() == 3);
    CHECK(m.moments[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.moments[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(m.moments[2] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("half-line moments") {
    SegmentMoments m = segment_moments(2, 0.0, kInf);
    CHECK(m.moments[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.moments[1] == doctest::Approx(kPhi0).epsilon(1e-15));
    CHECK(m.moments[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("degenerate interval gives zero moments") {
    SegmentMoments m = segment_moments(4, 1.3, 1.3);
    for (double v : m.moments) CHECK(v == 0.0);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(segment_moments(kMaxMomentDegree + 1, 0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(segment_moments(-1, 0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(segment_moments(2, 1.0, 0.0), InvalidInput);
    double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(segment_moments(2, nan, 1.0), InvalidInput);
    CHECK_THROWS_AS(central_segment_moments(2, 0.0, 1.0, nan), InvalidInput);
}

TEST_CASE("moments match brute-force integration") {
    std::mt19937 rng(7011);
    std::uniform_real_distribution<double> pt(-6.0, 6.0);
    std::uniform_int_distribution<int> deg(0, 8);
    for (int trial = 0; trial < 60; ++trial) {
        double a = pt(rng), b = pt(rng);
        if (a > b) std::swap(a, b);
        int j = deg(rng);
        SegmentMoments m = segment_moments(j, a, b);
        for (int p = 0; p <= j; ++p)
            CHECK(m.moments[p] == doctest::Approx(brute_moment(p, a, b)).epsilon(1e-12));
    }
}

TEST_CASE("moments are additive across a split") {
    std::mt19937 rng(314159);
    std::uniform_real_distribution<double> pt(-7.0, 7.0);
    for (int trial = 0; trial < 50; ++trial) {
        double x[3] = {pt(rng), pt(rng), pt(rng)};
        std::sort(x, x + 3);
        SegmentMoments whole = segment_moments(8, x[0], x[2]);
        SegmentMoments l = segment_moments(8, x[0], x[1]);
        SegmentMoments r = segment_moments(8, x[1], x[2]);
        for (int j = 0; j <= 8; ++j)
            CHECK(whole.moments[j] ==
                  doctest::Approx(l.moments[j] + r.moments[j]).epsilon(1e-13));
    }
}

TEST_CASE("even moments of symmetric intervals are nonnegative") {
    for (double b : {0.25, 1.0, 2.5, 6.0, 9.0}) {
        SegmentMoments m = segment_moments(8, -b, b);
        for (int j = 0; j <= 8; j += 2) CHECK(m.moments[j] >= 0.0);
    }
}

TEST_CASE("central moments match shifted brute force") {
    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    std::mt19937 rng(90210);
    std::uniform_real_distribution<double> pt(-7.5, 7.5);
    for (int trial = 0; trial < 40; ++trial) {
        double a = pt(rng), b = pt(rng);
        if (a > b) std::swap(a, b);
        double c = 0.5 * (a + b);
        auto m = central_segment_moments(3, a, b, c);
        for (int j = 0; j <= 3; ++j) {
            auto f = [&](double z) { return std::pow(z - c, j) * norm_pdf(z); };
            double ref = Quad::integrate(f, a, b, 12, 1e-14);
            CHECK(m[j] == doctest::Approx(ref).epsilon(1e-13));
        }
    }
}

TEST_CASE("central moments stay conditioned far from the origin") {
    // Raw power moments about 0 near z = 8 would cancel catastrophically; the
    // centered ones must stay accurate relative to the segment mass, which is
    // the scale cubic-coefficient sums against them actually see.
    double a = 7.75, b = 8.0, c = 0.5 * (a + b);
    auto m = central_segment_moments(3, a, b, c);
    double mass = m[0];
    REQUIRE(mass > 0.0);
    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (int j = 0; j <= 3; ++j) {
        auto f = [&](double z) { return std::pow(z - c, j) * norm_pdf(z); };
        double ref = Quad::integrate(f, a, b, 12, 1e-15);
        CHECK(std::abs(m[j] - ref) <= 1e-10 * mass);
        // |z - c| <= half the segment width everywhere on the segment.
        CHECK(std::abs(m[j]) <= mass * std::pow(0.5 * (b - a), j) * (1.0 + 1e-12));
    }
}
