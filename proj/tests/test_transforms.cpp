#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "volq/errors.hpp"
#include "volq/normal.hpp"
#include "volq/oracle.hpp"
#include "volq/quadrature.hpp"
#include "volq/smile.hpp"
#include "volq/transforms.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

using namespace volq;

namespace {

const ForwardContext kUnit{1.0, "unit"};

Smile flat_smile(double sigma) {
    return Smile(kUnit, {{-1.0, sigma}, {0.0, sigma}, {1.0, sigma}});
}

// A vol spike steep enough to fold both transforms back on themselves.
Smile spike_smile() {
    return Smile(kUnit, {{-0.5, 0.2}, {-0.1, 0.2}, {0.0, 0.8}, {0.1, 0.2}, {0.5, 0.2}});
}

double f_of(Transform which, const Smile& s, double k) {
    FPair f = f_transforms(k, s.sigma_at(k));
    return which == Transform::first ? f.f1 : f.f2;
}

} // namespace

TEST_CASE("transform values and validation") {
    FPair f = f_transforms(0.0, 0.2);
    CHECK(f.f1 == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(f.f2 == doctest::Approx(0.1).epsilon(1e-15));
    f = f_transforms(0.02, 0.2);
    CHECK(f.f1 == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(f.f2 == doctest::Approx(0.2).epsilon(1e-14));

    CHECK_THROWS_AS(f_transforms(0.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(f_transforms(0.0, -0.2), InvalidInput);
    double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(f_transforms(inf, 0.2), InvalidInput);
    CHECK_THROWS_AS(f_transforms(0.0, inf), InvalidInput);
}

TEST_CASE("pointwise identities") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> ks(-3.0, 3.0);
    std::uniform_real_distribution<double> vs(0.05, 2.5);
    for (int i = 0; i < 400; ++i) {
        double k = ks(rng), sigma = vs(rng);
        auto [f1, f2] = f_transforms(k, sigma);
        CHECK(f2 - f1 == doctest::Approx(sigma).epsilon(1e-12));
        CHECK(f2 * f2 - f1 * f1 == doctest::Approx(2.0 * k).epsilon(1e-11));
        double lhs = std::exp(k) * norm_pdf(f2);
        double rhs = norm_pdf(f1);
        if (rhs > 1e-280)
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        else
            CHECK(lhs <= 1e-280);
    }
}

TEST_CASE("transform grid covers the nodes and certifies increase") {
    Smile s(kUnit, {{-1.0, 0.25}, {-0.5, 0.22}, {0.0, 0.2}, {0.5, 0.21}, {1.0, 0.24}});
    TransformGrid grid = transform_grid(s, 101);
    CHECK(grid.rows.size() >= 101);
    CHECK(grid.f1_increasing);
    CHECK(grid.f2_increasing);
    for (std::size_t i = 0; i + 1 < grid.rows.size(); ++i)
        CHECK(grid.rows[i + 1].k > grid.rows[i].k);
    for (const auto& q : s.quotes()) {
        bool found = false;
        for (const auto& row : grid.rows)
            if (std::abs(row.k - q.k) <= 1e-12) found = true;
        CHECK(found);
    }
    for (const auto& row : grid.rows) {
        FPair f = f_transforms(row.k, row.sigma);
        CHECK(row.f1 == f.f1);
        CHECK(row.f2 == f.f2);
        CHECK(row.sigma == s.sigma_at(row.k));
    }
    CHECK_THROWS_AS(transform_grid(s, 2), InvalidInput);
}

TEST_CASE("spike breaks monotonicity") {
    Smile s = spike_smile();
    TransformGrid grid = transform_grid(s, 201);
    CHECK_FALSE(grid.f1_increasing);
    CHECK_FALSE(grid.f2_increasing);

    MonotoneCertificate cert = certify_monotone(s);
    CHECK_FALSE(cert.f1_increasing);
    CHECK_FALSE(cert.f2_increasing);
    REQUIRE(cert.f1_violation.has_value());
    REQUIRE(cert.f2_violation.has_value());
    // Spline ringing spreads the fold well beyond the spike node itself; the
    // certificate must still report an ordered interval inside the range.
    for (const auto& viol : {*cert.f1_violation, *cert.f2_violation}) {
        CHECK(viol.first < viol.second);
        CHECK(viol.first >= s.k_min());
        CHECK(viol.second <= s.k_max());
    }
    // Inversion refuses with the certified interval.
    try {
        g_inverse(Transform::second, s, 0.0);
        CHECK(false);
    } catch (const NotMonotone& e) {
        CHECK(e.k_lo() == cert.f2_violation->first);
        CHECK(e.k_hi() == cert.f2_violation->second);
        CHECK(std::string(e.what()).find("decreases") != std::string::npos);
    }
    CHECK_THROWS_AS(normalized_vol(Transform::first, s, 0.3), NotMonotone);
    CHECK_THROWS_AS(fixed_point(Transform::second, s), NotMonotone);
}

TEST_CASE("flat tails invert in closed form") {
    Smile s = flat_smile(0.2);
    // In range: bisection.
    CHECK(g_inverse(Transform::second, s, 0.0) == doctest::Approx(-0.02).epsilon(1e-12));
    CHECK(g_inverse(Transform::first, s, 0.0) == doctest::Approx(0.02).epsilon(1e-12));
    // Outside the attained range [f(k_min), f(k_max)]: closed form, exact.
    double s0 = 0.2;
    CHECK(g_inverse(Transform::second, s, -6.0) ==
          doctest::Approx(s0 * -6.0 - 0.5 * s0 * s0).epsilon(1e-15));
    CHECK(g_inverse(Transform::second, s, 7.0) ==
          doctest::Approx(s0 * 7.0 - 0.5 * s0 * s0).epsilon(1e-15));
    CHECK(g_inverse(Transform::first, s, -6.0) ==
          doctest::Approx(s0 * -6.0 + 0.5 * s0 * s0).epsilon(1e-15));
    // The closed form is a true inverse.
    for (double z : {-9.0, -6.0, 6.0, 9.0}) {
        CHECK(f_of(Transform::first, s, g_inverse(Transform::first, s, z)) ==
              doctest::Approx(z).epsilon(1e-13));
        CHECK(f_of(Transform::second, s, g_inverse(Transform::second, s, z)) ==
              doctest::Approx(z).epsilon(1e-13));
    }
}

TEST_CASE("inversion round trip on a mixture smile") {
    Smile s = oracle::corpus_smile(oracle::corpus_model("skew_2mix"));
    MonotoneCertificate cert = certify_monotone(s);
    REQUIRE(cert.f1_increasing);
    REQUIRE(cert.f2_increasing);
    for (double z : linspace(-6.0, 6.0, 49)) {
        for (Transform which : {Transform::first, Transform::second}) {
            double k = g_inverse(which, s, z, &cert);
            CHECK(f_of(which, s, k) == doctest::Approx(z).epsilon(1e-10));
            // g recovered from the normalized vol alone.
            double sn = normalized_vol(which, s, z, &cert).sigma_n;
            CHECK(sn == doctest::Approx(s.sigma_at(k)).epsilon(1e-12));
            double k_rec = which == Transform::first ? z * sn + 0.5 * sn * sn
                                                     : z * sn - 0.5 * sn * sn;
            CHECK(k_rec == doctest::Approx(k).epsilon(1e-9));
        }
    }
    // Passing no certificate rescans and agrees.
    CHECK(g_inverse(Transform::first, s, 0.37) ==
          doctest::Approx(g_inverse(Transform::first, s, 0.37, &cert)).epsilon(1e-14));
}

TEST_CASE("normalized vol reproduces the nodes") {
    Smile s(kUnit, {{-0.8, 0.26}, {-0.3, 0.22}, {0.0, 0.21}, {0.4, 0.23}, {0.9, 0.27}});
    MonotoneCertificate cert = certify_monotone(s);
    REQUIRE(cert.f2_increasing);
    for (const auto& q : s.quotes()) {
        double z = f_transforms(q.k, q.sigma).f2;
        CHECK(normalized_vol(Transform::second, s, z, &cert).sigma_n ==
              doctest::Approx(q.sigma).epsilon(1e-9));
    }
    // A flat smile normalizes to the same constant in both variables.
    Smile flat = flat_smile(0.2);
    for (double z : {-4.0, -1.0, 0.0, 2.0, 5.0}) {
        CHECK(normalized_vol(Transform::first, flat, z).sigma_n == 0.2);
        CHECK(normalized_vol(Transform::second, flat, z).sigma_n == 0.2);
    }
}

TEST_CASE("shifted normalized vols increase") {
    for (const char* name : {"skew_2mix", "three_mix", "lowvol_2mix"}) {
        Smile s = oracle::corpus_smile(oracle::corpus_model(name));
        MonotoneCertificate cert = certify_monotone(s);
        double prev1 = -1e300, prev2 = -1e300;
        for (double z : linspace(-5.0, 5.0, 101)) {
            double s1 = normalized_vol(Transform::first, s, z, &cert).sigma_n;
            double s2 = normalized_vol(Transform::second, s, z, &cert).sigma_n;
            CHECK(z + s1 > prev1);
            CHECK(z - s2 > prev2);
            prev1 = z + s1;
            prev2 = z - s2;
        }
    }
}

TEST_CASE("fixed points") {
    SUBCASE("flat smile, closed values") {
        Smile s = flat_smile(0.2);
        FixedPointResult z2 = fixed_point(Transform::second, s);
        REQUIRE(z2.z_star.has_value());
        CHECK(*z2.z_star == doctest::Approx(0.2).epsilon(1e-10));
        CHECK(z2.reason.empty());
        FixedPointResult z1 = fixed_point(Transform::first, s);
        REQUIRE(z1.z_star.has_value());
        CHECK(*z1.z_star == doctest::Approx(-0.2).epsilon(1e-10));
    }
    SUBCASE("self consistency on the corpus") {
        for (const auto& model : oracle::builtin_corpus()) {
            Smile s = oracle::corpus_smile(model);
            MonotoneCertificate cert = certify_monotone(s);
            FixedPointResult z2 = fixed_point(Transform::second, s, &cert);
            REQUIRE(z2.z_star.has_value());
            double s2 = normalized_vol(Transform::second, s, *z2.z_star, &cert).sigma_n;
            CHECK(std::abs(s2 - *z2.z_star) <= 1e-8);
            FixedPointResult z1 = fixed_point(Transform::first, s, &cert);
            REQUIRE(z1.z_star.has_value());
            double s1 = normalized_vol(Transform::first, s, *z1.z_star, &cert).sigma_n;
            CHECK(std::abs(s1 + *z1.z_star) <= 1e-8);
            // sigma_2's fixed point is the vol where f1 crosses zero.
            double k0 = g_inverse(Transform::first, s, 0.0, &cert);
            CHECK(*z2.z_star == doctest::Approx(s.sigma_at(k0)).epsilon(1e-10));
        }
    }
}

TEST_CASE("wing tails exhaust slowly and can fail to bracket") {
    TailPolicy tails{TailKind::lee_wing, 1.9, 1.9};
    Smile s(kUnit, {{-1.0, 0.3}, {0.0, 0.25}, {1.0, 0.3}}, tails);
    // Under q = 1.9, f2 drifts left like -0.036 sqrt(|k|): z = -40 is still
    // attained, z = -1e7 would need |k| beyond any sane range.
    double k = g_inverse(Transform::second, s, -40.0);
    CHECK(k < -1e5);
    CHECK(f_of(Transform::second, s, k) == doctest::Approx(-40.0).epsilon(1e-9));
    CHECK_THROWS_AS(g_inverse(Transform::second, s, -1e7), NoBracket);
    // f1 has no such wall on the left.
    double k1 = g_inverse(Transform::first, s, -1e4);
    CHECK(f_of(Transform::first, s, k1) == doctest::Approx(-1e4).epsilon(1e-9));
}

TEST_CASE("alpha envelope") {
    SUBCASE("touches the anchor") {
        for (double z0 : {-0.4, 0.0, 0.7}) {
            double s0 = 0.9; // keep s0 + z0 and s0 - z0 positive
            AlphaEnvelope a1 = alpha_envelope(Transform::first, z0, z0, s0);
            CHECK(a1.plus == doctest::Approx(s0).epsilon(1e-12));
            AlphaEnvelope a2 = alpha_envelope(Transform::second, z0, z0, s0);
            CHECK(a2.plus == doctest::Approx(s0).epsilon(1e-12));
        }
    }
    SUBCASE("algebraic structure") {
        AlphaEnvelope a = alpha_envelope(Transform::second, 1.0, 0.5, 0.3);
        double radicand = 0.09 - 2.0 * 0.5 * 0.3 + 1.0;
        CHECK(a.plus - a.minus == doctest::Approx(2.0 * std::sqrt(radicand)).epsilon(1e-13));
        CHECK(a.plus + a.minus == doctest::Approx(2.0).epsilon(1e-13));
        AlphaEnvelope b = alpha_envelope(Transform::first, 1.0, 0.5, 0.3);
        CHECK(b.plus + b.minus == doctest::Approx(-2.0).epsilon(1e-13));
    }
    SUBCASE("brackets a flat normalized vol on the anchored side") {
        double s0 = 0.2;
        // First kind constrains z <= z0, second kind z >= z0; past the anchor
        // on those sides the flat vol stays inside [minus, plus].
        for (double dz : {0.1, 0.5, 2.0, 5.0}) {
            AlphaEnvelope a1 = alpha_envelope(Transform::first, -dz, 0.0, s0);
            CHECK(a1.minus <= s0);
            CHECK(s0 <= a1.plus);
            AlphaEnvelope a2 = alpha_envelope(Transform::second, dz, 0.0, s0);
            CHECK(a2.minus <= s0);
            CHECK(s0 <= a2.plus);
            // Beyond the anchor in the other direction the plus branch drops
            // below the flat vol: the envelope is one-sided.
            AlphaEnvelope off = alpha_envelope(Transform::first, dz, 0.0, s0);
            CHECK(off.plus < s0);
        }
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(alpha_envelope(Transform::first, 0.0, -5.0, 1.0), InvalidInput);
        CHECK_THROWS_AS(alpha_envelope(Transform::first, 0.0, 0.0, 0.0), InvalidInput);
        CHECK_THROWS_AS(alpha_envelope(Transform::first, 0.0, 0.0, -1.0), InvalidInput);
        double inf = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(alpha_envelope(Transform::second, inf, 0.0, 1.0), InvalidInput);
    }
}
