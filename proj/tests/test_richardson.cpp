#include <doctest.h>

#include <cmath>
#include <vector>

#include "windri/richardson.hpp"
#include "windri/rng.hpp"

using namespace windri;

namespace {

// Layer with prescribed gradients around z = 1000 m, dz = 100 m.
std::pair<ProfileLevel, ProfileLevel> layer(double theta_mean, double dtheta_dz, double du_dz,
                                            double dv_dz) {
    const double dz = 100.0;
    ProfileLevel lo{1000.0, theta_mean - 0.5 * dtheta_dz * dz, -0.5 * du_dz * dz, -0.5 * dv_dz * dz};
    ProfileLevel hi{1100.0, theta_mean + 0.5 * dtheta_dz * dz, 0.5 * du_dz * dz, 0.5 * dv_dz * dz};
    return {lo, hi};
}

}  // namespace

TEST_CASE("worked Richardson example") {
    const auto [lo, hi] = layer(300.0, 0.003, 0.01, 0.0);
    const RiValue ri = compute_ri(lo, hi, 9.81);
    REQUIRE(ri.finite);
    CHECK(ri.value == doctest::Approx(0.981).epsilon(1e-9));

    SUBCASE("zero numerator") {
        const auto [l2, h2] = layer(300.0, 0.0, 0.01, 0.0);
        const RiValue r2 = compute_ri(l2, h2, 9.81);
        REQUIRE(r2.finite);
        CHECK(r2.value == 0.0);
    }
    SUBCASE("sign flips with the temperature gradient") {
        const auto [l2, h2] = layer(300.0, -0.003, 0.01, 0.0);
        const RiValue r2 = compute_ri(l2, h2, 9.81);
        REQUIRE(r2.finite);
        CHECK(r2.value == doctest::Approx(-0.981).epsilon(1e-9));
    }
}

TEST_CASE("zero shear signals infinite Ri and classifies stable") {
    const auto [lo, hi] = layer(300.0, 0.004, 0.0, 0.0);
    const RiValue ri = compute_ri(lo, hi);
    CHECK_FALSE(ri.finite);
    CHECK(classify(ri) == Stability::kStable);
}

TEST_CASE("classification thresholds") {
    const double eps = 1e-12;
    CHECK(classify(0.1) == Stability::kTurbulenceProne);
    CHECK(classify(0.25 - eps) == Stability::kTurbulenceProne);
    CHECK(classify(0.25) == Stability::kTransitional);
    CHECK(classify(0.5) == Stability::kTransitional);
    CHECK(classify(1.0) == Stability::kTransitional);
    CHECK(classify(1.0 + eps) == Stability::kStable);
    CHECK(classify(1.5) == Stability::kStable);
    CHECK(classify(-3.0) == Stability::kTurbulenceProne);
}

TEST_CASE("classify is a monotone step function") {
    rng::Engine rng(2);
    const auto rank = [](Stability s) {
        switch (s) {
            case Stability::kTurbulenceProne: return 0;
            case Stability::kTransitional: return 1;
            case Stability::kStable: return 2;
        }
        return -1;
    };
    double prev = -10.0;
    for (int i = 0; i < 200; ++i) {
        const double next = prev + rng::uniform(rng, 0.0, 0.1);
        CHECK(rank(classify(next)) >= rank(classify(prev)));
        prev = next;
    }
}

TEST_CASE("Richardson invariances") {
    rng::Engine rng(12);
    for (int i = 0; i < 100; ++i) {
        const double theta_mean = rng::uniform(rng, 250, 320);
        const double dtheta = rng::uniform(rng, -0.01, 0.01);
        const double du = rng::uniform(rng, 0.001, 0.05);
        const double dv = rng::uniform(rng, -0.05, 0.05);
        const auto [lo, hi] = layer(theta_mean, dtheta, du, dv);
        const RiValue base = compute_ri(lo, hi);
        REQUIRE(base.finite);

        // scaling both wind profiles by c divides Ri by c^2
        const double c = rng::uniform(rng, 0.5, 3.0);
        ProfileLevel lo_s = lo, hi_s = hi;
        lo_s.u *= c;
        lo_s.v *= c;
        hi_s.u *= c;
        hi_s.v *= c;
        const RiValue scaled = compute_ri(lo_s, hi_s);
        CHECK(scaled.value == doctest::Approx(base.value / (c * c)).epsilon(1e-12));

        // adding a constant wind leaves Ri unchanged
        const double off = rng::uniform(rng, -30, 30);
        ProfileLevel lo_o = lo, hi_o = hi;
        lo_o.u += off;
        hi_o.u += off;
        lo_o.v -= off;
        hi_o.v -= off;
        const RiValue shifted = compute_ri(lo_o, hi_o);
        CHECK(shifted.value == doctest::Approx(base.value).epsilon(1e-9));

        // Ri sign equals the sign of the theta gradient
        if (dtheta != 0.0) CHECK(std::signbit(base.value) == std::signbit(dtheta));
    }
}

TEST_CASE("profile_ri") {
    SUBCASE("two levels reduce to compute_ri") {
        const std::vector<ProfileLevel> p = {{0, 300, 0, 0}, {100, 300.5, 1, 0}};
        const auto out = profile_ri(p);
        REQUIRE(out.size() == 1);
        CHECK(out[0].mid_z == 50.0);
        const RiValue direct = compute_ri(p[0], p[1]);
        CHECK(out[0].ri.value == direct.value);
        CHECK(out[0].ri.finite == direct.finite);
    }
    SUBCASE("five levels give four layers") {
        std::vector<ProfileLevel> p;
        for (int i = 0; i < 5; ++i) p.push_back({100.0 * i, 300.0 + i, 2.0, -1.0});
        const auto out = profile_ri(p);
        CHECK(out.size() == 4);
    }
    SUBCASE("only the sheared layer is finite") {
        // linear theta(z), constant wind except one layer
        std::vector<ProfileLevel> p;
        for (int i = 0; i < 4; ++i) p.push_back({100.0 * i, 300.0 + 0.5 * i, 5.0, 0.0});
        p[3].u = 7.0;  // shear only between levels 2 and 3
        const auto out = profile_ri(p);
        REQUIRE(out.size() == 3);
        CHECK_FALSE(out[0].ri.finite);
        CHECK_FALSE(out[1].ri.finite);
        CHECK(out[2].ri.finite);
    }
    SUBCASE("errors") {
        const std::vector<ProfileLevel> one = {{0, 300, 0, 0}};
        CHECK_THROWS_AS(profile_ri(one), std::invalid_argument);
        const ProfileLevel a{100, 300, 0, 0}, b{100, 301, 1, 0};
        CHECK_THROWS_AS(compute_ri(a, b), std::invalid_argument);  // dz = 0
        const ProfileLevel cold_lo{0, -400, 0, 0}, cold_hi{100, 2, 1, 0};
        CHECK_THROWS_AS(compute_ri(cold_lo, cold_hi), std::invalid_argument);  // mean theta <= 0
    }
}
