#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "windri/preprocess.hpp"
#include "windri/rng.hpp"

using namespace windri;

namespace {

// Independent of quantile_sorted: direct h = p*(n-1) interpolation via lerp.
double quantile_oracle(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return std::lerp(v[lo], v[hi], h - static_cast<double>(lo));
}

}  // namespace

TEST_CASE("standardizer fit") {
    SUBCASE("constant input") {
        const std::vector<double> v = {5, 5, 5};
        const Standardizer s = Standardizer::fit(v);
        CHECK(s.mu() == 5.0);
        CHECK(s.sigma() == 0.0);
    }
    SUBCASE("population std of [1,2,3]") {
        const std::vector<double> v = {1, 2, 3};
        const Standardizer s = Standardizer::fit(v);
        CHECK(s.mu() == 2.0);
        CHECK(s.sigma() == doctest::Approx(0.816496580927726).epsilon(1e-14));  // sqrt(2/3)
        CHECK(s.apply(3.0) == doctest::Approx(1.224744871391589).epsilon(1e-14));
        CHECK(s.apply(2.0) == 0.0);
    }
    SUBCASE("single sample") {
        const std::vector<double> v = {0};
        const Standardizer s = Standardizer::fit(v);
        CHECK(s.mu() == 0.0);
        CHECK(s.sigma() == 0.0);
        CHECK(s.apply(123.0) == 0.0);  // degenerate variance maps to 0
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(Standardizer::fit(std::vector<double>{}), std::invalid_argument);
        CHECK_THROWS_AS(Standardizer::fit(std::vector<double>{1.0, NAN}), std::invalid_argument);
    }
    SUBCASE("affine property") {
        rng::Engine rng(3);
        std::vector<double> v(50);
        for (double& x : v) x = rng::uniform(rng, -10, 10);
        const Standardizer s = Standardizer::fit(v);
        REQUIRE(s.sigma() > 0);
        for (int i = 0; i < 20; ++i) {
            const double a = rng::uniform(rng, -20, 20);
            const double b = rng::uniform(rng, -20, 20);
            CHECK(s.apply(a) - s.apply(b) == doctest::Approx((a - b) / s.sigma()).epsilon(1e-12));
        }
    }
}

TEST_CASE("quantile bin edges") {
    SUBCASE("hand-checked interior edges") {
        const std::vector<double> v = {1, 2, 3, 4, 5, 6};
        const BinEdges b = BinEdges::fit(v, 3);
        REQUIRE(b.edges().size() == 2);
        CHECK(b.edges()[0] == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
        CHECK(b.edges()[1] == doctest::Approx(13.0 / 3.0).epsilon(1e-14));
        CHECK(b.edges()[0] == doctest::Approx(quantile_oracle(v, 1.0 / 3.0)).epsilon(1e-14));
        CHECK(b.edges()[1] == doctest::Approx(quantile_oracle(v, 2.0 / 3.0)).epsilon(1e-14));
        CHECK(b.effective_bins() == 3);
        CHECK_FALSE(b.collapsed());
    }
    SUBCASE("all ties collapse to one bin") {
        const std::vector<double> v = {1, 1, 1, 1};
        const BinEdges b = BinEdges::fit(v, 2);
        CHECK(b.effective_bins() == 1);
        CHECK(b.collapsed());
        CHECK(b.index_of(1.0) == 0);
        CHECK(b.index_of(100.0) == 0);
    }
    SUBCASE("0..99 with ten bins gives ten samples per bin") {
        std::vector<double> v(100);
        for (int i = 0; i < 100; ++i) v[i] = i;
        const BinEdges b = BinEdges::fit(v, 10);
        REQUIRE(b.edges().size() == 9);
        std::vector<int> counts(10, 0);
        for (double x : v) ++counts[b.index_of(x)];
        for (int c : counts) CHECK(c == 10);
    }
    SUBCASE("errors") {
        const std::vector<double> v = {1, 2, 3};
        CHECK_THROWS_AS(BinEdges::fit(v, 1), std::invalid_argument);
        CHECK_THROWS_AS(BinEdges::fit(v, 4), std::invalid_argument);
    }
}

TEST_CASE("discretize_value branches") {
    const std::vector<double> v = {1, 2, 3, 4, 5, 6};
    const BinEdges b = BinEdges::fit(v, 3);
    CHECK(b.index_of(1.0) == 0);    // below first edge
    CHECK(b.index_of(3.0) == 1);    // middle interval
    CHECK(b.index_of(100.0) == 2);  // top clamp
    // boundary goes to the upper bin
    CHECK(b.index_of(b.edges()[0]) == 1);
    CHECK(b.index_of(b.edges()[1]) == 2);
}

TEST_CASE("discretize_value is monotone and in range") {
    rng::Engine rng(11);
    std::vector<double> v(137);
    for (double& x : v) x = rng::uniform(rng, -50, 50);
    for (const std::size_t k : {2ul, 5ul, 9ul}) {
        const BinEdges b = BinEdges::fit(v, k);
        double prev_x = -1000.0;
        std::size_t prev_i = b.index_of(prev_x);
        for (int step = 0; step < 500; ++step) {
            const double x = prev_x + rng::uniform(rng, 0.0, 5.0);
            const std::size_t i = b.index_of(x);
            CHECK(i >= prev_i);
            CHECK(i < b.effective_bins());
            prev_x = x;
            prev_i = i;
        }
    }
}

TEST_CASE("equal-frequency binning over continuous samples") {
    rng::Engine rng(5);
    std::vector<double> v(1000);
    for (double& x : v) x = rng::uniform01(rng);
    const BinEdges b = BinEdges::fit(v, 10);
    std::vector<int> counts(10, 0);
    for (double x : v) ++counts[b.index_of(x)];
    for (int c : counts) CHECK(c == 100);
}

TEST_CASE("bins stay dense under heavy ties") {
    rng::Engine rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20 + rng::below(rng, 200);
        std::vector<double> v(n);
        for (double& x : v) x = std::floor(rng::uniform(rng, 0.0, 4.0));  // few distinct values
        const std::size_t k = 2 + rng::below(rng, 8);
        const BinEdges b = BinEdges::fit(v, k);
        std::vector<int> counts(b.effective_bins(), 0);
        for (double x : v) ++counts[b.index_of(x)];
        for (std::size_t i = 0; i < counts.size(); ++i) {
            INFO("trial " << trial << " bin " << i << " of " << counts.size());
            CHECK(counts[i] > 0);  // every label occupied on the fitting sample
        }
    }
}

TEST_CASE("discretize_vector composes per-mode rules") {
    // odd sample counts make the median an exact sample
    const std::vector<double> h = {0, 10, 20, 30, 40};
    const std::vector<double> u = {-2, -1, 0, 1, 2};
    const std::vector<double> v = {5, 6, 7, 8, 9};
    const std::vector<double> w = {-1, 0, 1, 2, 3};
    const std::vector<double> ri = {0.1, 0.2, 0.3, 0.4, 0.5};
    const Discretizer d = Discretizer::fit(h, u, v, w, ri, {2, 2, 2, 2});

    SUBCASE("medians land in the upper bin") {
        const auto idx = d.discretize(20, 0, 7, 1);
        CHECK(idx == std::array<std::size_t, 4>{1, 1, 1, 1});
    }
    SUBCASE("below the fitted minima clamps to zero") {
        const auto idx = d.discretize(-100, -100, -100, -100);
        CHECK(idx == std::array<std::size_t, 4>{0, 0, 0, 0});
    }
    SUBCASE("mixed vector equals per-mode composition") {
        const auto idx = d.discretize(35, -2, 6, 3);
        CHECK(idx[0] == d.discretize_mode(0, 35));
        CHECK(idx[1] == d.discretize_mode(1, -2));
        CHECK(idx[2] == d.discretize_mode(2, 6));
        CHECK(idx[3] == d.discretize_mode(3, 3));
        CHECK(idx == std::array<std::size_t, 4>{1, 0, 0, 1});
    }
}

TEST_CASE("index range holds for arbitrary inputs") {
    rng::Engine rng(23);
    std::vector<double> h(64), u(64), v(64), w(64), ri(64);
    for (std::size_t i = 0; i < 64; ++i) {
        h[i] = rng::uniform(rng, 0, 5000);
        u[i] = rng::uniform(rng, -30, 30);
        v[i] = rng::uniform(rng, -30, 30);
        w[i] = rng::uniform(rng, -5, 5);
        ri[i] = rng::uniform(rng, -4, 10);
    }
    const std::array<std::size_t, 4> bins = {7, 3, 5, 2};
    const Discretizer d = Discretizer::fit(h, u, v, w, ri, bins);
    for (int i = 0; i < 1000; ++i) {
        const auto idx = d.discretize(rng::uniform(rng, -1e6, 1e6), rng::uniform(rng, -1e6, 1e6),
                                      rng::uniform(rng, -1e6, 1e6), rng::uniform(rng, -1e6, 1e6));
        for (std::size_t m = 0; m < 4; ++m) CHECK(idx[m] < bins[m]);
    }
}

TEST_CASE("target transform") {
    SUBCASE("signed log fixed points") {
        CHECK(TargetTransform::signed_log(0.0) == 0.0);
        CHECK(TargetTransform::signed_log(std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(TargetTransform::signed_log(-(std::exp(1.0) - 1.0)) == doctest::Approx(-1.0).epsilon(1e-14));
    }
    SUBCASE("min-max endpoints") {
        const std::vector<double> y = {-5, -1, 0, 2, 5};
        const TargetTransform tf = TargetTransform::fit(y);
        CHECK(tf.forward(-5.0) == 0.0);
        CHECK(tf.forward(5.0) == 1.0);
    }
    SUBCASE("degenerate fit maps everything to one half") {
        const std::vector<double> y = {3, 3, 3};
        const TargetTransform tf = TargetTransform::fit(y);
        CHECK(tf.degenerate());
        CHECK(tf.forward(3.0) == 0.5);
        CHECK(tf.forward(-100.0) == 0.5);
    }
    SUBCASE("round trip both directions") {
        rng::Engine rng(31);
        std::vector<double> y(200);
        for (double& x : y) x = rng::uniform(rng, -50, 200);
        const TargetTransform tf = TargetTransform::fit(y);
        for (int i = 0; i < 1000; ++i) {
            const double target = rng::uniform(rng, -50, 200);
            const double rt = tf.inverse(tf.forward(target));
            CHECK(rt == doctest::Approx(target).epsilon(1e-9));
        }
        for (int i = 0; i < 100; ++i) {
            const double s = rng::uniform01(rng);
            CHECK(tf.forward(tf.inverse(s)) == doctest::Approx(s).epsilon(1e-12));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(TargetTransform::fit(std::vector<double>{}), std::invalid_argument);
    }
}

TEST_CASE("discretizer JSON round trip is bit-exact") {
    rng::Engine rng(41);
    std::vector<double> h(30), u(30), v(30), w(30), ri(30);
    for (std::size_t i = 0; i < 30; ++i) {
        h[i] = rng::uniform(rng, 0, 3000);
        u[i] = rng::uniform(rng, -20, 20);
        v[i] = rng::uniform(rng, -20, 20);
        w[i] = rng::uniform(rng, -2, 2);
        ri[i] = rng::uniform(rng, -3, 8);
    }
    const Discretizer d = Discretizer::fit(h, u, v, w, ri, {4, 5, 3, 2});
    const std::string dumped = d.to_json().dump();
    const Discretizer d2 = Discretizer::from_json(nlohmann::json::parse(dumped));
    CHECK(d2.to_json().dump() == dumped);
    for (std::size_t m = 0; m < 4; ++m) {
        CHECK(d2.mode(m).standardizer.mu() == d.mode(m).standardizer.mu());
        CHECK(d2.mode(m).standardizer.sigma() == d.mode(m).standardizer.sigma());
        CHECK(d2.mode(m).edges.edges() == d.mode(m).edges.edges());
    }
    CHECK(d2.target().mu() == d.target().mu());
    CHECK(d2.target().sigma() == d.target().sigma());
    CHECK(d2.target().min_z() == d.target().min_z());
    CHECK(d2.target().max_z() == d.target().max_z());
    // identical behavior on a probe input
    for (int i = 0; i < 50; ++i) {
        const double x = rng::uniform(rng, -100, 3100);
        CHECK(d.discretize(x, x / 100, x / 200, x / 1000) == d2.discretize(x, x / 100, x / 200, x / 1000));
    }
}
