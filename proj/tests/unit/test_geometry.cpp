#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "convexify/error.hpp"
#include "convexify/geometry.hpp"
#include "helpers.hpp"

using namespace convexify;

TEST_CASE("psi at the origin is a") {
    GridSpec s;
    CHECK(psi_value(SpaceTimePoint{{0, 0, 0}, 0.0}, s) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("psi arithmetic in two space dimensions") {
    GridSpec s;
    s.n_space = 2;
    const SpaceTimePoint p{{0.1, 0.2, 0.0}, 0.5};
    CHECK(psi_value(p, s) == doctest::Approx(0.59).epsilon(1e-14));
}

TEST_CASE("points on the level surface have psi = d") {
    GridSpec s;
    s.n_space = 2;
    s.T = 2.0;
    for (double t : {0.0, 0.3, -0.5}) {
        const double x2 = 0.1;
        const double x1 = s.d - s.a - x2 * x2 - t * t / (s.T * s.T);
        CHECK(psi_value(SpaceTimePoint{{x1, x2, 0}, t}, s) == doctest::Approx(s.d).epsilon(1e-14));
    }
}

TEST_CASE("node outside G is excluded") {
    const DomainGrid g(test::small_grid(41, 41));
    // x1 = 0.35 lies beyond the box (d - a = 0.3); check the last x1 node on t = 0 instead, psi = 0.5 = d.
    bool found = false;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto p = g.point(n);
        if (std::abs(p.t) < 1e-15 && std::abs(p.x[0] - 0.3) < 1e-12) {
            CHECK_FALSE(g.inside_G()[n]);
            found = true;
        }
    }
    CHECK(found);
    CHECK(psi_value(SpaceTimePoint{{0.35, 0, 0}, 0.0}, g.spec()) == doctest::Approx(0.55));
    CHECK_FALSE(psi_value(SpaceTimePoint{{0.35, 0, 0}, 0.0}, g.spec()) < g.spec().d);
}

TEST_CASE("1D mask matches the analytic region") {
    const DomainGrid g(test::small_grid(41, 41));
    int mismatches = 0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto p = g.point(n);
        const bool analytic = p.x[0] > 0.0 && p.x[0] + p.t * p.t < 0.3;
        mismatches += analytic != static_cast<bool>(g.inside_G()[n]);
    }
    CHECK(mismatches == 0);
}

TEST_CASE("mask invariants") {
    GridSpec s = test::small_grid(21, 21);
    s.n_space = 2;
    s.n_xbar = 11;
    const DomainGrid g(s);
    for (std::size_t n = 0; n < g.size(); ++n) {
        if (g.inside_G_eps()[n]) CHECK(g.inside_G()[n]);
        if (g.inside_G()[n]) {
            CHECK(g.psi()[n] < s.d);
            CHECK(g.point(n).x[0] > 0.0);
        }
        if (g.on_gamma()[n]) CHECK(g.point(n).x[0] == 0.0);
    }
}

TEST_CASE("bounding box contains the closure of G") {
    const DomainGrid g(test::small_grid());
    const auto& box = g.spacetime();
    CHECK(box.axis(0).lo() == 0.0);
    CHECK(box.axis(0).hi() == doctest::Approx(0.3));
    CHECK(box.axis(1).hi() == doctest::Approx(std::sqrt(0.3)));
    CHECK(box.axis(1).lo() == doctest::Approx(-std::sqrt(0.3)));
}

TEST_CASE("quadrature converges to the volume of G") {
    // vol(G) = int_{|t| < sqrt(0.3)} (0.3 - t^2) dt = (4/3) 0.3^{3/2}
    const double exact = 4.0 / 3.0 * std::pow(0.3, 1.5);
    CHECK(exact == doctest::Approx(0.21909).epsilon(1e-4));
    std::vector<double> err, h;
    for (int n : {21, 41, 81}) {
        const DomainGrid g(test::small_grid(n, n));
        const auto& q = g.quadrature();
        const double vol = std::accumulate(q.begin(), q.end(), 0.0);
        err.push_back(std::abs(vol - exact));
        h.push_back(g.h_t());
        CHECK(err.back() <= 2.0 * g.h_t());
    }
    CHECK(err[2] < err[0]);
}

TEST_CASE("weight is identically one at lambda = 0") {
    const DomainGrid g(test::small_grid());
    for (auto norm : {Normalization::paper, Normalization::max}) {
        CarlemanParams c;
        c.lambda = 0.0;
        c.normalization = norm;
        for (double w : carleman_weight_field(g, c)) CHECK(w == 1.0);
    }
}

TEST_CASE("fixed-shift normalisation on the level surface") {
    GridSpec s;
    CarlemanParams c;
    c.lambda = 3.0;
    c.nu = 2.0;
    c.normalization = Normalization::paper;
    const double w = carleman_weight_sq(SpaceTimePoint{{0.3, 0, 0}, 0.0}, c, s);
    // exp(2 lambda d^-nu - 3 lambda d^-nu) = exp(-lambda d^-nu) = exp(-12)
    CHECK(w == doctest::Approx(std::exp(-12.0)).epsilon(1e-12));
    CHECK(w == doctest::Approx(6.144e-6).epsilon(1e-3));
}

TEST_CASE("max normalisation peaks at psi = a") {
    CarlemanParams c;
    c.lambda = 4.0;
    const DomainGrid g(test::small_grid());
    CHECK(carleman_weight_sq(SpaceTimePoint{{0, 0, 0}, 0.0}, c, g.spec()) == 1.0);
    const auto w = carleman_weight_field(g, c);
    for (std::size_t n = 0; n < g.size(); ++n)
        if (g.psi()[n] > g.spec().a) CHECK(w[n] < 1.0);
}

TEST_CASE("weight overflow is reported") {
    GridSpec s;
    CarlemanParams c;
    c.lambda = 200.0;
    c.normalization = Normalization::paper;
    // at psi = a the exponent is 2 lambda a^-nu - 3 lambda d^-nu = 200 (50 - 12) > 700
    CHECK_THROWS_AS(carleman_weight_sq(SpaceTimePoint{{0, 0, 0}, 0.0}, c, s), Error);
}

TEST_CASE("spec validation") {
    GridSpec s;
    s.a = 0.6;
    CHECK_THROWS_AS(s.validate(), Error);
    s = GridSpec{};
    s.d = 1.2;
    CHECK_THROWS_AS(s.validate(), Error);
    s = GridSpec{};
    s.epsilon = 0.4;
    CHECK_THROWS_AS(s.validate(), Error);
    s = GridSpec{};
    CHECK_NOTHROW(s.validate());
    CHECK(s.eps() == doctest::Approx(0.03));
}

TEST_CASE("grid hash tracks the parameters") {
    const DomainGrid a(test::small_grid(21, 21)), b(test::small_grid(21, 21)), c(test::small_grid(21, 23));
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
    CHECK(hex64(a.hash()).size() == 16);
}

TEST_CASE("grid csv has one row per node") {
    const DomainGrid g(test::small_grid(11, 11));
    std::ostringstream os;
    write_grid_csv(os, g, CarlemanParams{});
    const std::string text = os.str();
    CHECK(text.rfind("# grid_hash=" + hex64(g.hash()) + "\nx1,t,psi,weight,in_G,in_G_eps,on_gamma\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(g.size() + 2));
}
