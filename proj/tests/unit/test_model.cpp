#include <doctest.h>

#include <cmath>
#include <numbers>

#include "convexify/error.hpp"
#include "convexify/model.hpp"
#include "helpers.hpp"

using namespace convexify;

namespace {

BoxGrid line(double lo, double hi, int n) { return BoxGrid({Axis::span(lo, hi, n)}); }

}  // namespace

TEST_CASE("identity diffusion has mu1 = mu2 = 1") {
    CoefficientModel m;
    const auto b = validate_coefficients(m.sample(line(0.0, 0.3, 11)));
    CHECK(b.mu1 == doctest::Approx(1.0));
    CHECK(b.mu2 == doctest::Approx(1.0));
}

TEST_CASE("diagonal diffusion in 2D") {
    CoefficientModel m;
    m.n_space = 2;
    m.a = {1, 0, 0, 0, 2, 0, 0, 0, 1};
    const BoxGrid space({Axis::span(0.0, 0.3, 5), Axis::span(-0.5, 0.5, 5)});
    const auto b = validate_coefficients(m.sample(space));
    CHECK(b.mu1 == doctest::Approx(1.0));
    CHECK(b.mu2 == doctest::Approx(2.0));
}

TEST_CASE("positivity failure when f < 2 b_lower") {
    CoefficientModel m;
    m.f = ScalarProfile::constant(1.0);
    m.b_lower = 0.6;
    try {
        validate_coefficients(m.sample(line(0.0, 0.3, 5)));
        FAIL("expected a positivity error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::positivity);
    }
}

TEST_CASE("asymmetric and indefinite diffusion are rejected") {
    CoefficientModel m;
    m.n_space = 2;
    m.a = {1, 0.5, 0, 0, 1, 0, 0, 0, 1};
    const BoxGrid space({Axis::span(0.0, 0.3, 3), Axis::span(-0.5, 0.5, 3)});
    CHECK_THROWS_AS(validate_coefficients(m.sample(space)), Error);
    m.a = {1, 2, 0, 2, 1, 0, 0, 0, 1};
    CHECK_THROWS_AS(validate_coefficients(m.sample(space)), Error);
}

TEST_CASE("profile parsing") {
    const Vec3 x{0.3, 0.0, 0.0};
    CHECK(ScalarProfile::parse("const:2.5").value(x) == 2.5);
    CHECK(ScalarProfile::parse("exp_x1").value(x) == doctest::Approx(std::exp(0.3)));
    CHECK(ScalarProfile::parse("shifted_sin:2").value(x) == doctest::Approx(2.0 + std::sin(0.3)));
    CHECK(ScalarProfile::parse("sin_ratio").value(x) == doctest::Approx(std::sin(0.3) / (2.0 + std::sin(0.3))));
    CHECK_THROWS_AS(ScalarProfile::parse("bogus"), Error);
    CHECK(ScalarProfile().value(x) == 0.0);
}

TEST_CASE("profile derivatives agree with finite differences") {
    const Vec3 x{0.13, 0.21, 0.0};
    const double h = 1e-5;
    for (const char* spec : {"exp_x1", "shifted_sin:2", "sin_ratio", "gauss:1,0.5,0.1,0.3"}) {
        const auto p = ScalarProfile::parse(spec);
        const auto g = p.gradient(x);
        const auto H = p.hessian(x);
        for (int k = 0; k < 2; ++k) {
            Vec3 xp = x, xm = x;
            xp[static_cast<std::size_t>(k)] += h;
            xm[static_cast<std::size_t>(k)] -= h;
            CHECK(g[static_cast<std::size_t>(k)] == doctest::Approx((p.value(xp) - p.value(xm)) / (2 * h)).epsilon(1e-8));
            const auto gp = p.gradient(xp), gm = p.gradient(xm);
            for (int j = 0; j < 2; ++j)
                CHECK(H[static_cast<std::size_t>(3 * k + j)] ==
                      doctest::Approx((gp[static_cast<std::size_t>(j)] - gm[static_cast<std::size_t>(j)]) / (2 * h))
                          .epsilon(1e-7));
        }
    }
}

TEST_CASE("separable oracle: f = 1, mu = 1") {
    CoefficientModel m;
    m.f = ScalarProfile::constant(1.0);
    const auto sol = oracle_separable(m, 1.0, line(0.0, 0.3, 11));
    for (double c : sol.c_true()) CHECK(c == doctest::Approx(1.0));
    for (double t : {-0.5, 0.0, 0.7}) CHECK(sol.u(3, t) == doctest::Approx(std::exp(t)));
}

TEST_CASE("separable oracle: f = exp(x1), mu = 0 gives c = -1") {
    const auto space = line(0.0, 0.3, 11);
    const auto sol = oracle_separable(test::model_with_f("exp_x1"), 0.0, space);
    for (std::size_t i = 0; i < space.size(); ++i) {
        CHECK(sol.c_true()[i] == doctest::Approx(-1.0).epsilon(1e-14));
        CHECK(sol.u(i, 0.4) == doctest::Approx(std::exp(space.coordinate(i, 0))));
    }
}

TEST_CASE("separable oracle: f = 2 + sin(x1), mu = 0 gives sin/(2 + sin)") {
    const auto space = line(0.0, 0.3, 11);
    const auto sol = oracle_separable(test::model_with_f("shifted_sin:2"), 0.0, space);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const double x = space.coordinate(i, 0);
        CHECK(sol.c_true()[i] == doctest::Approx(std::sin(x) / (2.0 + std::sin(x))).epsilon(1e-14));
    }
}

TEST_CASE("one eigenmode with constant c reduces to the separable oracle") {
    CoefficientModel m;
    m.c = ScalarProfile::constant(0.5);
    EigenmodeOptions opt;
    opt.num_modes = 1;
    opt.gamma = {2.0};
    const auto sol = oracle_eigenmode(m, line(0.0, 0.3, 11), opt);
    REQUIRE(sol.num_modes() == 1);
    CHECK(sol.rates()[0] == doctest::Approx(0.5).epsilon(1e-12));
    for (std::size_t i = 0; i < 11; ++i) CHECK(sol.u(i, 0.3) == doctest::Approx(2.0 * std::exp(0.15)).epsilon(1e-12));
}

TEST_CASE("Neumann Laplacian spectrum converges at second order") {
    CoefficientModel m;
    const double L = 1.0;
    std::vector<double> err;
    for (int n : {21, 41, 81}) {
        EigenmodeOptions opt;
        opt.num_modes = 3;
        opt.gamma = {1.0, 0.01, 0.001};
        opt.t_max = 0.1;
        const auto sol = oracle_eigenmode(m, line(0.0, L, n), opt);
        CHECK(std::abs(sol.rates()[0]) < 1e-10);
        double e = 0.0;
        for (int k = 1; k < 3; ++k) {
            const double exact = -std::pow(k * std::numbers::pi / L, 2);
            e = std::max(e, std::abs(sol.rates()[static_cast<std::size_t>(k)] - exact) / std::abs(exact));
        }
        err.push_back(e);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("three-mode solution satisfies the semi-discrete equation") {
    CoefficientModel m;
    m.c = ScalarProfile::parse("sin_ratio");
    EigenmodeOptions opt;
    opt.num_modes = 3;
    opt.gamma = {1.0, 0.05, 0.01};
    opt.t_max = 0.4;
    opt.exponent_cap = 60.0;
    const auto space = line(-0.2, 0.5, 31);
    const auto sol = oracle_eigenmode(m, space, opt);
    for (double t : {-0.4, 0.0, 0.3}) {
        std::vector<double> u(space.size()), ut(space.size());
        for (std::size_t i = 0; i < space.size(); ++i) {
            u[i] = sol.u(i, t);
            ut[i] = sol.u_t(i, t);
        }
        const auto Lu = apply_neumann_operator(m, space, u);
        const double scale = test::max_abs(ut) + test::max_abs(u);
        for (std::size_t i = 0; i < space.size(); ++i) CHECK(std::abs(ut[i] - Lu[i]) <= 1e-11 * scale);
    }
}

TEST_CASE("tikhonov admissibility window") {
    TikhonovParams t;
    t.alpha = 1e-4;
    // exp(-lambda / (2 d^nu)) with d = 0.5, nu = 2 is exp(-2 lambda)
    CHECK_FALSE(t.admissible(2.0, 2.0, 0.5));  // exp(-4) = 0.018 > 1e-4
    CHECK(t.admissible(8.0, 2.0, 0.5));         // exp(-16) = 1.1e-7 < 1e-4
    t.alpha = 1.0;
    CHECK_FALSE(t.admissible(8.0, 2.0, 0.5));
    t.R = -1.0;
    CHECK_THROWS_AS(t.validate(), Error);
}
