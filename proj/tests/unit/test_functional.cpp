#include <doctest.h>

#include <cmath>
#include <numeric>

#include "convexify/error.hpp"
#include "convexify/forward.hpp"
#include "convexify/functional.hpp"
#include "convexify/optimize.hpp"
#include "helpers.hpp"

using namespace convexify;

namespace {

std::vector<double> field(const DomainGrid& g, double (*fn)(double x1, double t)) {
    std::vector<double> v(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) v[n] = fn(g.point(n).x[0], g.point(n).t);
    return v;
}

std::vector<double> axpy(const std::vector<double>& x, const std::vector<double>& y, double s) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * y[i];
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct Setup {
    SyntheticProblem p;
    Functional J;
};

Setup make(double lambda, double alpha, int n = 21) {
    auto p = generate_problem(test::small_grid(n, n), CoefficientModel{}, test::eigenmode());
    CarlemanParams c;
    c.lambda = lambda;
    TikhonovParams t;
    t.alpha = alpha;
    Functional J(p.grid, p.coeffs, c, t);
    return {std::move(p), std::move(J)};
}

}  // namespace

TEST_CASE("H4 inner product basics") {
    const BoxGrid box({Axis::span(0.0, 1.0, 9), Axis::span(0.0, 1.0, 11)});
    const H4Norm h4(box);
    CHECK(h4.multi_indices().size() == 15);  // |beta| <= 4 in two variables
    const std::vector<double> one(box.size(), 1.0);
    CHECK(h4.norm_sq(one) == doctest::Approx(1.0).epsilon(1e-14));  // unit-measure box

    std::vector<double> u(box.size()), v(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        u[i] = std::sin(0.3 * i);
        v[i] = std::cos(0.7 * i);
    }
    CHECK(h4.inner(u, v) == h4.inner(v, u));
    const auto q = box.trapezoid_weights();
    double l2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) l2 += q[i] * u[i] * u[i];
    CHECK(h4.norm_sq(u) >= l2);
    CHECK(h4.norm_sq(std::vector<double>(box.size(), 0.0)) == 0.0);
    CHECK(h4_inner(u, v, box) == h4.inner(u, v));
}

TEST_CASE("Gram matrix and Gram action agree") {
    const BoxGrid box({Axis::span(0.0, 0.3, 9), Axis::span(-0.5, 0.5, 8)});
    const H4Norm h4(box);
    std::vector<double> u(box.size()), v(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        u[i] = std::sin(0.3 * i);
        v[i] = std::cos(0.7 * i);
    }
    const auto G = h4.gram_matrix();
    const Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(u.size()));
    const Eigen::VectorXd Gu = G * uv;
    const auto ga = h4.gram_apply(u);
    const double scale = test::max_abs(ga);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(Gu[static_cast<Eigen::Index>(i)] - ga[i]) <= 1e-12 * scale);
    // rough fields: fourth differences cancel heavily, so only 1e-10 survives rounding
    CHECK(dot(ga, v) == doctest::Approx(h4.inner(u, v)).epsilon(1e-10));
}

TEST_CASE("J and its gradient vanish at w = 0") {
    const auto s = make(2.0, 1e-3);
    const std::vector<double> zero(s.p.grid.size(), 0.0);
    CHECK(s.J.evaluate(zero) == 0.0);
    CHECK(test::max_abs(s.J.gradient(zero)) == 0.0);
}

TEST_CASE("unweighted J is the plain masked least squares") {
    const auto s = make(0.0, 0.0);
    const auto w = field(s.p.grid, [](double x, double t) { return std::sin(5 * x) + t * t; });
    const auto r = s.J.ltilde().apply(w);
    double direct = 0.0;
    for (std::size_t n = 0; n < r.size(); ++n) direct += s.p.grid.quadrature()[n] * r[n] * r[n];
    CHECK(s.J.evaluate(w) == doctest::Approx(direct).epsilon(1e-13));
    CHECK(s.J.prefactor() == 1.0);
}

TEST_CASE("directional derivative matches central differences") {
    for (double lambda : {0.0, 2.0, 8.0}) {
        const auto s = make(lambda, 1e-3);
        const auto w = field(s.p.grid, [](double x, double t) { return 0.3 * std::sin(5 * x + t) + t; });
        const auto h = field(s.p.grid, [](double x, double t) { return 0.2 * std::cos(3 * x - 2 * t) * x * x; });
        const double fd = (s.J.evaluate(axpy(w, h, 1e-4)) - s.J.evaluate(axpy(w, h, -1e-4))) / 2e-4;
        const double gd = dot(s.J.gradient(w), h);
        CHECK(std::abs(fd - gd) <= 1e-6 * std::abs(gd));
    }
}

TEST_CASE("J at the exact solution decays at fourth order") {
    std::vector<double> h, err;
    for (int n : {21, 41, 81}) {
        const auto s = make(0.0, 0.0, n);
        err.push_back(s.J.evaluate(s.p.w_true));
        h.push_back(s.p.grid.h_t());
    }
    const double slope = test::loglog_slope(h, err);
    CHECK(slope >= 3.0);
    CHECK(slope <= 5.0);
}

TEST_CASE("Bregman gap identity and special cases") {
    const auto s = make(2.0, 1e-3);
    const auto& g = s.p.grid;
    const auto w1 = field(g, [](double x, double t) { return 0.5 * std::sin(4 * x + t) + 0.2 * t; });
    auto h = field(g, [](double x, double t) { return 0.3 * std::cos(3 * x) * (1 + t); });
    apply_clamp(h, g);
    const auto w2 = axpy(w1, h, 1.0);

    const auto b = bregman_gap(w1, w2, s.J);
    CHECK(b.gap == doctest::Approx(b.identity_rhs).epsilon(1e-10));
    CHECK(b.alpha_term == doctest::Approx(0.5 * 1e-3 * s.J.h4().norm_sq(h)).epsilon(1e-14));
    CHECK(b.interior_term > 0.0);

    CHECK(bregman_gap(w1, w1, s.J).gap == 0.0);

    // alpha = 0 and Lt(w1) = 0 at w1 = 0: the gap is the weighted square of S + Q
    const auto s0 = make(2.0, 0.0);
    const std::vector<double> zero(g.size(), 0.0);
    const auto b0 = bregman_gap(zero, h, s0.J);
    CHECK(b0.gap >= 0.0);
    const auto S = s0.J.ltilde().linear(h, zero), Q = s0.J.ltilde().quadratic(h);
    double direct = 0.0;
    for (std::size_t n = 0; n < S.size(); ++n) direct += s0.J.data_weight()[n] * (S[n] + Q[n]) * (S[n] + Q[n]);
    CHECK(b0.gap == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("Bregman gap requires a clamped difference") {
    const auto s = make(1.0, 1e-3);
    const std::vector<double> w1(s.p.grid.size(), 0.0), w2(s.p.grid.size(), 1.0);
    CHECK_THROWS_AS(bregman_gap(w1, w2, s.J), Error);
}

TEST_CASE("the two forms of q") {
    GridSpec spec;  // d = 0.5, eps = 0.03
    const double de = 0.47;
    CHECK(q_derived(spec, 2.0) == doctest::Approx(std::pow(de, -2) * (1 - 1.5 * std::pow(de / 0.5, 2))).epsilon(1e-14));
    CHECK(q_typeset(spec, 2.0) == doctest::Approx(std::pow(de, -2) * (1 - 3 * std::pow(de, 2) / std::pow(2 * 0.5, 2))).epsilon(1e-14));
    CHECK(q_derived(spec, 2.0) == doctest::Approx(-1.4730647351742867).epsilon(1e-12));
    CHECK(q_typeset(spec, 2.0) == doctest::Approx(1.5269352648257133).epsilon(1e-12));
}

TEST_CASE("alpha admissibility follows the functional's parameters") {
    CHECK_FALSE(make(2.0, 1e-4).J.alpha_admissible());
    CHECK(make(8.0, 1e-4).J.alpha_admissible());
}
