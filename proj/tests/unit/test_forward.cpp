#include <doctest.h>

#include <cmath>
#include <sstream>

#include "convexify/error.hpp"
#include "convexify/forward.hpp"
#include "helpers.hpp"

using namespace convexify;

namespace {

std::vector<double> sample(const BoxGrid& g, double (*fn)(double)) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g.coordinate(i, 0));
    return v;
}

double rel_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("constants are annihilated by L0 and Lc") {
    CoefficientModel m;
    m.b = {0.7, 0, 0};
    const BoxGrid g({Axis::span(0.0, 0.3, 11), Axis::span(-0.5, 0.5, 7)});
    const EllipticOperator L(m.sample(BoxGrid({g.axis(0)})), g);
    const std::vector<double> w(g.size(), 3.0);
    CHECK(test::max_abs(L.apply_L0(w)) < 1e-10);
    CHECK(test::max_abs(L.apply_Lc(w)) < 1e-10);
}

TEST_CASE("second differences are exact on quadratics") {
    CoefficientModel m;
    const BoxGrid g({Axis::span(0.0, 0.3, 11)});
    const EllipticOperator L(m.sample(g), g);
    const auto Lw = L.apply_L0(sample(g, [](double x) { return x * x; }));
    for (double v : Lw) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("L0 sin converges at second order") {
    CoefficientModel m;
    std::vector<double> err;
    for (int n : {21, 41, 81}) {
        const BoxGrid g({Axis::span(0.0, 1.0, n)});
        const EllipticOperator L(m.sample(g), g);
        const auto Lw = L.apply_L0(sample(g, [](double x) { return std::sin(x); }));
        double e = 0.0;
        for (std::size_t i = 1; i + 1 < g.size(); ++i) e = std::max(e, std::abs(Lw[i] + std::sin(g.coordinate(i, 0))));
        err.push_back(e);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("transpose operators are adjoint") {
    CoefficientModel m;
    m.n_space = 2;
    m.a = {1.0, 0.2, 0, 0.2, 1.5, 0, 0, 0, 1};
    m.b = {0.3, -0.4, 0};
    const BoxGrid space({Axis::span(0.0, 0.3, 7), Axis::span(-0.5, 0.5, 6)});
    const BoxGrid g({space.axis(0), space.axis(1), Axis::span(-0.4, 0.4, 5)});
    const EllipticOperator L(m.sample(space), g);
    std::vector<double> u(g.size()), y(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        u[i] = std::sin(0.37 * i);
        y[i] = std::cos(1.3 * i);
    }
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    CHECK(dot(L.apply_Lc(u), y) == doctest::Approx(dot(u, L.apply_Lc_transpose(y))).epsilon(1e-12));
    CHECK(dot(L.apply_L0(u), y) == doctest::Approx(dot(u, L.apply_L0_transpose(y))).epsilon(1e-12));
}

TEST_CASE("separable mu = 0 is constant in time") {
    const auto p = generate_problem(test::small_grid(), CoefficientModel{}, test::separable(0.0));
    for (std::size_t n = 0; n < p.grid.size(); ++n) CHECK(p.u_true[n] == p.coeffs.f[p.grid.space_index(n)]);
    for (double w : p.w_true) CHECK(w == 0.0);
}

TEST_CASE("separable f = 1, mu = 1 gives u = exp(t)") {
    const auto p = generate_problem(test::small_grid(), test::model_with_f("const:1"), test::separable(1.0));
    for (std::size_t n = 0; n < p.grid.size(); ++n) {
        CHECK(p.u_true[n] == doctest::Approx(std::exp(p.grid.point(n).t)).epsilon(1e-14));
        CHECK(p.w_true[n] == doctest::Approx(1.0).epsilon(1e-14));
    }
    // u = e^t: g1 = e^t and g2 = 0
    const auto& tr = p.traces;
    for (std::size_t i = 0; i < tr.g1.size(); ++i) {
        CHECK(tr.g1[i] == doctest::Approx(std::exp(tr.face.coordinate(i, 0))).epsilon(1e-14));
        CHECK(std::abs(tr.g2[i]) < 1e-12);
    }
}

TEST_CASE("eigenmode data starts from f") {
    const auto p = generate_problem(test::small_grid(), CoefficientModel{}, test::eigenmode());
    const std::size_t base = static_cast<std::size_t>(p.grid.t_zero_index()) * p.grid.space_size();
    for (std::size_t s = 0; s < p.grid.space_size(); ++s) CHECK(p.u_true[base + s] == p.coeffs.f[s]);
}

TEST_CASE("traces of exp(x1) converge at second order") {
    std::vector<double> err;
    for (int n : {11, 21, 41}) {
        GridSpec s = test::small_grid(n, 11);
        s.fine_factor = 1;
        const auto p = generate_problem(s, test::model_with_f("exp_x1"), test::separable(0.0));
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t i = 0; i < p.traces.g1.size(); ++i) {
            e1 = std::max(e1, std::abs(p.traces.g1[i] - 1.0));
            e2 = std::max(e2, std::abs(p.traces.g2[i] - 1.0));
        }
        CHECK(e1 < 1e-14);
        err.push_back(e2);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("f independent of x1 gives g2 = 0") {
    GridSpec s = test::small_grid(11, 11);
    s.n_space = 2;
    s.n_xbar = 9;
    CoefficientModel m;
    m.n_space = 2;
    m.f = ScalarProfile::parse("gauss:2,0.5,-100,0.3");  // centre far away in x1: exp(-(x1+100)^2) = 0
    const auto p = generate_problem(s, m, test::separable(0.5));
    CHECK(test::max_abs(p.traces.g2) < 1e-12);
}

TEST_CASE("noise contract") {
    const auto p = generate_problem(test::small_grid(), CoefficientModel{}, test::separable(0.5));
    const auto same = add_noise(p.traces, 0.0, 3);
    CHECK(same.g1 == p.traces.g1);
    CHECK(same.g2 == p.traces.g2);

    const auto a = add_noise(p.traces, 0.05, 7), b = add_noise(p.traces, 0.05, 7), c = add_noise(p.traces, 0.05, 8);
    CHECK(a.g1 == b.g1);
    CHECK(a.g2 == b.g2);
    CHECK(a.g1 != c.g1);

    // relative RMS of delta * eta with eta ~ U[-1,1] has mean delta / sqrt(3)
    double mean = 0.0;
    const int seeds = 40;
    for (int k = 0; k < seeds; ++k) {
        const auto n = add_noise(p.traces, 0.05, static_cast<std::uint64_t>(100 + k));
        const double e = rel_norm(n.g1, p.traces.g1);
        CHECK(e <= 0.05);
        mean += e / seeds;
    }
    CHECK(mean == doctest::Approx(0.05 / std::sqrt(3.0)).epsilon(0.05));
}

TEST_CASE("generate_problem applies noise with the given seed") {
    const auto a = generate_problem(test::small_grid(), CoefficientModel{}, test::separable(0.0), 0.05, 11);
    const auto b = generate_problem(test::small_grid(), CoefficientModel{}, test::separable(0.0), 0.05, 11);
    CHECK(a.traces.g1 == b.traces.g1);
    CHECK(a.traces.delta == 0.05);
    CHECK(a.traces.seed == 11);
}

TEST_CASE("positivity of u is enforced") {
    CoefficientModel m;
    m.f = ScalarProfile::constant(1.0);
    m.b_lower = 0.45;
    // f = 1 passes f >= 2 b_lower, but u = e^{3t} at t = -sqrt(0.3) is e^{-1.64} = 0.19 < b_lower
    CHECK_THROWS_AS(generate_problem(test::small_grid(), m, test::separable(3.0)), Error);
}

TEST_CASE("trace csv layout") {
    const auto p = generate_problem(test::small_grid(11, 5), CoefficientModel{}, test::separable(0.0));
    std::ostringstream os;
    write_traces_csv(os, p.traces, 1);
    const std::string text = os.str();
    CHECK(text.find("t,g1,g2\n") != std::string::npos);
    CHECK(text.rfind("# delta=0,seed=0,grid_hash=", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2 + 5);
}
