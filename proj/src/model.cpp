#include "convexify/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "convexify/error.hpp"
#include "convexify/io.hpp"

namespace convexify {

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            require(used == item.size(), ErrorKind::configuration, "bad number in profile '" + spec + "'");
        } catch (const std::logic_error&) {
            fail(ErrorKind::configuration, "bad number in profile '" + spec + "'");
        }
    }
    return out;
}

Vec3 space_coords(const BoxGrid& space, std::size_t node) {
    Vec3 x{};
    for (int k = 0; k < space.dims(); ++k) x[k] = space.coordinate(node, k);
    return x;
}

}  // namespace

ScalarProfile::ScalarProfile()
    : spec_("const:0"),
      value_([](const Vec3&) { return 0.0; }),
      gradient_([](const Vec3&) { return Vec3{}; }),
      hessian_([](const Vec3&) { return Mat3{}; }) {}

ScalarProfile ScalarProfile::constant(double v) {
    ScalarProfile p;
    p.spec_ = "const:" + format_double(v);
    p.value_ = [v](const Vec3&) { return v; };
    p.gradient_ = [](const Vec3&) { return Vec3{}; };
    p.hessian_ = [](const Vec3&) { return Mat3{}; };
    return p;
}

ScalarProfile ScalarProfile::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::vector<double> args =
        colon == std::string::npos ? std::vector<double>{} : parse_numbers(spec.substr(colon + 1), spec);
    auto nargs = [&](std::size_t n) {
        require(args.size() == n, ErrorKind::configuration,
                "profile '" + spec + "' expects " + std::to_string(n) + " parameter(s)");
    };

    ScalarProfile p;
    if (name == "const") {
        nargs(1);
        p = constant(args[0]);
    } else if (name == "exp_x1") {
        nargs(0);
        p.value_ = [](const Vec3& x) { return std::exp(x[0]); };
        p.gradient_ = [](const Vec3& x) { return Vec3{std::exp(x[0]), 0, 0}; };
        p.hessian_ = [](const Vec3& x) { return Mat3{std::exp(x[0]), 0, 0, 0, 0, 0, 0, 0, 0}; };
    } else if (name == "shifted_sin") {
        nargs(1);
        const double base = args[0];
        p.value_ = [base](const Vec3& x) { return base + std::sin(x[0]); };
        p.gradient_ = [](const Vec3& x) { return Vec3{std::cos(x[0]), 0, 0}; };
        p.hessian_ = [](const Vec3& x) { return Mat3{-std::sin(x[0]), 0, 0, 0, 0, 0, 0, 0, 0}; };
    } else if (name == "sin_ratio") {
        nargs(0);
        p.value_ = [](const Vec3& x) { return std::sin(x[0]) / (2.0 + std::sin(x[0])); };
        p.gradient_ = [](const Vec3& x) {
            const double s = std::sin(x[0]), c = std::cos(x[0]);
            return Vec3{2.0 * c / ((2.0 + s) * (2.0 + s)), 0, 0};
        };
        p.hessian_ = [](const Vec3& x) {
            const double s = std::sin(x[0]), c = std::cos(x[0]), q = 2.0 + s;
            return Mat3{-2.0 * s / (q * q) - 4.0 * c * c / (q * q * q), 0, 0, 0, 0, 0, 0, 0, 0};
        };
    } else if (name == "gauss") {
        nargs(4);
        const double base = args[0], amp = args[1], center = args[2], width = args[3];
        require(width > 0.0, ErrorKind::configuration, "gauss width must be positive");
        auto delta = [center](const Vec3& x) { return Vec3{x[0] - center, x[1], x[2]}; };
        auto bump = [=](const Vec3& x) {
            const Vec3 dx = delta(x);
            return amp * std::exp(-(dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]) / (width * width));
        };
        p.value_ = [=](const Vec3& x) { return base + bump(x); };
        p.gradient_ = [=](const Vec3& x) {
            const Vec3 dx = delta(x);
            const double g = bump(x);
            return Vec3{-2.0 * g * dx[0] / (width * width), -2.0 * g * dx[1] / (width * width),
                        -2.0 * g * dx[2] / (width * width)};
        };
        p.hessian_ = [=](const Vec3& x) {
            const Vec3 dx = delta(x);
            const double g = bump(x), w2 = width * width;
            Mat3 h{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    h[i * 3 + j] = g * (4.0 * dx[i] * dx[j] / (w2 * w2) - (i == j ? 2.0 / w2 : 0.0));
            return h;
        };
    } else {
        fail(ErrorKind::configuration, "unknown profile '" + spec + "'");
    }
    p.spec_ = spec;
    return p;
}

bool CoefficientSet::drift_free() const {
    for (const auto& bj : b)
        for (double v : bj)
            if (v != 0.0) return false;
    return true;
}

CoefficientSet CoefficientModel::sample(const BoxGrid& space) const {
    require(space.dims() == n_space, ErrorKind::precondition, "coefficient grid dimension mismatch");
    CoefficientSet cs;
    cs.space = space;
    cs.n_space = n_space;
    const std::size_t n = space.size();
    cs.a.assign(static_cast<std::size_t>(n_space * n_space), std::vector<double>(n));
    cs.b.assign(static_cast<std::size_t>(n_space), std::vector<double>(n));
    cs.c_true.resize(n);
    cs.f.resize(n);
    for (std::size_t node = 0; node < n; ++node) {
        const Vec3 x = space_coords(space, node);
        for (int i = 0; i < n_space; ++i) {
            for (int j = 0; j < n_space; ++j) cs.a[static_cast<std::size_t>(i * n_space + j)][node] = a[i * 3 + j];
            cs.b[static_cast<std::size_t>(i)][node] = b[i];
        }
        cs.f[node] = f.value(x);
        cs.c_true[node] = c.value(x);
    }
    const double min_f = *std::min_element(cs.f.begin(), cs.f.end());
    cs.b_lower = b_lower > 0.0 ? b_lower : 0.25 * min_f;
    return cs;
}

EllipticityBounds validate_coefficients(const CoefficientSet& coeffs) {
    const int n = coeffs.n_space;
    const std::size_t nodes = coeffs.space.size();
    require(coeffs.f.size() == nodes && coeffs.a.size() == static_cast<std::size_t>(n * n),
            ErrorKind::precondition, "coefficient fields are not on a common grid");
    EllipticityBounds out;
    out.mu1 = std::numeric_limits<double>::infinity();
    out.mu2 = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd m(n, n);
    for (std::size_t node = 0; node < nodes; ++node) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = coeffs.a_at(i, j)[node];
        const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
            fail(ErrorKind::precondition, "a_ij is not symmetric at node " + std::to_string(node));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        out.mu1 = std::min(out.mu1, es.eigenvalues()(0));
        out.mu2 = std::max(out.mu2, es.eigenvalues()(n - 1));
    }
    require(out.mu1 > 0.0, ErrorKind::precondition,
            "ellipticity failure: smallest eigenvalue of a is " + std::to_string(out.mu1));
    out.min_f = *std::min_element(coeffs.f.begin(), coeffs.f.end());
    if (out.min_f < 2.0 * coeffs.b_lower) {
        std::ostringstream os;
        os << "positivity failure: min f = " << out.min_f << " < 2 b = " << 2.0 * coeffs.b_lower;
        fail(ErrorKind::positivity, os.str());
    }
    return out;
}

void TikhonovParams::validate() const {
    require(alpha >= 0.0, ErrorKind::configuration, "tikhonov.alpha must be >= 0");
    require(R > 0.0, ErrorKind::configuration, "tikhonov.R must be positive");
}

bool TikhonovParams::admissible(double lambda, double nu, double d) const {
    return alpha > std::exp(-lambda / (2.0 * std::pow(d, nu))) && alpha < 1.0;
}

ExactSolution::ExactSolution(BoxGrid space, std::vector<std::vector<double>> modes, std::vector<double> rates,
                             std::vector<double> gamma, std::vector<double> c_true)
    : space_(std::move(space)),
      modes_(std::move(modes)),
      rates_(std::move(rates)),
      gamma_(std::move(gamma)),
      c_true_(std::move(c_true)) {}

double ExactSolution::u(std::size_t node, double t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < rates_.size(); ++k) s += gamma_[k] * modes_[k][node] * std::exp(rates_[k] * t);
    return s;
}

double ExactSolution::u_t(std::size_t node, double t) const {
    double s = 0.0;
    for (std::size_t k = 0; k < rates_.size(); ++k)
        s += gamma_[k] * rates_[k] * modes_[k][node] * std::exp(rates_[k] * t);
    return s;
}

std::vector<double> ExactSolution::initial() const {
    std::vector<double> f(space_.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(i, 0.0);
    return f;
}

ExactSolution oracle_separable(const CoefficientModel& model, double mu, const BoxGrid& space) {
    const int n = model.n_space;
    require(space.dims() == n, ErrorKind::precondition, "generator grid dimension mismatch");
    std::vector<double> f(space.size()), c(space.size());
    for (std::size_t node = 0; node < space.size(); ++node) {
        const Vec3 x = space_coords(space, node);
        const double fv = model.f.value(x);
        if (!(std::abs(fv) > 0.0)) fail(ErrorKind::positivity, "separable oracle: f vanishes at a node");
        const Vec3 g = model.f.gradient(x);
        const Mat3 h = model.f.hessian(x);
        double lf = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) lf += model.a[i * 3 + j] * h[i * 3 + j];
            lf += model.b[i] * g[i];
        }
        f[node] = fv;
        c[node] = mu - lf / fv;
    }
    return ExactSolution(space, {std::move(f)}, {mu}, {1.0}, std::move(c));
}

namespace {

void check_eigenmode_model(const CoefficientModel& model) {
    const int n = model.n_space;
    for (int i = 0; i < n; ++i) {
        if (model.b[i] != 0.0)
            fail(ErrorKind::unsupported, "eigenmode generator needs b = 0 (symmetric operator)");
        require(model.a[i * 3 + i] > 0.0, ErrorKind::precondition, "eigenmode generator needs a_kk > 0");
        for (int j = 0; j < n; ++j)
            if (i != j && model.a[i * 3 + j] != 0.0)
                fail(ErrorKind::unsupported, "eigenmode generator needs diagonal a");
    }
}

}  // namespace

std::vector<double> apply_neumann_operator(const CoefficientModel& model, const BoxGrid& space,
                                           const std::vector<double>& v) {
    check_eigenmode_model(model);
    require_size(v, space.size(), "neumann operator input");
    std::vector<double> out(space.size(), 0.0);
    for (std::size_t node = 0; node < space.size(); ++node) {
        double acc = model.c.value(space_coords(space, node)) * v[node];
        for (int k = 0; k < space.dims(); ++k) {
            const int i = space.index_along(node, k);
            const int last = space.axis(k).count - 1;
            const std::size_t s = space.stride(k);
            const double h2 = space.axis(k).spacing * space.axis(k).spacing;
            const double left = i == 0 ? v[node + s] : v[node - s];
            const double right = i == last ? v[node - s] : v[node + s];
            acc += model.a[k * 3 + k] * (left - 2.0 * v[node] + right) / h2;
        }
        out[node] = acc;
    }
    return out;
}

ExactSolution oracle_eigenmode(const CoefficientModel& model, const BoxGrid& space, const EigenmodeOptions& opt) {
    check_eigenmode_model(model);
    const std::size_t n = space.size();
    require(n <= 6000, ErrorKind::unsupported,
            "eigenmode generator uses a dense eigensolver; generator grid has " + std::to_string(n) +
                " nodes (limit 6000)");
    require(opt.num_modes >= 1 && static_cast<std::size_t>(opt.num_modes) <= n, ErrorKind::configuration,
            "forward.num_modes out of range");
    require(opt.gamma.size() >= static_cast<std::size_t>(opt.num_modes), ErrorKind::configuration,
            "forward.gamma needs one weight per mode");

    // L_h is self-adjoint in the trapezoid-weighted inner product; symmetrise with W^{1/2}.
    std::vector<double> sqrt_w(n, 1.0);
    for (std::size_t node = 0; node < n; ++node) {
        double w = 1.0;
        for (int k = 0; k < space.dims(); ++k) {
            const int i = space.index_along(node, k);
            if (i == 0 || i == space.axis(k).count - 1) w *= 0.5;
        }
        sqrt_w[node] = std::sqrt(w);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> unit(n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        unit[col] = 1.0;
        const auto column = apply_neumann_operator(model, space, unit);
        unit[col] = 0.0;
        for (std::size_t row = 0; row < n; ++row)
            if (column[row] != 0.0)
                A(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                    sqrt_w[row] * column[row] / sqrt_w[col];
    }
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    require(es.info() == Eigen::Success, ErrorKind::precondition, "eigendecomposition failed");

    std::vector<std::vector<double>> modes;
    std::vector<double> rates, gamma;
    for (int k = 0; k < opt.num_modes; ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(n) - 1 - k;
        const double rate = es.eigenvalues()(col);
        if (std::abs(rate) * opt.t_max > opt.exponent_cap) {
            std::ostringstream os;
            os << "mode " << k << " has |rate| * t_max = " << std::abs(rate) * opt.t_max
               << " above forward.exponent_cap = " << opt.exponent_cap;
            fail(ErrorKind::overflow, os.str());
        }
        std::vector<double> v(n);
        double extreme = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = es.eigenvectors()(static_cast<Eigen::Index>(i), col) / sqrt_w[i];
            if (std::abs(v[i]) > std::abs(extreme) * (1.0 + 1e-12)) extreme = v[i];
        }
        for (double& x : v) x /= extreme;
        modes.push_back(std::move(v));
        rates.push_back(rate);
        gamma.push_back(opt.gamma[static_cast<std::size_t>(k)]);
    }
    std::vector<double> c(n);
    for (std::size_t node = 0; node < n; ++node) c[node] = model.c.value(space_coords(space, node));
    return ExactSolution(space, std::move(modes), std::move(rates), std::move(gamma), std::move(c));
}

}  // namespace convexify
