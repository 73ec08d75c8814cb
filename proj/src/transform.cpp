#include "convexify/transform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "convexify/error.hpp"

namespace convexify {

void SmoothingConfig::validate(int n_t) const {
    if (!enabled) return;
    require(window % 2 == 1 && window >= 3, ErrorKind::configuration, "noise.window must be odd and >= 3");
    require(window <= n_t, ErrorKind::configuration, "noise.window exceeds the number of time nodes");
    require(degree >= 1 && degree < window, ErrorKind::configuration, "noise.degree must be in [1, window)");
}

namespace {

/// Rows of the least-squares projector for a window evaluated at local position `pos`:
/// row 0 gives the fitted value, row 1 the derivative (in units of one node spacing).
Eigen::MatrixXd fit_rows(int window, int degree, int pos) {
    Eigen::MatrixXd V(window, degree + 1);
    for (int i = 0; i < window; ++i) {
        const double tau = i - pos;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            V(i, k) = p;
            p *= tau;
        }
    }
    const Eigen::MatrixXd pinv = V.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
    return pinv.topRows(2);
}

}  // namespace

void differentiate_series(std::span<const double> y, double h, const SmoothingConfig& smoothing,
                          std::span<double> value, std::span<double> derivative) {
    const int n = static_cast<int>(y.size());
    if (!smoothing.enabled) {
        require(n >= 3, ErrorKind::configuration, "time series too short to differentiate");
        for (int j = 0; j < n; ++j) {
            value[j] = y[j];
            if (j == 0)
                derivative[j] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
            else if (j == n - 1)
                derivative[j] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
            else
                derivative[j] = (y[j + 1] - y[j - 1]) / (2.0 * h);
        }
        return;
    }
    smoothing.validate(n);
    const int m = smoothing.window;
    std::vector<Eigen::MatrixXd> rows(m);
    for (int pos = 0; pos < m; ++pos) rows[pos] = fit_rows(m, smoothing.degree, pos);
    for (int j = 0; j < n; ++j) {
        const int start = std::clamp(j - m / 2, 0, n - m);
        const auto& r = rows[j - start];
        double v = 0.0, dv = 0.0;
        for (int i = 0; i < m; ++i) {
            v += r(0, i) * y[start + i];
            dv += r(1, i) * y[start + i];
        }
        value[j] = v;
        derivative[j] = dv / h;
    }
}

TransformedTraces derive_transformed_traces(const CauchyTraces& traces, const SmoothingConfig& smoothing) {
    const BoxGrid& face = traces.face;
    const int t_axis = face.dims() - 1;
    const Axis& tax = face.axis(t_axis);
    smoothing.validate(tax.count);
    for (double g : traces.g1)
        if (!(g > 0.0)) fail(ErrorKind::positivity, "g1 must be positive to take its logarithm");

    TransformedTraces out;
    out.face = face;
    out.smoothing = smoothing;
    out.g1t.resize(face.size());
    out.g2t.resize(face.size());
    const std::size_t stride = face.stride(t_axis);
    const int nt = tax.count;
    std::vector<double> y1(nt), y2(nt), v1(nt), d1(nt), v2(nt), d2(nt);
    for (std::size_t col = 0; col < stride; ++col) {
        for (int j = 0; j < nt; ++j) {
            y1[j] = traces.g1[col + static_cast<std::size_t>(j) * stride];
            y2[j] = traces.g2[col + static_cast<std::size_t>(j) * stride];
        }
        differentiate_series(y1, tax.spacing, smoothing, v1, d1);
        differentiate_series(y2, tax.spacing, smoothing, v2, d2);
        for (int j = 0; j < nt; ++j) {
            if (!(v1[j] > 0.0)) fail(ErrorKind::positivity, "smoothed g1 is not positive");
            const std::size_t f = col + static_cast<std::size_t>(j) * stride;
            out.g1t[f] = d1[j] / v1[j];
            out.g2t[f] = d2[j] / v1[j] - d1[j] * v2[j] / (v1[j] * v1[j]);
        }
    }
    return out;
}

namespace {

int require_t_zero(const BoxGrid& g) {
    const Axis& t = g.axis(g.dims() - 1);
    require(t.anchor_value == 0.0 && t.anchor >= 0 && t.anchor < t.count, ErrorKind::configuration,
            "Volterra integral needs a t = 0 node");
    return t.anchor;
}

}  // namespace

std::vector<double> volterra_integrate(const BoxGrid& g, std::span<const double> field) {
    require_size(field, g.size(), "volterra input");
    const int j0 = require_t_zero(g);
    const int nt = g.axis(g.dims() - 1).count;
    const double h = g.axis(g.dims() - 1).spacing;
    const std::size_t stride = g.stride(g.dims() - 1);
    std::vector<double> out(g.size());
    for (std::size_t col = 0; col < stride; ++col) {
        auto at = [&](int j) { return col + static_cast<std::size_t>(j) * stride; };
        out[at(j0)] = 0.0;
        for (int j = j0 + 1; j < nt; ++j) out[at(j)] = out[at(j - 1)] + 0.5 * h * (field[at(j - 1)] + field[at(j)]);
        for (int j = j0 - 1; j >= 0; --j) out[at(j)] = out[at(j + 1)] - 0.5 * h * (field[at(j)] + field[at(j + 1)]);
    }
    return out;
}

std::vector<double> volterra_transpose(const BoxGrid& g, std::span<const double> y) {
    require_size(y, g.size(), "volterra adjoint input");
    const int j0 = require_t_zero(g);
    const int nt = g.axis(g.dims() - 1).count;
    const double h = g.axis(g.dims() - 1).spacing;
    const std::size_t stride = g.stride(g.dims() - 1);
    std::vector<double> out(g.size());
    for (std::size_t col = 0; col < stride; ++col) {
        auto at = [&](int j) { return col + static_cast<std::size_t>(j) * stride; };
        // Forward branch: V[j] = h/2 f[j0] + h sum_{j0<k<j} f[k] + h/2 f[j].
        double tail = 0.0;  // sum_{j > k} y_j
        for (int k = nt - 1; k > j0; --k) {
            out[at(k)] = 0.5 * h * y[at(k)] + h * tail;
            tail += y[at(k)];
        }
        double head = 0.0;  // sum_{j < k} y_j
        for (int k = 0; k < j0; ++k) {
            out[at(k)] = -(0.5 * h * y[at(k)] + h * head);
            head += y[at(k)];
        }
        out[at(j0)] = 0.5 * h * (tail - head);
    }
    return out;
}

LtildeOperator::LtildeOperator(const DomainGrid& grid, const CoefficientSet& coeffs)
    : elliptic_(coeffs, grid.spacetime()),
      n_(grid.n_space()),
      t_axis_(grid.time_axis()),
      space_size_(grid.space_size()) {
    require(coeffs.space.same_shape(grid.space()), ErrorKind::precondition,
            "coefficients are not sampled on the domain's spatial grid");
    std::vector<double> log_f(coeffs.f.size());
    for (std::size_t i = 0; i < log_f.size(); ++i) {
        if (!(coeffs.f[i] > 0.0)) fail(ErrorKind::positivity, "f must be positive to take ln f");
        log_f[i] = std::log(coeffs.f[i]);
    }
    const DifferenceOps space_ops(grid.space());
    for (int j = 0; j < n_; ++j) log_f_grad_.push_back(space_ops.first(j, log_f));
}

std::vector<std::vector<double>> LtildeOperator::gradient(std::span<const double> w) const {
    std::vector<std::vector<double>> g;
    for (int i = 0; i < n_; ++i) g.push_back(elliptic_.ops().first(i, w));
    return g;
}

std::vector<std::vector<double>> LtildeOperator::integrated(const std::vector<std::vector<double>>& g) const {
    std::vector<std::vector<double>> out;
    for (const auto& gi : g) out.push_back(volterra_integrate(spacetime(), gi));
    return out;
}

std::vector<double> LtildeOperator::apply(std::span<const double> w) const {
    auto out = elliptic_.apply_Lc(w);
    const auto wt = elliptic_.ops().first(t_axis_, w);
    const auto G = gradient(w);
    const auto I = integrated(G);
    const auto& coeffs = elliptic_.coefficients();
    for (std::size_t f = 0; f < out.size(); ++f) {
        const std::size_t s = f % space_size_;
        double acc = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                const double aij = coeffs.a_at(i, j)[s];
                acc += aij * (G[i][f] * (log_f_grad_[j][s] + I[j][f]) + G[j][f] * (log_f_grad_[i][s] + I[i][f]));
            }
        out[f] += acc - wt[f];
    }
    return out;
}

std::vector<double> LtildeOperator::quadratic(std::span<const double> h) const {
    require_size(h, spacetime().size(), "Q input");
    const auto G = gradient(h);
    const auto I = integrated(G);
    const auto& coeffs = elliptic_.coefficients();
    std::vector<double> out(h.size(), 0.0);
    for (std::size_t f = 0; f < out.size(); ++f) {
        const std::size_t s = f % space_size_;
        double acc = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) acc += coeffs.a_at(i, j)[s] * (G[i][f] * I[j][f] + G[j][f] * I[i][f]);
        out[f] = acc;
    }
    return out;
}

std::vector<double> LtildeOperator::linear(std::span<const double> h, std::span<const double> w1) const {
    return linear_impl(h, w1, true);
}

std::vector<double> LtildeOperator::linear_local(std::span<const double> h, std::span<const double> w1) const {
    return linear_impl(h, w1, false);
}

std::vector<double> LtildeOperator::linear_impl(std::span<const double> h, std::span<const double> w1,
                                                bool volterra) const {
    require_size(h, spacetime().size(), "S input h");
    require_size(w1, spacetime().size(), "S input w1");
    auto out = elliptic_.apply_Lc(h);
    const auto ht = elliptic_.ops().first(t_axis_, h);
    const auto Gh = gradient(h);
    const auto Ih = volterra ? integrated(Gh) : std::vector<std::vector<double>>{};
    const auto G1 = gradient(w1);
    const auto I1 = integrated(G1);
    const auto& coeffs = elliptic_.coefficients();
    for (std::size_t f = 0; f < out.size(); ++f) {
        const std::size_t s = f % space_size_;
        double acc = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                const double aij = coeffs.a_at(i, j)[s];
                acc += aij * (Gh[i][f] * (log_f_grad_[j][s] + I1[j][f]) + Gh[j][f] * (log_f_grad_[i][s] + I1[i][f]));
                if (volterra) acc += aij * (G1[i][f] * Ih[j][f] + G1[j][f] * Ih[i][f]);
            }
        out[f] += acc - ht[f];
    }
    return out;
}

std::vector<double> LtildeOperator::linear_transpose(std::span<const double> y, std::span<const double> w1) const {
    require_size(y, spacetime().size(), "S adjoint input");
    require_size(w1, spacetime().size(), "S adjoint w1");
    auto out = elliptic_.apply_Lc_transpose(y);
    const auto yt = elliptic_.ops().first_t(t_axis_, y);
    for (std::size_t f = 0; f < out.size(); ++f) out[f] -= yt[f];

    const auto G1 = gradient(w1);
    const auto I1 = integrated(G1);
    const auto& coeffs = elliptic_.coefficients();
    std::vector<double> scaled(y.size());
    for (int i = 0; i < n_; ++i) {
        // Coefficient of h_i: sum_j (a_ij + a_ji)((ln f)_j + I1_j).
        for (std::size_t f = 0; f < y.size(); ++f) {
            const std::size_t s = f % space_size_;
            double A = 0.0;
            for (int j = 0; j < n_; ++j)
                A += (coeffs.a_at(i, j)[s] + coeffs.a_at(j, i)[s]) * (log_f_grad_[j][s] + I1[j][f]);
            scaled[f] = A * y[f];
        }
        const auto t1 = elliptic_.ops().first_t(i, scaled);
        for (std::size_t f = 0; f < y.size(); ++f) out[f] += t1[f];

        // Coefficient of int_0^t h_i: sum_j (a_ji + a_ij) w1_j.
        for (std::size_t f = 0; f < y.size(); ++f) {
            const std::size_t s = f % space_size_;
            double B = 0.0;
            for (int j = 0; j < n_; ++j) B += (coeffs.a_at(j, i)[s] + coeffs.a_at(i, j)[s]) * G1[j][f];
            scaled[f] = B * y[f];
        }
        const auto t2 = elliptic_.ops().first_t(i, volterra_transpose(spacetime(), scaled));
        for (std::size_t f = 0; f < y.size(); ++f) out[f] += t2[f];
    }
    return out;
}

std::vector<double> LtildeOperator::principal(std::span<const double> u) const {
    auto out = elliptic_.apply_L0(u);
    const auto ut = elliptic_.ops().first(t_axis_, u);
    for (std::size_t f = 0; f < out.size(); ++f) out[f] = ut[f] - out[f];
    return out;
}

std::vector<double> apply_Ltilde(std::span<const double> w, const CoefficientSet& coeffs, const DomainGrid& grid) {
    return LtildeOperator(grid, coeffs).apply(w);
}

std::vector<double> apply_S_linear(std::span<const double> h, std::span<const double> w1,
                                   const CoefficientSet& coeffs, const DomainGrid& grid) {
    return LtildeOperator(grid, coeffs).linear(h, w1);
}

std::vector<double> apply_Q_quadratic(std::span<const double> h, const CoefficientSet& coeffs,
                                      const DomainGrid& grid) {
    return LtildeOperator(grid, coeffs).quadratic(h);
}

}  // namespace convexify
