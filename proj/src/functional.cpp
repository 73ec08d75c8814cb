#include "convexify/functional.hpp"

#include <cmath>
#include <functional>

#include "convexify/error.hpp"

namespace convexify {

namespace {

void enumerate_betas(int dims, int remaining, std::vector<int>& current, int axis,
                     std::vector<std::vector<int>>& out) {
    if (axis == dims) {
        out.push_back(current);
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        current[static_cast<std::size_t>(axis)] = k;
        enumerate_betas(dims, remaining - k, current, axis + 1, out);
    }
    current[static_cast<std::size_t>(axis)] = 0;
}

}  // namespace

H4Norm::H4Norm(const BoxGrid& grid) : grid_(grid), weights_(grid.trapezoid_weights()) {
    forward_.resize(static_cast<std::size_t>(grid.dims()));
    for (int k = 0; k < grid.dims(); ++k)
        for (int m = 1; m <= 4; ++m) forward_[static_cast<std::size_t>(k)].push_back(AxisStencil::forward_difference(grid.axis(k), m));
    std::vector<int> current(static_cast<std::size_t>(grid.dims()), 0);
    enumerate_betas(grid.dims(), 4, current, 0, betas_);
}

std::vector<double> H4Norm::derivative(const std::vector<int>& beta, std::span<const double> u) const {
    std::vector<double> cur(u.begin(), u.end()), tmp(u.size());
    for (int k = 0; k < grid_.dims(); ++k) {
        const int m = beta[static_cast<std::size_t>(k)];
        if (m == 0) continue;
        apply_axis(grid_, k, forward_[static_cast<std::size_t>(k)][static_cast<std::size_t>(m - 1)], cur, tmp);
        cur.swap(tmp);
    }
    return cur;
}

std::vector<double> H4Norm::derivative_t(const std::vector<int>& beta, std::span<const double> y) const {
    std::vector<double> cur(y.begin(), y.end()), tmp(y.size());
    for (int k = grid_.dims() - 1; k >= 0; --k) {
        const int m = beta[static_cast<std::size_t>(k)];
        if (m == 0) continue;
        apply_axis_transpose(grid_, k, forward_[static_cast<std::size_t>(k)][static_cast<std::size_t>(m - 1)], cur, tmp);
        cur.swap(tmp);
    }
    return cur;
}

double H4Norm::inner(std::span<const double> u, std::span<const double> v) const {
    require_size(u, grid_.size(), "H4 inner u");
    require_size(v, grid_.size(), "H4 inner v");
    double s = 0.0;
    for (const auto& beta : betas_) {
        const auto du = derivative(beta, u);
        const auto dv = derivative(beta, v);
        for (std::size_t f = 0; f < du.size(); ++f) s += weights_[f] * (du[f] * dv[f]);
    }
    return s;
}

double H4Norm::norm_sq(std::span<const double> u) const {
    require_size(u, grid_.size(), "H4 norm input");
    double s = 0.0;
    for (const auto& beta : betas_) {
        const auto du = derivative(beta, u);
        for (std::size_t f = 0; f < du.size(); ++f) s += weights_[f] * (du[f] * du[f]);
    }
    return s;
}

double H4Norm::norm(std::span<const double> u) const { return std::sqrt(norm_sq(u)); }

std::vector<double> H4Norm::gram_apply(std::span<const double> u) const {
    require_size(u, grid_.size(), "H4 Gram input");
    std::vector<double> out(u.size(), 0.0);
    for (const auto& beta : betas_) {
        auto du = derivative(beta, u);
        for (std::size_t f = 0; f < du.size(); ++f) du[f] *= weights_[f];
        const auto back = derivative_t(beta, du);
        for (std::size_t f = 0; f < out.size(); ++f) out[f] += back[f];
    }
    return out;
}

Eigen::SparseMatrix<double> H4Norm::gram_matrix() const {
    const int n = static_cast<int>(grid_.size());
    std::vector<std::vector<Eigen::SparseMatrix<double>>> D(forward_.size());
    for (int k = 0; k < grid_.dims(); ++k)
        for (const auto& s : forward_[static_cast<std::size_t>(k)]) D[static_cast<std::size_t>(k)].push_back(assemble_axis(grid_, k, s));
    Eigen::SparseMatrix<double> Q(n, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < n; ++i) trip.emplace_back(i, i, weights_[static_cast<std::size_t>(i)]);
        Q.setFromTriplets(trip.begin(), trip.end());
    }
    Eigen::SparseMatrix<double> G(n, n);
    for (const auto& beta : betas_) {
        Eigen::SparseMatrix<double> Db(n, n);
        Db.setIdentity();
        for (int k = 0; k < grid_.dims(); ++k) {
            const int m = beta[static_cast<std::size_t>(k)];
            if (m > 0) Db = (D[static_cast<std::size_t>(k)][static_cast<std::size_t>(m - 1)] * Db).pruned();
        }
        G += Eigen::SparseMatrix<double>(Db.transpose()) * Q * Db;
    }
    G.prune(0.0);
    return G;
}

double h4_inner(std::span<const double> u, std::span<const double> v, const BoxGrid& grid) {
    return H4Norm(grid).inner(u, v);
}

Functional::Functional(const DomainGrid& grid, const CoefficientSet& coeffs, const CarlemanParams& carleman,
                       const TikhonovParams& tikhonov)
    : grid_(grid), ltilde_(grid_, coeffs), h4_(grid_.spacetime()), carleman_(carleman), tikhonov_(tikhonov) {
    carleman_.validate();
    tikhonov_.validate();
    weight_ = carleman_weight_field(grid_, carleman_);
    data_weight_.resize(weight_.size());
    for (std::size_t i = 0; i < weight_.size(); ++i) data_weight_[i] = grid_.quadrature()[i] * weight_[i];
}

double Functional::prefactor() const { return std::exp(carleman_.exponent_shift(grid_.spec())); }

bool Functional::alpha_admissible() const {
    return tikhonov_.admissible(carleman_.lambda, carleman_.nu, grid_.spec().d);
}

double Functional::data_term(std::span<const double> w) const {
    const auto r = ltilde_.apply(w);
    double s = 0.0;
    for (std::size_t f = 0; f < r.size(); ++f) s += data_weight_[f] * r[f] * r[f];
    return s;
}

double Functional::regularization(std::span<const double> w) const {
    return tikhonov_.alpha == 0.0 ? 0.0 : tikhonov_.alpha * h4_.norm_sq(w);
}

double Functional::evaluate(std::span<const double> w) const { return data_term(w) + regularization(w); }

std::vector<double> Functional::gradient(std::span<const double> w) const {
    auto r = ltilde_.apply(w);
    for (std::size_t f = 0; f < r.size(); ++f) r[f] *= 2.0 * data_weight_[f];
    auto g = ltilde_.linear_transpose(r, w);
    if (tikhonov_.alpha != 0.0) {
        const auto m = h4_.gram_apply(w);
        for (std::size_t f = 0; f < g.size(); ++f) g[f] += 2.0 * tikhonov_.alpha * m[f];
    }
    return g;
}

std::vector<std::uint8_t> clamp_mask(const DomainGrid& grid) {
    std::vector<std::uint8_t> m(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) m[i] = grid.x1_index(i) <= 1;
    return m;
}

double interior_energy(std::span<const double> h, const DomainGrid& grid) {
    require_size(h, grid.size(), "interior energy input");
    const DifferenceOps ops(grid.spacetime());
    std::vector<std::vector<double>> g;
    for (int k = 0; k < grid.n_space(); ++k) g.push_back(ops.first(k, h));
    double s = 0.0;
    const auto& q = grid.quadrature_eps();
    for (std::size_t f = 0; f < h.size(); ++f) {
        if (q[f] == 0.0) continue;
        double e = h[f] * h[f];
        for (const auto& gk : g) e += gk[f] * gk[f];
        s += q[f] * e;
    }
    return s;
}

double q_derived(const GridSpec& spec, double nu) {
    const double de = spec.d - spec.eps();
    return std::pow(de, -nu) * (1.0 - 1.5 * std::pow(de / spec.d, nu));
}

double q_typeset(const GridSpec& spec, double nu) {
    const double de = spec.d - spec.eps();
    return std::pow(de, -nu) * (1.0 - 3.0 * std::pow(de, nu) / std::pow(2.0 * spec.d, nu));
}

BregmanGap bregman_gap(std::span<const double> w1, std::span<const double> w2, const Functional& J) {
    const DomainGrid& grid = J.grid();
    require_size(w1, grid.size(), "Bregman w1");
    require_size(w2, grid.size(), "Bregman w2");
    std::vector<double> h(w1.size());
    for (std::size_t f = 0; f < h.size(); ++f) h[f] = w2[f] - w1[f];
    const auto clamped = clamp_mask(grid);
    for (std::size_t f = 0; f < h.size(); ++f)
        if (clamped[f] && h[f] != 0.0)
            fail(ErrorKind::precondition, "w2 - w1 must vanish on the clamped boundary layers");

    BregmanGap out;
    const auto g = J.gradient(w1);
    double dir = 0.0;
    for (std::size_t f = 0; f < h.size(); ++f) dir += g[f] * h[f];
    out.gap = J.evaluate(w2) - J.evaluate(w1) - dir;

    const auto& L = J.ltilde();
    const auto r1 = L.apply(w1);
    const auto S = L.linear(h, w1);
    const auto Q = L.quadratic(h);
    const auto& dw = J.data_weight();
    double data = 0.0;
    for (std::size_t f = 0; f < h.size(); ++f) {
        const double sq = S[f] + Q[f];
        data += dw[f] * (2.0 * r1[f] * Q[f] + sq * sq);
    }
    out.h4_sq = J.h4().norm_sq(h);
    out.identity_rhs = data + J.tikhonov().alpha * out.h4_sq;
    out.alpha_term = 0.5 * J.tikhonov().alpha * out.h4_sq;
    out.interior_term = interior_energy(h, grid);
    out.q_derived = q_derived(grid.spec(), J.carleman().nu);
    out.q_typeset = q_typeset(grid.spec(), J.carleman().nu);
    return out;
}

}  // namespace convexify
