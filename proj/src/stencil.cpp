#include "convexify/stencil.hpp"

#include <algorithm>
#include <cmath>

#include "convexify/error.hpp"

namespace convexify {

namespace {

AxisStencil::Row make_row(int first, std::initializer_list<double> c, double scale) {
    AxisStencil::Row r;
    r.first = first;
    r.size = static_cast<int>(c.size());
    int m = 0;
    for (double v : c) r.coeff[m++] = v * scale;
    return r;
}

}  // namespace

AxisStencil::AxisStencil(StencilKind kind, const Axis& axis) : kind_(kind) {
    const int n = axis.count;
    const double h = axis.spacing;
    require(n >= 5, ErrorKind::configuration, "difference stencils need at least 5 nodes per axis");
    rows_.resize(n);
    switch (kind) {
        case StencilKind::first_central:
            rows_[0] = make_row(0, {-3.0, 4.0, -1.0}, 0.5 / h);
            for (int i = 1; i < n - 1; ++i) rows_[i] = make_row(i - 1, {-1.0, 0.0, 1.0}, 0.5 / h);
            rows_[n - 1] = make_row(n - 3, {1.0, -4.0, 3.0}, 0.5 / h);
            break;
        case StencilKind::second_central:
            rows_[0] = make_row(0, {2.0, -5.0, 4.0, -1.0}, 1.0 / (h * h));
            for (int i = 1; i < n - 1; ++i) rows_[i] = make_row(i - 1, {1.0, -2.0, 1.0}, 1.0 / (h * h));
            rows_[n - 1] = make_row(n - 4, {-1.0, 4.0, -5.0, 2.0}, 1.0 / (h * h));
            break;
        case StencilKind::forward_order:
            throw Error(ErrorKind::configuration, "use AxisStencil::forward_difference");
        case StencilKind::first_forward:
            for (int i = 0; i < n - 1; ++i) rows_[i] = make_row(i, {-1.0, 1.0}, 1.0 / h);
            rows_[n - 1] = make_row(n - 2, {-1.0, 1.0}, 1.0 / h);
            break;
    }
}

AxisStencil AxisStencil::forward_difference(const Axis& axis, int m) {
    const int n = axis.count;
    require(m >= 1 && m <= 4, ErrorKind::configuration, "forward difference order must be in 1..4");
    require(n > m, ErrorKind::configuration, "axis too short for the forward difference order");
    AxisStencil s;
    s.kind_ = StencilKind::forward_order;
    s.rows_.resize(n);
    static constexpr double binom[5][5] = {
        {1}, {-1, 1}, {1, -2, 1}, {-1, 3, -3, 1}, {1, -4, 6, -4, 1}};
    const double scale = std::pow(axis.spacing, -m);
    for (int i = 0; i < n; ++i) {
        Row& r = s.rows_[i];
        r.first = std::min(i, n - 1 - m);
        r.size = m + 1;
        for (int k = 0; k <= m; ++k) r.coeff[k] = binom[m][k] * scale;
    }
    return s;
}

void apply_axis(const BoxGrid& grid, int axis, const AxisStencil& s, std::span<const double> in,
                std::span<double> out) {
    const std::size_t stride = grid.stride(axis);
    const std::size_t n = grid.size();
    for (std::size_t f = 0; f < n; ++f) {
        const int i = grid.index_along(f, axis);
        const auto& r = s.row(i);
        const std::size_t base = f - static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(r.first) * stride;
        double acc = 0.0;
        for (int m = 0; m < r.size; ++m) acc += r.coeff[m] * in[base + static_cast<std::size_t>(m) * stride];
        out[f] = acc;
    }
}

void apply_axis_transpose(const BoxGrid& grid, int axis, const AxisStencil& s,
                          std::span<const double> in, std::span<double> out) {
    const std::size_t stride = grid.stride(axis);
    const std::size_t n = grid.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t f = 0; f < n; ++f) {
        const int i = grid.index_along(f, axis);
        const auto& r = s.row(i);
        const std::size_t base = f - static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(r.first) * stride;
        for (int m = 0; m < r.size; ++m) out[base + static_cast<std::size_t>(m) * stride] += r.coeff[m] * in[f];
    }
}

DifferenceOps::DifferenceOps(const BoxGrid& grid) : grid_(grid) {
    for (int k = 0; k < grid.dims(); ++k) {
        first_.emplace_back(StencilKind::first_central, grid.axis(k));
        second_.emplace_back(StencilKind::second_central, grid.axis(k));
        forward_.emplace_back(StencilKind::first_forward, grid.axis(k));
    }
}

std::vector<double> DifferenceOps::run(int axis, const AxisStencil& s, std::span<const double> in,
                                       bool transpose) const {
    require_size(in, grid_.size(), "difference operator input");
    std::vector<double> out(grid_.size());
    if (transpose)
        apply_axis_transpose(grid_, axis, s, in, out);
    else
        apply_axis(grid_, axis, s, in, out);
    return out;
}

std::vector<double> DifferenceOps::first(int axis, std::span<const double> in) const {
    return run(axis, first_[axis], in, false);
}
std::vector<double> DifferenceOps::first_t(int axis, std::span<const double> in) const {
    return run(axis, first_[axis], in, true);
}
std::vector<double> DifferenceOps::second(int axis, std::span<const double> in) const {
    return run(axis, second_[axis], in, false);
}
std::vector<double> DifferenceOps::second_t(int axis, std::span<const double> in) const {
    return run(axis, second_[axis], in, true);
}
std::vector<double> DifferenceOps::forward(int axis, std::span<const double> in) const {
    return run(axis, forward_[axis], in, false);
}
std::vector<double> DifferenceOps::forward_t(int axis, std::span<const double> in) const {
    return run(axis, forward_[axis], in, true);
}

Eigen::SparseMatrix<double> assemble_axis(const BoxGrid& grid, int axis, const AxisStencil& s) {
    std::vector<Eigen::Triplet<double>> trip;
    const std::size_t stride = grid.stride(axis);
    for (std::size_t f = 0; f < grid.size(); ++f) {
        const int i = grid.index_along(f, axis);
        const auto& r = s.row(i);
        const std::size_t base = f - static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(r.first) * stride;
        for (int m = 0; m < r.size; ++m)
            trip.emplace_back(static_cast<int>(f), static_cast<int>(base + static_cast<std::size_t>(m) * stride),
                              r.coeff[m]);
    }
    const int n = static_cast<int>(grid.size());
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}


}  // namespace convexify
