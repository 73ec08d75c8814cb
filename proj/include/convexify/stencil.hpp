#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <span>
#include <vector>

#include "convexify/grid.hpp"

namespace convexify {

enum class StencilKind {
    first_central,   // (u[i+1]-u[i-1])/2h, second-order one-sided at the ends
    second_central,  // (u[i+1]-2u[i]+u[i-1])/h^2, second-order one-sided at the ends
    first_forward,   // (u[i+1]-u[i])/h, backward at the last node
    forward_order,   // m-th forward difference, window shifted back near the upper end
};

/// One difference operator along a single axis, stored row by row.
class AxisStencil {
public:
    struct Row {
        int first = 0;
        int size = 0;
        std::array<double, 5> coeff{};
    };

    AxisStencil() = default;
    AxisStencil(StencilKind kind, const Axis& axis);
    /// m-th forward difference (m in 1..4): row i uses nodes min(i, n-1-m) .. +m.
    static AxisStencil forward_difference(const Axis& axis, int m);

    StencilKind kind() const { return kind_; }
    int count() const { return static_cast<int>(rows_.size()); }
    const Row& row(int i) const { return rows_[i]; }

private:
    StencilKind kind_ = StencilKind::first_central;
    std::vector<Row> rows_;
};

/// out = S in, with S acting along `axis` of `grid`.
void apply_axis(const BoxGrid& grid, int axis, const AxisStencil& s, std::span<const double> in,
                std::span<double> out);

/// out = S^T in.
void apply_axis_transpose(const BoxGrid& grid, int axis, const AxisStencil& s,
                          std::span<const double> in, std::span<double> out);

/// Convenience: the standard first/second/forward stencils of every axis of a grid.
class DifferenceOps {
public:
    DifferenceOps() = default;
    explicit DifferenceOps(const BoxGrid& grid);

    const BoxGrid& grid() const { return grid_; }

    std::vector<double> first(int axis, std::span<const double> in) const;
    std::vector<double> first_t(int axis, std::span<const double> in) const;
    std::vector<double> second(int axis, std::span<const double> in) const;
    std::vector<double> second_t(int axis, std::span<const double> in) const;
    std::vector<double> forward(int axis, std::span<const double> in) const;
    std::vector<double> forward_t(int axis, std::span<const double> in) const;

    const AxisStencil& first_stencil(int axis) const { return first_[axis]; }
    const AxisStencil& second_stencil(int axis) const { return second_[axis]; }
    const AxisStencil& forward_stencil(int axis) const { return forward_[axis]; }

private:
    std::vector<double> run(int axis, const AxisStencil& s, std::span<const double> in, bool transpose) const;

    BoxGrid grid_;
    std::vector<AxisStencil> first_, second_, forward_;
};

/// Sparse matrix of `s` acting along `axis` of `grid`.
Eigen::SparseMatrix<double> assemble_axis(const BoxGrid& grid, int axis, const AxisStencil& s);

}  // namespace convexify
