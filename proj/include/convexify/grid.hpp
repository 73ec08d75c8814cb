#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace convexify {

/// Uniform 1D axis. Nodes are anchored so that `anchor_value` is hit exactly
/// at index `anchor` (used to place x1 = 0 and t = 0 on exact nodes).
struct Axis {
    int count = 0;
    double spacing = 1.0;
    int anchor = 0;
    double anchor_value = 0.0;

    double node(int i) const { return anchor_value + (i - anchor) * spacing; }
    double lo() const { return node(0); }
    double hi() const { return node(count - 1); }

    /// Axis with `count` nodes spanning [lo, hi]; if 0 lies on a node it is hit exactly.
    static Axis span(double lo, double hi, int count);
};

/// Tensor-product box grid. Axis 0 varies fastest in the flat layout; for
/// space-time grids the time axis is last, so a node's spatial index is
/// `flat % space_size`.
class BoxGrid {
public:
    BoxGrid() = default;
    explicit BoxGrid(std::vector<Axis> axes);

    int dims() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int k) const { return axes_[k]; }
    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t size() const { return size_; }
    std::size_t stride(int k) const { return strides_[k]; }

    int index_along(std::size_t flat, int k) const {
        return static_cast<int>((flat / strides_[k]) % static_cast<std::size_t>(axes_[k].count));
    }
    double coordinate(std::size_t flat, int k) const { return axes_[k].node(index_along(flat, k)); }

    std::size_t flat(std::span<const int> idx) const;

    /// Product trapezoid weights over the whole box.
    std::vector<double> trapezoid_weights() const;

    /// Grid made of the first `k` axes.
    BoxGrid leading(int k) const;

    bool same_shape(const BoxGrid& other) const;

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

void require_size(std::span<const double> field, std::size_t expected, const char* what);

}  // namespace convexify
