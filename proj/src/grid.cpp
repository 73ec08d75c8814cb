#include "convexify/grid.hpp"

#include <cmath>
#include <string>

#include "convexify/error.hpp"

namespace convexify {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::positivity: return "positivity";
        case ErrorKind::overflow: return "overflow";
        case ErrorKind::infeasible: return "infeasible";
        case ErrorKind::precondition: return "precondition";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::line_search: return "line_search";
    }
    return "unknown";
}

Axis Axis::span(double lo, double hi, int count) {
    require(count >= 2 && hi > lo, ErrorKind::configuration, "axis needs at least two nodes and hi > lo");
    Axis ax;
    ax.count = count;
    ax.spacing = (hi - lo) / (count - 1);
    ax.anchor = 0;
    ax.anchor_value = lo;
    if (lo <= 0.0 && hi >= 0.0) {
        const double pos = -lo / ax.spacing;
        const double rounded = std::round(pos);
        if (std::abs(pos - rounded) < 1e-9) {
            ax.anchor = static_cast<int>(rounded);
            ax.anchor_value = 0.0;
        }
    }
    return ax;
}

BoxGrid::BoxGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    strides_.resize(axes_.size());
    size_ = 1;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
        strides_[k] = size_;
        size_ *= static_cast<std::size_t>(axes_[k].count);
    }
}

std::size_t BoxGrid::flat(std::span<const int> idx) const {
    std::size_t f = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) f += strides_[k] * static_cast<std::size_t>(idx[k]);
    return f;
}

std::vector<double> BoxGrid::trapezoid_weights() const {
    std::vector<double> w(size_, 1.0);
    for (std::size_t n = 0; n < size_; ++n) {
        for (int k = 0; k < dims(); ++k) {
            const int i = index_along(n, k);
            const double h = axes_[k].spacing;
            w[n] *= (i == 0 || i == axes_[k].count - 1) ? 0.5 * h : h;
        }
    }
    return w;
}

BoxGrid BoxGrid::leading(int k) const {
    return BoxGrid(std::vector<Axis>(axes_.begin(), axes_.begin() + k));
}

bool BoxGrid::same_shape(const BoxGrid& other) const {
    if (other.dims() != dims()) return false;
    for (int k = 0; k < dims(); ++k) {
        if (axes_[k].count != other.axes_[k].count) return false;
        if (std::abs(axes_[k].spacing - other.axes_[k].spacing) > 1e-12 * axes_[k].spacing) return false;
    }
    return true;
}

void require_size(std::span<const double> field, std::size_t expected, const char* what) {
    if (field.size() != expected) {
        fail(ErrorKind::precondition, std::string("grid mismatch for ") + what + ": expected " +
                                          std::to_string(expected) + " values, got " +
                                          std::to_string(field.size()));
    }
}

}  // namespace convexify
