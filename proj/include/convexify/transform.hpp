#pragma once

#include <span>
#include <string>
#include <vector>

#include "convexify/forward.hpp"
#include "convexify/geometry.hpp"
#include "convexify/model.hpp"

namespace convexify {

/// Local least-squares polynomial differentiation in t (Savitzky-Golay style).
struct SmoothingConfig {
    bool enabled = false;
    int degree = 4;
    int window = 9;

    void validate(int n_t) const;
};

/// w-traces on the x1 = 0 face: g1t = d/dt ln g1, g2t = g2_t/g1 - g1_t g2/g1^2.
struct TransformedTraces {
    BoxGrid face;
    std::vector<double> g1t, g2t;
    SmoothingConfig smoothing;
};

TransformedTraces derive_transformed_traces(const CauchyTraces& traces, const SmoothingConfig& smoothing);

/// Value and first derivative of a time series: central differences, or the
/// local polynomial fit when smoothing is enabled.
void differentiate_series(std::span<const double> y, double h, const SmoothingConfig& smoothing,
                          std::span<double> value, std::span<double> derivative);

/// int_0^t field(x, tau) dtau by trapezoidal accumulation outward from the t = 0 plane.
std::vector<double> volterra_integrate(const BoxGrid& spacetime, std::span<const double> field);
/// Adjoint of `volterra_integrate` in the Euclidean inner product.
std::vector<double> volterra_transpose(const BoxGrid& spacetime, std::span<const double> y);

/// The nonlinear operator
///   Lt w = -w_t + Lc w + sum a_ij w_i ((ln f)_j + int_0^t w_j) + sum a_ij w_j ((ln f)_i + int_0^t w_i)
/// together with the pieces of the exact split Lt(w1 + h) = Lt(w1) + S(h, w1) + Q(h).
class LtildeOperator {
public:
    LtildeOperator(const DomainGrid& grid, const CoefficientSet& coeffs);

    std::vector<double> apply(std::span<const double> w) const;
    /// S(h, w1): the derivative of Lt at w1 applied to h.
    std::vector<double> linear(std::span<const double> h, std::span<const double> w1) const;
    /// S(h, w1) without the Volterra terms a_ij (w1_i int_0^t h_j + w1_j int_0^t h_i), which are
    /// non-local in t; what remains has stencils of reach 3 per axis.
    std::vector<double> linear_local(std::span<const double> h, std::span<const double> w1) const;
    /// S(., w1)^T y.
    std::vector<double> linear_transpose(std::span<const double> y, std::span<const double> w1) const;
    /// Q(h) = sum a_ij (h_i int_0^t h_j + h_j int_0^t h_i).
    std::vector<double> quadratic(std::span<const double> h) const;
    /// P0 u = u_t - L0 u.
    std::vector<double> principal(std::span<const double> u) const;

    const EllipticOperator& elliptic() const { return elliptic_; }
    const BoxGrid& spacetime() const { return elliptic_.grid(); }
    /// (ln f)_{x_j} on the spatial grid.
    const std::vector<std::vector<double>>& log_f_gradient() const { return log_f_grad_; }

private:
    std::vector<double> linear_impl(std::span<const double> h, std::span<const double> w1, bool volterra) const;
    std::vector<std::vector<double>> gradient(std::span<const double> w) const;
    std::vector<std::vector<double>> integrated(const std::vector<std::vector<double>>& g) const;

    EllipticOperator elliptic_;
    int n_ = 1;
    int t_axis_ = 1;
    std::size_t space_size_ = 1;
    std::vector<std::vector<double>> log_f_grad_;
};

std::vector<double> apply_Ltilde(std::span<const double> w, const CoefficientSet& coeffs, const DomainGrid& grid);
std::vector<double> apply_S_linear(std::span<const double> h, std::span<const double> w1,
                                   const CoefficientSet& coeffs, const DomainGrid& grid);
std::vector<double> apply_Q_quadratic(std::span<const double> h, const CoefficientSet& coeffs,
                                      const DomainGrid& grid);

}  // namespace convexify
