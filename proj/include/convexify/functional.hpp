#pragma once

#include <Eigen/SparseCore>
#include <span>
#include <vector>

#include "convexify/geometry.hpp"
#include "convexify/model.hpp"
#include "convexify/stencil.hpp"
#include "convexify/transform.hpp"

namespace convexify {

/// Discrete H^4 inner product over the whole box:
///   <u, v> = sum_{|beta| <= 4} sum_nodes q (D^beta u)(D^beta v)
/// with D^beta the product over axes of m-th forward differences and q the box trapezoid weights.
class H4Norm {
public:
    explicit H4Norm(const BoxGrid& grid);

    const BoxGrid& grid() const { return grid_; }
    const std::vector<std::vector<int>>& multi_indices() const { return betas_; }

    double inner(std::span<const double> u, std::span<const double> v) const;
    double norm_sq(std::span<const double> u) const;
    double norm(std::span<const double> u) const;
    /// Gram action sum_beta (D^beta)^T q D^beta u, so that inner(u, v) = <gram_apply(u), v>.
    std::vector<double> gram_apply(std::span<const double> u) const;
    /// Assembled Gram matrix.
    Eigen::SparseMatrix<double> gram_matrix() const;

    std::vector<double> derivative(const std::vector<int>& beta, std::span<const double> u) const;
    std::vector<double> derivative_t(const std::vector<int>& beta, std::span<const double> y) const;

private:
    BoxGrid grid_;
    std::vector<std::vector<AxisStencil>> forward_;  ///< [axis][order - 1]
    std::vector<std::vector<int>> betas_;
    std::vector<double> weights_;
};

double h4_inner(std::span<const double> u, std::span<const double> v, const BoxGrid& grid);

/// The weighted Tikhonov functional
///   J(w) = sum_G q rho (Lt w)^2 + alpha ||w||_{H^4}^2,
/// rho = exp(2 lambda psi^-nu + shift) with the normalisation's prefactor folded in.
class Functional {
public:
    Functional(const DomainGrid& grid, const CoefficientSet& coeffs, const CarlemanParams& carleman,
               const TikhonovParams& tikhonov);

    const DomainGrid& grid() const { return grid_; }
    const LtildeOperator& ltilde() const { return ltilde_; }
    const H4Norm& h4() const { return h4_; }
    const CarlemanParams& carleman() const { return carleman_; }
    const TikhonovParams& tikhonov() const { return tikhonov_; }
    /// Carleman weight at every node (prefactor included).
    const std::vector<double>& weight() const { return weight_; }
    /// Quadrature times weight.
    const std::vector<double>& data_weight() const { return data_weight_; }
    /// exp(shift) of the chosen normalisation.
    double prefactor() const;
    bool alpha_admissible() const;

    double evaluate(std::span<const double> w) const;
    double data_term(std::span<const double> w) const;
    double regularization(std::span<const double> w) const;
    /// Exact gradient of the discrete J with respect to every nodal value.
    std::vector<double> gradient(std::span<const double> w) const;

private:
    DomainGrid grid_;
    LtildeOperator ltilde_;
    H4Norm h4_;
    CarlemanParams carleman_;
    TikhonovParams tikhonov_;
    std::vector<double> weight_, data_weight_;
};

struct BregmanGap {
    double gap = 0.0;           ///< J(w2) - J(w1) - <grad J(w1), h>
    double identity_rhs = 0.0;  ///< sum q rho [2 Lt(w1) Q(h) + (S + Q)^2] + alpha ||h||^2
    double alpha_term = 0.0;    ///< (alpha/2) ||h||^2
    double interior_term = 0.0; ///< int_{G_{a,d-eps}} |grad h|^2 + h^2
    double h4_sq = 0.0;         ///< ||h||^2
    double q_derived = 0.0;
    double q_typeset = 0.0;
};

/// Requires h = w2 - w1 to vanish on the clamped x1 layers.
BregmanGap bregman_gap(std::span<const double> w1, std::span<const double> w2, const Functional& J);

/// (d-eps)^-nu [1 - (3/2)((d-eps)/d)^nu], from combining the two exponents.
double q_derived(const GridSpec& spec, double nu);
/// (d-eps)^-nu [1 - 3 (d-eps)^nu / (2d)^nu].
double q_typeset(const GridSpec& spec, double nu);

/// Nodes on the two x1 layers {0, h} where the optimisation variable is clamped.
std::vector<std::uint8_t> clamp_mask(const DomainGrid& grid);

/// int_{G_{a,d-eps}} (|grad h|^2 + h^2) with the spatial central gradient.
double interior_energy(std::span<const double> h, const DomainGrid& grid);

}  // namespace convexify
