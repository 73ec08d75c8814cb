#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "convexify/geometry.hpp"
#include "convexify/model.hpp"
#include "convexify/stencil.hpp"

namespace convexify {

/// Finite-difference realisation of
///   L0 w = sum a_ij w_ij,   Lc w = L0 w + sum b_j w_j,   L w = Lc w + c w
/// on any grid whose leading axes are the spatial axes of the coefficient grid
/// (coefficients are broadcast along trailing axes such as time).
class EllipticOperator {
public:
    EllipticOperator(const CoefficientSet& coeffs, const BoxGrid& grid);

    const BoxGrid& grid() const { return ops_.grid(); }
    const DifferenceOps& ops() const { return ops_; }
    const CoefficientSet& coefficients() const { return coeffs_; }

    std::vector<double> apply_L0(std::span<const double> w) const;
    std::vector<double> apply_Lc(std::span<const double> w) const;
    /// Uses c_true; only meaningful for oracle checks.
    std::vector<double> apply_L(std::span<const double> w) const;

    std::vector<double> apply_L0_transpose(std::span<const double> y) const;
    std::vector<double> apply_Lc_transpose(std::span<const double> y) const;

private:
    double coef(const std::vector<double>& field, std::size_t node) const { return field[node % space_size_]; }

    CoefficientSet coeffs_;
    DifferenceOps ops_;
    int n_ = 1;
    std::size_t space_size_ = 1;
};

EllipticOperator assemble_elliptic(const CoefficientSet& coeffs, const BoxGrid& grid);

enum class GeneratorKind { separable, eigenmode };

struct GeneratorConfig {
    GeneratorKind kind = GeneratorKind::separable;
    double mu = 0.0;
    EigenmodeOptions eigen;
    double margin = 0.5;  ///< eigenmode: enlargement of every spatial axis on both sides
};

/// Spatial grid refined by `fine_factor`, enlarged by `margin` on each side; every
/// inversion node coincides with a generator node.
struct GeneratorGrid {
    BoxGrid space;
    int fine_factor = 1;
    std::vector<int> offset;  ///< generator index of inversion index 0, per axis

    std::size_t generator_node(const BoxGrid& inversion_space, std::size_t space_node) const;
};

GeneratorGrid make_generator_grid(const DomainGrid& grid, int fine_factor, double margin);

/// u sampled on generator space x inversion time axis.
struct GeneratedField {
    BoxGrid spacetime;
    std::vector<double> u;
};

/// Samples the two-sided solution at every generator node and time; throws if u <= b
/// somewhere on the closure of G.
GeneratedField evolve_two_sided(const ExactSolution& solution, const DomainGrid& grid, double b_lower);

struct CauchyTraces {
    BoxGrid face;  ///< (xbar..., t) nodes of the x1 = 0 face
    std::vector<double> g1, g2;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t grid_hash = 0;
};

/// g1 = u(0, xbar, t), g2 = d/dx1 u(0, xbar, t) (centred when the generator extends to x1 < 0,
/// second-order one-sided otherwise).
CauchyTraces extract_traces(const GeneratedField& u, const GeneratorGrid& gen, const DomainGrid& grid);

/// g <- g (1 + delta eta), eta ~ U[-1,1] drawn node by node (g1 then g2) from mt19937_64(seed).
CauchyTraces add_noise(const CauchyTraces& traces, double delta, std::uint64_t seed);

void write_traces_csv(std::ostream& os, const CauchyTraces& traces, int n_space);

/// Everything the inverter and the scorers need for one synthetic experiment.
struct SyntheticProblem {
    DomainGrid grid;
    CoefficientSet coeffs;  ///< on grid.space(); f is the initial state, c_true the answer
    ExactSolution solution;
    CauchyTraces traces;
    std::vector<double> u_true;  ///< on grid.spacetime()
    std::vector<double> w_true;  ///< d/dt ln u on grid.spacetime()
};

SyntheticProblem generate_problem(const GridSpec& spec, const CoefficientModel& model, const GeneratorConfig& gen,
                                  double delta = 0.0, std::uint64_t seed = 0);

}  // namespace convexify
