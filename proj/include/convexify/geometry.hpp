#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "convexify/grid.hpp"

namespace convexify {

/// Parameters of the space-time domain family and of its tensor grid.
///
/// The measurement face is x1 = 0. The domain is
///   G = {(x,t) : x1 > 0, x1 + |xbar|^2 + t^2/T^2 + a < d}
/// and the grid covers its bounding box
///   x1 in [0, d-a], xbar_k in [-sqrt(d-a), sqrt(d-a)], t in [-T sqrt(d-a), T sqrt(d-a)].
struct GridSpec {
    int n_space = 1;
    double a = 0.2;
    double d = 0.5;
    double T = 1.0;
    double epsilon = 0.0;  ///< 0 selects the default 0.1 (d - a)
    int n_x1 = 41;
    int n_xbar = 21;
    int n_t = 41;
    int fine_factor = 2;

    void validate() const;
    double eps() const { return epsilon > 0.0 ? epsilon : 0.1 * (d - a); }
    std::string canonical() const;
};

struct SpaceTimePoint {
    std::array<double, 3> x{};
    double t = 0.0;
};

/// psi = x1 + |xbar|^2 + t^2/T^2 + a
double psi_value(const SpaceTimePoint& p, const GridSpec& spec);

enum class Normalization { paper, max };

Normalization parse_normalization(const std::string& text);
const char* to_string(Normalization n);

struct CarlemanParams {
    double lambda = 0.0;
    double nu = 2.0;
    Normalization normalization = Normalization::max;

    void validate() const;
    /// -3 lambda d^-nu (paper) or -2 lambda a^-nu (max, weight <= 1 on the closure of G).
    double exponent_shift(const GridSpec& spec) const;
};

/// exp(2 lambda psi^-nu + shift) evaluated as one exponential; throws `overflow`
/// when the combined exponent exceeds 700.
double carleman_weight_sq(const SpaceTimePoint& p, const CarlemanParams& params, const GridSpec& spec);

/// Masked space-time grid over the bounding box of G.
class DomainGrid {
public:
    explicit DomainGrid(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    int n_space() const { return spec_.n_space; }
    int time_axis() const { return spec_.n_space; }

    const BoxGrid& spacetime() const { return spacetime_; }
    const BoxGrid& space() const { return space_; }
    /// The x1 = 0 face: axes (xbar..., t).
    const BoxGrid& face() const { return face_; }

    std::size_t size() const { return spacetime_.size(); }
    std::size_t space_size() const { return space_.size(); }
    int t_count() const { return spacetime_.axis(time_axis()).count; }
    int t_zero_index() const { return spacetime_.axis(time_axis()).anchor; }
    double h_t() const { return spacetime_.axis(time_axis()).spacing; }

    SpaceTimePoint point(std::size_t node) const;
    SpaceTimePoint space_point(std::size_t space_node) const;
    std::size_t space_index(std::size_t node) const { return node % space_size(); }
    int x1_index(std::size_t node) const { return spacetime_.index_along(node, 0); }

    /// Space-time node on the face for a face node and an x1 index.
    std::size_t node_from_face(std::size_t face_node, int x1_index) const;

    const std::vector<double>& psi() const { return psi_; }
    const std::vector<std::uint8_t>& inside_G() const { return inside_G_; }
    const std::vector<std::uint8_t>& inside_G_eps() const { return inside_G_eps_; }
    const std::vector<std::uint8_t>& on_gamma() const { return on_gamma_; }
    const std::vector<std::uint8_t>& near_xi() const { return near_xi_; }

    /// Masked trapezoid weights over G (zero outside inside_G).
    const std::vector<double>& quadrature() const { return quad_G_; }
    /// Same over G_{a,d-eps}.
    const std::vector<double>& quadrature_eps() const { return quad_G_eps_; }
    /// Unmasked trapezoid weights over the full box.
    const std::vector<double>& box_quadrature() const { return quad_box_; }

    /// Stable 64-bit hash of the grid parameters.
    std::uint64_t hash() const;

private:
    GridSpec spec_;
    BoxGrid spacetime_, space_, face_;
    std::vector<double> psi_;
    std::vector<std::uint8_t> inside_G_, inside_G_eps_, on_gamma_, near_xi_;
    std::vector<double> quad_G_, quad_G_eps_, quad_box_;
};

DomainGrid build_domain(const GridSpec& spec);

/// Weight field exp(2 lambda psi^-nu + shift) at every node of the box.
std::vector<double> carleman_weight_field(const DomainGrid& grid, const CarlemanParams& params);

/// Node CSV: x1[,x2[,x3]],t,psi,weight,in_G,in_G_eps,on_gamma
void write_grid_csv(std::ostream& os, const DomainGrid& grid, const CarlemanParams& params);

/// FNV-1a over a byte string.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace convexify
