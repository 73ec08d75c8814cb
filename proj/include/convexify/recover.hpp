#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "convexify/geometry.hpp"
#include "convexify/model.hpp"

namespace convexify {

/// c on the spatial grid; only nodes of the t = 0 slice of G are meaningful.
struct RecoveredCoefficient {
    std::vector<double> c;
    std::vector<std::uint8_t> mask;      ///< t = 0 slice of G
    std::vector<std::uint8_t> mask_eps;  ///< t = 0 slice of G_{a,d-eps}
};

/// t = 0 slice of a space-time field.
std::vector<double> time_zero_slice(std::span<const double> field, const DomainGrid& grid);

/// c = w(x,0) - Lc(ln f) - sum a_ij (ln f)_i (ln f)_j.
RecoveredCoefficient recover_coefficient(std::span<const double> w_star, const CoefficientSet& coeffs,
                                         const DomainGrid& grid);

struct ReconstructedState {
    std::vector<double> v, u;
};

/// v = ln f + int_0^t w, u = exp(v).
ReconstructedState reconstruct_state(std::span<const double> w_star, std::span<const double> f,
                                     const DomainGrid& grid);

struct ErrorMetrics {
    double rel_L2 = 0.0;
    double rel_Linf = 0.0;
    bool absolute = false;  ///< c_true vanished on the region; values are absolute errors
    double full_rel_L2 = 0.0;
    double full_rel_Linf = 0.0;
};

/// Errors over G0 intersected with {psi < d - eps}; full_* over the whole slice of G.
ErrorMetrics error_metrics(std::span<const double> c_rec, std::span<const double> c_true, const DomainGrid& grid);

/// x1[,x2[,x3]],c_rec,c_true,abs_err over the t = 0 slice of G.
void write_c_rec_csv(std::ostream& os, const RecoveredCoefficient& rec, std::span<const double> c_true,
                     const DomainGrid& grid, const std::string& header = {});

}  // namespace convexify
