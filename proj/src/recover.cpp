#include "convexify/recover.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "convexify/error.hpp"
#include "convexify/forward.hpp"
#include "convexify/io.hpp"
#include "convexify/transform.hpp"

namespace convexify {

std::vector<double> time_zero_slice(std::span<const double> field, const DomainGrid& grid) {
    require_size(field, grid.size(), "space-time field");
    const std::size_t base = static_cast<std::size_t>(grid.t_zero_index()) * grid.space_size();
    return {field.begin() + static_cast<std::ptrdiff_t>(base),
            field.begin() + static_cast<std::ptrdiff_t>(base + grid.space_size())};
}

namespace {

std::vector<std::uint8_t> slice_mask(const std::vector<std::uint8_t>& m, const DomainGrid& grid) {
    const std::size_t base = static_cast<std::size_t>(grid.t_zero_index()) * grid.space_size();
    return {m.begin() + static_cast<std::ptrdiff_t>(base),
            m.begin() + static_cast<std::ptrdiff_t>(base + grid.space_size())};
}

}  // namespace

RecoveredCoefficient recover_coefficient(std::span<const double> w_star, const CoefficientSet& coeffs,
                                         const DomainGrid& grid) {
    require(coeffs.space.same_shape(grid.space()), ErrorKind::precondition, "coefficients do not match the grid");
    const std::size_t n = grid.space_size();
    std::vector<double> log_f(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(coeffs.f[i] > 0.0)) fail(ErrorKind::positivity, "initial state f must be positive");
        log_f[i] = std::log(coeffs.f[i]);
    }
    const EllipticOperator L(coeffs, grid.space());
    const auto Lc = L.apply_Lc(log_f);
    std::vector<std::vector<double>> grad;
    for (int k = 0; k < grid.n_space(); ++k) grad.push_back(L.ops().first(k, log_f));
    const auto w0 = time_zero_slice(w_star, grid);

    RecoveredCoefficient out;
    out.c.resize(n);
    out.mask = slice_mask(grid.inside_G(), grid);
    out.mask_eps = slice_mask(grid.inside_G_eps(), grid);
    const int dims = grid.n_space();
    for (std::size_t s = 0; s < n; ++s) {
        double quad = 0.0;
        for (int i = 0; i < dims; ++i)
            for (int j = 0; j < dims; ++j) quad += coeffs.a_at(i, j)[s] * grad[i][s] * grad[j][s];
        out.c[s] = w0[s] - Lc[s] - quad;
    }
    return out;
}

ReconstructedState reconstruct_state(std::span<const double> w_star, std::span<const double> f,
                                     const DomainGrid& grid) {
    require_size(w_star, grid.size(), "w");
    require_size(f, grid.space_size(), "f");
    ReconstructedState out;
    out.v = volterra_integrate(grid.spacetime(), w_star);
    double vmax = -INFINITY;
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        const double fi = f[grid.space_index(i)];
        if (!(fi > 0.0)) fail(ErrorKind::positivity, "initial state f must be positive");
        out.v[i] += std::log(fi);
        vmax = std::max(vmax, out.v[i]);
    }
    if (vmax > 700.0) fail(ErrorKind::overflow, "exp(v) overflows: max v = " + format_double(vmax));
    out.u.resize(out.v.size());
    for (std::size_t i = 0; i < out.v.size(); ++i) out.u[i] = std::exp(out.v[i]);
    // exp(ln f) need not round-trip; pin the t = 0 plane to f exactly.
    const std::size_t base = static_cast<std::size_t>(grid.t_zero_index()) * grid.space_size();
    for (std::size_t s = 0; s < grid.space_size(); ++s) out.u[base + s] = f[s];
    return out;
}

namespace {

void masked_errors(std::span<const double> c_rec, std::span<const double> c_true, const std::vector<double>& q,
                   const std::vector<std::uint8_t>& mask, double& rel_l2, double& rel_linf, bool& absolute) {
    double num = 0.0, den = 0.0, nmax = 0.0, dmax = 0.0;
    for (std::size_t s = 0; s < c_rec.size(); ++s) {
        if (!mask[s]) continue;
        const double e = c_rec[s] - c_true[s];
        num += q[s] * e * e;
        den += q[s] * c_true[s] * c_true[s];
        nmax = std::max(nmax, std::abs(e));
        dmax = std::max(dmax, std::abs(c_true[s]));
    }
    absolute = !(den > 0.0) || !(dmax > 0.0);
    rel_l2 = absolute ? std::sqrt(num) : std::sqrt(num / den);
    rel_linf = absolute ? nmax : nmax / dmax;
}

}  // namespace

ErrorMetrics error_metrics(std::span<const double> c_rec, std::span<const double> c_true, const DomainGrid& grid) {
    require_size(c_rec, grid.space_size(), "c_rec");
    require_size(c_true, grid.space_size(), "c_true");
    const auto q = grid.space().trapezoid_weights();
    const auto mask_eps = slice_mask(grid.inside_G_eps(), grid);
    const auto mask = slice_mask(grid.inside_G(), grid);
    require(std::count(mask_eps.begin(), mask_eps.end(), 1) > 0, ErrorKind::precondition,
            "scoring region G0 with psi < d - eps contains no nodes");
    ErrorMetrics m;
    bool abs_full = false;
    masked_errors(c_rec, c_true, q, mask_eps, m.rel_L2, m.rel_Linf, m.absolute);
    masked_errors(c_rec, c_true, q, mask, m.full_rel_L2, m.full_rel_Linf, abs_full);
    return m;
}

void write_c_rec_csv(std::ostream& os, const RecoveredCoefficient& rec, std::span<const double> c_true,
                     const DomainGrid& grid, const std::string& header) {
    require_size(c_true, grid.space_size(), "c_true");
    if (!header.empty()) os << header << '\n';
    static const char* names[] = {"x1", "x2", "x3"};
    for (int k = 0; k < grid.n_space(); ++k) os << names[k] << ',';
    os << "c_rec,c_true,abs_err\n";
    for (std::size_t s = 0; s < grid.space_size(); ++s) {
        if (!rec.mask[s]) continue;
        for (int k = 0; k < grid.n_space(); ++k) os << format_double(grid.space().coordinate(s, k)) << ',';
        os << format_double(rec.c[s]) << ',' << format_double(c_true[s]) << ','
           << format_double(std::abs(rec.c[s] - c_true[s])) << '\n';
    }
}

}  // namespace convexify
