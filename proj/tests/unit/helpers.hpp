#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "convexify/forward.hpp"
#include "convexify/geometry.hpp"

namespace convexify::test {

inline GridSpec small_grid(int n_x1 = 21, int n_t = 21) {
    GridSpec s;
    s.n_x1 = n_x1;
    s.n_t = n_t;
    return s;
}

inline CoefficientModel model_with_f(const std::string& f) {
    CoefficientModel m;
    m.f = ScalarProfile::parse(f);
    return m;
}

inline GeneratorConfig separable(double mu) {
    GeneratorConfig g;
    g.kind = GeneratorKind::separable;
    g.mu = mu;
    return g;
}

inline GeneratorConfig eigenmode() {
    GeneratorConfig g;
    g.kind = GeneratorKind::eigenmode;
    return g;
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// max |v| over nodes where mask is set.
inline double masked_max_abs(std::span<const double> v, const std::vector<std::uint8_t>& mask) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask[i]) m = std::max(m, std::abs(v[i]));
    return m;
}

/// Least-squares slope of log(err) against log(h).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
    const double n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace convexify::test
