#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "convexify/geometry.hpp"
#include "convexify/grid.hpp"

namespace convexify {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

/// Closed-form scalar function of the spatial variable with its gradient and Hessian.
///
/// Recognised specs:
///   const:V                      V
///   exp_x1                       exp(x1)
///   shifted_sin:B                B + sin(x1)
///   sin_ratio                    sin(x1) / (2 + sin(x1))
///   gauss:base,amp,center,width  base + amp exp(-((x1-center)^2 + |xbar|^2) / width^2)
class ScalarProfile {
public:
    ScalarProfile();
    static ScalarProfile parse(const std::string& spec);
    static ScalarProfile constant(double v);

    double value(const Vec3& x) const { return value_(x); }
    Vec3 gradient(const Vec3& x) const { return gradient_(x); }
    Mat3 hessian(const Vec3& x) const { return hessian_(x); }
    const std::string& spec() const { return spec_; }

private:
    std::string spec_;
    std::function<double(const Vec3&)> value_;
    std::function<Vec3(const Vec3&)> gradient_;
    std::function<Mat3(const Vec3&)> hessian_;
};

/// Coefficients of L u = sum a_ij u_ij + sum b_j u_j + c u sampled on a spatial grid.
struct CoefficientSet {
    BoxGrid space;
    int n_space = 1;
    std::vector<std::vector<double>> a;  ///< a[i*n + j], one value per spatial node
    std::vector<std::vector<double>> b;  ///< b[j]
    std::vector<double> c_true;
    std::vector<double> f;
    double b_lower = 0.0;  ///< positivity constant: f >= 2 b_lower

    const std::vector<double>& a_at(int i, int j) const { return a[static_cast<std::size_t>(i * n_space + j)]; }
    bool drift_free() const;
};

/// Analytic description from which coefficient sets are sampled.
struct CoefficientModel {
    int n_space = 1;
    Mat3 a{1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 b{0, 0, 0};
    ScalarProfile f = ScalarProfile::parse("shifted_sin:2");
    ScalarProfile c = ScalarProfile::constant(0.0);  ///< used by the eigenmode generator
    double b_lower = 0.0;                            ///< 0 selects 0.25 min f

    CoefficientSet sample(const BoxGrid& space) const;
};

struct EllipticityBounds {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double min_f = 0.0;
};

/// Empirical ellipticity bounds (min/max eigenvalue of a over the nodes) and the
/// positivity check f >= 2 b_lower. Throws on asymmetry, mu1 <= 0 or positivity failure.
EllipticityBounds validate_coefficients(const CoefficientSet& coeffs);

struct TikhonovParams {
    double alpha = 1e-4;
    double R = 10.0;

    void validate() const;
    /// alpha in (exp(-lambda / (2 d^nu)), 1).
    bool admissible(double lambda, double nu, double d) const;
};

/// Two-sided-in-time exact solution u(x,t) = sum_k gamma_k v_k(x) exp(rate_k t)
/// on the nodes of a spatial generator grid. The separable oracle is the one-mode case.
class ExactSolution {
public:
    ExactSolution() = default;
    ExactSolution(BoxGrid space, std::vector<std::vector<double>> modes, std::vector<double> rates,
                  std::vector<double> gamma, std::vector<double> c_true);

    const BoxGrid& space() const { return space_; }
    std::size_t num_modes() const { return rates_.size(); }
    const std::vector<double>& rates() const { return rates_; }
    const std::vector<double>& gamma() const { return gamma_; }
    const std::vector<double>& mode(std::size_t k) const { return modes_[k]; }
    const std::vector<double>& c_true() const { return c_true_; }

    double u(std::size_t node, double t) const;
    double u_t(std::size_t node, double t) const;
    /// w = d/dt ln u
    double log_rate(std::size_t node, double t) const { return u_t(node, t) / u(node, t); }
    std::vector<double> initial() const;

private:
    BoxGrid space_;
    std::vector<std::vector<double>> modes_;
    std::vector<double> rates_, gamma_, c_true_;
};

/// u = f e^{mu t}, c_true = mu - (sum a_ij f_ij + sum b_j f_j) / f with analytic derivatives of f.
ExactSolution oracle_separable(const CoefficientModel& model, double mu, const BoxGrid& space);

struct EigenmodeOptions {
    int num_modes = 2;
    std::vector<double> gamma{1.0, 0.02, 2e-4};
    double exponent_cap = 30.0;
    double t_max = 1.0;  ///< largest |t| at which the solution is evaluated
};

/// Discrete eigenpairs of L_h = sum a_kk D_kk + c on `space` with homogeneous Neumann
/// conditions, modes ordered by decreasing eigenvalue, each scaled to max |v| = 1
/// with a positive extreme entry. Requires b = 0 and constant diagonal a.
ExactSolution oracle_eigenmode(const CoefficientModel& model, const BoxGrid& space, const EigenmodeOptions& opt);

/// Neumann operator L_h applied to a nodal field on `space` (used for residual checks).
std::vector<double> apply_neumann_operator(const CoefficientModel& model, const BoxGrid& space,
                                           const std::vector<double>& v);

}  // namespace convexify
