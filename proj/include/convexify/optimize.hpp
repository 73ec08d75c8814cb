#pragma once

#include <Eigen/SparseCholesky>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "convexify/functional.hpp"
#include "convexify/transform.hpp"

namespace convexify {

/// C-infinity cutoff: 1 on [0, xs/2], 0 on [xs, inf).
double cutoff(double x1, double xs);

/// W_bc = (g1t + x1 g2t) chi(x1); `xs <= 0` selects (d - a)/2.
std::vector<double> build_boundary_lift(const TransformedTraces& traces, const DomainGrid& grid, double xs = 0.0);

/// Zeroes z on the clamped layers.
void apply_clamp(std::span<double> z, const DomainGrid& grid);

/// Scales z by theta in (0, 1] so that ||W_bc + theta z||_{H^4} <= R; returns theta.
/// Throws `infeasible` when ||W_bc|| > R.
double project_to_ball(std::span<double> z, std::span<const double> w_bc, double R, const H4Norm& h4);

enum class StartMode { zero, random, given };

StartMode parse_start_mode(const std::string& text);
const char* to_string(StartMode m);

/// none: plain gradient; diagonal: diagonal of the Gauss-Newton matrix of J at w = 0;
/// gauss_newton: that matrix itself; gram: the H^4 Gram matrix.
enum class PreconditionerKind { none, diagonal, gauss_newton, gram };

PreconditionerKind parse_preconditioner(const std::string& text);
const char* to_string(PreconditionerKind k);

struct OptimizerConfig {
    int max_iter = 3000;
    double grad_tol = 1e-12;
    double step0 = 1.0;
    double backtrack = 0.5;
    double sufficient_decrease = 1e-4;
    int restarts = 5;
    StartMode start = StartMode::zero;
    /// Direction M^-1 g on the free nodes.
    PreconditionerKind precondition = PreconditionerKind::gauss_newton;
    /// Rebuild a diagonal or Gauss-Newton preconditioner at the current iterate every this many
    /// iterations; 0 keeps the one built at w = 0.
    int refresh = 0;
    /// Stop when a full accepted step changes J by less than this fraction.
    double stall_tol = 1e-15;
    bool timing = false;

    void validate() const;
};

/// Smoothed uniform field with ||W_bc + z|| = fraction * R, clamped.
std::vector<double> random_start(const DomainGrid& grid, std::span<const double> w_bc, double R, const H4Norm& h4,
                                 std::uint64_t seed, double fraction = 0.9);

struct HistoryRow {
    int iter = 0;
    double J = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
    double wall_ms = 0.0;
};

struct OptimizeResult {
    std::vector<double> w;  ///< W_bc + z
    std::vector<double> z;
    std::vector<HistoryRow> history;
    int iterations = 0;
    bool converged = false;
    std::string status;  ///< grad_tol | stalled | max_iter | line_search
    double final_J = 0.0;
    double grad_norm = 0.0;
};

class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    /// M^-1 g; clamped entries of the result are zero.
    virtual std::vector<double> solve(std::span<const double> g) const = 0;
};

/// LDL^T factor of a symmetric positive matrix restricted to the free nodes.
class MatrixPreconditioner final : public Preconditioner {
public:
    MatrixPreconditioner(const Eigen::SparseMatrix<double>& M, const std::vector<std::uint8_t>& clamped);
    std::vector<double> solve(std::span<const double> g) const override;

private:
    std::vector<int> free_index_;
    std::vector<std::size_t> free_nodes_;
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

class DiagonalPreconditioner final : public Preconditioner {
public:
    DiagonalPreconditioner(std::vector<double> diagonal, const std::vector<std::uint8_t>& clamped);
    std::vector<double> solve(std::span<const double> g) const override;
    const std::vector<double>& diagonal() const { return diag_; }

private:
    std::vector<double> diag_;
    std::vector<std::uint8_t> clamped_;
};

/// Local part of S(., w) (see LtildeOperator::linear_local), assembled by probing with colourings of
/// spacing 7. An empty `w` means w = 0, where the local part is all of S.
Eigen::SparseMatrix<double> assemble_linearization(const Functional& J, std::span<const double> w = {});

/// 2 (S^T diag(rho) S + alpha G) with S from assemble_linearization, rho the data weight and G the H^4 Gram matrix.
Eigen::SparseMatrix<double> gauss_newton_matrix(const Functional& J, std::span<const double> w = {});

/// nullptr for `none`; `w` as in gauss_newton_matrix.
std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const Functional& J,
                                                    std::span<const double> w = {});

/// Projected gradient descent on z with w = W_bc + z, z clamped and in the ball.
OptimizeResult minimize_gradient_descent(const Functional& J, std::span<const double> w_bc,
                                         std::span<const double> z0, const OptimizerConfig& config,
                                         const Preconditioner* precond = nullptr);

/// History CSV: iter,J,grad_norm,step,wall_ms
void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history, const std::string& header = {});

}  // namespace convexify
