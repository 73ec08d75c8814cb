#include "convexify/optimize.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "convexify/error.hpp"
#include "convexify/io.hpp"

namespace convexify {

double cutoff(double x1, double xs) {
    const double lo = 0.5 * xs;
    if (x1 <= lo) return 1.0;
    if (x1 >= xs) return 0.0;
    const double s = (x1 - lo) / (xs - lo);
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return b / (a + b);
}

std::vector<double> build_boundary_lift(const TransformedTraces& traces, const DomainGrid& grid, double xs) {
    require(traces.face.same_shape(grid.face()), ErrorKind::precondition, "traces do not match the grid face");
    if (xs <= 0.0) xs = 0.5 * (grid.spec().d - grid.spec().a);
    const int nx = grid.spacetime().axis(0).count;
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t node = 0; node < grid.size(); ++node) {
        const double x1 = grid.spacetime().coordinate(node, 0);
        const double chi = cutoff(x1, xs);
        if (chi == 0.0) continue;
        const std::size_t f = node / static_cast<std::size_t>(nx);
        w[node] = (traces.g1t[f] + x1 * traces.g2t[f]) * chi;
    }
    return w;
}

void apply_clamp(std::span<double> z, const DomainGrid& grid) {
    require_size(z, grid.size(), "clamp input");
    for (std::size_t i = 0; i < z.size(); ++i)
        if (grid.x1_index(i) <= 1) z[i] = 0.0;
}

namespace {

/// Positive root of a s^2 + b s + c = 0 with a > 0, c <= 0.
double positive_root(double a, double b, double c) {
    const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
    if (b >= 0.0) return -2.0 * c / (b + disc);
    return (-b + disc) / (2.0 * a);
}

}  // namespace

double project_to_ball(std::span<double> z, std::span<const double> w_bc, double R, const H4Norm& h4) {
    const double ww = h4.norm_sq(w_bc);
    if (ww > R * R) {
        fail(ErrorKind::infeasible, "boundary lift has H4 norm " + format_double(std::sqrt(ww)) +
                                        " > R = " + format_double(R) + "; no feasible point");
    }
    const double zz = h4.norm_sq(z);
    const double wz = h4.inner(w_bc, z);
    const double total = ww + 2.0 * wz + zz;
    if (total <= R * R) return 1.0;
    const double theta = positive_root(zz, 2.0 * wz, ww - R * R);
    for (double& v : z) v *= theta;
    return theta;
}

StartMode parse_start_mode(const std::string& text) {
    if (text == "zero") return StartMode::zero;
    if (text == "random") return StartMode::random;
    if (text == "given") return StartMode::given;
    fail(ErrorKind::configuration, "optimize.start must be zero, random or given (got '" + text + "')");
}

const char* to_string(StartMode m) {
    switch (m) {
        case StartMode::zero: return "zero";
        case StartMode::random: return "random";
        case StartMode::given: return "given";
    }
    return "zero";
}

PreconditionerKind parse_preconditioner(const std::string& text) {
    if (text == "none" || text == "off") return PreconditionerKind::none;
    if (text == "diagonal") return PreconditionerKind::diagonal;
    if (text == "gauss_newton") return PreconditionerKind::gauss_newton;
    if (text == "gram") return PreconditionerKind::gram;
    fail(ErrorKind::configuration, "optimize.precondition must be none, diagonal, gauss_newton or gram (got '" + text + "')");
}

const char* to_string(PreconditionerKind k) {
    switch (k) {
        case PreconditionerKind::none: return "none";
        case PreconditionerKind::diagonal: return "diagonal";
        case PreconditionerKind::gauss_newton: return "gauss_newton";
        case PreconditionerKind::gram: return "gram";
    }
    return "none";
}

void OptimizerConfig::validate() const {
    require(max_iter >= 0, ErrorKind::configuration, "optimize.max_iter must be >= 0");
    require(grad_tol >= 0.0, ErrorKind::configuration, "optimize.grad_tol must be >= 0");
    require(step0 > 0.0, ErrorKind::configuration, "optimize.step0 must be > 0");
    require(backtrack > 0.0 && backtrack < 1.0, ErrorKind::configuration, "optimize.backtrack must be in (0,1)");
    require(sufficient_decrease > 0.0 && sufficient_decrease <= 0.5, ErrorKind::configuration,
            "optimize.sufficient_decrease must be in (0,0.5]");
    require(restarts >= 0, ErrorKind::configuration, "optimize.restarts must be >= 0");
    require(stall_tol >= 0.0, ErrorKind::configuration, "optimize.stall_tol must be >= 0");
    require(refresh >= 0, ErrorKind::configuration, "optimize.refresh must be >= 0");
}

std::vector<double> random_start(const DomainGrid& grid, std::span<const double> w_bc, double R, const H4Norm& h4,
                                 std::uint64_t seed, double fraction) {
    const BoxGrid& box = grid.spacetime();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> z(box.size());
    for (double& v : z) v = unif(rng);
    apply_clamp(z, grid);
    std::vector<double> next(z.size());
    for (int pass = 0; pass < 3; ++pass) {
        for (std::size_t f = 0; f < z.size(); ++f) {
            double s = z[f];
            int count = 1;
            for (int k = 0; k < box.dims(); ++k) {
                const int i = box.index_along(f, k);
                const std::size_t st = box.stride(k);
                if (i > 0) s += z[f - st], ++count;
                if (i + 1 < box.axis(k).count) s += z[f + st], ++count;
            }
            next[f] = s / count;
        }
        z.swap(next);
        apply_clamp(z, grid);
    }
    const double target = fraction * R;
    const double ww = h4.norm_sq(w_bc);
    if (ww >= target * target)
        fail(ErrorKind::infeasible, "boundary lift norm exceeds the random-start radius");
    const double scale = positive_root(h4.norm_sq(z), 2.0 * h4.inner(w_bc, z), ww - target * target);
    for (double& v : z) v *= scale;
    return z;
}

MatrixPreconditioner::MatrixPreconditioner(const Eigen::SparseMatrix<double>& M,
                                           const std::vector<std::uint8_t>& clamped) {
    const std::size_t n = clamped.size();
    require(static_cast<std::size_t>(M.rows()) == n && M.rows() == M.cols(), ErrorKind::precondition,
            "preconditioner matrix size mismatch");
    free_index_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        if (!clamped[i]) {
            free_index_[i] = static_cast<int>(free_nodes_.size());
            free_nodes_.push_back(i);
        }
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < M.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it) {
            const int r = free_index_[static_cast<std::size_t>(it.row())];
            const int c = free_index_[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
        }
    const int m = static_cast<int>(free_nodes_.size());
    Eigen::SparseMatrix<double> F(m, m);
    F.setFromTriplets(trip.begin(), trip.end());
    ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(F);
    require(ldlt_->info() == Eigen::Success, ErrorKind::precondition, "preconditioner factorisation failed");
}

std::vector<double> MatrixPreconditioner::solve(std::span<const double> g) const {
    require_size(g, free_index_.size(), "preconditioner input");
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(free_nodes_.size()));
    for (std::size_t k = 0; k < free_nodes_.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = g[free_nodes_[k]];
    const Eigen::VectorXd x = ldlt_->solve(rhs);
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t k = 0; k < free_nodes_.size(); ++k) out[free_nodes_[k]] = x[static_cast<Eigen::Index>(k)];
    return out;
}

DiagonalPreconditioner::DiagonalPreconditioner(std::vector<double> diagonal, const std::vector<std::uint8_t>& clamped)
    : diag_(std::move(diagonal)), clamped_(clamped) {
    require(diag_.size() == clamped_.size(), ErrorKind::precondition, "preconditioner size mismatch");
    for (std::size_t f = 0; f < diag_.size(); ++f)
        require(clamped_[f] || diag_[f] > 0.0, ErrorKind::precondition, "diagonal preconditioner is not positive");
}

std::vector<double> DiagonalPreconditioner::solve(std::span<const double> g) const {
    require_size(g, diag_.size(), "preconditioner input");
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t f = 0; f < g.size(); ++f)
        if (!clamped_[f]) out[f] = g[f] / diag_[f];
    return out;
}

Eigen::SparseMatrix<double> assemble_linearization(const Functional& J, std::span<const double> w) {
    const BoxGrid& box = J.grid().spacetime();
    const std::size_t n = box.size();
    std::vector<double> w1(n, 0.0);
    if (!w.empty()) {
        require_size(w, n, "linearisation point");
        w1.assign(w.begin(), w.end());
    }
    // every stencil of S(., 0) reaches at most 3 nodes along an axis
    constexpr int spacing = 7;
    const int dims = box.dims();
    int colours = 1;
    for (int k = 0; k < dims; ++k) colours *= spacing;

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> probe(n);
    for (int c = 0; c < colours; ++c) {
        std::array<int, 4> ck{};
        for (int k = 0, r = c; k < dims; ++k, r /= spacing) ck[static_cast<std::size_t>(k)] = r % spacing;
        for (std::size_t f = 0; f < n; ++f) {
            bool on = true;
            for (int k = 0; k < dims && on; ++k) on = box.index_along(f, k) % spacing == ck[static_cast<std::size_t>(k)];
            probe[f] = on ? 1.0 : 0.0;
        }
        const auto col = J.ltilde().linear_local(probe, w1);
        for (std::size_t r = 0; r < n; ++r) {
            if (col[r] == 0.0) continue;
            std::size_t target = 0;
            bool inside = true;
            for (int k = 0; k < dims && inside; ++k) {
                const int i = box.index_along(r, k);
                int d = ((ck[static_cast<std::size_t>(k)] - i) % spacing + spacing) % spacing;
                if (d > spacing / 2) d -= spacing;
                const int j = i + d;
                inside = j >= 0 && j < box.axis(k).count;
                target += static_cast<std::size_t>(j) * box.stride(k);
            }
            if (inside) trip.emplace_back(static_cast<int>(r), static_cast<int>(target), col[r]);
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(n), static_cast<int>(n));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

Eigen::SparseMatrix<double> gauss_newton_matrix(const Functional& J, std::span<const double> w) {
    const Eigen::SparseMatrix<double> A = assemble_linearization(J, w);
    const auto& rho = J.data_weight();
    Eigen::VectorXd r(static_cast<Eigen::Index>(rho.size()));
    for (std::size_t f = 0; f < rho.size(); ++f) r[static_cast<Eigen::Index>(f)] = rho[f];
    // Hessian of sum rho (S h)^2 + alpha ||h||^2, hence the factor 2
    Eigen::SparseMatrix<double> M = 2.0 * (A.transpose() * r.asDiagonal() * A);
    if (J.tikhonov().alpha > 0.0) M += (2.0 * J.tikhonov().alpha) * J.h4().gram_matrix();
    // nodes that neither the data nor the penalty sees get a small ridge
    double dmax = 0.0;
    for (int k = 0; k < M.rows(); ++k) dmax = std::max(dmax, M.coeff(k, k));
    require(dmax > 0.0, ErrorKind::precondition, "Gauss-Newton matrix vanishes");
    Eigen::SparseMatrix<double> ridge(M.rows(), M.cols());
    ridge.setIdentity();
    M += (1e-12 * dmax) * ridge;
    M.prune(0.0);
    return M;
}

std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const Functional& J,
                                                    std::span<const double> w) {
    const auto clamped = clamp_mask(J.grid());
    switch (kind) {
        case PreconditionerKind::none: return nullptr;
        case PreconditionerKind::diagonal: {
            const Eigen::SparseMatrix<double> M = gauss_newton_matrix(J, w);
            std::vector<double> d(clamped.size());
            for (std::size_t f = 0; f < d.size(); ++f) d[f] = M.coeff(static_cast<int>(f), static_cast<int>(f));
            return std::make_unique<DiagonalPreconditioner>(std::move(d), clamped);
        }
        case PreconditionerKind::gauss_newton:
            return std::make_unique<MatrixPreconditioner>(gauss_newton_matrix(J, w), clamped);
        case PreconditionerKind::gram: return std::make_unique<MatrixPreconditioner>(J.h4().gram_matrix(), clamped);
    }
    return nullptr;
}

OptimizeResult minimize_gradient_descent(const Functional& J, std::span<const double> w_bc,
                                         std::span<const double> z0, const OptimizerConfig& config,
                                         const Preconditioner* precond) {
    config.validate();
    const DomainGrid& grid = J.grid();
    require_size(w_bc, grid.size(), "lift");
    require_size(z0, grid.size(), "starting point");
    const auto clamped = clamp_mask(grid);
    for (std::size_t i = 0; i < z0.size(); ++i)
        require(!clamped[i] || z0[i] == 0.0, ErrorKind::precondition, "starting point is not clamped");

    std::unique_ptr<Preconditioner> own;
    if (!precond) {
        own = make_preconditioner(config.precondition, J);
        precond = own.get();
    }

    const double R = J.tikhonov().R;
    const H4Norm& h4 = J.h4();
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        if (!config.timing) return 0.0;
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };
    auto compose = [&](const std::vector<double>& z) {
        std::vector<double> w(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) w[i] = w_bc[i] + z[i];
        return w;
    };

    OptimizeResult out;
    out.z.assign(z0.begin(), z0.end());
    project_to_ball(out.z, w_bc, R, h4);
    auto w = compose(out.z);
    double Jk = J.evaluate(w);
    double step = config.step0;
    double last_step = 0.0;

    for (int k = 0;; ++k) {
        auto g = J.gradient(w);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (clamped[i]) g[i] = 0.0;
        double gn = 0.0;
        for (double v : g) gn += v * v;
        gn = std::sqrt(gn);
        out.history.push_back({k, Jk, gn, last_step, elapsed()});
        out.iterations = k;
        out.final_J = Jk;
        out.grad_norm = gn;
        if (gn <= config.grad_tol) {
            out.status = "grad_tol";
            out.converged = true;
            break;
        }
        if (k >= config.max_iter) {
            out.status = "max_iter";
            break;
        }
        if (config.refresh > 0 && k > 0 && k % config.refresh == 0 &&
            (config.precondition == PreconditionerKind::diagonal ||
             config.precondition == PreconditionerKind::gauss_newton)) {
            own = make_preconditioner(config.precondition, J, w);
            precond = own.get();
        }
        const auto p = precond ? precond->solve(g) : g;

        bool accepted = false;
        std::vector<double> z_trial(out.z.size()), w_trial(out.z.size());
        double J_trial = Jk, predicted = 0.0;
        for (int tries = 0; tries < 200; ++tries) {
            for (std::size_t i = 0; i < z_trial.size(); ++i) z_trial[i] = clamped[i] ? 0.0 : out.z[i] - step * p[i];
            for (std::size_t i = 0; i < z_trial.size(); ++i) w_trial[i] = w_bc[i] + z_trial[i];
            double reg = h4.norm_sq(w_trial);
            if (reg > R * R) {
                project_to_ball(z_trial, w_bc, R, h4);
                w_trial = compose(z_trial);
                reg = h4.norm_sq(w_trial);
            }
            J_trial = J.data_term(w_trial) + J.tikhonov().alpha * reg;
            double slope = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) slope += g[i] * (z_trial[i] - out.z[i]);
            predicted = -slope;
            if (std::isfinite(J_trial) && J_trial <= Jk + config.sufficient_decrease * slope && J_trial <= Jk) {
                accepted = true;
                w.swap(w_trial);
                break;
            }
            step *= config.backtrack;
            if (step < 1e-300) break;
        }
        if (!accepted) {
            out.status = "line_search";
            break;
        }
        const double decrease = Jk - J_trial;
        out.z.swap(z_trial);
        Jk = J_trial;
        last_step = step;
        // grow only while the linear model is trustworthy; otherwise steps overshoot and stall
        if (decrease >= 0.75 * predicted) step /= config.backtrack;
        if (decrease <= config.stall_tol * Jk) {
            g = J.gradient(w);
            gn = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (!clamped[i]) gn += g[i] * g[i];
            gn = std::sqrt(gn);
            out.history.push_back({k + 1, Jk, gn, last_step, elapsed()});
            out.iterations = k + 1;
            out.final_J = Jk;
            out.grad_norm = gn;
            out.status = "stalled";
            out.converged = true;
            break;
        }
    }
    out.w = compose(out.z);
    return out;
}

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history, const std::string& header) {
    if (!header.empty()) os << header << '\n';
    os << "iter,J,grad_norm,step,wall_ms\n";
    for (const auto& r : history)
        os << r.iter << ',' << format_double(r.J) << ',' << format_double(r.grad_norm) << ','
           << format_double(r.step) << ',' << format_double(r.wall_ms) << '\n';
}

}  // namespace convexify
