#include "convexify/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "convexify/error.hpp"
#include "convexify/io.hpp"
#include "convexify/optimize.hpp"
#include "convexify/pipeline.hpp"
#include "convexify/transform.hpp"

namespace convexify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> add(std::span<const double> a, std::span<const double> b, double s = 1.0) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
}

std::vector<double> clamped_field(const DomainGrid& grid, std::mt19937_64& rng, double amplitude) {
    auto z = smooth_random_field(grid.spacetime(), rng, amplitude);
    apply_clamp(z, grid);
    return z;
}

Functional make_functional(const VerifyContext& ctx, double lambda, double alpha) {
    CarlemanParams c = ctx.carleman;
    c.lambda = lambda;
    TikhonovParams t = ctx.tikhonov;
    t.alpha = alpha;
    return Functional(ctx.grid, ctx.coeffs, c, t);
}

/// Least-squares polynomial through (s_k, y_k); coefficients in increasing degree.
Eigen::VectorXd polyfit(const std::vector<double>& s, const std::vector<double>& y, int degree) {
    Eigen::MatrixXd V(static_cast<Eigen::Index>(s.size()), degree + 1);
    Eigen::VectorXd b(static_cast<Eigen::Index>(s.size()));
    for (std::size_t k = 0; k < s.size(); ++k) {
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            V(static_cast<Eigen::Index>(k), d) = p;
            p *= s[k];
        }
        b[static_cast<Eigen::Index>(k)] = y[k];
    }
    return V.colPivHouseholderQr().solve(b);
}

double polyval(const Eigen::VectorXd& c, double s) {
    double v = 0.0;
    for (Eigen::Index d = c.size() - 1; d >= 0; --d) v = v * s + c[d];
    return v;
}

/// Scales z so that ||w_bc + z|| = target (or leaves it when already inside).
void scale_into_ball(std::vector<double>& z, std::span<const double> w_bc, double target, const H4Norm& h4) {
    const double a = h4.norm_sq(z), b = 2.0 * h4.inner(w_bc, z), c = h4.norm_sq(w_bc) - target * target;
    if (!(a > 0.0) || c >= 0.0) {
        for (double& v : z) v = 0.0;
        return;
    }
    const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
    const double s = b >= 0.0 ? -2.0 * c / (b + disc) : (-b + disc) / (2.0 * a);
    for (double& v : z) v *= s;
}

Report params_of(const VerifyContext& ctx) {
    Report p;
    p["grid_hash"] = hex64(ctx.grid.hash());
    p["n_space"] = ctx.grid.n_space();
    p["nodes"] = ctx.grid.size();
    p["nu"] = ctx.carleman.nu;
    p["normalization"] = to_string(ctx.carleman.normalization);
    p["alpha"] = ctx.tikhonov.alpha;
    p["R"] = ctx.tikhonov.R;
    return p;
}

double finite_or_null(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

VerifyContext make_verify_context(const RunConfig& cfg) {
    SyntheticProblem p = make_problem(cfg);
    const auto transformed = derive_transformed_traces(p.traces, cfg.smoothing);
    auto lift = build_boundary_lift(transformed, p.grid, cfg.lift_cutoff);
    return VerifyContext{p.grid, p.coeffs, std::move(lift), p.w_true, cfg.carleman, cfg.tikhonov};
}

std::vector<double> smooth_random_field(const BoxGrid& box, std::mt19937_64& rng, double amplitude, int terms) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int dims = box.dims();
    std::vector<double> out(box.size(), 0.0);
    for (int k = 0; k < terms; ++k) {
        const double c = 2.0 * unif(rng) - 1.0;
        std::vector<double> omega(static_cast<std::size_t>(dims)), phase(static_cast<std::size_t>(dims));
        for (int a = 0; a < dims; ++a) {
            const double L = box.axis(a).hi() - box.axis(a).lo();
            omega[static_cast<std::size_t>(a)] = 3.0 * std::numbers::pi * unif(rng) / L;
            phase[static_cast<std::size_t>(a)] = 2.0 * std::numbers::pi * unif(rng);
        }
        for (std::size_t f = 0; f < out.size(); ++f) {
            double p = c;
            for (int a = 0; a < dims; ++a)
                p *= std::cos(omega[static_cast<std::size_t>(a)] * (box.coordinate(f, a) - box.axis(a).lo()) +
                              phase[static_cast<std::size_t>(a)]);
            out[f] += p;
        }
    }
    const double m = max_abs(out);
    if (m > 0.0)
        for (double& v : out) v *= amplitude / m;
    return out;
}

Report check_expansion_identity(const VerifyContext& ctx, int trials, std::uint64_t seed, double tol) {
    const LtildeOperator L(ctx.grid, ctx.coeffs);
    std::mt19937_64 rng(seed);
    Report r;
    r["name"] = "expansion_identity";
    r["kind"] = "exact";
    r["params"] = params_of(ctx);
    r["params"]["trials"] = trials;
    r["params"]["seed"] = seed;
    r["params"]["tol"] = tol;
    double worst = 0.0, worst_scaled = 0.0, zero_h = 0.0;
    Report failures = Report::array();
    auto residual = [&](const std::vector<double>& w1, const std::vector<double>& h, std::size_t* at) {
        const auto lhs = L.apply(add(w1, h));
        const auto l1 = L.apply(w1);
        const auto S = L.linear(h, w1);
        const auto Q = L.quadratic(h);
        const double scale = std::max({max_abs(lhs), max_abs(l1), max_abs(S), max_abs(Q), 1e-300});
        double m = 0.0;
        for (std::size_t f = 0; f < lhs.size(); ++f) {
            const double e = std::abs(lhs[f] - l1[f] - S[f] - Q[f]) / scale;
            if (e > m) {
                m = e;
                if (at) *at = f;
            }
        }
        return m;
    };
    for (int t = 0; t < trials; ++t) {
        const auto w1 = smooth_random_field(ctx.grid.spacetime(), rng);
        const auto h = smooth_random_field(ctx.grid.spacetime(), rng);
        std::size_t node = 0;
        const double e = residual(w1, h, &node);
        std::vector<double> h10(h);
        for (double& v : h10) v *= 10.0;
        const double e10 = residual(w1, h10, nullptr);
        if (t == 0) zero_h = residual(w1, std::vector<double>(h.size(), 0.0), nullptr);
        worst = std::max(worst, e);
        worst_scaled = std::max(worst_scaled, e10);
        if (e > tol || e10 > tol) failures.push_back({{"trial", t}, {"node", node}, {"residual", e}, {"residual_10h", e10}});
    }
    r["max_residual"] = worst;
    r["max_residual_10h"] = worst_scaled;
    r["residual_h_zero"] = zero_h;
    r["failures"] = failures;
    r["pass"] = failures.empty() && zero_h == 0.0;
    return r;
}

Report check_gradient_consistency(const VerifyContext& ctx, int trials, std::uint64_t seed,
                                  const std::vector<double>& lambdas) {
    std::mt19937_64 rng(seed);
    const double s_fd = 1e-4;
    const std::vector<double> s_fit{-1.0, -0.6, -0.2, 0.2, 0.6, 1.0};
    const double s_check = 0.4;
    Report r;
    r["name"] = "gradient_consistency";
    r["kind"] = "exact";
    r["params"] = params_of(ctx);
    r["params"]["trials"] = trials;
    r["params"]["seed"] = seed;
    r["params"]["fd_step"] = s_fd;
    double worst_fd = 0.0, worst_fit = 0.0, worst_pred = 0.0, worst_slope = 0.0, worst_alpha_hi = 0.0;
    Report failures = Report::array();
    std::vector<Functional> Js;
    for (double l : lambdas) Js.push_back(make_functional(ctx, l, ctx.tikhonov.alpha));
    for (int t = 0; t < trials; ++t) {
        const Functional& J = Js[static_cast<std::size_t>(t) % Js.size()];
        const auto w = smooth_random_field(ctx.grid.spacetime(), rng, 0.5);
        const auto h = clamped_field(ctx.grid, rng, 0.5);
        const auto g = J.gradient(w);
        const double gd = dot(g, h);
        const double fd = (J.evaluate(add(w, h, s_fd)) - J.evaluate(add(w, h, -s_fd))) / (2.0 * s_fd);
        const double e_fd = std::abs(fd - gd) / std::max(std::abs(gd), 1e-300);

        std::vector<double> y;
        for (double s : s_fit) y.push_back(J.evaluate(add(w, h, s)));
        const auto c = polyfit(s_fit, y, 4);
        const double ymax = max_abs(y);
        double e_fit = 0.0;
        for (std::size_t k = 0; k < s_fit.size(); ++k) e_fit = std::max(e_fit, std::abs(polyval(c, s_fit[k]) - y[k]));
        e_fit /= ymax;
        const double y_check = J.evaluate(add(w, h, s_check));
        const double e_pred = std::abs(polyval(c, s_check) - y_check) / ymax;
        const double e_slope = std::abs(c[1] - gd) / std::max(std::abs(gd), 1e-300);

        worst_fd = std::max(worst_fd, e_fd);
        worst_fit = std::max(worst_fit, e_fit);
        worst_pred = std::max(worst_pred, e_pred);
        worst_slope = std::max(worst_slope, e_slope);
        if (e_fd > 1e-6 || e_fit > 1e-9 || e_pred > 1e-9 || e_slope > 1e-8)
            failures.push_back({{"trial", t},
                                {"lambda", J.carleman().lambda},
                                {"fd_rel", e_fd},
                                {"fit_rel", e_fit},
                                {"predict_rel", e_pred},
                                {"slope_rel", e_slope}});

        // Regularisation alone is a quadratic form: cubic and quartic coefficients vanish.
        std::vector<double> ya;
        for (double s : s_fit) ya.push_back(J.regularization(add(w, h, s)));
        const auto ca = polyfit(s_fit, ya, 4);
        const double ya_max = std::max(max_abs(ya), 1e-300);
        worst_alpha_hi = std::max({worst_alpha_hi, std::abs(ca[3]) / ya_max, std::abs(ca[4]) / ya_max});
    }
    const auto zero = std::vector<double>(ctx.grid.size(), 0.0);
    const double g0 = max_abs(Js.front().gradient(zero));
    r["max_fd_rel"] = worst_fd;
    r["max_quartic_fit_rel"] = worst_fit;
    r["max_quartic_predict_rel"] = worst_pred;
    r["max_quartic_slope_rel"] = worst_slope;
    r["alpha_only_max_high_coeff_rel"] = worst_alpha_hi;
    r["gradient_at_zero_max_abs"] = g0;
    r["failures"] = failures;
    r["pass"] = failures.empty() && g0 == 0.0 && worst_alpha_hi <= 1e-10;
    return r;
}

Report check_bregman_identity(const VerifyContext& ctx, int trials, std::uint64_t seed,
                              const std::vector<double>& lambdas, double tol) {
    std::mt19937_64 rng(seed);
    Report r;
    r["name"] = "bregman_identity";
    r["kind"] = "exact";
    r["params"] = params_of(ctx);
    r["params"]["trials"] = trials;
    r["params"]["seed"] = seed;
    r["params"]["tol"] = tol;
    std::vector<Functional> Js;
    for (double l : lambdas) Js.push_back(make_functional(ctx, l, ctx.tikhonov.alpha));
    double worst = 0.0;
    Report failures = Report::array();
    BregmanGap last;
    for (int t = 0; t < trials; ++t) {
        const Functional& J = Js[static_cast<std::size_t>(t) % Js.size()];
        const auto w1 = add(ctx.lift, clamped_field(ctx.grid, rng, 0.5));
        const auto w2 = add(w1, clamped_field(ctx.grid, rng, 0.5));
        last = bregman_gap(w1, w2, J);
        const double e =
            std::abs(last.gap - last.identity_rhs) / std::max({std::abs(last.gap), std::abs(last.identity_rhs), 1e-300});
        worst = std::max(worst, e);
        if (e > tol)
            failures.push_back({{"trial", t}, {"lambda", J.carleman().lambda}, {"gap", last.gap},
                                {"identity_rhs", last.identity_rhs}, {"rel", e}});
    }
    const auto w = add(ctx.lift, clamped_field(ctx.grid, rng, 0.5));
    const double self_gap = bregman_gap(w, w, Js.front()).gap;
    r["max_rel_diff"] = worst;
    r["gap_identical_pair"] = self_gap;
    r["q_derived"] = last.q_derived;
    r["q_typeset"] = last.q_typeset;
    r["failures"] = failures;
    r["pass"] = failures.empty() && self_gap == 0.0;
    return r;
}

Report check_convexity(const VerifyContext& ctx, const std::vector<double>& lambdas, int pairs, std::uint64_t seed,
                       int adversarial_trials, AdversarialPair* adversarial) {
    const DomainGrid& grid = ctx.grid;
    const H4Norm h4(grid.spacetime());
    const double R = ctx.tikhonov.R;
    require(h4.norm(ctx.lift) < R, ErrorKind::infeasible, "boundary lift lies outside B(R)");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    struct Pair {
        std::vector<double> w1, w2;
    };
    std::vector<Pair> sample;
    for (int p = 0; p < pairs; ++p) {
        Pair pr;
        for (auto* w : {&pr.w1, &pr.w2}) {
            auto z = clamped_field(grid, rng, 1.0);
            scale_into_ball(z, ctx.lift, (0.1 + 0.8 * unif(rng)) * R, h4);
            *w = add(ctx.lift, z);
        }
        sample.push_back(std::move(pr));
    }

    Report r;
    r["name"] = "convexity";
    r["kind"] = "empirical";
    r["params"] = params_of(ctx);
    r["params"]["pairs"] = pairs;
    r["params"]["seed"] = seed;
    r["params"]["lambdas"] = lambdas;
    Report scan = Report::array();
    double lambda_star = -1.0;
    for (double lambda : lambdas) {
        const Functional J = make_functional(ctx, lambda, ctx.tikhonov.alpha);
        double min_margin = kInf, min_margin_identity = kInf, C_hat = kInf;
        int excluded = 0;
        for (const auto& pr : sample) {
            const auto b = bregman_gap(pr.w1, pr.w2, J);
            if (!(b.h4_sq > 0.0)) {
                ++excluded;
                continue;
            }
            const double margin = b.gap - b.alpha_term;
            min_margin = std::min(min_margin, margin);
            min_margin_identity = std::min(min_margin_identity, b.identity_rhs - b.alpha_term);
            if (b.interior_term > 0.0) C_hat = std::min(C_hat, margin / b.interior_term);
        }
        const bool convex = min_margin >= 0.0;
        if (convex && lambda_star < 0.0) lambda_star = lambda;
        scan.push_back({{"lambda", lambda},
                        {"min_margin", finite_or_null(min_margin)},
                        {"min_margin_identity", finite_or_null(min_margin_identity)},
                        {"C_hat", finite_or_null(C_hat)},
                        {"excluded_pairs", excluded},
                        {"convex", convex}});
    }
    r["scan"] = scan;
    if (lambda_star >= 0.0)
        r["lambda_star"] = lambda_star;
    else
        r["lambda_star"] = nullptr;

    // Adversarial search at lambda = 0, alpha = 0.
    const Functional J0 = make_functional(ctx, 0.0, 0.0);
    const auto space_mask = clamp_mask(grid);
    AdversarialPair best;
    best.gap = kInf;
    const double x1_clamp = grid.spacetime().axis(0).node(1);
    const double x1_span = grid.spacetime().axis(0).hi() - x1_clamp;
    for (int k = 0; k < adversarial_trials; ++k) {
        const double K = std::pow(10.0, 1.0 + 3.0 * unif(rng));
        const double A = std::pow(10.0, -2.0 + 2.0 * unif(rng));
        auto w1 = smooth_random_field(grid.spacetime(), rng, 0.01);
        for (std::size_t f = 0; f < w1.size(); ++f) {
            const double t = grid.point(f).t;
            w1[f] += 0.5 * K * t * t;
        }
        // h = A (x1 - x1_clamp)^2 / L (1 + 0.1 m(x)): no kink at the clamped layer and L0 h stays O(A).
        const auto hx = smooth_random_field(grid.space(), rng, 0.1, 2);
        std::vector<double> h(grid.size());
        for (std::size_t f = 0; f < h.size(); ++f) {
            const double x1 = grid.point(f).x[0];
            h[f] = space_mask[f] ? 0.0 : A * (x1 - x1_clamp) * (x1 - x1_clamp) / x1_span * (1.0 + hx[grid.space_index(f)]);
        }
        const auto w2 = add(w1, h);
        const auto b = bregman_gap(w1, w2, J0);
        if (b.gap < best.gap) best = AdversarialPair{w1, w2, b.gap, k};
    }
    const bool found = best.trial >= 0 && best.gap < 0.0;
    r["adversarial"] = {{"trials", adversarial_trials},
                        {"min_gap", finite_or_null(best.gap)},
                        {"trial", best.trial},
                        {"found_negative_gap", found}};
    r["pass"] = lambda_star >= 0.0 && (adversarial_trials == 0 || found);
    if (adversarial) *adversarial = std::move(best);
    return r;
}

namespace {

/// Smooth bump supported in G: exp(-sigma / (x1 (d - psi))), normalised to max 1.
std::vector<double> bump_field(const DomainGrid& grid) {
    const double d = grid.spec().d;
    std::vector<double> m(grid.size(), 0.0);
    double mmax = 0.0;
    for (std::size_t f = 0; f < grid.size(); ++f) {
        const double x1 = grid.point(f).x[0];
        const double g = d - grid.psi()[f];
        if (x1 > 0.0 && g > 0.0) m[f] = x1 * g;
        mmax = std::max(mmax, m[f]);
    }
    const double sigma = 0.25 * mmax;
    std::vector<double> b(grid.size(), 0.0);
    for (std::size_t f = 0; f < grid.size(); ++f)
        if (m[f] > 0.0) b[f] = std::exp(sigma / mmax - sigma / m[f]);
    return b;
}

double weighted_integral(std::span<const double> v2, std::span<const double> weight, std::span<const double> q) {
    double s = 0.0;
    for (std::size_t f = 0; f < v2.size(); ++f) s += q[f] * weight[f] * v2[f];
    return s;
}

std::vector<std::vector<double>> spatial_gradient(const DomainGrid& grid, const DifferenceOps& ops,
                                                  std::span<const double> u) {
    std::vector<std::vector<double>> g;
    for (int k = 0; k < grid.n_space(); ++k) g.push_back(ops.first(k, u));
    return g;
}

}  // namespace

Report check_carleman_estimate(const VerifyContext& ctx, const std::vector<double>& lambdas, int bank,
                               std::uint64_t seed) {
    const DomainGrid& grid = ctx.grid;
    const BoxGrid& box = grid.spacetime();
    const LtildeOperator L(grid, ctx.coeffs);
    const DifferenceOps& ops = L.elliptic().ops();
    const auto q = grid.box_quadrature();
    const auto bump = bump_field(grid);

    // Bank: the bare bump, then bump times random quadratics in (x, t).
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<double>> fields;
    const int dims = box.dims();
    for (int k = 0; k < bank; ++k) {
        std::vector<double> u(bump);
        if (k > 0) {
            std::vector<double> lin(static_cast<std::size_t>(dims)), quad(static_cast<std::size_t>(dims * dims));
            const double c0 = unif(rng);
            for (double& v : lin) v = unif(rng);
            for (double& v : quad) v = unif(rng);
            for (std::size_t f = 0; f < u.size(); ++f) {
                std::vector<double> y(static_cast<std::size_t>(dims));
                for (int a = 0; a < dims; ++a) {
                    const Axis& ax = box.axis(a);
                    y[static_cast<std::size_t>(a)] = (box.coordinate(f, a) - 0.5 * (ax.lo() + ax.hi())) / (ax.hi() - ax.lo());
                }
                double p = c0;
                for (int a = 0; a < dims; ++a) {
                    p += lin[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(a)];
                    for (int b = 0; b < dims; ++b)
                        p += quad[static_cast<std::size_t>(a * dims + b)] * y[static_cast<std::size_t>(a)] *
                             y[static_cast<std::size_t>(b)];
                }
                u[f] *= p;
            }
        }
        fields.push_back(std::move(u));
    }

    // Assembled P0 = Dt - sum a_ii D_ii - sum_{i<j} (a_ij + a_ji) D_i D_j.
    const int n = grid.n_space();
    const int N = static_cast<int>(box.size());
    auto diag = [&](const std::vector<double>& coef) {
        Eigen::SparseMatrix<double> D(N, N);
        std::vector<Eigen::Triplet<double>> trip;
        for (int f = 0; f < N; ++f) trip.emplace_back(f, f, coef[static_cast<std::size_t>(f) % grid.space_size()]);
        D.setFromTriplets(trip.begin(), trip.end());
        return D;
    };
    Eigen::SparseMatrix<double> P0 = assemble_axis(box, grid.time_axis(), ops.first_stencil(grid.time_axis()));
    for (int i = 0; i < n; ++i) {
        P0 -= diag(ctx.coeffs.a_at(i, i)) * assemble_axis(box, i, ops.second_stencil(i));
        for (int j = i + 1; j < n; ++j) {
            std::vector<double> s(ctx.coeffs.a_at(i, j));
            for (std::size_t k = 0; k < s.size(); ++k) s[k] += ctx.coeffs.a_at(j, i)[k];
            P0 -= diag(s) * (assemble_axis(box, i, ops.first_stencil(i)) * assemble_axis(box, j, ops.first_stencil(j)));
        }
    }

    double worst_p0 = 0.0;
    std::vector<std::vector<double>> P0u, grad2, u2;
    for (const auto& u : fields) {
        const auto p = L.principal(u);
        Eigen::Map<const Eigen::VectorXd> uv(u.data(), N);
        const Eigen::VectorXd pa = P0 * uv;
        double diff = 0.0;
        for (int f = 0; f < N; ++f) diff = std::max(diff, std::abs(pa[f] - p[static_cast<std::size_t>(f)]));
        worst_p0 = std::max(worst_p0, diff / std::max(max_abs(p), 1e-300));
        std::vector<double> p2(p.size()), g2(u.size(), 0.0), uu(u.size());
        for (std::size_t f = 0; f < p.size(); ++f) p2[f] = p[f] * p[f];
        for (const auto& gk : spatial_gradient(grid, ops, u))
            for (std::size_t f = 0; f < u.size(); ++f) g2[f] += gk[f] * gk[f];
        for (std::size_t f = 0; f < u.size(); ++f) uu[f] = u[f] * u[f];
        P0u.push_back(std::move(p2));
        grad2.push_back(std::move(g2));
        u2.push_back(std::move(uu));
    }

    Report r;
    r["name"] = "carleman_estimate";
    r["kind"] = "empirical";
    r["params"] = params_of(ctx);
    r["params"]["bank"] = bank;
    r["params"]["seed"] = seed;
    r["params"]["lambdas"] = lambdas;
    Report scan = Report::array();
    bool positive = true;
    std::vector<double> chat;
    for (double lambda : lambdas) {
        CarlemanParams c = ctx.carleman;
        c.lambda = lambda;
        const auto phi2 = carleman_weight_field(grid, c);
        double cmin = kInf, bump_ratio = 0.0;
        int excluded = 0;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const double num = weighted_integral(P0u[k], phi2, q);
            const double den =
                lambda * weighted_integral(grad2[k], phi2, q) + lambda * lambda * lambda * weighted_integral(u2[k], phi2, q);
            if (!(den > 0.0)) {
                ++excluded;
                continue;
            }
            const double ratio = num / den;
            if (k == 0) bump_ratio = ratio;
            cmin = std::min(cmin, ratio);
        }
        positive = positive && std::isfinite(cmin) && cmin > 0.0;
        chat.push_back(cmin);
        scan.push_back({{"lambda", lambda}, {"C_hat", finite_or_null(cmin)}, {"bump_ratio", bump_ratio},
                        {"excluded", excluded}});
    }
    bool decaying = chat.size() >= 2;
    for (std::size_t k = 1; k < chat.size(); ++k) decaying = decaying && chat[k] < chat[k - 1];
    decaying = decaying && chat.back() < 1e-3 * chat.front();
    r["scan"] = scan;
    r["P0_crosscheck_max_rel"] = worst_p0;
    r["P0_crosscheck_pass"] = worst_p0 <= 1e-12;
    r["monotone_decay_to_zero"] = decaying;
    r["pass"] = positive && !decaying && worst_p0 <= 1e-12;
    return r;
}

Report check_volterra_inequality(const VerifyContext& ctx, const std::vector<double>& lambdas, int trials,
                                 std::uint64_t seed) {
    const DomainGrid& grid = ctx.grid;
    const DifferenceOps ops(grid.spacetime());
    const auto& q = grid.quadrature();
    std::mt19937_64 rng(seed);

    struct Field {
        std::vector<double> v2, g2;
    };
    std::vector<Field> fields;
    for (int k = 0; k < trials; ++k) {
        auto h = smooth_random_field(grid.spacetime(), rng);
        if (k % 2 == 1)  // t-antisymmetric variant
            for (std::size_t f = 0; f < h.size(); ++f) h[f] *= grid.point(f).t;
        std::vector<double> g(h.size(), 0.0);
        for (const auto& gk : spatial_gradient(grid, ops, h))
            for (std::size_t f = 0; f < h.size(); ++f) g[f] += gk[f] * gk[f];
        Field fl;
        fl.g2 = g;
        for (double& v : g) v = std::sqrt(v);
        fl.v2 = volterra_integrate(grid.spacetime(), g);
        for (double& v : fl.v2) v *= v;
        fields.push_back(std::move(fl));
    }

    Report r;
    r["name"] = "volterra_inequality";
    r["kind"] = "empirical";
    r["params"] = params_of(ctx);
    r["params"]["trials"] = trials;
    r["params"]["seed"] = seed;
    r["params"]["lambdas"] = lambdas;
    Report scan = Report::array();
    double overall = 0.0;
    for (double lambda : lambdas) {
        CarlemanParams c = ctx.carleman;
        c.lambda = lambda;
        const auto phi2 = carleman_weight_field(grid, c);
        double rmax = 0.0, umax = 0.0;
        int excluded = 0;
        for (const auto& fl : fields) {
            const double den = weighted_integral(fl.g2, phi2, q);
            if (!(den > 0.0)) {
                ++excluded;
                continue;
            }
            const double unscaled = weighted_integral(fl.v2, phi2, q) / den;
            umax = std::max(umax, unscaled);
            rmax = std::max(rmax, lambda * unscaled);
        }
        overall = std::max(overall, rmax);
        scan.push_back({{"lambda", lambda}, {"max_ratio", rmax}, {"max_unscaled", umax}, {"excluded", excluded}});
    }
    r["scan"] = scan;
    r["max_ratio_over_scan"] = overall;
    r["pass"] = std::isfinite(overall);
    return r;
}

LandscapeResult scan_landscape(const VerifyContext& ctx, double lambda_star, int directions, int points, double span,
                               std::uint64_t seed, const AdversarialPair* adversarial) {
    require(points >= 3, ErrorKind::configuration, "landscape.points must be >= 3");
    const Functional J0 = make_functional(ctx, 0.0, ctx.tikhonov.alpha);
    const Functional Js = make_functional(ctx, lambda_star, ctx.tikhonov.alpha);
    std::mt19937_64 rng(seed);
    LandscapeResult out;

    auto count_flags = [](const std::vector<double>& y) {
        double ymax = 0.0;
        for (double v : y) ymax = std::max(ymax, std::abs(v));
        int flags = 0;
        for (std::size_t k = 1; k + 1 < y.size(); ++k)
            if (y[k + 1] - 2.0 * y[k] + y[k - 1] < -1e-10 * ymax) ++flags;
        return flags;
    };

    int flags0 = 0, flags_star = 0;
    Report slices = Report::array();
    for (int d = 0; d < directions; ++d) {
        const auto h = clamped_field(ctx.grid, rng, 1.0);
        std::vector<double> y0, ys;
        for (int k = 0; k < points; ++k) {
            const double s = -span + 2.0 * span * k / (points - 1);
            const auto w = add(ctx.w_ref, h, s);
            y0.push_back(J0.evaluate(w));
            ys.push_back(Js.evaluate(w));
            out.rows.push_back({d, s, y0.back(), ys.back()});
        }
        const int f0 = count_flags(y0), fs = count_flags(ys);
        flags0 += f0 > 0;
        flags_star += fs > 0;
        slices.push_back({{"direction", d}, {"flags_lambda0", f0}, {"flags_lambdastar", fs}});
    }
    out.report["name"] = "landscape";
    out.report["kind"] = "empirical";
    out.report["params"] = params_of(ctx);
    out.report["params"]["lambda_star"] = lambda_star;
    out.report["params"]["directions"] = directions;
    out.report["params"]["points"] = points;
    out.report["params"]["span"] = span;
    out.report["params"]["seed"] = seed;
    out.report["slices"] = slices;
    out.report["flagged_slices_lambda0"] = flags0;
    out.report["flagged_slices_lambdastar"] = flags_star;

    if (adversarial && adversarial->trial >= 0) {
        // The adversarial pair at lambda = 0, alpha = 0, sampled on s in [0, 1].
        const Functional Ja = make_functional(ctx, 0.0, 0.0);
        const auto h = add(adversarial->w2, adversarial->w1, -1.0);
        std::vector<double> y;
        for (int k = 0; k < points; ++k) y.push_back(Ja.evaluate(add(adversarial->w1, h, static_cast<double>(k) / (points - 1))));
        const int flags = count_flags(y);
        out.report["adversarial_flags_lambda0_alpha0"] = flags;
        out.report["pass"] = flags_star == 0 && flags > 0;
    } else {
        out.report["pass"] = flags_star == 0;
    }
    return out;
}

void write_landscape_csv(std::ostream& os, const std::vector<LandscapeRow>& rows, const std::string& header) {
    if (!header.empty()) os << header << '\n';
    os << "direction_id,s,J_lambda0,J_lambdastar\n";
    for (const auto& r : rows)
        os << r.direction << ',' << format_double(r.s) << ',' << format_double(r.J_lambda0) << ','
           << format_double(r.J_lambdastar) << '\n';
}

Report run_verify_suite(const RunConfig& cfg) {
    const VerifyContext ctx = make_verify_context(cfg);
    const auto& v = cfg.verify;
    Report out;
    out["config_hash"] = hex64(cfg.hash());
    out["grid_hash"] = hex64(ctx.grid.hash());
    Report checks = Report::array();
    checks.push_back(check_expansion_identity(ctx, v.trials, v.seed));
    checks.push_back(check_gradient_consistency(ctx, v.trials, v.seed + 1, v.lambdas));
    checks.push_back(check_bregman_identity(ctx, v.trials, v.seed + 2, v.lambdas));
    AdversarialPair adv;
    checks.push_back(check_convexity(ctx, v.lambdas, v.pairs, v.seed + 3, v.adversarial_trials, &adv));
    checks.push_back(check_carleman_estimate(ctx, v.carleman_lambdas, v.bank, v.seed + 4));
    checks.push_back(check_volterra_inequality(ctx, v.lambdas, v.trials, v.seed + 5));
    double lambda_star = cfg.landscape.lambda_star;
    if (lambda_star < 0.0) {
        const auto& ls = checks[3]["lambda_star"];
        lambda_star = ls.is_null() ? v.lambdas.back() : ls.get<double>();
    }
    checks.push_back(scan_landscape(ctx, lambda_star, cfg.landscape.directions, cfg.landscape.points,
                                    cfg.landscape.span, v.seed + 6, &adv)
                         .report);
    bool exact = true, empirical = true;
    for (const auto& c : checks) {
        if (c["kind"] == "exact")
            exact = exact && c["pass"].get<bool>();
        else
            empirical = empirical && c["pass"].get<bool>();
    }
    out["checks"] = checks;
    out["exact_pass"] = exact;
    out["empirical_pass"] = empirical;
    return out;
}

}  // namespace convexify
