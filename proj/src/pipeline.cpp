#include "convexify/pipeline.hpp"

#include <cmath>

#include "convexify/error.hpp"
#include "convexify/io.hpp"
#include "convexify/parallel.hpp"

namespace convexify {

SyntheticProblem make_problem(const RunConfig& cfg) {
    return generate_problem(cfg.grid, cfg.model, cfg.forward, cfg.delta, cfg.seed);
}

std::uint64_t restart_seed(std::uint64_t base, int k) {
    // splitmix64 step, so neighbouring restarts get unrelated streams
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(k + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double relative_distance(std::span<const double> c1, std::span<const double> c2, const DomainGrid& grid) {
    const auto q = grid.space().trapezoid_weights();
    const auto base = static_cast<std::size_t>(grid.t_zero_index()) * grid.space_size();
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < grid.space_size(); ++s) {
        if (!grid.inside_G_eps()[base + s]) continue;
        const double e = c1[s] - c2[s];
        num += q[s] * e * e;
        den += q[s] * c2[s] * c2[s];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

InversionOutcome run_inversion(const RunConfig& cfg, const SyntheticProblem& problem,
                               const std::vector<double>* given) {
    const DomainGrid& grid = problem.grid;
    InversionOutcome out;
    out.transformed = derive_transformed_traces(problem.traces, cfg.smoothing);
    out.lift = build_boundary_lift(out.transformed, grid, cfg.lift_cutoff);

    const Functional J(grid, problem.coeffs, cfg.carleman, cfg.tikhonov);
    out.alpha_admissible = J.alpha_admissible();
    out.lift_norm = J.h4().norm(out.lift);
    if (out.lift_norm > cfg.tikhonov.R)
        fail(ErrorKind::infeasible, "boundary lift has H4 norm " + format_double(out.lift_norm) + " > R = " +
                                        format_double(cfg.tikhonov.R) + "; raise tikhonov.R");

    const auto precond = make_preconditioner(cfg.optimize.precondition, J);

    struct Start {
        std::string mode;
        std::uint64_t seed;
        std::vector<double> z;
    };
    std::vector<Start> starts;
    switch (cfg.optimize.start) {
        case StartMode::zero: starts.push_back({"zero", 0, std::vector<double>(grid.size(), 0.0)}); break;
        case StartMode::random: {
            const auto s = restart_seed(cfg.seed, -1);
            starts.push_back({"random", s, random_start(grid, out.lift, cfg.tikhonov.R, J.h4(), s)});
            break;
        }
        case StartMode::given:
            require(given != nullptr && given->size() == grid.size(), ErrorKind::configuration,
                    "optimize.start = given needs a starting field of the grid's size");
            starts.push_back({"given", 0, *given});
            apply_clamp(starts.back().z, grid);
            break;
    }
    for (int k = 0; k < cfg.optimize.restarts; ++k) {
        const auto s = restart_seed(cfg.seed, k);
        starts.push_back({"random", s, random_start(grid, out.lift, cfg.tikhonov.R, J.h4(), s)});
    }

    out.runs.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        InversionRun& run = out.runs[i];
        run.start = starts[i].mode;
        run.seed = starts[i].seed;
        run.result = minimize_gradient_descent(J, out.lift, starts[i].z, cfg.optimize, precond.get());
        run.recovered = recover_coefficient(run.result.w, problem.coeffs, grid);
        run.metrics = error_metrics(run.recovered.c, problem.coeffs.c_true, grid);
    });

    for (std::size_t i = 1; i < out.runs.size(); ++i)
        if (out.runs[i].result.final_J < out.runs[out.best].result.final_J) out.best = i;
    for (std::size_t i = 0; i < out.runs.size(); ++i)
        for (std::size_t j = 0; j < out.runs.size(); ++j)
            if (i != j)
                out.max_pairwise = std::max(
                    out.max_pairwise, relative_distance(out.runs[i].recovered.c, out.runs[j].recovered.c, grid));
    return out;
}

std::string artifact_header(const RunConfig& cfg, const DomainGrid& grid) {
    return "# config_hash=" + hex64(cfg.hash()) + ",grid_hash=" + hex64(grid.hash());
}

nlohmann::ordered_json inversion_report(const RunConfig& cfg, const SyntheticProblem& problem,
                                        const InversionOutcome& outcome) {
    using nlohmann::ordered_json;
    const auto& best = outcome.runs[outcome.best];
    ordered_json j;
    j["config_hash"] = hex64(cfg.hash());
    j["grid_hash"] = hex64(problem.grid.hash());
    j["lambda"] = cfg.carleman.lambda;
    j["nu"] = cfg.carleman.nu;
    j["normalization"] = to_string(cfg.carleman.normalization);
    j["alpha"] = cfg.tikhonov.alpha;
    j["R"] = cfg.tikhonov.R;
    j["alpha_admissible"] = outcome.alpha_admissible;
    if (!outcome.alpha_admissible)
        j["warnings"].push_back("alpha outside (exp(-lambda/(2 d^nu)), 1)");
    j["delta"] = cfg.delta;
    j["seed"] = cfg.seed;
    j["lift_h4_norm"] = outcome.lift_norm;
    j["rel_L2_c"] = best.metrics.rel_L2;
    j["rel_Linf_c"] = best.metrics.rel_Linf;
    j["metrics_absolute"] = best.metrics.absolute;
    j["full_rel_L2_c"] = best.metrics.full_rel_L2;
    j["full_rel_Linf_c"] = best.metrics.full_rel_Linf;
    j["final_J"] = best.result.final_J;
    j["iters"] = best.result.iterations;
    j["status"] = best.result.status;
    j["best_run"] = outcome.best;
    j["max_pairwise_rel_L2"] = outcome.max_pairwise;
    ordered_json runs = ordered_json::array();
    for (const auto& r : outcome.runs) {
        ordered_json e;
        e["start"] = r.start;
        e["seed"] = r.seed;
        e["final_J"] = r.result.final_J;
        e["grad_norm"] = r.result.grad_norm;
        e["iters"] = r.result.iterations;
        e["status"] = r.result.status;
        e["rel_L2_c"] = r.metrics.rel_L2;
        e["rel_Linf_c"] = r.metrics.rel_Linf;
        runs.push_back(e);
    }
    j["runs"] = runs;
    return j;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, const SyntheticProblem& problem) {
    std::vector<SweepRow> rows;
    for (double lambda : cfg.sweep_lambdas) {
        RunConfig c = cfg;
        c.carleman.lambda = lambda;
        c.optimize.restarts = 0;
        c.optimize.start = StartMode::zero;
        const auto o = run_inversion(c, problem);
        const auto& r = o.runs[0];
        rows.push_back({lambda, r.result.final_J, r.metrics.rel_L2, r.result.iterations, r.result.status});
    }
    return rows;
}

}  // namespace convexify
