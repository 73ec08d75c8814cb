#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "convexify/config.hpp"
#include "convexify/forward.hpp"
#include "convexify/optimize.hpp"
#include "convexify/recover.hpp"
#include "convexify/transform.hpp"

namespace convexify {

SyntheticProblem make_problem(const RunConfig& cfg);

struct InversionRun {
    std::string start;  ///< zero | random | given
    std::uint64_t seed = 0;
    OptimizeResult result;
    RecoveredCoefficient recovered;
    ErrorMetrics metrics;
};

struct InversionOutcome {
    TransformedTraces transformed;
    std::vector<double> lift;
    double lift_norm = 0.0;
    bool alpha_admissible = false;
    std::vector<InversionRun> runs;  ///< the configured start first, then random restarts
    std::size_t best = 0;            ///< lowest final J
    double max_pairwise = 0.0;       ///< max relative L2 distance between recovered c of any two runs
};

/// Seed of the k-th random restart derived from the base seed.
std::uint64_t restart_seed(std::uint64_t base, int k);

/// Relative L2 distance ||c1 - c2|| / ||c2|| over G0 with psi < d - eps.
double relative_distance(std::span<const double> c1, std::span<const double> c2, const DomainGrid& grid);

/// Full inversion. `given` is the starting z when optimize.start = given.
InversionOutcome run_inversion(const RunConfig& cfg, const SyntheticProblem& problem,
                               const std::vector<double>* given = nullptr);

nlohmann::ordered_json inversion_report(const RunConfig& cfg, const SyntheticProblem& problem,
                                        const InversionOutcome& outcome);

/// `# config_hash=...,grid_hash=...` line placed at the top of CSV artifacts.
std::string artifact_header(const RunConfig& cfg, const DomainGrid& grid);

struct SweepRow {
    double lambda = 0.0;
    double final_J = 0.0;
    double rel_L2_c = 0.0;
    int iters = 0;
    std::string status;
};

/// Zero-start inversion at every lambda of sweep.lambdas.
std::vector<SweepRow> run_sweep(const RunConfig& cfg, const SyntheticProblem& problem);

}  // namespace convexify
