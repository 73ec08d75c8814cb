#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <random>
#include <vector>

#include "convexify/config.hpp"
#include "convexify/functional.hpp"

namespace convexify {

using Report = nlohmann::ordered_json;

/// Grid, coefficients, lift and reference state shared by the checks.
struct VerifyContext {
    DomainGrid grid;
    CoefficientSet coeffs;
    std::vector<double> lift;
    std::vector<double> w_ref;
    CarlemanParams carleman;
    TikhonovParams tikhonov;
};

VerifyContext make_verify_context(const RunConfig& cfg);

/// Sum of a few random separable cosines on the box, scaled to max |f| = amplitude.
std::vector<double> smooth_random_field(const BoxGrid& box, std::mt19937_64& rng, double amplitude = 1.0,
                                        int terms = 4);

/// Exact-algebra checks (machine tolerance).
Report check_expansion_identity(const VerifyContext& ctx, int trials, std::uint64_t seed, double tol = 1e-12);
Report check_gradient_consistency(const VerifyContext& ctx, int trials, std::uint64_t seed,
                                  const std::vector<double>& lambdas);
Report check_bregman_identity(const VerifyContext& ctx, int trials, std::uint64_t seed,
                              const std::vector<double>& lambdas, double tol = 1e-10);

/// Pair w1 = K t^2/2 + small smooth field, h = h(x) clamped and quadratic in x1: Lt(w1) ~ -K t and Q(h) = 2 t a |grad h|^2,
/// so 2 Lt(w1) Q(h) is negative where the (S + Q)^2 term is small.
struct AdversarialPair {
    std::vector<double> w1, w2;
    double gap = 0.0;
    int trial = -1;
};

/// Empirical checks (report and baseline).
Report check_convexity(const VerifyContext& ctx, const std::vector<double>& lambdas, int pairs, std::uint64_t seed,
                       int adversarial_trials, AdversarialPair* adversarial = nullptr);
Report check_carleman_estimate(const VerifyContext& ctx, const std::vector<double>& lambdas, int bank,
                               std::uint64_t seed);
Report check_volterra_inequality(const VerifyContext& ctx, const std::vector<double>& lambdas, int trials,
                                 std::uint64_t seed);

struct LandscapeRow {
    int direction = 0;
    double s = 0.0;
    double J_lambda0 = 0.0;
    double J_lambdastar = 0.0;
};

struct LandscapeResult {
    Report report;
    std::vector<LandscapeRow> rows;
};

/// J(w_ref + s h_i) on s in [-span, span] at lambda = 0 and lambda = lambda_star; slices with a
/// negative second difference beyond rounding are flagged.
LandscapeResult scan_landscape(const VerifyContext& ctx, double lambda_star, int directions, int points, double span,
                               std::uint64_t seed, const AdversarialPair* adversarial = nullptr);

void write_landscape_csv(std::ostream& os, const std::vector<LandscapeRow>& rows, const std::string& header = {});

/// Every check above with the settings of `cfg`.
Report run_verify_suite(const RunConfig& cfg);

}  // namespace convexify
