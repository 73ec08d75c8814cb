#include <doctest.h>

#include <cmath>
#include <sstream>

#include "convexify/config.hpp"
#include "convexify/error.hpp"
#include "convexify/verify.hpp"

using namespace convexify;

namespace {

RunConfig small_config() {
    return parse_config(
        "grid.n_x1 = 21\n"
        "grid.n_t = 21\n"
        "verify.trials = 6\n"
        "verify.pairs = 20\n"
        "verify.bank = 6\n"
        "verify.adversarial_trials = 100\n");
}

const Report& find(const Report& checks, const std::string& name) {
    for (const auto& c : checks)
        if (c["name"] == name) return c;
    FAIL("missing check " << name);
    throw 0;
}

}  // namespace

TEST_CASE("config parsing") {
    CHECK(parse_config("").grid.n_x1 == 41);
    CHECK(parse_config("# comment\n\ncarleman.lambda = 4\n").carleman.lambda == 4.0);
    CHECK_THROWS_AS(parse_config("bogus.key = 1"), Error);
    CHECK_THROWS_AS(parse_config("grid.n_x1 = 11\ngrid.n_x1 = 21"), Error);
    CHECK_THROWS_AS(parse_config("grid.n_x1 = many"), Error);
    CHECK_THROWS_AS(parse_config("noise.delta = 1.5"), Error);
    CHECK(parse_config("").hash() == parse_config("").hash());
    CHECK(parse_config("").hash() != parse_config("carleman.lambda = 3").hash());
    // the canonical listing round-trips
    const auto a = parse_config("tikhonov.alpha = 0.01\nverify.lambdas = 0,2,8");
    CHECK(parse_config(a.canonical()).canonical() == a.canonical());
}

TEST_CASE("smooth random fields are seeded and scaled") {
    const BoxGrid box({Axis::span(0.0, 1.0, 11), Axis::span(-1.0, 1.0, 13)});
    std::mt19937_64 r1(3), r2(3);
    const auto a = smooth_random_field(box, r1, 2.5), b = smooth_random_field(box, r2, 2.5);
    CHECK(a == b);
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    CHECK(m == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("suite on a small grid") {
    const auto report = run_verify_suite(small_config());
    CHECK(report["exact_pass"].get<bool>());
    CHECK(report["empirical_pass"].get<bool>());
    const auto& checks = report["checks"];
    CHECK(checks.size() == 7);

    CHECK(find(checks, "expansion_identity")["max_residual"].get<double>() <= 1e-12);
    CHECK(find(checks, "expansion_identity")["residual_h_zero"].get<double>() == 0.0);
    CHECK(find(checks, "gradient_consistency")["max_fd_rel"].get<double>() <= 1e-6);
    CHECK(find(checks, "gradient_consistency")["max_quartic_fit_rel"].get<double>() <= 1e-9);
    CHECK(find(checks, "bregman_identity")["max_rel_diff"].get<double>() <= 1e-10);
    CHECK(find(checks, "bregman_identity")["gap_identical_pair"].get<double>() == 0.0);

    const auto& conv = find(checks, "convexity");
    CHECK_FALSE(conv["lambda_star"].is_null());
    CHECK(conv["adversarial"]["found_negative_gap"].get<bool>());
    for (const auto& row : conv["scan"])
        CHECK(row["min_margin"].get<double>() == doctest::Approx(row["min_margin_identity"].get<double>()).epsilon(1e-8));

    const auto& car = find(checks, "carleman_estimate");
    CHECK(car["P0_crosscheck_pass"].get<bool>());
    for (const auto& row : car["scan"]) CHECK(row["C_hat"].get<double>() > 0.0);
}

TEST_CASE("Volterra ratio is lambda times the unscaled ratio") {
    const auto ctx = make_verify_context(small_config());
    const auto r = check_volterra_inequality(ctx, {1.0, 2.0, 4.0}, 4, 11);
    for (const auto& row : r["scan"])
        CHECK(row["max_ratio"].get<double>() ==
              doctest::Approx(row["lambda"].get<double>() * row["max_unscaled"].get<double>()).epsilon(1e-14));
    CHECK(r["max_ratio_over_scan"].get<double>() >= r["scan"][0]["max_ratio"].get<double>());
}

TEST_CASE("alpha-only landscape slices are parabolas") {
    auto cfg = small_config();
    cfg.tikhonov.alpha = 1.0;
    const auto ctx = make_verify_context(cfg);
    const auto res = scan_landscape(ctx, 0.0, 2, 9, 1.0, 5);
    CHECK(res.report["pass"].get<bool>());
    CHECK(res.rows.size() == 2 * 9);
    std::ostringstream os;
    write_landscape_csv(os, res.rows);
    CHECK(os.str().rfind("direction_id,s,J_lambda0,J_lambdastar\n", 0) == 0);
    for (int d = 0; d < 2; ++d) {
        const auto& lo = res.rows[static_cast<std::size_t>(d * 9)];
        const auto& hi = res.rows[static_cast<std::size_t>(d * 9 + 8)];
        CHECK(lo.s == -hi.s);
        CHECK(lo.J_lambda0 > 0.0);
    }
}
