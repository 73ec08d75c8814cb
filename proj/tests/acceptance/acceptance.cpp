// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "convexify/config.hpp"
#include "convexify/pipeline.hpp"
#include "convexify/transform.hpp"
#include "convexify/verify.hpp"

using namespace convexify;
namespace fs = std::filesystem;

namespace {

// Frozen at the first green run on the default 41 x 41 grid; 1% slack for platform rounding.
constexpr double kVolterraBaseline = 0.0030000089595226763;
constexpr double kBaselineSlack = 1.01;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& e) {
    const double n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RunConfig config(const std::string& text) { return parse_config(text); }

const Report& check_named(const Report& checks, const std::string& name) {
    for (const auto& c : checks)
        if (c["name"] == name) return c;
    throw std::runtime_error("missing check " + name);
}

Outcome expansion() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ctx = make_verify_context(config(""));
    const auto r = check_expansion_identity(ctx, 20, 1, 1e-12);
    const double sec = seconds_since(t0);
    return {r["pass"].get<bool>() && sec < 5.0,
            fmt("max nodal residual %.3g (tol 1e-12), %.2f s (limit 5 s)", r["max_residual"].get<double>(), sec)};
}

Outcome gradient() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ctx = make_verify_context(config(""));
    const auto r = check_gradient_consistency(ctx, 20, 2, {0, 1, 2, 4, 8, 16});
    const double sec = seconds_since(t0);
    const double fd = r["max_fd_rel"].get<double>(), fit = r["max_quartic_fit_rel"].get<double>();
    return {r["pass"].get<bool>() && fd <= 1e-6 && fit <= 1e-9 && sec < 30.0,
            fmt("fd rel %.3g (tol 1e-6), quartic fit rel %.3g (tol 1e-9), %.2f s (limit 30 s)", fd, fit, sec)};
}

Outcome bregman() {
    const auto ctx = make_verify_context(config(""));
    const auto r = check_bregman_identity(ctx, 20, 3, {0, 1, 2, 4, 8, 16}, 1e-10);
    const double d = r["max_rel_diff"].get<double>();
    return {r["pass"].get<bool>() && d <= 1e-10, fmt("max relative difference %.3g (tol 1e-10)", d)};
}

Outcome convexity() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ctx = make_verify_context(config("tikhonov.alpha = 1e-4"));
    const auto r = check_convexity(ctx, {0, 1, 2, 4, 8, 16}, 100, 4, 200);
    const double sec = seconds_since(t0);
    const bool has_star = !r["lambda_star"].is_null();
    const double min_gap = r["adversarial"]["min_gap"].is_null() ? 0.0 : r["adversarial"]["min_gap"].get<double>();
    return {has_star && r["adversarial"]["found_negative_gap"].get<bool>() && sec < 300.0,
            fmt("lambda* = %g, adversarial min gap at lambda = 0, alpha = 0: %.3g, %.1f s (limit 300 s)",
                has_star ? r["lambda_star"].get<double>() : -1.0, min_gap, sec)};
}

const char* kRecoverySetup =
    "grid.n_x1 = 61\n"
    "grid.n_t = 61\n"
    "model.f = shifted_sin:2\n"  // c_true = sin(x1) / (2 + sin(x1))
    "forward.generator = separable\n"
    "forward.mu = 0\n"
    "carleman.lambda = 2\n"
    "tikhonov.alpha = 1e-8\n"
    "tikhonov.R = 1e7\n"
    "noise.smooth = true\n"
    "noise.degree = 2\n"
    "noise.window = 31\n"
    "noise.seed = 7\n";

Outcome noiseless() {
    auto cfg = config(std::string(kRecoverySetup) + "optimize.start = zero\noptimize.restarts = 5\n");
    const auto problem = make_problem(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = run_inversion(cfg, problem);
    const double sec = seconds_since(t0);
    double worst = 0.0;
    for (const auto& run : out.runs) worst = std::max(worst, run.metrics.rel_L2);
    const bool ok = out.runs.size() == 6 && worst <= 0.05 && out.max_pairwise <= 0.01 && sec < 120.0;
    return {ok, fmt("%g runs: max rel L2 %.3g (tol 0.05), max pairwise %.3g (tol 0.01), %.1f s total (limit 120 s per run)",
                    static_cast<double>(out.runs.size()), worst, out.max_pairwise, sec)};
}

Outcome noise() {
    std::vector<double> err;
    for (double delta : {0.0, 0.01, 0.05}) {
        auto cfg = config(std::string(kRecoverySetup) + "optimize.restarts = 0\nnoise.delta = " + std::to_string(delta) + "\n");
        const auto problem = make_problem(cfg);
        err.push_back(run_inversion(cfg, problem).runs.front().metrics.rel_L2);
    }
    const bool ok = err[2] <= 0.25 && err[0] <= err[1] && err[1] <= err[2];
    return {ok, fmt("rel L2 at delta 0, 0.01, 0.05: %.3g, %.3g, %.3g (tol 0.25 at 0.05, monotone)", err[0], err[1], err[2])};
}

Outcome diagnostics() {
    const auto ctx = make_verify_context(config(""));
    const auto car = check_carleman_estimate(ctx, {2, 4, 8}, 16, 5);
    const auto vol = check_volterra_inequality(ctx, {0, 1, 2, 4, 8, 16}, 20, 6);
    double cmin = INFINITY;
    for (const auto& row : car["scan"]) cmin = std::min(cmin, row["C_hat"].is_null() ? -1.0 : row["C_hat"].get<double>());
    const double ratio = vol["max_ratio_over_scan"].get<double>();
    const bool ok = cmin > 0.0 && ratio <= kVolterraBaseline * kBaselineSlack;
    return {ok, fmt("min C_hat over lambda 2, 4, 8: %.4g (> 0), Volterra max ratio %.6g (baseline %.6g)", cmin, ratio,
                    kVolterraBaseline)};
}

Outcome convergence() {
    std::vector<double> h, residual, recovery;
    for (int n : {21, 41, 81}) {
        const std::string grid = "grid.n_x1 = " + std::to_string(n) + "\ngrid.n_t = " + std::to_string(n) + "\n";
        auto eig = config(grid + "forward.generator = eigenmode\n");
        const auto pe = make_problem(eig);
        const auto r = LtildeOperator(pe.grid, pe.coeffs).apply(pe.w_true);
        double s = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) s += pe.grid.quadrature()[k] * r[k] * r[k];
        residual.push_back(std::sqrt(s));
        h.push_back(pe.grid.h_t());

        auto sep = config(grid +
                          "forward.generator = separable\nforward.mu = 0.5\ncarleman.lambda = 0\n"
                          "tikhonov.alpha = 1e-10\ntikhonov.R = 1e7\noptimize.restarts = 0\noptimize.max_iter = 3000\n");
        const auto ps = make_problem(sep);
        recovery.push_back(run_inversion(sep, ps).runs.front().metrics.rel_L2);
    }
    const double s1 = loglog_slope(h, residual), s2 = loglog_slope(h, recovery);
    const bool ok = s1 >= 1.5 && s1 <= 2.5 && s2 >= 1.5 && s2 <= 2.5;
    return {ok, fmt("slopes over n = 21, 41, 81: residual %.3f, recovery %.3f (range [1.5, 2.5])", s1, s2)};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path root = fs::path(CONVEXIFY_ACCEPTANCE_DIR) / "determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "run.cfg";
    std::ofstream(cfg) << "grid.n_x1 = 21\ngrid.n_t = 21\nforward.mu = 0.5\ncarleman.lambda = 2\ntikhonov.R = 1e7\n"
                          "tikhonov.alpha = 1e-8\nnoise.delta = 0.01\nnoise.seed = 3\noptimize.restarts = 1\n"
                          "verify.trials = 4\nverify.pairs = 10\nverify.bank = 4\nverify.adversarial_trials = 20\n"
                          "sweep.lambdas = 0,2\n";
    int compared = 0;
    for (const std::string sub : {"forward", "invert", "verify", "sweep", "landscape"}) {
        for (const char* rep : {"a", "b"}) {
            const std::string cmd = std::string("\"") + CONVEXIFY_CLI + "\" " + sub + " --config \"" + cfg.string() +
                                    "\" --out \"" + (root / sub / rep).string() + "\" > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) return {false, sub + " exited nonzero"};
        }
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(root / sub / "a"))
            if (e.path().filename() != "run.log") files.push_back(e.path().filename());
        if (files.empty()) return {false, sub + " wrote no artifacts"};
        for (const auto& f : files) {
            if (read_file(root / sub / "a" / f) != read_file(root / sub / "b" / f))
                return {false, sub + ": " + f.string() + " differs between reruns"};
            ++compared;
        }
    }
    return {true, std::to_string(compared) + " artifacts of 5 subcommands byte-identical on rerun"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"expansion identity", expansion},    {"gradient exactness", gradient},
        {"Bregman identity", bregman},        {"convexity scan", convexity},
        {"noiseless recovery", noiseless},    {"noise robustness", noise},
        {"Carleman and Volterra", diagnostics}, {"grid convergence", convergence},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
